"""Orthotropic ply material and its transformed constitutive matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .._kernels_numpy import plane_rotation_3, shear_rotation_2

__all__ = ["MaterialProps", "ply_constitutive"]


@dataclass(frozen=True)
class MaterialProps:
    """Orthotropic ply constants (moduli in the units of the input table)."""

    E_L: float
    E_T: float
    nu_LT: float
    G_LT: float
    G_TN: float
    G_LN: float

    def __post_init__(self):
        for name in ("E_L", "E_T", "G_LT", "G_TN", "G_LN"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be positive")
        if 1.0 - self.nu_LT * self.nu_TL <= 0.0:
            raise DomainError("1 - nu_LT*nu_TL must be positive for plane stress")

    @property
    def nu_TL(self) -> float:
        return self.nu_LT * self.E_T / self.E_L

    def q_constants(self):
        d = 1.0 - self.nu_LT * self.nu_TL
        q11 = self.E_L / d
        q22 = self.E_T / d
        q12 = self.nu_LT * self.E_T / d
        return q11, q12, q22, self.G_LT, self.G_TN, self.G_LN

    def d_membrane(self) -> np.ndarray:
        """Plane-stress reduced stiffness (also used for bending)."""
        q11, q12, q22, q66, _, _ = self.q_constants()
        return np.array([[q11, q12, 0.0], [q12, q22, 0.0], [0.0, 0.0, q66]])

    def d_shear(self) -> np.ndarray:
        """Transverse shear stiffness on [gamma_yz, gamma_xz]."""
        _, _, _, _, q44, q55 = self.q_constants()
        return np.array([[q44, 0.0], [0.0, q55]])

    def scaled(self, factor: float) -> "MaterialProps":
        return MaterialProps(self.E_L * factor, self.E_T * factor, self.nu_LT,
                             self.G_LT * factor, self.G_TN * factor,
                             self.G_LN * factor)


def ply_constitutive(mat: MaterialProps, theta_local: float):
    """Transformed (membrane, bending, shear) stiffness at a local ply angle."""
    c = np.cos(theta_local)
    s = np.sin(theta_local)
    tm = plane_rotation_3(c, s)
    dm = mat.d_membrane()
    dbar = tm.T @ dm @ tm
    ts = shear_rotation_2(c, s)
    sbar = ts.T @ mat.d_shear() @ ts
    return dbar, dbar.copy(), sbar
