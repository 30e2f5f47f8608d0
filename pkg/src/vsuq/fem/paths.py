"""Fiber path functions.

A path is a polynomial level-set z(x, y); fibers follow its level curves, so
the global fiber direction is the tangent angle atan2(-dz/dx, dz/dy),
normalized to (-pi/2, pi/2] (orientations are modulo pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, MeshError

__all__ = ["PathFunction", "fiber_angle", "path_gradient"]

_COEFF_COUNT = {"quadratic": 4, "cubic": 8}


@dataclass(frozen=True)
class PathFunction:
    """Polynomial fiber path: kind 'quadratic' (a1..a4) or 'cubic' (a1..a8).

    quadratic: z = x + a1*y + a2*x*y + a3*x^2 + a4*y^2
    cubic:     z = x + a1*y + a2*x*y + a3*x^2 + a4*y^2
                   + a5*x^2*y + a6*x*y^2 + a7*x^3 + a8*y^3
    """

    kind: str
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _COEFF_COUNT:
            raise ConfigError(f"unknown path kind {self.kind!r}")
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != _COEFF_COUNT[self.kind]:
            raise ConfigError(
                f"{self.kind} path needs {_COEFF_COUNT[self.kind]} coefficients, "
                f"got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)

    def value(self, x, y):
        a = self.coefficients
        z = x + a[0] * y + a[1] * x * y + a[2] * x * x + a[3] * y * y
        if self.kind == "cubic":
            z = z + (a[4] * x * x * y + a[5] * x * y * y
                     + a[6] * x**3 + a[7] * y**3)
        return z


def path_gradient(path: PathFunction, x, y):
    """Analytic (dz/dx, dz/dy) of the path polynomial."""
    a = path.coefficients
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    gx = 1.0 + a[1] * y + 2.0 * a[2] * x
    gy = a[0] + a[1] * x + 2.0 * a[3] * y
    if path.kind == "cubic":
        gx = gx + 2.0 * a[4] * x * y + a[5] * y * y + 3.0 * a[6] * x * x
        gy = gy + a[4] * x * x + 2.0 * a[5] * x * y + 3.0 * a[7] * y * y
    return gx, gy


def fiber_angle(path: PathFunction, x, y):
    """Global fiber direction (radians in (-pi/2, pi/2]) at a point."""
    gx, gy = path_gradient(path, x, y)
    norm = np.hypot(gx, gy)
    if np.any(norm < 1e-12):
        raise MeshError(
            f"degenerate fiber path: vanishing gradient at a requested point "
            f"(|grad| < 1e-12 for {path.kind} path)")
    ang = np.arctan2(-gx, gy)
    ang = np.where(ang <= -math.pi / 2.0, ang + math.pi, ang)
    ang = np.where(ang > math.pi / 2.0, ang - math.pi, ang)
    return ang if np.ndim(ang) else float(ang)
