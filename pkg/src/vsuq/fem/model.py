"""Laminate plate model: ply stack, boundary conditions, loads, assembly
and the full linear solve.

Each node carries 5 DOF [u, v, w, theta_x, theta_y].  Element stiffness uses
2x2 Gauss integration for the membrane and bending blocks and single-point
integration for transverse shear (locking-safe for thin plates).  The fiber
angle of every ply is evaluated once per element at the centroid, on domain
coordinates normalized to [0,1]^2 by default; per-ply deviations shift those
angles uniformly over the plate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..backend import kernels
from ..errors import (
    BoundaryConditionError,
    ConfigError,
    DeviationError,
    SolveError,
)
from .materials import MaterialProps
from .mesh import Mesh, hole_plate_mesh, rect_mesh
from .paths import PathFunction, fiber_angle

__all__ = ["PlyStack", "LaminateModel", "model_from_config"]

NDOF_PER_NODE = 5


@dataclass(frozen=True)
class PlyStack:
    """Ply thicknesses and fiber paths, stacked about the mid-plane."""

    thicknesses: tuple[float, ...]
    paths: tuple[PathFunction, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.thicknesses)
        if len(t) != len(self.paths) or not t:
            raise ConfigError("one path per ply required")
        if any(x <= 0.0 for x in t):
            raise ConfigError("ply thicknesses must be positive")
        object.__setattr__(self, "thicknesses", t)

    @property
    def n_plies(self) -> int:
        return len(self.thicknesses)

    @property
    def total_thickness(self) -> float:
        return sum(self.thicknesses)

    def z_coords(self) -> np.ndarray:
        """Interface coordinates z_0..z_n with the origin at the mid-plane."""
        z = np.concatenate([[0.0], np.cumsum(self.thicknesses)])
        return z - 0.5 * self.total_thickness

    def bending_weights(self) -> np.ndarray:
        z = self.z_coords()
        return (z[1:] ** 3 - z[:-1] ** 3) / 3.0

    @property
    def symmetric(self) -> bool:
        t = self.thicknesses
        return t == t[::-1]


class LaminateModel:
    """Mesh + ply stack + material + constraints + loads, owning assembly."""

    def __init__(self, mesh: Mesh, plies: PlyStack, material: MaterialProps,
                 *, theta_t: float = 0.0, deviation_cap_deg: float = 15.0,
                 normalize_path_coords: bool = True):
        self.mesh = mesh
        self.plies = plies
        self.material = material
        self.theta_t = float(theta_t)
        self.deviation_cap = math.radians(float(deviation_cap_deg))
        self.n_dof = NDOF_PER_NODE * mesh.n_nodes
        self.load = np.zeros(self.n_dof)
        self._fixed: dict[int, float] = {}
        # nominal local ply angles at element centroids
        cent = mesh.centroids()
        if normalize_path_coords:
            x0, x1, y0, y1 = mesh.bounds
            cx = (cent[:, 0] - x0) / (x1 - x0)
            cy = (cent[:, 1] - y0) / (y1 - y0)
        else:
            cx, cy = cent[:, 0], cent[:, 1]
        self.theta_nominal = np.column_stack(
            [fiber_angle(p, cx, cy) - self.theta_t for p in plies.paths])
        self._xe = mesh.nodes[mesh.elements]
        edof = (NDOF_PER_NODE * mesh.elements[:, :, None]
                + np.arange(NDOF_PER_NODE)[None, None, :]).reshape(-1, 20)
        self._rows = np.repeat(edof, 20, axis=1).ravel()
        self._cols = np.tile(edof, (1, 20)).ravel()
        self._free_cache = None

    # -- constraints and loads ------------------------------------------------

    def clamp_nodes(self, node_ids) -> None:
        for n in np.atleast_1d(node_ids):
            for k in range(NDOF_PER_NODE):
                self._fixed[NDOF_PER_NODE * int(n) + k] = 0.0
        self._free_cache = None

    def prescribe(self, dof: int, value: float) -> None:
        self._fixed[int(dof)] = float(value)
        self._free_cache = None

    def clamp_edge(self, edge: str) -> None:
        x0, x1, y0, y1 = self.mesh.bounds
        sel = {"left": (0, x0), "right": (0, x1), "bottom": (1, y0), "top": (1, y1)}
        if edge == "both_ends":
            self.clamp_nodes(self.mesh.nodes_on_line(0, x0))
            self.clamp_nodes(self.mesh.nodes_on_line(0, x1))
            return
        if edge not in sel:
            raise ConfigError(f"unknown edge {edge!r}")
        axis, value = sel[edge]
        ids = self.mesh.nodes_on_line(axis, value)
        if ids.size == 0:
            raise ConfigError(f"no nodes found on edge {edge!r}")
        self.clamp_nodes(ids)

    def add_edge_traction(self, edge: str, direction: str, value: float) -> None:
        """Uniform line traction on a boundary edge, lumped consistently."""
        x0, x1, y0, y1 = self.mesh.bounds
        sel = {"left": (0, x0), "right": (0, x1), "bottom": (1, y0), "top": (1, y1)}
        if edge not in sel:
            raise ConfigError(f"unknown edge {edge!r}")
        axis, coord = sel[edge]
        ids = self.mesh.nodes_on_line(axis, coord)
        if ids.size < 2:
            raise ConfigError(f"edge {edge!r} has fewer than two nodes")
        other = 1 - axis
        order = np.argsort(self.mesh.nodes[ids, other])
        ids = ids[order]
        pos = self.mesh.nodes[ids, other]
        dof_off = {"x": 0, "y": 1, "z": 2}[direction]
        for a, b, pa, pb in zip(ids[:-1], ids[1:], pos[:-1], pos[1:]):
            half = 0.5 * value * (pb - pa)
            self.load[NDOF_PER_NODE * int(a) + dof_off] += half
            self.load[NDOF_PER_NODE * int(b) + dof_off] += half

    def add_point_load(self, x: float, y: float, direction: str,
                       value: float) -> None:
        """Concentrated force at the node nearest (x, y)."""
        d2 = np.sum((self.mesh.nodes - np.array([x, y])) ** 2, axis=1)
        node = int(np.argmin(d2))
        dof_off = {"x": 0, "y": 1, "z": 2}[direction]
        self.load[NDOF_PER_NODE * node + dof_off] += value

    # -- stiffness -------------------------------------------------------------

    def _check_deviation(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=np.float64)
        if eps.ndim == 0:
            eps = np.full(self.plies.n_plies, float(eps))
        if eps.shape != (self.plies.n_plies,):
            raise DeviationError(
                f"deviation vector must have length {self.plies.n_plies}")
        if not np.all(np.isfinite(eps)):
            raise DeviationError("deviation vector must be finite")
        if np.any(np.abs(eps) > self.deviation_cap):
            raise DeviationError(
                f"per-ply deviation exceeds the cap "
                f"{math.degrees(self.deviation_cap):.3g} deg")
        return eps

    def element_matrices(self, eps=0.0) -> np.ndarray:
        """(ne, 20, 20) element stiffness batch at per-ply deviations eps."""
        eps = self._check_deviation(eps)
        theta_hat = self.theta_nominal + eps[None, :]
        tvec = np.asarray(self.plies.thicknesses)
        z3w = self.plies.bending_weights()
        am, ab, ash = kernels.laminate_abd(theta_hat, tvec, z3w,
                                           self.material.d_membrane(),
                                           self.material.d_shear())
        return kernels.element_stiffness_batch(self._xe, am, ab, ash)

    def element_stiffness(self, index: int, eps=0.0) -> np.ndarray:
        """Single 20x20 element matrix (for verification)."""
        eps = self._check_deviation(eps)
        theta_hat = self.theta_nominal[index:index + 1] + eps[None, :]
        tvec = np.asarray(self.plies.thicknesses)
        z3w = self.plies.bending_weights()
        am, ab, ash = kernels.laminate_abd(theta_hat, tvec, z3w,
                                           self.material.d_membrane(),
                                           self.material.d_shear())
        return kernels.element_stiffness_batch(
            self._xe[index:index + 1], am, ab, ash)[0]

    def assemble(self, eps=0.0, element_data: np.ndarray | None = None):
        """Global sparse stiffness (CSC, symmetric, unconstrained)."""
        ke = self.element_matrices(eps) if element_data is None else element_data
        k = sp.coo_matrix((ke.ravel(), (self._rows, self._cols)),
                          shape=(self.n_dof, self.n_dof)).tocsc()
        return k

    # -- constrained solve -------------------------------------------------------

    def partition(self):
        if self._free_cache is None:
            fixed = np.array(sorted(self._fixed), dtype=np.int64)
            mask = np.ones(self.n_dof, dtype=bool)
            mask[fixed] = False
            free = np.where(mask)[0]
            vals = np.array([self._fixed[d] for d in fixed])
            self._free_cache = (free, fixed, vals)
        return self._free_cache

    def reduce(self, k_full):
        """Restrict K to free DOFs and build the constrained RHS."""
        free, fixed, vals = self.partition()
        kcsr = k_full.tocsr()
        kff = kcsr[free][:, free].tocsc()
        rhs = self.load[free].copy()
        if fixed.size and np.any(vals != 0.0):
            rhs -= kcsr[free][:, fixed] @ vals
        return kff, rhs

    def expand(self, r_free) -> np.ndarray:
        free, fixed, vals = self.partition()
        r = np.zeros(self.n_dof)
        r[free] = r_free
        if fixed.size:
            r[fixed] = vals
        return r

    def solve_full(self, eps=0.0) -> np.ndarray:
        """Direct factorize-and-solve of the constrained system."""
        k = self.assemble(eps)
        kff, rhs = self.reduce(k)
        free, _, _ = self.partition()
        if free.size == 0:
            raise BoundaryConditionError("every DOF is constrained")
        try:
            lu = splu(kff)
            r_free = lu.solve(rhs)
        except RuntimeError as exc:
            raise BoundaryConditionError(
                f"constrained stiffness is singular ({exc}); check boundary "
                f"conditions") from None
        resid = np.linalg.norm(kff @ r_free - rhs)
        scale = np.linalg.norm(rhs)
        if scale > 0.0 and resid / scale > 1e-10:
            raise SolveError(
                f"solver residual {resid / scale:.3e} exceeds 1e-10; "
                f"condition number is likely extreme")
        return self.expand(r_free)

    def responses(self, r: np.ndarray) -> np.ndarray:
        """Maximum nodal displacement magnitude per in-plane direction."""
        u = r[0::NDOF_PER_NODE]
        v = r[1::NDOF_PER_NODE]
        return np.array([np.max(np.abs(u)), np.max(np.abs(v))])

    def displacement_table(self, r: np.ndarray) -> np.ndarray:
        """Columns x, y, u, v, w, theta_x, theta_y for CSV export."""
        out = np.empty((self.mesh.n_nodes, 7))
        out[:, 0:2] = self.mesh.nodes
        out[:, 2:] = r.reshape(-1, NDOF_PER_NODE)
        return out


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def model_from_config(cfg: dict) -> LaminateModel:
    """Build a model from the JSON configuration mapping."""
    geo = cfg.get("geometry", {})
    kind = geo.get("kind")
    if kind == "hole_plate":
        mesh = hole_plate_mesh(geo.get("width", 1.0), geo.get("height", 1.0),
                               geo.get("hole_radius", 0.25),
                               geo.get("rings", 10), geo.get("segments", 40))
    elif kind == "strip":
        mesh = rect_mesh(geo.get("length", 1.0), geo.get("height", 0.1),
                         geo.get("nx", 40), geo.get("ny", 6))
    else:
        raise ConfigError(f"unknown geometry kind {kind!r}")
    mat_cfg = cfg.get("material")
    if mat_cfg is None:
        raise ConfigError("missing material section")
    material = MaterialProps(
        E_L=mat_cfg["E_L"], E_T=mat_cfg["E_T"], nu_LT=mat_cfg["nu_LT"],
        G_LT=mat_cfg["G_LT"], G_TN=mat_cfg["G_TN"], G_LN=mat_cfg["G_LN"],
    ).scaled(mat_cfg.get("scale", 1.0))
    plies_cfg = cfg.get("plies")
    if not plies_cfg:
        raise ConfigError("missing plies section")
    paths = tuple(PathFunction(p["path"]["kind"], p["path"]["coefficients"])
                  for p in plies_cfg)
    plies = PlyStack(tuple(p["thickness"] for p in plies_cfg), paths)
    model = LaminateModel(
        mesh, plies, material,
        theta_t=cfg.get("theta_T", 0.0),
        deviation_cap_deg=cfg.get("deviation_cap_deg", 15.0),
        normalize_path_coords=cfg.get("normalize_path_coords", True),
    )
    for bc in cfg.get("bcs", []):
        model.clamp_edge(bc["edge"])
    for load in cfg.get("loads", []):
        if load["kind"] == "edge_traction":
            model.add_edge_traction(load["edge"], load["direction"], load["value"])
        elif load["kind"] == "point":
            model.add_point_load(load["at"][0], load["at"][1],
                                 load["direction"], load["value"])
        else:
            raise ConfigError(f"unknown load kind {load['kind']!r}")
    return model
