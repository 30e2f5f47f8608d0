"""Structured quad meshes: rectangular strips and an O-grid around a hole."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import MeshError

__all__ = ["Mesh", "rect_mesh", "hole_plate_mesh"]

_GP = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class Mesh:
    """Planar 4-node quad mesh with counterclockwise connectivity."""

    nodes: np.ndarray      # (nn, 2)
    elements: np.ndarray   # (ne, 4) int

    def __post_init__(self):
        self.validate()

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def bounds(self):
        return (self.nodes[:, 0].min(), self.nodes[:, 0].max(),
                self.nodes[:, 1].min(), self.nodes[:, 1].max())

    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def nodes_on_line(self, axis: int, value: float, tol: float = 1e-9):
        return np.where(np.abs(self.nodes[:, axis] - value) < tol)[0]

    def validate(self) -> None:
        """Positive Jacobian at every 2x2 Gauss point of every element."""
        xe = self.nodes[self.elements]
        for xi, eta in ((-_GP, -_GP), (_GP, -_GP), (_GP, _GP), (-_GP, _GP)):
            dxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
            deta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
            j00 = xe[:, :, 0] @ dxi
            j01 = xe[:, :, 1] @ dxi
            j10 = xe[:, :, 0] @ deta
            j11 = xe[:, :, 1] @ deta
            det = j00 * j11 - j01 * j10
            if np.any(det <= 0.0):
                bad = int(np.argmin(det))
                raise MeshError(
                    f"non-positive Jacobian in element {bad} "
                    f"(det={float(det[bad]):.3e})")


def rect_mesh(length: float, height: float, nx: int, ny: int) -> Mesh:
    """Structured nx-by-ny grid on [0, length] x [0, height]."""
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be >= 1")
    xs = np.linspace(0.0, length, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    xx, yy = np.meshgrid(xs, ys)
    nodes = np.column_stack([xx.ravel(), yy.ravel()])
    elems = []
    for iy in range(ny):
        for ix in range(nx):
            n0 = iy * (nx + 1) + ix
            elems.append([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return Mesh(nodes, np.asarray(elems, dtype=np.int64))


def hole_plate_mesh(width: float, height: float, hole_radius: float,
                    rings: int, segments: int) -> Mesh:
    """O-grid between a centered circular hole and a rectangular boundary.

    Rays from the hole circle to the rectangle perimeter at `segments` equally
    spaced angles are subdivided into `rings` quads.  The rectangle corners are
    chamfered by the outer node polygon at the resolution of `segments`.
    """
    if rings < 1 or segments < 8:
        raise MeshError("need rings >= 1 and segments >= 8")
    if segments % 4 != 0:
        raise MeshError("segments must be a multiple of 4 for corner symmetry")
    cx, cy = 0.5 * width, 0.5 * height
    if not (0.0 < hole_radius < min(cx, cy)):
        raise MeshError("hole radius must fit inside the plate")
    phi = 2.0 * math.pi * (np.arange(segments) + 0.5) / segments
    cphi = np.cos(phi)
    sphi = np.sin(phi)
    with np.errstate(divide="ignore"):
        t_outer = np.minimum(np.where(np.abs(cphi) > 1e-15, cx / np.abs(cphi), np.inf),
                             np.where(np.abs(sphi) > 1e-15, cy / np.abs(sphi), np.inf))
    nodes = np.empty(((rings + 1) * segments, 2))
    for i in range(rings + 1):
        f = i / rings
        t = hole_radius + f * (t_outer - hole_radius)
        nodes[i * segments:(i + 1) * segments, 0] = cx + t * cphi
        nodes[i * segments:(i + 1) * segments, 1] = cy + t * sphi
    # snap the outer ring onto the exact rectangle
    outer = slice(rings * segments, (rings + 1) * segments)
    ox = nodes[outer, 0]
    oy = nodes[outer, 1]
    ox[np.abs(ox) < 1e-9] = 0.0
    ox[np.abs(ox - width) < 1e-9] = width
    oy[np.abs(oy) < 1e-9] = 0.0
    oy[np.abs(oy - height) < 1e-9] = height
    elems = []
    for i in range(rings):
        for j in range(segments):
            jn = (j + 1) % segments
            elems.append([i * segments + j, (i + 1) * segments + j,
                          (i + 1) * segments + jn, i * segments + jn])
    return Mesh(nodes, np.asarray(elems, dtype=np.int64))
