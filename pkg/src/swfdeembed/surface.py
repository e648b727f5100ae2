"""Closed box surfaces with quadrature weights, and field traces sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import DomainError

# Face order: -x, +x, -y, +y, -z, +z
FACE_AXES = (0, 0, 1, 1, 2, 2)
FACE_SIGNS = (-1, 1, -1, 1, -1, 1)


def _cells_tuple(cells) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
    if np.isscalar(cells):
        c = int(cells)
        return ((c, c), (c, c), (c, c))
    cells = tuple(cells)
    if len(cells) == 2 and all(np.isscalar(c) for c in cells):
        a, b = int(cells[0]), int(cells[1])
        return ((a, b), (a, b), (a, b))
    if len(cells) != 3:
        raise DomainError(f"cells_per_face must be an int, a pair or three pairs, got {cells!r}")
    return tuple((int(a), int(b)) for a, b in cells)  # type: ignore[return-value]


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box.

    ``cells_per_face[a]`` is the (cells along first, cells along second) grid
    of the two faces normal to axis ``a``, the in-plane axes taken in
    increasing order.  ``nodes_per_cell`` selects the per-cell rule: 1 is the
    midpoint rule, q > 1 a q x q tensor Gauss-Legendre rule inside each cell.
    """

    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    cells_per_face: Any = 16
    nodes_per_cell: int = 1

    def __post_init__(self):
        center = tuple(float(v) for v in self.center)
        half = tuple(float(v) for v in self.half_extents)
        if len(center) != 3 or len(half) != 3:
            raise DomainError("center and half_extents need three components")
        if not all(h > 0 and np.isfinite(h) for h in half):
            raise DomainError(f"half extents must be positive, got {half}")
        cells = _cells_tuple(self.cells_per_face)
        if any(c < 2 for pair in cells for c in pair):
            raise DomainError(f"every face needs at least 2 cells per direction, got {cells}")
        if int(self.nodes_per_cell) < 1:
            raise DomainError("nodes_per_cell must be >= 1")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "half_extents", half)
        object.__setattr__(self, "cells_per_face", cells)
        object.__setattr__(self, "nodes_per_cell", int(self.nodes_per_cell))

    @classmethod
    def cube(cls, side: float, cells: int, center=(0.0, 0.0, 0.0), nodes_per_cell: int = 1) -> "BoxSpec":
        h = side / 2.0
        return cls(tuple(center), (h, h, h), cells, nodes_per_cell)

    @property
    def area(self) -> float:
        a, b, c = (2 * h for h in self.half_extents)
        return 2 * (a * b + b * c + a * c)

    def contains(self, point, margin: float = 0.0) -> bool:
        """True if ``point`` lies strictly inside the box, at least ``margin`` from every face."""
        d = np.abs(np.asarray(point, float) - np.asarray(self.center))
        return bool(np.all(d < np.asarray(self.half_extents) - margin))

    def on_surface(self, point, tol: float = 1e-12) -> bool:
        d = np.abs(np.asarray(point, float) - np.asarray(self.center))
        h = np.asarray(self.half_extents)
        scale = tol * float(h.max())
        return bool(np.all(d <= h + scale) and np.any(np.abs(d - h) <= scale))

    def max_radius(self, origin=None) -> float:
        """Largest distance from ``origin`` (default: center) to a box corner."""
        origin = np.asarray(self.center if origin is None else origin, float)
        c, h = np.asarray(self.center), np.asarray(self.half_extents)
        far = np.abs(origin - c) + h
        return float(np.linalg.norm(far))


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Quadrature samples of a closed surface: positions, outward normals, weights (m^2)."""

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    closed: bool = True
    box: Optional[BoxSpec] = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        nrm = np.ascontiguousarray(self.normals, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or nrm.shape != pts.shape or w.shape != (len(pts),):
            raise DomainError("points/normals must be (P, 3) and weights (P,)")
        if np.any(w <= 0) or not np.all(np.isfinite(pts)):
            raise DomainError("weights must be positive and positions finite")
        if not np.allclose(np.linalg.norm(nrm, axis=1), 1.0, rtol=0, atol=1e-12):
            raise DomainError("normals must have unit length")
        for name, arr in (("points", pts), ("normals", nrm), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    def normal_flux(self) -> np.ndarray:
        """Quadrature of the normal vector over the surface; zero for a closed surface."""
        return np.sum(self.normals * self.weights[:, None], axis=0)

    def tangents(self) -> tuple[np.ndarray, np.ndarray]:
        """Two orthonormal tangent fields (t1, t2) with t1 x t2 = n."""
        n = self.normals
        helper = np.zeros_like(n)
        pick = np.argmin(np.abs(n), axis=1)
        helper[np.arange(len(n)), pick] = 1.0
        t1 = np.cross(helper, n)
        t1 /= np.linalg.norm(t1, axis=1)[:, None]
        t2 = np.cross(n, t1)
        return t1, t2

    def solid_angle(self, point) -> float:
        """Solid angle subtended by the surface at ``point``: 4 pi inside, 0 outside."""
        rel = self.points - np.asarray(point, float)
        r3 = np.linalg.norm(rel, axis=1) ** 3
        return float(np.sum(self.weights * np.einsum("pi,pi->p", rel, self.normals) / r3))

    def encloses(self, point) -> bool:
        if self.box is not None:
            return self.box.contains(point)
        return self.solid_angle(point) > 2 * np.pi


def _face_nodes(n_cells: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] for ``n_cells`` equal cells with q Gauss points each."""
    h = 2.0 / n_cells
    centers = -1.0 + h * (np.arange(n_cells) + 0.5)
    if q == 1:
        return centers, np.full(n_cells, h)
    g, gw = np.polynomial.legendre.leggauss(q)
    nodes = (centers[:, None] + 0.5 * h * g[None, :]).ravel()
    weights = np.tile(0.5 * h * gw, n_cells)
    return nodes, weights


def build_box_mesh(box: BoxSpec) -> SurfaceMesh:
    """Six-face tensor-product mesh of the box; no sample lies on an edge or corner."""
    center = np.asarray(box.center)
    half = np.asarray(box.half_extents)
    pts, nrms, wts = [], [], []
    for axis, sign in zip(FACE_AXES, FACE_SIGNS):
        u_ax, v_ax = [a for a in range(3) if a != axis]
        nu, nv = box.cells_per_face[axis]
        tu, wu = _face_nodes(nu, box.nodes_per_cell)
        tv, wv = _face_nodes(nv, box.nodes_per_cell)
        U, V = np.meshgrid(tu, tv, indexing="ij")
        p = np.empty((U.size, 3))
        p[:, axis] = center[axis] + sign * half[axis]
        p[:, u_ax] = center[u_ax] + half[u_ax] * U.ravel()
        p[:, v_ax] = center[v_ax] + half[v_ax] * V.ravel()
        nrm = np.zeros_like(p)
        nrm[:, axis] = sign
        pts.append(p)
        nrms.append(nrm)
        wts.append(np.outer(wu, wv).ravel() * half[u_ax] * half[v_ax])
    return SurfaceMesh(np.concatenate(pts), np.concatenate(nrms), np.concatenate(wts), True, box)


@dataclass(frozen=True, eq=False)
class FieldTrace:
    """Colocated complex E (V/m) and H (A/m) phasors on a surface mesh at one frequency."""

    mesh: SurfaceMesh
    E: np.ndarray
    H: np.ndarray
    frequency: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        E = np.ascontiguousarray(self.E, dtype=complex)
        H = np.ascontiguousarray(self.H, dtype=complex)
        if E.shape != (len(self.mesh), 3) or H.shape != E.shape:
            raise DomainError(
                f"E and H must have shape ({len(self.mesh)}, 3), got {E.shape} and {H.shape}"
            )
        if not (np.all(np.isfinite(E)) and np.all(np.isfinite(H))):
            raise DomainError("field trace contains non-finite values")
        if not self.frequency > 0:
            raise DomainError("frequency must be positive")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "H", H)

    def scaled(self, alpha: complex) -> "FieldTrace":
        return FieldTrace(self.mesh, alpha * self.E, alpha * self.H, self.frequency, dict(self.metadata))

    def __add__(self, other: "FieldTrace") -> "FieldTrace":
        if other.mesh is not self.mesh or other.frequency != self.frequency:
            raise DomainError("traces must share mesh and frequency")
        return FieldTrace(self.mesh, self.E + other.E, self.H + other.H, self.frequency)
