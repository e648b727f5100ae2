"""Analytic ground-truth fields: Hertzian dipoles and SWF synthesis.

Convention e^{+jwt}: curl E = -j k eta H - M,  curl H = j (k / eta) E + J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decompose import CoefficientSet
from .errors import DomainError, SingularityError
from .surface import BoxSpec, FieldTrace, SurfaceMesh
from .swf import Medium, swf_cartesian


@dataclass(frozen=True)
class DipoleSource:
    """Point dipole; ``moment`` is I*l (A m) for electric, K*l (V m) for magnetic."""

    position: tuple[float, float, float]
    moment: tuple[complex, complex, complex]
    kind: str = "electric"

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        mom = tuple(complex(v) for v in self.moment)
        if len(pos) != 3 or len(mom) != 3:
            raise DomainError("position and moment need three components")
        if self.kind not in ("electric", "magnetic"):
            raise DomainError(f"dipole kind must be 'electric' or 'magnetic', got {self.kind!r}")
        if not any(mom):
            raise DomainError("dipole moment must be nonzero")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "moment", mom)


@dataclass(frozen=True)
class Scene:
    sources: tuple[DipoleSource, ...]
    medium: Medium
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))

    def classify(self, box: BoxSpec) -> list[str]:
        """'interior' or 'exterior' per source relative to ``box``."""
        return ["interior" if box.contains(s.position) else "exterior" for s in self.sources]


def _dipole_arrays(points, position, moment, k: float, eta: float, kind: str):
    """Vectorized dipole fields; ``moment`` may be ``(3,)`` or ``(P_src, 3)`` paired with ``position``."""
    rel = np.asarray(points, float)[..., :] - np.asarray(position, float)
    R = np.linalg.norm(rel, axis=-1)
    if np.any(R == 0):
        raise SingularityError("dipole field evaluated at the source point")
    u = rel / R[..., None]
    p = np.broadcast_to(np.asarray(moment, complex), rel.shape)
    G = np.exp(-1j * k * R) / (4 * np.pi * R)
    up = np.einsum("...i,...i->...", u, p)[..., None]
    near = (3 * u * up - p) * (1 / R**2 + 1j * k / R)[..., None]
    transverse = k * k * (p - u * up)
    curl_part = ((1j * k + 1 / R) * G)[..., None] * np.cross(p, u)
    cross_part = (G / (1j * k))[..., None] * (transverse + near)
    if kind == "electric":
        return eta * cross_part, curl_part
    # duality: E_e -> H_m with eta -> 1/eta, H_e -> -E_m
    return -curl_part, cross_part / eta


def dipole_fields(src: DipoleSource, med: Medium, p):
    """Exact E (V/m) and H (A/m) of a dipole at point(s) ``p`` (shape ``(..., 3)``)."""
    return _dipole_arrays(p, src.position, src.moment, med.k, med.eta, src.kind)


def dipole_farfield(src: DipoleSource, med: Medium, theta, phi, origin=(0.0, 0.0, 0.0)):
    """r-normalized far field ``lim kr e^{jkr} E`` as (E_theta, E_phi) about ``origin``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    rhat = np.stack([st * cp, st * sp, ct], axis=-1)
    th = np.stack([ct * cp, ct * sp, -st], axis=-1)
    ph = np.stack([-sp, cp, np.zeros_like(st)], axis=-1)
    m = np.asarray(src.moment, complex)
    shift = np.exp(1j * med.k * rhat @ (np.asarray(src.position) - np.asarray(origin, float)))
    k, eta = med.k, med.eta
    if src.kind == "electric":
        # E ~ -j eta k m_perp e^{-jkr} / (4 pi r)
        vec = (-1j * eta * k * k / (4 * np.pi)) * (m - rhat * (rhat @ m)[..., None])
    else:
        # E ~ -j k (m x r_hat) e^{-jkr} / (4 pi r)
        vec = (-1j * k * k / (4 * np.pi)) * np.cross(m, rhat)
    vec = vec * shift[..., None]
    return np.einsum("...i,...i->...", vec, th), np.einsum("...i,...i->...", vec, ph)


def dipole_radiated_power(src: DipoleSource, med: Medium) -> float:
    m2 = float(np.sum(np.abs(np.asarray(src.moment)) ** 2))
    if src.kind == "electric":
        return med.eta * med.k**2 * m2 / (12 * np.pi)
    return med.k**2 * m2 / (12 * np.pi * med.eta)


def scene_fields(scene: Scene, points):
    points = np.asarray(points, float)
    E = np.zeros(points.shape, complex)
    H = np.zeros(points.shape, complex)
    for src in scene.sources:
        e, h = dipole_fields(src, scene.medium, points)
        E += e
        H += h
    return E, H


def synthesize_from_coefficients(b: CoefficientSet, a: CoefficientSet, med: Medium, points, origin=(0.0, 0.0, 0.0)):
    """E = k sqrt(eta) sum_j (b_j F_j^(4) + a_j F_j^(3)) and H = (curl E) / (-j k eta).

    The sum is evaluated as ``2 a F^(1) + (b - a) F^(4)`` so a purely regular
    field (b = a) never touches the singular functions.
    """
    if b.modeset != a.modeset:
        raise DomainError("b and a must share a mode set")
    ms = b.modeset
    pts = np.atleast_2d(np.asarray(points, float))
    k, eta = med.k, med.eta
    dual = ms.dual_permutation
    E = np.zeros(pts.shape, complex)
    H = np.zeros(pts.shape, complex)
    for c, coef in ((1, 2 * a.values), (4, b.values - a.values)):
        if not np.any(coef):
            continue
        F = swf_cartesian(c, ms, k, pts, origin)
        E += k * math.sqrt(eta) * np.einsum("j,jpi->pi", coef, F)
        # curl F_j = k F_dual(j);  H = j k / sqrt(eta) sum coef F_dual
        H += 1j * k / math.sqrt(eta) * np.einsum("j,jpi->pi", coef, F[dual])
    return E, H


def sample_scene_on_mesh(scene: Scene, mesh: SurfaceMesh) -> FieldTrace:
    """Trace of the superposed dipole fields at every mesh sample."""
    for src in scene.sources:
        if mesh.box is not None:
            on = mesh.box.on_surface(src.position, tol=1e-9)
        else:
            d = np.min(np.linalg.norm(mesh.points - np.asarray(src.position), axis=1))
            on = d < 1e-9 * math.sqrt(mesh.area)
        if on:
            raise DomainError(f"source at {src.position} lies on the sampling surface")
    E, H = scene_fields(scene, mesh.points)
    return FieldTrace(mesh, E, H, scene.medium.frequency)


def trace_from_coefficients(b: CoefficientSet, a: CoefficientSet, mesh: SurfaceMesh, origin=(0.0, 0.0, 0.0)) -> FieldTrace:
    E, H = synthesize_from_coefficients(b, a, b.medium, mesh.points, origin)
    return FieldTrace(mesh, E, H, b.medium.frequency)


def truncation_order_suggestion(kr_max: float) -> int:
    """n_max = ceil(kr + 3 kr^(1/3)), at least 1."""
    if not kr_max > 0:
        raise DomainError("kr_max must be positive")
    return max(1, math.ceil(kr_max + 3.0 * kr_max ** (1.0 / 3.0)))
