"""Huygens-equivalence transforms in coefficient space, signal-flow solves,
channel application, Love currents and far-field superposition.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np

from .decompose import CoefficientSet
from .errors import DomainError, NumericalError
from .modes import ModeSet
from .oracles import _dipole_arrays
from .surface import FieldTrace, SurfaceMesh
from .swf import Medium, farfield_patterns


class EquivalenceCase(enum.Enum):
    LOVE = "love"  # b' = b, a' = -a
    NAIVE_OUTGOING = "naive"  # b' = b, a' = 0
    OUTGOING_CORRECTED = "corrected"  # b' = b - a, a' = 0


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    entries: np.ndarray
    role: str = "M"

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"channel matrix must be square, got shape {m.shape}")
        if self.role not in ("M", "M11", "S"):
            raise DomainError(f"unknown matrix role {self.role!r}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class SignalFlowModel:
    """Antenna (T, R, S) facing an environment that reflects b into a = M11 b."""

    T: np.ndarray
    S: np.ndarray
    M11: ChannelMatrix
    v: complex = 1.0
    R: np.ndarray | None = None

    def __post_init__(self):
        T = np.asarray(self.T, complex).reshape(-1)
        S = np.asarray(self.S, complex)
        N = len(T)
        if S.shape != (N, N) or self.M11.size != N:
            raise DomainError("T, S and M11 dimensions disagree")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "S", S)
        if self.R is not None:
            R = np.asarray(self.R, complex).reshape(-1)
            if len(R) != N:
                raise DomainError("R dimension disagrees with T")
            object.__setattr__(self, "R", R)

    @property
    def S_prime(self) -> np.ndarray:
        # the origin reflects every incoming wave into the matching outgoing one
        return np.eye(len(self.T))


def _same_modes(*sets: CoefficientSet) -> None:
    first = sets[0]
    for other in sets[1:]:
        if other.modeset != first.modeset:
            raise DomainError(
                f"mode sets disagree: n_max={first.modeset.n_max} vs n_max={other.modeset.n_max}"
            )


def equivalent_source(case: EquivalenceCase, b: CoefficientSet, a: CoefficientSet):
    """(b', a') of the equivalent surface currents for the chosen case."""
    _same_modes(b, a)
    case = EquivalenceCase(case)
    if case is EquivalenceCase.LOVE:
        bp, ap = b.values, -a.values
    elif case is EquivalenceCase.NAIVE_OUTGOING:
        bp, ap = b.values, np.zeros_like(a.values)
    else:
        bp, ap = b.values - a.values, np.zeros_like(a.values)
    return b.replace(values=bp, kind="bprime"), a.replace(values=ap, kind="a")


def _solve(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > 1e14:
        raise NumericalError(f"{what} is singular to working precision (condition {cond:.3e})")
    return np.linalg.solve(matrix, rhs)


@dataclass(frozen=True)
class FlowSolution:
    b: np.ndarray
    a: np.ndarray
    w: complex | None = None


def solve_original_flow(model: SignalFlowModel) -> FlowSolution:
    """b = T v + S a with a = M11 b, i.e. b = (I - S M11)^-1 T v."""
    N = len(model.T)
    M11 = model.M11.entries
    b = _solve(np.eye(N) - model.S @ M11, model.T * model.v, "I - S M11")
    a = M11 @ b
    w = complex(model.R @ a) if model.R is not None else None
    return FlowSolution(b, a, w)


def solve_equivalent_flow(bp: CoefficientSet, ap: CoefficientSet, M11: ChannelMatrix):
    """b_hat = S'(a_hat - a') + b' with S' = I and a_hat = M11 b_hat."""
    _same_modes(bp, ap)
    N = len(bp)
    if M11.size != N:
        raise DomainError(f"M11 is {M11.size}x{M11.size}, coefficients have length {N}")
    b_hat = _solve(np.eye(N) - M11.entries, bp.values - ap.values, "I - M11")
    a_hat = M11.entries @ b_hat
    return bp.replace(values=b_hat, kind="b"), ap.replace(values=a_hat, kind="a")


def apply_channel(M: ChannelMatrix, b_T: CoefficientSet) -> CoefficientSet:
    """a_R = M b_T."""
    if M.size != len(b_T):
        raise DomainError(f"channel matrix is {M.size}x{M.size}, coefficient vector has {len(b_T)}")
    return b_T.replace(values=M.entries @ b_T.values, kind="a")


@dataclass(frozen=True, eq=False)
class SurfaceCurrents:
    mesh: SurfaceMesh
    J: np.ndarray  # A/m
    M: np.ndarray  # V/m


def love_currents(trace: FieldTrace) -> SurfaceCurrents:
    """J = n x H, M = -n x E on every sample."""
    n = trace.mesh.normals
    return SurfaceCurrents(trace.mesh, np.cross(n, trace.H), -np.cross(n, trace.E))


def radiate_currents(currents: SurfaceCurrents, med: Medium, points, chunk: int = 2048):
    """Fields of the surface currents at ``points``, one point dipole per quadrature sample."""
    mesh = currents.mesh
    pts = np.atleast_2d(np.asarray(points, float))
    E = np.zeros(pts.shape, complex)
    H = np.zeros(pts.shape, complex)
    w = mesh.weights[:, None]
    for i in range(0, len(mesh), chunk):
        sl = slice(i, i + chunk)
        src = mesh.points[sl][None, :, :]
        obs = pts[:, None, :]
        for kind, dens in (("electric", currents.J), ("magnetic", currents.M)):
            e, h = _dipole_arrays(obs, src, (dens[sl] * w[sl])[None], med.k, med.eta, kind)
            E += e.sum(axis=1)
            H += h.sum(axis=1)
    return E, H


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    """r-normalized far field on a (theta, phi) grid: E ~ pattern e^{-jkr} / (kr).

    ``E_theta`` and ``E_phi`` have shape ``(len(theta), len(phi))``; angles in
    rad.  ``theta_deg``/``phi_deg`` optionally keep the exact degree grid the
    pattern was built from, so files written from it round-trip bit for bit.
    """

    theta: np.ndarray
    phi: np.ndarray
    E_theta: np.ndarray
    E_phi: np.ndarray
    medium: Medium
    theta_deg: np.ndarray | None = None
    phi_deg: np.ndarray | None = None

    def intensity(self) -> np.ndarray:
        """Radiation intensity U (W/sr)."""
        k, eta = self.medium.k, self.medium.eta
        return (np.abs(self.E_theta) ** 2 + np.abs(self.E_phi) ** 2) / (2 * eta * k * k)

    def scaled(self, alpha: complex) -> "FarFieldPattern":
        return dataclasses.replace(self, E_theta=alpha * self.E_theta, E_phi=alpha * self.E_phi)


def angle_grid_deg(step_deg: float = 1.0, cut_phi_deg: float | None = None):
    """theta in [0, 180] deg inclusive; phi in [0, 360) deg, or the single cut."""
    n_theta = int(round(180.0 / step_deg)) + 1
    theta = np.arange(n_theta) * step_deg
    if cut_phi_deg is None:
        phi = np.arange(int(round(360.0 / step_deg))) * step_deg
    else:
        phi = np.array([float(cut_phi_deg)])
    return theta, phi


def angle_grid(step_deg: float = 1.0, cut_phi_deg: float | None = None):
    """:func:`angle_grid_deg` in radians."""
    theta, phi = angle_grid_deg(step_deg, cut_phi_deg)
    return np.deg2rad(theta), np.deg2rad(phi)


def superpose_farfields(bp: CoefficientSet, med: Medium, theta, phi, degrees: bool = False) -> FarFieldPattern:
    """pattern = k sqrt(eta) sum_j b'_j K_j(theta, phi).

    With ``degrees=True`` the grid is given in degrees and kept on the result.
    """
    if degrees:
        th_deg, ph_deg = np.asarray(theta, float), np.asarray(phi, float)
        pat = superpose_farfields(bp, med, np.deg2rad(th_deg), np.deg2rad(ph_deg))
        return dataclasses.replace(pat, theta_deg=th_deg, phi_deg=ph_deg)
    if bp.kind not in ("bprime", "b"):
        raise DomainError(f"far-field superposition needs b' (or b with a = 0), got kind {bp.kind!r}")
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    K = farfield_patterns(bp.modeset, med.k, T, P)
    pat = med.k * math.sqrt(med.eta) * np.tensordot(bp.values, K, axes=(0, 0))
    return FarFieldPattern(theta, phi, pat[..., 0], pat[..., 1], med)


def coefficient_power(coeffs: CoefficientSet) -> float:
    """Radiated power of k sqrt(eta) sum b_j F_j^(4): sum |b_j|^2 / (4k)."""
    return float(np.sum(np.abs(coeffs.values) ** 2) / (4 * coeffs.medium.k))


def pattern_power(pattern: FarFieldPattern) -> float:
    """Sphere quadrature of U over a full grid (trapezoid in theta, periodic in phi)."""
    th, ph = pattern.theta, pattern.phi
    if len(ph) < 2:
        raise DomainError("pattern_power needs a full phi grid, not a single cut")
    dphi = 2 * np.pi / len(ph)
    ring = pattern.intensity().sum(axis=1) * dphi
    return float(np.trapezoid(ring * np.sin(th), th))


def directivity(pattern: FarFieldPattern, total_power: float) -> np.ndarray:
    """D = 4 pi U / P_rad in dBi on the pattern grid."""
    if not total_power > 0:
        raise DomainError("total radiated power must be positive")
    with np.errstate(divide="ignore"):
        return 10 * np.log10(4 * np.pi * pattern.intensity() / total_power)
