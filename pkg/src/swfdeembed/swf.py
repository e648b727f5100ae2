"""Vector spherical wave functions F_smn^(c), their curls and far-field patterns.

The angular and radial structure is Hansen's.  The overall scale is pinned by
the surface orthogonality relation

    <F_j^(c), F_j'^(xi)*> = delta_jj' B^(c,xi) / (2 k^2)

with B^(4,4) = 2j, which fixes the functions here to Hansen's power-normalized
functions divided by sqrt(2k).  With that scale a field
``E = k sqrt(eta) sum_j b_j F_j^(4)`` radiates ``sum_j |b_j|^2 / (4k)`` watts.

Time convention is e^{+jwt}: c = 4 (h_n^(2)) is outgoing, c = 3 incoming.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0

from .errors import DomainError, SingularityError
from .modes import ModeIndex, ModeSet
from .special import legendre_table, radial_functions

ETA0 = math.sqrt(mu_0 / epsilon_0)


class WaveType(enum.IntEnum):
    REGULAR = 1
    INCOMING = 3
    OUTGOING = 4


@dataclass(frozen=True)
class Medium:
    """Homogeneous medium at one frequency."""

    frequency: float
    k: float
    eta: float

    def __post_init__(self):
        if not (self.k > 0 and self.eta > 0 and self.frequency > 0):
            raise DomainError("frequency, k and eta must be positive")

    @classmethod
    def free_space(cls, frequency: float) -> "Medium":
        return cls(frequency, 2 * math.pi * frequency / C0, ETA0)

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k


@dataclass(frozen=True)
class ComplexVec3:
    """Complex 3-vector(s) with an explicit basis tag ('spherical' or 'cartesian').

    ``values`` has shape ``(..., 3)``; spherical components are ordered
    (r, theta, phi).
    """

    values: np.ndarray
    basis: str

    def __post_init__(self):
        if self.basis not in ("spherical", "cartesian"):
            raise DomainError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def to_cartesian(self, point, origin=(0.0, 0.0, 0.0)) -> "ComplexVec3":
        if self.basis == "cartesian":
            return self
        rot = spherical_unit_vectors(np.asarray(point, float) - np.asarray(origin, float))
        return ComplexVec3(np.einsum("...ij,...i->...j", rot, self.values), "cartesian")

    def to_spherical(self, point, origin=(0.0, 0.0, 0.0)) -> "ComplexVec3":
        if self.basis == "spherical":
            return self
        rot = spherical_unit_vectors(np.asarray(point, float) - np.asarray(origin, float))
        return ComplexVec3(np.einsum("...ij,...j->...i", rot, self.values), "spherical")


def cartesian_to_spherical(rel):
    """(r, theta, phi) of relative position vectors, shape ``(..., 3)``."""
    rel = np.asarray(rel, dtype=float)
    x, y, z = rel[..., 0], rel[..., 1], rel[..., 2]
    rho = np.hypot(x, y)
    return np.hypot(rho, z), np.arctan2(rho, z), np.arctan2(y, x)


def unit_vectors(theta, phi) -> np.ndarray:
    """Rows r_hat, theta_hat, phi_hat in Cartesian components, shape ``(..., 3, 3)``."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(st)
    return np.stack(
        [
            np.stack([st * cp, st * sp, ct], axis=-1),
            np.stack([ct * cp, ct * sp, -st], axis=-1),
            np.stack([-sp, cp, zero], axis=-1),
        ],
        axis=-2,
    )


def spherical_unit_vectors(rel) -> np.ndarray:
    _, theta, phi = cartesian_to_spherical(rel)
    return unit_vectors(theta, phi)


def _phase_sign(m):
    # Hansen's (-m/|m|)^m, equal to 1 for m = 0
    m = np.asarray(m)
    return np.where((m < 0) | (m % 2 == 0), 1.0, -1.0)


def _angular(modeset: ModeSet, theta, phi):
    """Angular factors shared by all radial types.

    Returns ``(norm, p, dp, mp, eimp)``; ``norm`` has shape ``(J,)`` and holds
    Hansen's constant without the 1/sqrt(2k) scale, the rest are gathered per
    mode with shape ``(J,) + theta.shape``.
    """
    s, m, n = modeset.arrays
    P, DP, MP = legendre_table(modeset.n_max, theta)
    am = np.abs(m)
    p, dp = P[n, am], DP[n, am]
    mp = MP[n, am] * np.sign(m).reshape((-1,) + (1,) * np.ndim(theta))
    eimp = np.exp(1j * np.multiply.outer(m, phi))
    norm = _phase_sign(m) / np.sqrt(2 * np.pi * n * (n + 1))
    return norm, p, dp, mp, eimp


def swf_spherical(c: int, modeset: ModeSet, k: float, points, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    """All F_j^(c) of ``modeset`` at ``points`` in the local spherical basis.

    Returns complex array of shape ``(J, P, 3)`` with components (r, theta, phi).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(origin, dtype=float)
    r, theta, phi = cartesian_to_spherical(pts)
    kr = k * r
    if c != 1 and np.any(kr == 0):
        raise SingularityError("singular wave function evaluated at its origin")
    z, z_over_x, dz = radial_functions(int(c), modeset.n_max, kr)
    s, m, n = modeset.arrays
    norm, p, dp, mp, eimp = _angular(modeset, theta, phi)
    scale = (norm / math.sqrt(2.0 * k))[:, None]
    zn, zx, dzn = z[n], z_over_x[n], dz[n]
    out = np.empty((len(s), len(r), 3), dtype=complex)
    te = s == 1
    tm = ~te
    # s = 1: z [ j m P/sin theta_hat - dP/dtheta phi_hat ] e^{jm phi}
    out[te, :, 0] = 0.0
    out[te, :, 1] = zn[te] * 1j * mp[te]
    out[te, :, 2] = -zn[te] * dp[te]
    # s = 2: n(n+1) z/x P r_hat + (xz)'/x [ dP/dtheta theta_hat + j m P/sin phi_hat ]
    out[tm, :, 0] = (n[tm] * (n[tm] + 1))[:, None] * zx[tm] * p[tm]
    out[tm, :, 1] = dzn[tm] * dp[tm]
    out[tm, :, 2] = dzn[tm] * 1j * mp[tm]
    out *= (scale * eimp)[:, :, None]
    return out


def swf_cartesian(c: int, modeset: ModeSet, k: float, points, origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    """As :func:`swf_spherical` but with Cartesian (x, y, z) components."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sph = swf_spherical(c, modeset, k, pts, origin)
    rot = spherical_unit_vectors(pts - np.asarray(origin, dtype=float))  # (P, 3, 3)
    return np.einsum("jpi,pik->jpk", sph, rot)


def swf_curl_from(values: np.ndarray, modeset: ModeSet, k: float) -> np.ndarray:
    """curl F_{smn} = k F_{(3-s)mn}: permute the mode axis of a precomputed array."""
    return k * values[modeset.dual_permutation]


def _single(mode: ModeIndex) -> tuple[ModeSet, int]:
    return ModeSet(mode.n), mode.j - 1


def eval_F(c: int, mode: ModeIndex, med: Medium, p, origin=(0.0, 0.0, 0.0)) -> ComplexVec3:
    """F^(c) of one mode at point(s) ``p``, in the spherical basis about ``origin``."""
    ms, idx = _single(mode)
    pts = np.asarray(p, dtype=float)
    vals = swf_spherical(c, ms, med.k, pts.reshape(-1, 3), origin)[idx]
    return ComplexVec3(vals.reshape(pts.shape), "spherical")


def eval_curl_F(c: int, mode: ModeIndex, med: Medium, p, origin=(0.0, 0.0, 0.0)) -> ComplexVec3:
    """curl F^(c) = k F^(c) of the dual polarization."""
    dual = eval_F(c, mode.dual, med, p, origin)
    return ComplexVec3(med.k * dual.values, dual.basis)


def farfield_patterns(modeset: ModeSet, k: float, theta, phi) -> np.ndarray:
    """Angular patterns K_j with F_j^(4) -> K_j e^{-jkr} / (kr).

    Returns ``(J,) + theta.shape + (2,)`` complex (theta, phi) components.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    s, m, n = modeset.arrays
    norm, p, dp, mp, eimp = _angular(modeset, theta, phi)
    expand = (-1,) + (1,) * theta.ndim
    # h_n^(2)(x) ~ j^{n+1} e^{-jx}/x and (x h_n^(2))'/x ~ j^n e^{-jx}/x
    lead = (1j ** (n + 2 - s)) * norm / math.sqrt(2.0 * k)
    lead = lead.reshape(expand) * eimp
    out = np.empty((len(s),) + theta.shape + (2,), dtype=complex)
    te = (s == 1).reshape(expand)
    out[..., 0] = lead * np.where(te, 1j * mp, dp)
    out[..., 1] = lead * np.where(te, -dp, 1j * mp)
    return out


def mode_farfield(mode: ModeIndex, med: Medium, theta, phi) -> ComplexVec3:
    """Far-field pattern K_j as a spherical-basis vector with zero radial part."""
    ms, idx = _single(mode)
    tp = farfield_patterns(ms, med.k, theta, phi)[idx]
    vals = np.concatenate([np.zeros(tp.shape[:-1] + (1,), complex), tp], axis=-1)
    return ComplexVec3(vals, "spherical")
