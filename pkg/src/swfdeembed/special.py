"""Spherical Bessel/Hankel functions and normalized associated Legendre functions.

Radial functions follow Hansen's labels: ``c = 1`` is j_n, ``c = 3`` is
h_n^(1) = j_n + i y_n and ``c = 4`` is h_n^(2) = j_n - i y_n.  With the
e^{+jwt} time convention h_n^(2) is the outward travelling wave.

j_n is evaluated by upward recurrence where ``x >= n_max`` and by Miller's
downward recurrence otherwise (upward recurrence for j_n loses all accuracy
once n exceeds x).  y_n is always evaluated upward, which is stable.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, SingularityError

REGULAR, INCOMING, OUTGOING = 1, 3, 4

# Extra orders above max(n_max, x) at which the downward recurrence starts.
_MILLER_PAD = 25


def _check_c(c: int) -> None:
    if c not in (REGULAR, INCOMING, OUTGOING):
        raise DomainError(f"wave type must be 1, 3 or 4, got {c}")


def _j_upward(n_max: int, x: np.ndarray) -> np.ndarray:
    out = np.empty((n_max + 1,) + x.shape)
    sx, cx = np.sin(x), np.cos(x)
    out[0] = sx / x
    if n_max >= 1:
        out[1] = sx / x**2 - cx / x
    for n in range(1, n_max):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def _j_downward(n_max: int, x: np.ndarray) -> np.ndarray:
    """Miller's algorithm; ``x`` must be strictly positive."""
    start = n_max + _MILLER_PAD + int(math.ceil(float(np.max(x, initial=0.0))))
    out = np.zeros((n_max + 1,) + x.shape)
    upper = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    for n in range(start, 0, -1):
        lower = (2 * n + 1) / x * cur - upper
        upper, cur = cur, lower
        # keep the unnormalized sequence in range
        big = np.abs(cur) > 1e250
        if np.any(big):
            cur = np.where(big, cur * 1e-250, cur)
            upper = np.where(big, upper * 1e-250, upper)
            out[: n_max + 1] = np.where(big, out[: n_max + 1] * 1e-250, out[: n_max + 1])
        if n - 1 <= n_max:
            out[n - 1] = cur
    # normalize against whichever of j_0, j_1 is better conditioned
    j0 = np.sin(x) / x
    scale = j0 / out[0]
    if n_max >= 1:
        # j_1 closed form cancels badly for small x, where j_0 is used anyway
        j1 = np.sin(x) / x**2 - np.cos(x) / x
        use_j1 = np.abs(j1) > np.abs(j0)
        scale = np.where(use_j1, j1 / out[1], scale)
    return out * scale


def spherical_jn_all(n_max: int, x) -> np.ndarray:
    """j_0 .. j_{n_max} at real ``x >= 0``; shape ``(n_max + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("spherical_jn_all requires x >= 0")
    if x.ndim == 0:
        return spherical_jn_all(n_max, x.reshape(1))[:, 0]
    out = np.zeros((n_max + 1,) + x.shape)
    zero = x == 0
    out[0][zero] = 1.0
    up = x >= max(n_max, 1)
    down = ~zero & ~up
    if np.any(up):
        out[:, up] = _j_upward(n_max, x[up])
    if np.any(down):
        out[:, down] = _j_downward(n_max, x[down])
    return out


def spherical_yn_all(n_max: int, x) -> np.ndarray:
    """y_0 .. y_{n_max} by upward recurrence; ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("spherical_yn_all requires x > 0")
    out = np.empty((n_max + 1,) + x.shape)
    sx, cx = np.sin(x), np.cos(x)
    out[0] = -cx / x
    if n_max >= 1:
        out[1] = -cx / x**2 - sx / x
    for n in range(1, n_max):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def radial_functions(c: int, n_max: int, x):
    """Radial factors for all degrees 0..n_max.

    Returns ``(z, z_over_x, dz)`` where ``z[n] = z_n^(c)(x)``,
    ``z_over_x[n] = z_n(x) / x`` and ``dz[n] = (x z_n(x))' / x``.  For
    ``c = 1`` the value at ``x = 0`` is the regular limit.
    """
    _check_c(c)
    x = np.asarray(x, dtype=float)
    if c != REGULAR and np.any(x <= 0):
        raise SingularityError("singular wave type evaluated at kr = 0")
    jn = spherical_jn_all(n_max, x)
    if c == REGULAR:
        z = jn.astype(complex)
    else:
        yn = spherical_yn_all(n_max, x)
        z = jn + 1j * yn if c == INCOMING else jn - 1j * yn

    zero = x == 0
    safe = np.where(zero, 1.0, x)
    z_over_x = z / safe
    if np.any(zero):
        # j_n(x)/x -> 1/3 for n = 1, 0 for n >= 2 (n = 0 is never used)
        z_over_x[:, zero] = 0.0
        if n_max >= 1:
            z_over_x[1, zero] = 1.0 / 3.0
    dz = np.empty_like(z)
    dz[0] = np.nan  # degree 0 carries no vector wave function
    for n in range(1, n_max + 1):
        dz[n] = z[n - 1] - n * z_over_x[n]
    return z, z_over_x, dz


def radial_fn(c: int, n: int, x):
    """``(z_n^(c)(x), (x z_n^(c)(x))' / x)`` for a single degree ``n >= 1``."""
    if n < 1:
        raise DomainError("degree must be >= 1")
    z, _, dz = radial_functions(c, n, x)
    return z[n], dz[n]


def legendre_table(n_max: int, theta):
    """Normalized associated Legendre functions and their angular auxiliaries.

    The normalization is ``int_0^pi Pbar_n^m(cos t)^2 sin t dt = 1`` without the
    Condon-Shortley phase (Hansen's convention).  Returns three arrays of shape
    ``(n_max + 1, n_max + 1) + theta.shape`` indexed ``[n, m]``:

    * ``p``  -- Pbar_n^m(cos theta)
    * ``dp`` -- d Pbar_n^m / d theta
    * ``mp`` -- m Pbar_n^m / sin theta

    ``Pbar_n^m / sin theta`` is carried through the degree recurrence directly
    (its seed is ``sin^(m-1) theta``), so no division by ``sin theta`` happens
    and the pole values are the exact limits.
    """
    theta = np.asarray(theta, dtype=float)
    u = np.cos(theta)
    st = np.sin(theta)
    shape = (n_max + 1, n_max + 1) + theta.shape
    p = np.zeros(shape)
    q = np.zeros(shape)  # Pbar_n^m / sin(theta), m >= 1
    dp = np.zeros(shape)

    # m = 0 column
    p[0, 0] = math.sqrt(0.5)
    if n_max >= 1:
        p[1, 0] = math.sqrt(3.0) * u * p[0, 0]
    for n in range(2, n_max + 1):
        a = math.sqrt((4 * n * n - 1) / (n * n))
        b = math.sqrt(((n - 1) ** 2) * (2 * n + 1) / (n * n * (2 * n - 3)))
        p[n, 0] = a * u * p[n - 1, 0] - b * p[n - 2, 0]

    # seeds q_m^m = Pbar_m^m / sin = c_m sin^(m-1)
    seed = np.full(theta.shape, math.sqrt(0.5))  # Pbar_0^0
    for m in range(1, n_max + 1):
        fac = math.sqrt((2 * m + 1) / (2 * m))
        q[m, m] = fac * seed  # seed is Pbar_{m-1}^{m-1}
        seed = fac * seed * st
        if m + 1 <= n_max:
            q[m + 1, m] = math.sqrt(2 * m + 3) * u * q[m, m]
        for n in range(m + 2, n_max + 1):
            a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = math.sqrt(((n - 1) ** 2 - m * m) * (2 * n + 1) / ((n * n - m * m) * (2 * n - 3)))
            q[n, m] = a * u * q[n - 1, m] - b * q[n - 2, m]
        p[m:, m] = q[m:, m] * st

    for n in range(1, n_max + 1):
        # m = 0: dPbar_n^0/dtheta = -sqrt(n(n+1)) Pbar_n^1
        dp[n, 0] = -math.sqrt(n * (n + 1)) * p[n, 1]
        for m in range(1, n + 1):
            c = math.sqrt((n * n - m * m) * (2 * n + 1) / (2 * n - 1))
            dp[n, m] = n * u * q[n, m] - (c * q[n - 1, m] if n - 1 >= m else 0.0)
    mp = q * np.arange(n_max + 1).reshape((1, n_max + 1) + (1,) * theta.ndim)
    return p, dp, mp


def legendre_norm(n: int, m: int, u):
    """``(Pbar_n^m(u), dPbar/dtheta, m Pbar/sin theta)`` with ``u = cos theta``."""
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got m={m}, n={n}")
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1):
        raise DomainError("|u| must be <= 1")
    p, dp, mp = legendre_table(n, np.arccos(u))
    return p[n, m], dp[n, m], mp[n, m]
