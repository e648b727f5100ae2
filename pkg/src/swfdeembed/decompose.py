"""Surface-integral decomposition of sampled near fields into SWF coefficients.

The surface inner product is

    <u, v> = oint n . [u x (curl v) - v x (curl u)] dS

and with ``u = E`` the term ``curl E`` is replaced by ``-j k eta H`` taken from
the trace, so no numerical differentiation of sampled data ever happens.

Reductions run over fixed sample chunks: every chunk is summed with numpy's
pairwise summation and the per-chunk partials are then summed in chunk order,
so results do not depend on how many worker threads ran the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .modes import ModeIndex, ModeSet
from .surface import FieldTrace, SurfaceMesh
from .swf import Medium, WaveType, swf_cartesian

CHUNK = 8192
KINDS = ("b", "a", "bprime")
_KIND_ALIASES = {"b'": "bprime", "b′": "bprime", "bp": "bprime"}


def worker_count() -> int:
    """Worker threads allowed by ``SWF_DEEMBED_THREADS`` (default 1)."""
    raw = os.environ.get("SWF_DEEMBED_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"SWF_DEEMBED_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"SWF_DEEMBED_THREADS must be a positive integer, got {raw!r}")
    return n


def _chunked_sum(func, n_samples: int, chunk: int = CHUNK):
    """Sum ``func(slice)`` over consecutive sample chunks in a fixed order."""
    slices = [slice(i, min(i + chunk, n_samples)) for i in range(0, n_samples, chunk)]
    workers = min(worker_count(), len(slices))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, slices))
    else:
        parts = [func(sl) for sl in slices]
    return np.sum(np.stack(parts), axis=0)


def normalize_kind(kind: str) -> str:
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise DomainError(f"unknown coefficient kind {kind!r}")
    return kind


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """SWF coefficients indexed by flat mode index (``values[j - 1]``)."""

    kind: str
    values: np.ndarray
    modeset: ModeSet
    medium: Medium

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if len(vals) != self.modeset.count:
            raise DomainError(f"expected {self.modeset.count} coefficients, got {len(vals)}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> complex:
        """Coefficient of flat index ``j`` (1-based)."""
        return complex(self.values[j - 1])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def replace(self, values=None, kind=None) -> "CoefficientSet":
        return CoefficientSet(
            self.kind if kind is None else kind,
            self.values if values is None else values,
            self.modeset,
            self.medium,
        )

    @classmethod
    def zeros(cls, kind: str, modeset: ModeSet, medium: Medium) -> "CoefficientSet":
        return cls(kind, np.zeros(modeset.count, complex), modeset, medium)

    @classmethod
    def unit(cls, kind: str, j: int, modeset: ModeSet, medium: Medium) -> "CoefficientSet":
        v = np.zeros(modeset.count, complex)
        v[j - 1] = 1.0
        return cls(kind, v, modeset, medium)


def check_inputs(trace: FieldTrace, med: Medium, origin) -> np.ndarray:
    origin = np.asarray(origin, dtype=float)
    if not math.isclose(trace.frequency, med.frequency, rel_tol=1e-12, abs_tol=0.0):
        raise DomainError(
            f"trace frequency {trace.frequency!r} Hz does not match medium frequency "
            f"{med.frequency!r} Hz"
        )
    if not trace.mesh.encloses(origin):
        raise DomainError(f"expansion origin {origin.tolist()} is not enclosed by the mesh")
    return origin


def field_mode_products(trace: FieldTrace, modeset: ModeSet, c: int, med: Medium, origin) -> np.ndarray:
    """``<E, F_j^(c)*>`` for every mode of ``modeset``; shape ``(J,)``."""
    origin = check_inputs(trace, med, origin)
    c = int(WaveType(c))
    mesh = trace.mesh
    k, eta = med.k, med.eta
    n_cross_e = np.cross(mesh.normals, trace.E)
    # curl E = -j k eta H  =>  (curl E) x n
    curl_e_cross_n = np.cross(-1j * k * eta * trace.H, mesh.normals)
    dual = modeset.dual_permutation

    def chunk(sl):
        fc = np.conj(swf_cartesian(c, modeset, k, mesh.points[sl], origin))
        curl_fc = k * fc[dual]
        # n.(E x curl F*) - n.(F* x curl E)
        integrand = np.einsum("jpi,pi->jp", curl_fc, n_cross_e[sl]) - np.einsum(
            "jpi,pi->jp", fc, curl_e_cross_n[sl]
        )
        return np.sum(integrand * mesh.weights[sl], axis=1)

    return _chunked_sum(chunk, len(mesh))


def inner_product_field_mode(trace: FieldTrace, mode: ModeIndex, c: int, med: Medium, origin) -> complex:
    """Quadrature value of ``<E, F_mode^(c)*>``."""
    vals = field_mode_products(trace, ModeSet(mode.n), c, med, origin)
    return complex(vals[mode.j - 1])


def decompose_outgoing(trace: FieldTrace, modeset: ModeSet, med: Medium, origin) -> CoefficientSet:
    """b_j = k / (j sqrt(eta)) <E, F_j^(4)*>."""
    ip = field_mode_products(trace, modeset, 4, med, origin)
    return CoefficientSet("b", med.k / (1j * math.sqrt(med.eta)) * ip, modeset, med)


def decompose_incoming(trace: FieldTrace, modeset: ModeSet, med: Medium, origin) -> CoefficientSet:
    """a_j = -k / (j sqrt(eta)) <E, F_j^(3)*>."""
    ip = field_mode_products(trace, modeset, 3, med, origin)
    return CoefficientSet("a", -med.k / (1j * math.sqrt(med.eta)) * ip, modeset, med)


def decompose_radiating(trace: FieldTrace, modeset: ModeSet, med: Medium, origin) -> CoefficientSet:
    """b'_j = b_j - a_j = 2k / (j sqrt(eta)) <E, F_j^(1)*>, from the regular waves alone."""
    ip = field_mode_products(trace, modeset, 1, med, origin)
    return CoefficientSet("bprime", 2 * med.k / (1j * math.sqrt(med.eta)) * ip, modeset, med)


def mode_mode_products(
    mesh: SurfaceMesh,
    modeset: ModeSet,
    med: Medium,
    origin=(0.0, 0.0, 0.0),
    pairs: Iterable[tuple[int, int]] = ((c, x) for c in (1, 3, 4) for x in (1, 3, 4)),
) -> dict[tuple[int, int], np.ndarray]:
    """Quadrature of ``<F_j^(c), F_j'^(xi)*>`` for all mode pairs; ``{(c, xi): (J, J)}``.

    Both curls are the analytic ``k F_dual``.
    """
    pairs = [(int(c), int(x)) for c, x in pairs]
    types = sorted({t for pair in pairs for t in pair})
    k = med.k
    dual = modeset.dual_permutation
    J = modeset.count
    origin = np.asarray(origin, float)

    def chunk(sl):
        n = mesh.normals[sl]
        w = mesh.weights[sl]
        F = {t: swf_cartesian(t, modeset, k, mesh.points[sl], origin) for t in types}
        out = np.empty((len(pairs), J, J), dtype=complex)
        for i, (c, x) in enumerate(pairs):
            u = F[c]
            v = np.conj(F[x])
            # n.(u x curl v) = u . (curl v x n);  n.(v x curl u) = v . (curl u x n)
            a = (u * w[None, :, None]).reshape(J, -1) @ np.cross(k * v[dual], n[None]).reshape(J, -1).T
            b = np.cross(k * u[dual], n[None]).reshape(J, -1) @ (v * w[None, :, None]).reshape(J, -1).T
            out[i] = a - b
        return out

    totals = _chunked_sum(chunk, len(mesh))
    return {pair: totals[i] for i, pair in enumerate(pairs)}


# ----------------------------------------------------------------------------
# least-squares baseline


def _tangential_design(mesh: SurfaceMesh, modeset: ModeSet, med: Medium, origin, basis: Sequence[int]):
    t1, t2 = mesh.tangents()
    sw = np.sqrt(mesh.weights)
    scale = med.k * math.sqrt(med.eta)
    cols = []
    for c in basis:
        F = swf_cartesian(int(WaveType(c)), modeset, med.k, mesh.points, origin)
        a1 = np.einsum("jpi,pi->pj", F, t1) * sw[:, None]
        a2 = np.einsum("jpi,pi->pj", F, t2) * sw[:, None]
        cols.append(scale * np.concatenate([a1, a2], axis=0))
    return np.concatenate(cols, axis=1), (t1, t2, sw)


def _normalize_basis(basis) -> tuple[int, ...]:
    if isinstance(basis, (int, np.integer)):
        basis = (basis,)
    out = tuple(sorted({int(WaveType(int(c))) for c in basis}))
    if 3 in out and 4 in out and 1 in out:
        raise DomainError("basis {1, 3, 4} is linearly dependent (F1 = (F3 + F4) / 2)")
    if not out:
        raise DomainError("basis must contain at least one wave type")
    return out


@dataclass
class LeastSquaresResult:
    """Pseudo-inverse fit of tangential E.

    ``coefficients[c]`` holds the coefficients of ``k sqrt(eta) F^(c)`` for each
    wave type ``c`` in the basis.
    """

    coefficients: dict[int, np.ndarray]
    residual: float
    condition: float
    rank: int
    singular_values: np.ndarray
    modeset: ModeSet
    medium: Medium
    rank_deficient: bool = False
    notes: list[str] = field(default_factory=list)

    def as_set(self, c: int) -> CoefficientSet:
        """Coefficients of wave type ``c`` as a b (c=4) or a (c=3) set."""
        kind = {4: "b", 3: "a"}.get(int(c))
        if kind is None:
            raise DomainError("only outgoing (4) and incoming (3) fits map onto b / a coefficient sets")
        return CoefficientSet(kind, self.coefficients[int(c)], self.modeset, self.medium)


def decompose_leastsquares(
    trace: FieldTrace, modeset: ModeSet, med: Medium, origin, basis=(4,), rcond: float = 1e-12
) -> LeastSquaresResult:
    """Minimum-norm least-squares fit of the tangential E on the mesh to the SWF basis."""
    origin = check_inputs(trace, med, origin)
    basis = _normalize_basis(basis)
    A, (t1, t2, sw) = _tangential_design(trace.mesh, modeset, med, origin, basis)
    if A.shape[0] < A.shape[1]:
        raise DomainError(f"underdetermined fit: {A.shape[0]} equations for {A.shape[1]} unknowns")
    y = np.concatenate(
        [np.einsum("pi,pi->p", trace.E, t1) * sw, np.einsum("pi,pi->p", trace.E, t2) * sw]
    )
    x, _, rank, sv = np.linalg.lstsq(A, y, rcond=rcond)
    ynorm = np.linalg.norm(y)
    residual = float(np.linalg.norm(A @ x - y) / ynorm) if ynorm > 0 else 0.0
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    J = modeset.count
    coeffs = {c: x[i * J : (i + 1) * J].copy() for i, c in enumerate(basis)}
    deficient = int(rank) < A.shape[1]
    notes = [f"rank {int(rank)} < {A.shape[1]} unknowns, condition {cond:.3e}"] if deficient else []
    return LeastSquaresResult(coeffs, residual, cond, int(rank), sv, modeset, med, deficient, notes)


@dataclass(frozen=True)
class ConditionReport:
    basis: tuple[int, ...]
    condition: float
    sigma_max: float
    sigma_min: float
    n_rows: int
    n_cols: int
    kr_max: float

    def as_row(self) -> dict:
        return {
            "basis": "+".join(str(c) for c in self.basis),
            "kr_max": self.kr_max,
            "condition": self.condition,
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
            "rows": self.n_rows,
            "cols": self.n_cols,
        }


def condition_report(mesh: SurfaceMesh, modeset: ModeSet, med: Medium, origin, basis=(4,)) -> ConditionReport:
    """Singular-value summary of the tangential least-squares design matrix."""
    origin = np.asarray(origin, float)
    basis = _normalize_basis(basis)
    A, _ = _tangential_design(mesh, modeset, med, origin, basis)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    kr_max = med.k * float(np.max(np.linalg.norm(mesh.points - origin, axis=1)))
    return ConditionReport(basis, cond, float(sv[0]), float(sv[-1]), A.shape[0], A.shape[1], kr_max)
