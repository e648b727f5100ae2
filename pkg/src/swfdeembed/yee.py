"""Colocation of staggered Yee-grid phasor dumps onto common sample points.

Each E sample sits at a mesh point ``p``.  H component ``i`` is recorded at
the two neighbours ``p -/+ (delta / 2) * stagger[i]`` and half a time step
earlier than E, so its phasor carries ``exp(-j w dt / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0

from .errors import DomainError
from .surface import FieldTrace, SurfaceMesh

# Hx is staggered along y, Hy along z, Hz along x.
DEFAULT_STAGGER = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


@dataclass(frozen=True, eq=False)
class StaggeredDump:
    mesh: SurfaceMesh
    E: np.ndarray  # (P, 3) at the mesh points
    H_lo: np.ndarray  # (P, 3), component i at p - delta/2 * stagger[i]
    H_hi: np.ndarray  # (P, 3), component i at p + delta/2 * stagger[i]
    stagger: np.ndarray = DEFAULT_STAGGER

    def __post_init__(self):
        shape = (len(self.mesh), 3)
        arrays = {}
        for name in ("E", "H_lo", "H_hi"):
            arr = np.asarray(getattr(self, name), complex)
            if arr.shape != shape:
                raise DomainError(f"{name} must have shape {shape}, got {arr.shape}")
            arrays[name] = arr
        st = np.asarray(self.stagger, float)
        if st.shape != (3, 3):
            raise DomainError(f"stagger must be a (3, 3) array of unit axes, got shape {st.shape}")
        for row in st:
            if sorted(np.abs(row).tolist()) != [0.0, 0.0, 1.0] or row.max() != 1.0:
                raise DomainError(f"stagger row {row.tolist()} is not a positive coordinate axis")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "stagger", st)


def half_step_phase(frequency: float, time_step: float) -> complex:
    return complex(np.exp(1j * math.pi * frequency * time_step))


def _check_grid(cell_size: float, time_step: float, frequency: float) -> None:
    if not (cell_size > 0 and math.isfinite(cell_size)):
        raise DomainError(f"cell size must be positive, got {cell_size!r}")
    if not (time_step >= 0 and math.isfinite(time_step)):
        raise DomainError(f"time step must be non-negative, got {time_step!r}")
    if not frequency > 0:
        raise DomainError(f"frequency must be positive, got {frequency!r}")
    limit = cell_size / (C0 * math.sqrt(3.0))
    if time_step > limit * (1 + 1e-12):
        raise DomainError(f"time step {time_step!r} s exceeds the Courant limit {limit!r} s for cell {cell_size!r} m")


def colocate_yee(dump: StaggeredDump, cell_size: float, time_step: float, frequency: float) -> FieldTrace:
    """Two-point average of each H component onto the E points, times exp(+j w dt / 2)."""
    _check_grid(cell_size, time_step, frequency)
    H = 0.5 * (dump.H_lo + dump.H_hi) * half_step_phase(frequency, time_step)
    meta = {"yee": {"cell_size": cell_size, "time_step": time_step}}
    return FieldTrace(dump.mesh, dump.E, H, frequency, meta)


def sample_staggered(field_fn, mesh: SurfaceMesh, cell_size: float, time_step: float, frequency: float,
                     stagger=DEFAULT_STAGGER) -> StaggeredDump:
    """Record an analytic ``field_fn(points) -> (E, H)`` the way a Yee solver would."""
    _check_grid(cell_size, time_step, frequency)
    st = np.asarray(stagger, float)
    E, _ = field_fn(mesh.points)
    lag = np.conj(half_step_phase(frequency, time_step))
    H_lo = np.empty((len(mesh), 3), complex)
    H_hi = np.empty((len(mesh), 3), complex)
    for i in range(3):
        off = 0.5 * cell_size * st[i]
        H_lo[:, i] = field_fn(mesh.points - off)[1][:, i] * lag
        H_hi[:, i] = field_fn(mesh.points + off)[1][:, i] * lag
    return StaggeredDump(mesh, E, H_lo, H_hi, st)
