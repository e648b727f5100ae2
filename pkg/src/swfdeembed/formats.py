"""File formats: NFD1 near-field dumps and the CSV coefficient, channel-matrix
and far-field files.  All float values round-trip exactly (binary float64, or
``repr`` text which is the shortest exact decimal form).
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .decompose import CoefficientSet, normalize_kind
from .equivalence import ChannelMatrix, FarFieldPattern
from .errors import FormatError
from .modes import ModeSet, mode_count, smn_from_j
from .surface import BoxSpec, FieldTrace, SurfaceMesh
from .swf import Medium

NFD_MAGIC = "NFD1"
NFD_FIELDS = (
    "x y z nx ny nz w ReEx ImEx ReEy ImEy ReEz ImEz ReHx ImHx ReHy ImHy ReHz ImHz"
)
NFD_COLUMNS = 19
_NFD_CORE_KEYS = ("format", "frequency", "samples", "mesh", "fields")


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


# ----------------------------------------------------------------------------
# NFD1


def format_boxspec(box: BoxSpec) -> str:
    c = ",".join(repr(v) for v in box.center)
    h = ",".join(repr(v) for v in box.half_extents)
    cells = ";".join(f"{a}x{b}" for a, b in box.cells_per_face)
    return f"box center={c} half_extents={h} cells={cells} nodes_per_cell={box.nodes_per_cell}"


def parse_boxspec(text: str) -> BoxSpec | None:
    text = text.strip()
    if text == "external":
        return None
    parts = text.split()
    if not parts or parts[0] != "box":
        raise FormatError(f"unrecognized mesh provenance {text!r}")
    kv = dict(p.split("=", 1) for p in parts[1:])
    try:
        center = tuple(float(v) for v in kv["center"].split(","))
        half = tuple(float(v) for v in kv["half_extents"].split(","))
        cells = tuple(tuple(int(c) for c in pair.split("x")) for pair in kv["cells"].split(";"))
        q = int(kv.get("nodes_per_cell", "1"))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed box provenance {text!r}: {exc}") from None
    return BoxSpec(center, half, cells, q)


def write_nfd(path, trace: FieldTrace) -> None:
    mesh = trace.mesh
    header = {
        "format": NFD_MAGIC,
        "frequency": repr(float(trace.frequency)),
        "samples": str(len(mesh)),
        "mesh": format_boxspec(mesh.box) if mesh.box is not None else "external",
        "fields": NFD_FIELDS,
    }
    for key, value in trace.metadata.get("header", {}).items():
        if key not in header:
            header[key] = value
    text = "".join(f"{k}: {v}\n" for k, v in header.items()) + "---\n"
    block = np.empty((len(mesh), NFD_COLUMNS), dtype="<f8")
    block[:, 0:3] = mesh.points
    block[:, 3:6] = mesh.normals
    block[:, 6] = mesh.weights
    for i, F in enumerate((trace.E, trace.H)):
        base = 7 + 6 * i
        block[:, base : base + 6 : 2] = F.real
        block[:, base + 1 : base + 6 : 2] = F.imag
    atomic_write(path, text.encode("utf-8") + block.tobytes())


def read_nfd(path) -> FieldTrace:
    data = _read_bytes(path)
    magic = b"format: " + NFD_MAGIC.encode() + b"\n"
    if not data.startswith(magic):
        raise FormatError(f"not an {NFD_MAGIC} file: missing '{magic.decode().strip()}' tag", 0)
    end = data.find(b"\n---\n")
    if end < 0:
        raise FormatError("header is not terminated by a '---' line", len(data))
    header: dict[str, str] = {}
    offset = 0
    for raw in data[: end + 1].split(b"\n")[:-1]:
        line = raw.decode("utf-8", errors="strict")
        if ":" not in line:
            raise FormatError(f"malformed header line {line!r}", offset)
        key, value = line.split(":", 1)
        header[key.strip()] = value.strip()
        offset += len(raw) + 1
    start = end + len(b"\n---\n")
    try:
        n = int(header["samples"])
        frequency = float(header["frequency"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad or missing header key: {exc}", 0) from None
    if header.get("fields", NFD_FIELDS).split() != NFD_FIELDS.split():
        raise FormatError(f"unsupported field order {header.get('fields')!r}", 0)
    expected = n * NFD_COLUMNS * 8
    actual = len(data) - start
    if actual != expected:
        raise FormatError(
            f"binary block length mismatch: expected {expected} bytes for {n} samples, got {actual}",
            start,
        )
    block = np.frombuffer(data, dtype="<f8", count=n * NFD_COLUMNS, offset=start).reshape(n, NFD_COLUMNS)
    bad = np.flatnonzero(~np.isfinite(block.ravel()))
    if bad.size:
        raise FormatError("non-finite value in binary block", start + 8 * int(bad[0]))
    box = parse_boxspec(header.get("mesh", "external"))
    mesh = SurfaceMesh(block[:, 0:3].copy(), block[:, 3:6].copy(), block[:, 6].copy(), True, box)
    E = block[:, 7:13:2] + 1j * block[:, 8:13:2]
    H = block[:, 13:19:2] + 1j * block[:, 14:19:2]
    extra = {k: v for k, v in header.items() if k not in _NFD_CORE_KEYS}
    return FieldTrace(mesh, E, H, frequency, {"header": extra})


# ----------------------------------------------------------------------------
# coefficient CSV

_KIND_LABEL = {"b": "b", "a": "a", "bprime": "bprime"}


def format_coefficients(coeffs: CoefficientSet) -> str:
    med = coeffs.medium
    lines = [
        f"# kind: {_KIND_LABEL[coeffs.kind]}",
        f"# frequency: {med.frequency!r}",
        f"# k: {med.k!r}",
        f"# eta: {med.eta!r}",
        f"# n_max: {coeffs.modeset.n_max}",
        "j,s,m,n,re,im",
    ]
    for j, z in enumerate(coeffs.values, start=1):
        s, m, n = smn_from_j(j)
        lines.append(f"{j},{s},{m},{n},{float(z.real)!r},{float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def write_coefficients(path, coeffs: CoefficientSet) -> None:
    atomic_write(path, format_coefficients(coeffs).encode("utf-8"))


def parse_coefficients(text: str) -> CoefficientSet:
    meta: dict[str, str] = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if ":" in line:
                key, value = line[1:].split(":", 1)
                meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line.strip() != "j,s,m,n,re,im":
                raise FormatError(f"line {lineno}: expected header 'j,s,m,n,re,im', got {line!r}")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise FormatError(f"line {lineno}: expected 6 fields, got {len(fields)}")
        try:
            j, s, m, n = (int(v) for v in fields[:4])
            re_, im_ = float(fields[4]), float(fields[5])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if (s, m, n) != smn_from_j(j):
            raise FormatError(f"line {lineno}: (s, m, n) = {(s, m, n)} does not match j = {j}")
        rows.append((j, complex(re_, im_)))
    try:
        n_max = int(meta["n_max"])
        med = Medium(float(meta["frequency"]), float(meta["k"]), float(meta["eta"]))
        kind = normalize_kind(meta["kind"])
    except KeyError as exc:
        raise FormatError(f"missing metadata key {exc}") from None
    except ValueError as exc:
        raise FormatError(f"bad metadata: {exc}") from None
    js = [j for j, _ in rows]
    if js != list(range(1, mode_count(n_max) + 1)):
        raise FormatError(f"j values must run contiguously from 1 to {mode_count(n_max)}")
    return CoefficientSet(kind, np.array([z for _, z in rows]), ModeSet(n_max), med)


def read_coefficients(path) -> CoefficientSet:
    return parse_coefficients(_read_bytes(path).decode("utf-8"))


# ----------------------------------------------------------------------------
# channel matrix CSV


def format_complex(z: complex) -> str:
    re_, im_ = repr(float(z.real)), repr(float(z.imag))
    if not im_.startswith("-"):
        im_ = "+" + im_
    return f"{re_}{im_}j"


def write_channel_matrix(path, M: ChannelMatrix) -> None:
    lines = [f"N={M.size},role={M.role}"]
    for row in M.entries:
        lines.append(",".join(format_complex(z) for z in row))
    atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_channel_matrix(path) -> ChannelMatrix:
    lines = [ln for ln in _read_bytes(path).decode("utf-8").splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty channel matrix file")
    try:
        meta = dict(part.split("=", 1) for part in lines[0].split(","))
        N = int(meta["N"])
        role = meta.get("role", "M")
    except (ValueError, KeyError):
        raise FormatError(f"first line must be 'N=<count>,role=<M|M11>', got {lines[0]!r}") from None
    if len(lines) - 1 != N:
        raise FormatError(f"expected {N} matrix rows, got {len(lines) - 1}")
    entries = np.empty((N, N), dtype=complex)
    for i, line in enumerate(lines[1:]):
        tokens = line.split(",")
        if len(tokens) != N:
            raise FormatError(f"row {i + 1}: expected {N} entries, got {len(tokens)}")
        try:
            entries[i] = [complex(t.strip()) for t in tokens]
        except ValueError as exc:
            raise FormatError(f"row {i + 1}: {exc}") from None
    return ChannelMatrix(entries, role)


# ----------------------------------------------------------------------------
# far-field CSV

FIELD_HEADER = "theta_deg,phi_deg,re_Etheta,im_Etheta,re_Ephi,im_Ephi"
DIRECTIVITY_HEADER = "theta_deg,phi_deg,D_dBi"


def _grid_deg(pattern: FarFieldPattern):
    th = pattern.theta_deg if pattern.theta_deg is not None else np.rad2deg(pattern.theta)
    ph = pattern.phi_deg if pattern.phi_deg is not None else np.rad2deg(pattern.phi)
    return th, ph


def write_farfield(path, pattern: FarFieldPattern) -> None:
    th, ph = _grid_deg(pattern)
    out = [FIELD_HEADER]
    for i, t in enumerate(th):
        for j, p in enumerate(ph):
            et, ep = pattern.E_theta[i, j], pattern.E_phi[i, j]
            out.append(
                f"{float(t)!r},{float(p)!r},{float(et.real)!r},{float(et.imag)!r},"
                f"{float(ep.real)!r},{float(ep.imag)!r}"
            )
    atomic_write(path, ("\n".join(out) + "\n").encode("utf-8"))


def write_directivity(path, theta_deg, phi_deg, D) -> None:
    out = [DIRECTIVITY_HEADER]
    for i, t in enumerate(theta_deg):
        for j, p in enumerate(phi_deg):
            out.append(f"{float(t)!r},{float(p)!r},{float(D[i, j])!r}")
    atomic_write(path, ("\n".join(out) + "\n").encode("utf-8"))


def _grid_from_rows(rows, ncols):
    arr = np.array(rows, dtype=float).reshape(-1, ncols)
    th = np.unique(arr[:, 0])
    ph = np.unique(arr[:, 1])
    if len(arr) != len(th) * len(ph):
        raise FormatError("far-field rows do not form a full (theta, phi) grid")
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    if not np.array_equal(order, np.arange(len(arr))):
        raise FormatError("far-field rows must be sorted by (theta, phi)")
    return th, ph, arr[:, 2:].reshape(len(th), len(ph), ncols - 2)


def read_farfield(path, medium: Medium):
    """Read either far-field flavour.

    Returns a :class:`FarFieldPattern` for field files, or
    ``(theta_deg, phi_deg, D_dBi)`` for directivity files.
    """
    text = _read_bytes(path).decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = ",".join(next(reader, []))
    if header not in (FIELD_HEADER, DIRECTIVITY_HEADER):
        raise FormatError(f"unknown far-field header {header!r}")
    ncols = 6 if header == FIELD_HEADER else 3
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != ncols:
            raise FormatError(f"line {lineno}: expected {ncols} fields, got {len(row)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    th, ph, vals = _grid_from_rows(rows, ncols)
    if ncols == 3:
        return th, ph, vals[..., 0]
    return FarFieldPattern(
        np.deg2rad(th), np.deg2rad(ph), vals[..., 0] + 1j * vals[..., 1], vals[..., 2] + 1j * vals[..., 3],
        medium, th, ph,
    )


# ----------------------------------------------------------------------------
# mesh metadata


def write_mesh_metadata(path, box: BoxSpec, mesh: SurfaceMesh) -> None:
    doc = {
        "format": "box-mesh",
        "center": list(box.center),
        "half_extents": list(box.half_extents),
        "cells_per_face": [list(p) for p in box.cells_per_face],
        "nodes_per_cell": box.nodes_per_cell,
        "samples": len(mesh),
        "area": mesh.area,
        "provenance": format_boxspec(box),
    }
    atomic_write(path, (json.dumps(doc, indent=2) + "\n").encode("utf-8"))
