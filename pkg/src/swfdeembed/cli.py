"""Command-line front end.  Every subcommand reads files, calls one library
routine and writes files; no numerics live here.

Exit codes: 0 success, 1 validation or numerical failure, 2 usage or format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .decompose import (
    CoefficientSet,
    condition_report,
    decompose_incoming,
    decompose_leastsquares,
    decompose_outgoing,
    decompose_radiating,
)
from .equivalence import (
    ChannelMatrix,
    EquivalenceCase,
    SignalFlowModel,
    angle_grid_deg,
    apply_channel,
    coefficient_power,
    directivity,
    equivalent_source,
    solve_equivalent_flow,
    solve_original_flow,
    superpose_farfields,
)
from .errors import DomainError, FormatError, NumericalError
from .formats import (
    atomic_write,
    read_channel_matrix,
    read_coefficients,
    read_nfd,
    write_coefficients,
    write_directivity,
    write_farfield,
    write_mesh_metadata,
    write_nfd,
)
from .modes import ModeSet
from .oracles import DipoleSource, Scene, sample_scene_on_mesh, trace_from_coefficients
from .surface import BoxSpec, build_box_mesh
from .swf import Medium


class UsageError(Exception):
    pass


def _triple(text: str, what: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise UsageError(f"{what} must be three comma-separated numbers, got {text!r}")
    return vals  # type: ignore[return-value]


def parse_dipole(text: str) -> DipoleSource:
    """'kind,x,y,z,mx,my,mz'; moments accept Python complex literals such as 1e-3j."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 7:
        raise UsageError(f"--dipole needs 'kind,x,y,z,mx,my,mz', got {text!r}")
    kind = {"e": "electric", "m": "magnetic"}.get(parts[0], parts[0])
    try:
        pos = tuple(float(v) for v in parts[1:4])
        mom = tuple(complex(v) for v in parts[4:7])
    except ValueError:
        raise UsageError(f"malformed --dipole {text!r}") from None
    return DipoleSource(pos, mom, kind)


def load_scene(path) -> Scene:
    """JSON: {"frequency": Hz, "sources": [{"kind", "position": [3], "moment": [[re, im] x 3]}]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        med = Medium.free_space(float(doc["frequency"]))
        sources = []
        for s in doc["sources"]:
            mom = [complex(*v) if isinstance(v, list) else complex(v) for v in s["moment"]]
            sources.append(DipoleSource(tuple(s["position"]), tuple(mom), s.get("kind", "electric")))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed scene file {path}: {exc}") from None
    return Scene(sources, med, dict(doc.get("notes", {})))


def box_from_args(args) -> BoxSpec:
    center = _triple(args.center, "--center")
    if args.half_extents is not None:
        half = _triple(args.half_extents, "--half-extents")
    else:
        half = (args.side / 2.0,) * 3
    return BoxSpec(center, half, args.cells, args.nodes_per_cell)


def _add_box_args(p):
    p.add_argument("--side", type=float, default=0.3, help="cube edge length in m (default 0.3)")
    p.add_argument("--half-extents", help="hx,hy,hz in m (overrides --side)")
    p.add_argument("--center", default="0,0,0", help="box center x,y,z in m")
    p.add_argument("--cells", type=int, default=32, help="cells per face direction")
    p.add_argument("--nodes-per-cell", type=int, default=1, help="1 = midpoint, q > 1 = q x q Gauss")


# ----------------------------------------------------------------------------
# subcommands


def cmd_mesh(args) -> int:
    box = box_from_args(args)
    mesh = build_box_mesh(box)
    write_mesh_metadata(args.output, box, mesh)
    return 0


def cmd_synth(args) -> int:
    box = box_from_args(args)
    mesh = build_box_mesh(box)
    if args.coefficients:
        if args.dipole or args.scene:
            raise UsageError("--coefficients cannot be combined with --dipole/--scene")
        b = read_coefficients(args.coefficients)
        if b.kind not in ("b", "bprime"):
            raise UsageError(f"--coefficients must hold b coefficients, got kind {b.kind!r}")
        b = b.replace(kind="b")
        a = read_coefficients(args.incoming) if args.incoming else CoefficientSet.zeros("a", b.modeset, b.medium)
        if a.kind != "a" or a.modeset != b.modeset:
            raise UsageError("--incoming must hold a coefficients with the same n_max")
        trace = trace_from_coefficients(b, a, mesh, _triple(args.origin, "--origin"))
    else:
        if args.scene:
            scene = load_scene(args.scene)
            if args.freq is not None and args.freq != scene.medium.frequency:
                raise UsageError(f"--freq {args.freq!r} Hz disagrees with scene frequency {scene.medium.frequency!r} Hz")
        else:
            if not args.dipole:
                raise UsageError("synth needs --dipole, --scene or --coefficients")
            if args.freq is None:
                raise UsageError("--freq is required with --dipole")
            scene = Scene([parse_dipole(d) for d in args.dipole], Medium.free_space(args.freq))
        trace = sample_scene_on_mesh(scene, mesh)
    write_nfd(args.output, trace)
    return 0


def _check_freq(trace_freq: float, requested) -> None:
    if requested is not None and not math.isclose(trace_freq, requested, rel_tol=1e-12, abs_tol=0.0):
        raise UsageError(f"--freq {requested!r} Hz does not match the file frequency {trace_freq!r} Hz")


def decompose_trace(trace, n_max: int, basis: str, origin):
    med = Medium.free_space(trace.frequency)
    ms = ModeSet(n_max)
    if basis == "b":
        return decompose_outgoing(trace, ms, med, origin)
    if basis == "a":
        return decompose_incoming(trace, ms, med, origin)
    if basis == "bprime":
        return decompose_radiating(trace, ms, med, origin)
    return decompose_leastsquares(trace, ms, med, origin, basis=(4,)).as_set(4)


def cmd_decompose(args) -> int:
    trace = read_nfd(args.input)
    _check_freq(trace.frequency, args.freq)
    coeffs = decompose_trace(trace, args.nmax, args.basis, _triple(args.origin, "--origin"))
    write_coefficients(args.output, coeffs)
    return 0


def cmd_deembed(args) -> int:
    b = read_coefficients(args.coefficients)
    M = read_channel_matrix(args.channel)
    if M.role not in ("M",):
        raise UsageError(f"deembed needs a channel matrix with role M, got {M.role!r}")
    write_coefficients(args.output, apply_channel(M, b))
    return 0


def flow_report(T: CoefficientSet, S: ChannelMatrix, M11: ChannelMatrix, v: complex, case: str) -> str:
    model = SignalFlowModel(T.values, S.entries, M11, v)
    orig = solve_original_flow(model)
    b = T.replace(values=orig.b, kind="b")
    a = T.replace(values=orig.a, kind="a")
    bp, ap = equivalent_source(EquivalenceCase(case), b, a)
    b_hat, a_hat = solve_equivalent_flow(bp, ap, M11)
    out = io.StringIO()
    mismatch = np.linalg.norm(b_hat.values - orig.b) / max(np.linalg.norm(orig.b), np.finfo(float).tiny)
    out.write(f"# case: {EquivalenceCase(case).value}\n")
    out.write(f"# relative_mismatch_b: {float(mismatch)!r}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["j", "re_b", "im_b", "re_a", "im_a", "re_bhat", "im_bhat", "re_ahat", "im_ahat"])
    for j in range(len(T)):
        row = [j + 1]
        for z in (orig.b[j], orig.a[j], b_hat.values[j], a_hat.values[j]):
            row += [repr(float(z.real)), repr(float(z.imag))]
        w.writerow(row)
    return out.getvalue()


def cmd_flow(args) -> int:
    T = read_coefficients(args.T)
    S = read_channel_matrix(args.S)
    M11 = read_channel_matrix(args.M11)
    try:
        v = complex(args.v)
    except ValueError:
        raise UsageError(f"--v must be a complex literal, got {args.v!r}") from None
    atomic_write(args.output, flow_report(T, S, M11, v, args.case).encode("utf-8"))
    return 0


def _parse_cut(text):
    if text is None:
        return None
    key, _, value = text.partition("=")
    if key.strip() != "phi" or not value:
        raise UsageError(f"--cut must look like phi=<deg>, got {text!r}")
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"--cut must look like phi=<deg>, got {text!r}") from None


def farfield_from_coefficients(bp: CoefficientSet, step_deg: float, cut_phi_deg):
    th, ph = angle_grid_deg(step_deg, cut_phi_deg)
    return superpose_farfields(bp, bp.medium, th, ph, degrees=True)


def cmd_farfield(args) -> int:
    bp = read_coefficients(args.coefficients)
    if not args.step > 0:
        raise UsageError("--step must be positive")
    pattern = farfield_from_coefficients(bp, args.step, _parse_cut(args.cut))
    if args.quantity == "field":
        write_farfield(args.output, pattern)
    else:
        D = directivity(pattern, coefficient_power(bp))
        write_directivity(args.output, pattern.theta_deg, pattern.phi_deg, D)
    return 0


def cmd_validate(args) -> int:
    from .validation import CHECKS, run_all

    only = None
    if args.criteria:
        try:
            only = [int(c) for c in args.criteria.split(",")]
        except ValueError:
            raise UsageError(f"--criteria must be comma-separated integers, got {args.criteria!r}") from None
        unknown = [c for c in only if c not in CHECKS]
        if unknown:
            raise UsageError(f"unknown criteria {unknown}; choose from {sorted(CHECKS)}")
    results = run_all(only, stream=sys.stdout)
    return 0 if all(r.passed for r in results) else 1


def compare_ls_rows(frequency: float, n_max: int, kr_corners, cells: int, seed: int):
    """Condition numbers of the F(1) and F(4) designs plus, on a clean synthesized
    outgoing trace with known b, the relative errors of the pseudo-inverse and of
    both orthogonality operators."""
    med = Medium.free_space(frequency)
    ms = ModeSet(n_max)
    rng = np.random.default_rng(seed)
    rows = []
    for kr in kr_corners:
        side = 2.0 * kr / (med.k * math.sqrt(3.0))
        mesh = build_box_mesh(BoxSpec.cube(side, cells, nodes_per_cell=2))
        b = CoefficientSet("b", rng.normal(size=ms.count) + 1j * rng.normal(size=ms.count), ms, med)
        trace = trace_from_coefficients(b, CoefficientSet.zeros("a", ms, med), mesh)
        out = decompose_outgoing(trace, ms, med, (0, 0, 0)).values
        rad = decompose_radiating(trace, ms, med, (0, 0, 0)).values
        ls = decompose_leastsquares(trace, ms, med, (0, 0, 0), basis=(4,)).coefficients[4]
        ref = np.linalg.norm(b.values)
        errors = {
            "ls_error": float(np.linalg.norm(ls - b.values) / ref),
            "orth_outgoing_error": float(np.linalg.norm(out - b.values) / ref),
            "orth_radiating_error": float(np.linalg.norm(rad - b.values) / ref),
            "ls_vs_orthogonality": float(np.linalg.norm(ls - out) / np.linalg.norm(out)),
        }
        for c in (1, 4):
            row = condition_report(mesh, ms, med, (0, 0, 0), basis=(c,)).as_row()
            row["side_m"] = side
            row.update(errors)
            rows.append(row)
    return rows


COMPARE_LS_COLUMNS = (
    "side_m", "kr_max", "basis", "condition", "sigma_max", "sigma_min", "rows", "cols",
    "ls_error", "orth_outgoing_error", "orth_radiating_error", "ls_vs_orthogonality",
)


def cmd_compare_ls(args) -> int:
    kr = [float(v) for v in args.kr.split(",")]
    rows = compare_ls_rows(args.freq, args.nmax, kr, args.cells, args.seed)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COMPARE_LS_COLUMNS)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in COMPARE_LS_COLUMNS])
    atomic_write(args.output, out.getvalue().encode("utf-8"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swf-deembed", description="Spherical-wave de-embedding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="write box mesh metadata (JSON)")
    _add_box_args(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("synth", help="sample dipoles or SWF coefficients on a box into an NFD1 file")
    _add_box_args(p)
    p.add_argument("--dipole", action="append", default=[], help="kind,x,y,z,mx,my,mz (repeatable)")
    p.add_argument("--scene", help="scene JSON file")
    p.add_argument("--coefficients", help="b coefficient file")
    p.add_argument("--incoming", help="a coefficient file (with --coefficients)")
    p.add_argument("--origin", default="0,0,0")
    p.add_argument("--freq", type=float)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("decompose", help="NFD1 trace to coefficient file")
    p.add_argument("input")
    p.add_argument("--basis", choices=("b", "a", "bprime", "ls"), default="bprime")
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--origin", default="0,0,0")
    p.add_argument("--freq", type=float)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("deembed", help="apply a channel matrix: a_R = M b_T")
    p.add_argument("--coefficients", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_deembed)

    p = sub.add_parser("flow", help="solve the signal flow and its equivalent-source counterpart")
    p.add_argument("--T", required=True, help="transmit coefficient file")
    p.add_argument("--S", required=True, help="antenna scattering matrix file")
    p.add_argument("--M11", required=True, help="environment reflection matrix file")
    p.add_argument("--v", default="1", help="excitation (complex literal)")
    p.add_argument("--case", choices=[c.value for c in EquivalenceCase], default="corrected")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("farfield", help="coefficient file to far-field CSV")
    p.add_argument("coefficients")
    p.add_argument("--cut", help="phi=<deg> for a single cut; full sphere otherwise")
    p.add_argument("--step", type=float, default=1.0, help="angular step in degrees")
    p.add_argument("--quantity", choices=("field", "directivity"), default="field")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_farfield)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 2,3")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare-ls", help="conditioning of F(1) vs F(4) least-squares designs")
    p.add_argument("--freq", type=float, default=1e9)
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--kr", default="1.7,0.18,0.12,0.06", help="corner kr of the cubes")
    p.add_argument("--cells", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compare_ls)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, DomainError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
