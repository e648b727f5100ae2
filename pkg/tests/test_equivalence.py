import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swfdeembed import (
    BoxSpec,
    ChannelMatrix,
    CoefficientSet,
    DipoleSource,
    DomainError,
    EquivalenceCase,
    FarFieldPattern,
    Medium,
    ModeSet,
    NumericalError,
    Scene,
    SignalFlowModel,
    apply_channel,
    build_box_mesh,
    coefficient_power,
    decompose_radiating,
    directivity,
    equivalent_source,
    love_currents,
    radiate_currents,
    sample_scene_on_mesh,
    solve_equivalent_flow,
    solve_original_flow,
    superpose_farfields,
)
from swfdeembed.equivalence import angle_grid, angle_grid_deg, pattern_power
from swfdeembed.oracles import scene_fields
from swfdeembed.swf import farfield_patterns

MED = Medium.free_space(1e9)
MS = ModeSet(2)


def _vec(rng, kind="b", ms=MS):
    return CoefficientSet(kind, rng.normal(size=ms.count) + 1j * rng.normal(size=ms.count), ms, MED)


def _mat(rng, norm, n=MS.count):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A * (norm / np.linalg.norm(A, 2))


def test_case_mappings():
    b = CoefficientSet.unit("b", 1, MS, MED)
    a = b.replace(values=0.2 * b.values, kind="a")
    bp, ap = equivalent_source(EquivalenceCase.OUTGOING_CORRECTED, b, a)
    assert bp[1] == pytest.approx(0.8) and not np.any(ap.values)
    assert bp.kind == "bprime" and ap.kind == "a"
    bp, ap = equivalent_source(EquivalenceCase.LOVE, b, a)
    assert np.array_equal(bp.values, b.values) and np.array_equal(ap.values, -a.values)
    bp, ap = equivalent_source("naive", b, a)
    assert np.array_equal(bp.values, b.values) and not np.any(ap.values)


def test_cases_coincide_without_incoming(rng):
    b = _vec(rng)
    zero = CoefficientSet.zeros("a", MS, MED)
    outs = [equivalent_source(c, b, zero) for c in EquivalenceCase]
    for bp, ap in outs:
        assert np.array_equal(bp.values, b.values) and not np.any(ap.values)


def test_mode_set_mismatch(rng):
    with pytest.raises(DomainError):
        equivalent_source(EquivalenceCase.LOVE, _vec(rng), CoefficientSet.zeros("a", ModeSet(1), MED))


def test_original_flow_limits(rng):
    N = MS.count
    T = rng.normal(size=N) + 1j * rng.normal(size=N)
    S = _mat(rng, 0.5)
    sol = solve_original_flow(SignalFlowModel(T, S, ChannelMatrix(np.zeros((N, N)), "M11"), 2.0))
    np.testing.assert_allclose(sol.b, 2 * T) and np.testing.assert_array_equal(sol.a, 0)
    M11 = _mat(rng, 0.7)
    sol = solve_original_flow(SignalFlowModel(T, np.zeros((N, N)), ChannelMatrix(M11, "M11")))
    np.testing.assert_allclose(sol.b, T)
    np.testing.assert_allclose(sol.a, M11 @ T)


def test_original_flow_residuals(rng):
    N = MS.count
    for _ in range(10):
        T = rng.normal(size=N) + 1j * rng.normal(size=N)
        S = _mat(rng, 0.95)
        M11 = _mat(rng, 0.9)
        model = SignalFlowModel(T, S, ChannelMatrix(M11, "M11"), 1.5, R=T.conj())
        sol = solve_original_flow(model)
        assert np.linalg.norm(sol.b - (T * 1.5 + S @ sol.a)) < 1e-12 * np.linalg.norm(sol.b)
        assert np.linalg.norm(sol.a - M11 @ sol.b) < 1e-12 * np.linalg.norm(sol.a)
        assert sol.w == pytest.approx(T.conj() @ sol.a)
        assert np.array_equal(model.S_prime, np.eye(N))


def test_equivalent_flow_corrected_round_trip(rng):
    for _ in range(20):
        M11 = ChannelMatrix(_mat(rng, rng.uniform(0.05, 0.89)), "M11")
        b = _vec(rng)
        a = b.replace(values=M11.entries @ b.values, kind="a")
        bh, ah = solve_equivalent_flow(*equivalent_source(EquivalenceCase.OUTGOING_CORRECTED, b, a), M11)
        assert np.linalg.norm(bh.values - b.values) < 1e-12 * b.norm()
        assert np.linalg.norm(ah.values - a.values) < 1e-12 * a.norm()
        bh, _ = solve_equivalent_flow(*equivalent_source(EquivalenceCase.NAIVE_OUTGOING, b, a), M11)
        assert np.linalg.norm(bh.values - b.values) > 1e-3 * b.norm()


def test_love_case_through_flow_is_not_identity(rng):
    """Love's (b, -a) through the flow algebra gives (I - M11)^-1 (b + a), not b."""
    M11 = ChannelMatrix(_mat(rng, 0.5), "M11")
    b = _vec(rng)
    a = b.replace(values=M11.entries @ b.values, kind="a")
    bh, _ = solve_equivalent_flow(*equivalent_source(EquivalenceCase.LOVE, b, a), M11)
    expect = np.linalg.solve(np.eye(MS.count) - M11.entries, b.values + a.values)
    np.testing.assert_allclose(bh.values, expect, rtol=1e-12)
    assert np.linalg.norm(bh.values - b.values) > 1e-3 * b.norm()


def test_equivalent_flow_trivial(rng):
    bp = _vec(rng, "bprime")
    bh, ah = solve_equivalent_flow(bp, CoefficientSet.zeros("a", MS, MED), ChannelMatrix(np.zeros((MS.count,) * 2), "M11"))
    np.testing.assert_array_equal(bh.values, bp.values)
    assert not np.any(ah.values)


def test_singular_flow_reports_condition(rng):
    with pytest.raises(NumericalError, match="condition"):
        solve_equivalent_flow(_vec(rng, "bprime"), CoefficientSet.zeros("a", MS, MED), ChannelMatrix(np.eye(MS.count), "M11"))


def test_apply_channel(rng):
    b = _vec(rng)
    N = MS.count
    np.testing.assert_array_equal(apply_channel(ChannelMatrix(np.eye(N)), b).values, b.values)
    assert not np.any(apply_channel(ChannelMatrix(np.zeros((N, N))), b).values)
    M = ChannelMatrix(_mat(rng, 2.0))
    x, y = _vec(rng), _vec(rng)
    alpha = 0.3 - 1.7j
    lhs = apply_channel(M, x.replace(values=alpha * x.values + y.values)).values
    rhs = alpha * apply_channel(M, x).values + apply_channel(M, y).values
    assert np.linalg.norm(lhs - rhs) < 1e-12 * np.linalg.norm(rhs)
    with pytest.raises(DomainError):
        apply_channel(ChannelMatrix(np.eye(3)), b)
    with pytest.raises(DomainError):
        ChannelMatrix(np.zeros((2, 3)))


def test_love_currents_field_level():
    lam = MED.wavelength
    mesh = build_box_mesh(BoxSpec.cube(lam, 8, nodes_per_cell=6))
    scene = Scene([DipoleSource((0.1 * lam, 0, 0.05 * lam), (0, 1e-3, 1e-3))], MED)
    tr = sample_scene_on_mesh(scene, mesh)
    cur = love_currents(tr)
    n = mesh.normals
    assert np.max(np.abs(np.einsum("pi,pi->p", cur.J, n))) < 1e-12 * np.max(np.abs(cur.J))
    assert np.max(np.abs(np.einsum("pi,pi->p", cur.M, n))) < 1e-12 * np.max(np.abs(cur.M))
    idx = [0, 17, 101, 222, 300]
    np.testing.assert_array_equal(cur.J[idx], np.cross(n[idx], tr.H[idx]))
    outside = np.array([[2 * lam, 0, 0], [0, 1.5 * lam, 0.3 * lam], [-lam, -lam, lam]])
    inside = np.array([[-0.2 * lam, 0, 0], [0, 0.2 * lam, -0.1 * lam], [0.0, 0, -0.25 * lam]])
    E, H = radiate_currents(cur, MED, outside)
    E0, H0 = scene_fields(scene, outside)
    assert np.linalg.norm(E - E0) < 1e-9 * np.linalg.norm(E0)
    assert np.linalg.norm(H - H0) < 1e-9 * np.linalg.norm(H0)
    Ei, _ = radiate_currents(cur, MED, inside)
    E0i, _ = scene_fields(scene, inside)
    assert np.linalg.norm(Ei) < 1e-9 * np.linalg.norm(E0i)


def test_love_currents_zero_E():
    mesh = build_box_mesh(BoxSpec.cube(1.0, 2))
    from swfdeembed import FieldTrace

    H = np.ones((len(mesh), 3))
    cur = love_currents(FieldTrace(mesh, np.zeros_like(H), H, 1e9))
    assert not np.any(cur.M)


def test_single_mode_pattern(rng):
    th, ph = angle_grid(10.0)
    ms = ModeSet(3)
    b = CoefficientSet.unit("bprime", 11, ms, MED)
    pat = superpose_farfields(b, MED, th, ph)
    T, P = np.meshgrid(th, ph, indexing="ij")
    K = farfield_patterns(ms, MED.k, T, P)[10] * MED.k * np.sqrt(MED.eta)
    np.testing.assert_allclose(pat.E_theta, K[..., 0], rtol=1e-14)
    np.testing.assert_allclose(pat.E_phi, K[..., 1], rtol=1e-14)
    with pytest.raises(DomainError):
        superpose_farfields(b.replace(kind="a"), MED, th, ph)


def test_directivity_normalization(rng):
    th, ph = angle_grid(1.0)
    b = _vec(rng, "bprime", ModeSet(3))
    pat = superpose_farfields(b, MED, th, ph)
    D = directivity(pat, coefficient_power(b))
    lin = 10 ** (D / 10) / (4 * np.pi)
    ring = lin.sum(axis=1) * (2 * np.pi / len(ph))
    assert np.trapezoid(ring * np.sin(th), th) == pytest.approx(1.0, abs=1e-3)
    assert pattern_power(pat) == pytest.approx(coefficient_power(b), rel=1e-3)
    # global scaling leaves D unchanged
    scaled = directivity(pat.scaled(3 - 4j), coefficient_power(b) * 25)
    np.testing.assert_allclose(scaled, D, atol=1e-12)


def test_isotropic_pattern_is_zero_dbi():
    th, ph = angle_grid(5.0)
    U0 = 0.25
    amp = np.sqrt(U0 * 2 * MED.eta * MED.k**2)
    pat = FarFieldPattern(th, ph, np.full((len(th), len(ph)), amp, complex), np.zeros((len(th), len(ph)), complex), MED)
    D = directivity(pat, 4 * np.pi * U0)
    np.testing.assert_allclose(D, 0.0, atol=1e-12)
    with pytest.raises(DomainError):
        directivity(pat, 0.0)


def test_origin_dipole_peak_directivity():
    lam = MED.wavelength
    mesh = build_box_mesh(BoxSpec.cube(lam, 16, nodes_per_cell=2))
    tr = sample_scene_on_mesh(Scene([DipoleSource((0, 0, 0), (0, 0, 1e-3))], MED), mesh)
    bp = decompose_radiating(tr, ModeSet(4), MED, (0, 0, 0))
    th, ph = angle_grid_deg(1.0, 0.0)
    D = directivity(superpose_farfields(bp, MED, th, ph, degrees=True), coefficient_power(bp))[:, 0]
    assert th[np.argmax(D)] == 90.0
    assert D.max() == pytest.approx(10 * np.log10(1.5), abs=0.01)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.89), st.integers(0, 2**32 - 1))
def test_corrected_case_property(norm, seed):
    rng = np.random.default_rng(seed)
    M11 = ChannelMatrix(_mat(rng, norm) if norm > 0 else np.zeros((MS.count,) * 2), "M11")
    b = _vec(rng)
    a = b.replace(values=M11.entries @ b.values, kind="a")
    bh, ah = solve_equivalent_flow(*equivalent_source(EquivalenceCase.OUTGOING_CORRECTED, b, a), M11)
    assert np.linalg.norm(bh.values - b.values) <= 1e-12 * b.norm()
