import numpy as np
import pytest

from swfdeembed import BoxSpec, DomainError, FieldTrace, SurfaceMesh, build_box_mesh


def test_unit_cube_bookkeeping():
    mesh = build_box_mesh(BoxSpec((0, 0, 0), (0.5, 0.5, 0.5), 4))
    assert len(mesh) == 96
    assert mesh.area == pytest.approx(6.0, rel=1e-12)
    assert np.all(np.abs(mesh.normal_flux()) < 1e-12)
    assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_refinement_keeps_area(q):
    box = BoxSpec((0.1, -0.2, 0.3), (0.4, 0.25, 0.6), ((3, 5), (4, 2), (6, 3)), q)
    coarse = build_box_mesh(box)
    fine = build_box_mesh(BoxSpec(box.center, box.half_extents, tuple((2 * a, 2 * b) for a, b in box.cells_per_face), q))
    assert len(fine) == 4 * len(coarse)
    assert fine.area == pytest.approx(box.area, rel=1e-12)
    assert coarse.area == pytest.approx(box.area, rel=1e-12)
    assert np.all(np.abs(fine.normal_flux()) < 1e-12)


def test_no_sample_on_edges():
    box = BoxSpec.cube(1.0, 6, nodes_per_cell=2)
    mesh = build_box_mesh(box)
    d = np.abs(mesh.points - np.asarray(box.center))
    on_face = np.isclose(d, 0.5, rtol=0, atol=1e-15)
    assert np.all(on_face.sum(axis=1) == 1)


def test_tangents_orthonormal():
    mesh = build_box_mesh(BoxSpec.cube(2.0, 3))
    t1, t2 = mesh.tangents()
    np.testing.assert_allclose(np.cross(t1, t2), mesh.normals, atol=1e-15)
    np.testing.assert_allclose(np.einsum("pi,pi->p", t1, mesh.normals), 0, atol=1e-15)


def test_enclosure_and_solid_angle():
    box = BoxSpec.cube(1.0, 8)
    mesh = build_box_mesh(box)
    assert mesh.encloses((0.1, 0.2, -0.3))
    assert not mesh.encloses((0.6, 0, 0))
    assert mesh.solid_angle((0.1, 0.0, 0.0)) == pytest.approx(4 * np.pi, rel=1e-2)
    assert abs(mesh.solid_angle((2.0, 0.0, 0.0))) < 1e-2
    external = SurfaceMesh(mesh.points, mesh.normals, mesh.weights, True, None)
    assert external.encloses((0.1, 0.2, -0.3)) and not external.encloses((3, 0, 0))
    assert box.on_surface((0.5, 0.1, 0.0)) and not box.on_surface((0.4, 0.1, 0.0))


@pytest.mark.parametrize(
    "kwargs",
    [dict(half_extents=(0.5, 0, 0.5)), dict(half_extents=(0.5, -1, 0.5)), dict(cells_per_face=1), dict(nodes_per_cell=0)],
)
def test_degenerate_specs(kwargs):
    args = dict(center=(0, 0, 0), half_extents=(0.5, 0.5, 0.5), cells_per_face=4)
    args.update(kwargs)
    with pytest.raises(DomainError):
        BoxSpec(**args)


def test_trace_validation():
    mesh = build_box_mesh(BoxSpec.cube(1.0, 2))
    z = np.zeros((len(mesh), 3))
    FieldTrace(mesh, z, z, 1e9)
    with pytest.raises(DomainError):
        FieldTrace(mesh, z[:-1], z, 1e9)
    bad = z.copy()
    bad[0, 0] = np.nan
    with pytest.raises(DomainError):
        FieldTrace(mesh, bad, z, 1e9)
    with pytest.raises(DomainError):
        FieldTrace(mesh, z, z, 0.0)
