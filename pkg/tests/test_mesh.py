import numpy as np
import pytest

from fsdg import build_cartesian_mesh, partition_from_labels, partition_stripes
from fsdg.mesh import BOUNDARY, INTERIOR


def test_counts_2x2():
    mesh = build_cartesian_mesh(2, 2, (0, 1, 0, 1))
    assert mesh.n_cells == 4
    assert len(mesh.faces) == 12
    assert len(mesh.interior_faces()) == 4
    assert len(mesh.boundary_faces()) == 8


def test_cell_numbering_column_major():
    mesh = build_cartesian_mesh(3, 2, (0, 3, 0, 2))
    # cell id = ix*ny + iy
    assert np.allclose(mesh.barycenters[0], [0.5, 0.5])
    assert np.allclose(mesh.barycenters[1], [0.5, 1.5])
    assert np.allclose(mesh.barycenters[2], [1.5, 0.5])
    assert np.allclose(mesh.diameters, np.hypot(1.0, 1.0))
    assert np.allclose(mesh.measures, 1.0)


def test_normals():
    mesh = build_cartesian_mesh(3, 3, (0, 1, 0, 1))
    for f in mesh.faces:
        assert np.isclose(np.linalg.norm(f.normal), 1.0)
        if f.kind == INTERIOR:
            t1, t2 = f.owners
            assert t1 < t2
            # normal points from the lower-id owner toward the higher
            direction = mesh.barycenters[t2] - mesh.barycenters[t1]
            assert f.normal @ direction > 0
        else:
            assert f.kind == BOUNDARY
            outward = f.center - mesh.barycenters[f.owners[0]]
            assert f.normal @ outward > 0


def test_face_quadrature_integrates_linears():
    mesh = build_cartesian_mesh(2, 2, (0, 2, 0, 2))
    f = mesh.faces[mesh.interior_faces()[0]]
    pts, w = f.quadrature(2)
    val = w @ (3.0 * pts[:, 0] + pts[:, 1] - 1.0)
    exact = f.measure * (3.0 * f.center[0] + f.center[1] - 1.0)
    assert np.isclose(val, exact)


def test_bad_mesh_args():
    with pytest.raises(ValueError):
        build_cartesian_mesh(0, 2, (0, 1, 0, 1))
    with pytest.raises(ValueError):
        build_cartesian_mesh(2, 2, (0, 0, 0, 1))


def test_partition_stripes():
    mesh = build_cartesian_mesh(4, 3, (0, 1, 0, 1))
    part = partition_stripes(mesh, 4)
    assert part.K == 4
    counts = np.bincount(part.owner, minlength=4)
    assert counts.sum() == mesh.n_cells
    assert counts.max() - counts.min() <= 1
    # interface faces have owners in the two named subdomains
    for (i, j), fids in part.interface_faces.items():
        assert i < j
        for fid in fids:
            t1, t2 = mesh.faces[fid].owners
            assert {part.owner[t1], part.owner[t2]} == {i, j}
    # internal faces of a subdomain never appear on an interface
    all_interface = {fid for fids in part.interface_faces.values() for fid in fids}
    for i in range(part.K):
        assert not (set(part.internal_faces(mesh, i)) & all_interface)


def test_partition_stripes_k1():
    mesh = build_cartesian_mesh(3, 3, (0, 1, 0, 1))
    part = partition_stripes(mesh, 1)
    assert np.all(part.owner == 0)
    assert part.interface_faces == {}


def test_partition_from_labels():
    mesh = build_cartesian_mesh(2, 2, (0, 1, 0, 1))
    part = partition_from_labels(mesh, [0, 1, 1, 0])
    assert part.K == 2
    with pytest.raises(ValueError):
        partition_from_labels(mesh, [0, 2, 2, 0])     # not dense
    with pytest.raises(ValueError):
        partition_from_labels(mesh, [0, 1, 1])        # wrong length
    with pytest.raises(ValueError):
        partition_stripes(mesh, 0)
