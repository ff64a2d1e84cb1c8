import numpy as np
import pytest

from fsdg import (DGSpace, SnapshotSet, assemble, block_assemble, block_solve,
                  build_cartesian_mesh, get_family, identity_bases,
                  indicator_grassmannian, indicator_variance, local_pod,
                  make_adr_system, make_elasticity_system_2d, online_solve,
                  partition_from_labels, partition_stripes, pod, project,
                  reconstruction_scan, repartition, solve,
                  synthetic_rank_one_snapshots)
from fsdg.ddrom import IndicatorField, add_interface_penalty

ADR_BC = {'left': 'dirichlet', 'right': ('robin', 0.2),
          'bottom': 'dirichlet', 'top': 'neumann'}
ELA_BC = {'left': 'dirichlet', 'right': 'neumann',
          'bottom': 'dirichlet', 'top': 'neumann'}


def _adr_setup(nx=4, ny=3, k=1):
    mesh = build_cartesian_mesh(nx, ny, (0, 1, 0, 1))

    def source(pts):
        out = np.zeros((len(pts), 3))
        out[:, 2] = 1.0 + pts[:, 0]
        return out

    sys = make_adr_system(0.2, (1.0, 0.3), 1.5, ADR_BC, source=source)
    return sys, mesh, DGSpace(mesh, k, 3)


def _ela_setup():
    mesh = build_cartesian_mesh(3, 2, (0, 1, 0, 1))
    sys = make_elasticity_system_2d(
        1.0, 2.0, 0.5, ELA_BC, body_force=lambda pts: np.column_stack(
            [np.ones(len(pts)), pts[:, 1]]))
    return sys, mesh, DGSpace(mesh, 1, 6)


@pytest.mark.parametrize("setup", [_adr_setup, _ela_setup])
@pytest.mark.parametrize("K", [1, 2, 4])
def test_block_assembly_equals_monolithic(setup, K):
    sys, mesh, space = setup()
    part = partition_stripes(mesh, K)
    asm = assemble(sys, space, partition=part)
    A2, L2 = block_assemble(asm).reassemble()
    assert np.max(np.abs((asm.A - A2).toarray())) <= 1e-12
    assert np.max(np.abs(asm.L - L2)) <= 1e-12


def test_block_assemble_needs_partition():
    sys, mesh, space = _adr_setup()
    asm = assemble(sys, space)
    with pytest.raises(ValueError):
        block_assemble(asm)


def test_identity_bases_reproduce_fom():
    sys, mesh, space = _adr_setup()
    part = partition_stripes(mesh, 3)
    asm = assemble(sys, space, partition=part)
    z_fom = solve(asm)
    blocks = block_assemble(asm)
    z_dd = block_solve(blocks, identity_bases(blocks))
    assert np.linalg.norm(z_dd - z_fom) <= 1e-8 * np.linalg.norm(z_fom)


def test_k1_ddrom_equals_monodomain_rom():
    family = get_family("adr-smooth")
    mesh = family.mesh(4, 4)
    space = DGSpace(mesh, 1, family.m)
    params = family.sample(6, seed=1)
    X = np.column_stack([solve(assemble(family.make_system(rho), space))
                         for rho in params])
    snaps = SnapshotSet(matrix=X, params=params)
    part = partition_stripes(mesh, 1)
    bases = local_pod(snaps, space, part, 3)
    basis = pod(snaps, r=3)
    for rho, col in zip(params[:3], X.T):
        asm = assemble(family.make_system(rho), space, partition=part)
        z_dd = block_solve(block_assemble(asm), bases)
        z_mono = online_solve(project(asm, basis), basis)
        assert np.linalg.norm(z_dd - z_mono) <= 1e-12 * np.linalg.norm(z_mono)


def test_interface_penalty_vanishes_on_continuous_fields():
    sys, mesh, space = _adr_setup()
    part = partition_stripes(mesh, 2)
    asm = assemble(sys, space, partition=part)
    blocks = block_assemble(asm)
    pen = add_interface_penalty(blocks, 10.0)
    A0, _ = blocks.reassemble()
    A1, _ = pen.reassemble()

    def smooth(pts):
        return np.column_stack([np.sin(pts[:, 0]), pts[:, 1] ** 2,
                                pts[:, 0] * pts[:, 1]])

    v = space.interpolate(smooth)
    # the jump penalty does not act on interface-continuous fields
    assert abs(v @ ((A1 - A0) @ v)) <= 1e-10 * abs(v @ (A0 @ v))
    # but it does act on a discontinuous one
    rng = np.random.default_rng(0)
    w = rng.standard_normal(space.N)
    assert abs(w @ ((A1 - A0) @ w)) > 1e-6
    assert add_interface_penalty(blocks, 0.0) is blocks
    with pytest.raises(ValueError):
        add_interface_penalty(blocks, -1.0)


def test_local_pod_r_list_validation():
    sys, mesh, space = _adr_setup()
    part = partition_stripes(mesh, 2)
    snaps = SnapshotSet(matrix=np.random.default_rng(0).standard_normal(
        (space.N, 4)), params=np.arange(4.0))
    with pytest.raises(ValueError):
        local_pod(snaps, space, part, [1, 1, 1])


def test_variance_indicator_oracle():
    # spatially constant snapshots c_j: I_var(T) = var(c) * |T|
    mesh = build_cartesian_mesh(2, 2, (0, 2, 0, 1))
    space = DGSpace(mesh, 1, 1)
    c = np.array([1.0, 2.0, 4.0])
    X = np.ones((space.N, 3)) * c
    snaps = SnapshotSet(matrix=X, params=c)
    ind = indicator_variance(snaps, space)
    assert np.allclose(ind.values, np.var(c) * 0.5, atol=1e-13)
    # identical snapshots have zero variance
    same = SnapshotSet(matrix=np.ones((space.N, 3)), params=c)
    assert np.allclose(indicator_variance(same, space).values, 0.0, atol=1e-14)
    with pytest.raises(ValueError):
        indicator_variance(SnapshotSet(matrix=X[:, :1], params=c[:1]), space)


def test_grassmannian_rank_one_is_zero():
    mesh = build_cartesian_mesh(3, 2, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 1)
    rng = np.random.default_rng(4)
    mode = rng.standard_normal(space.N)
    X = np.outer(mode, rng.uniform(0.5, 2.0, 6))
    snaps = SnapshotSet(matrix=X, params=np.arange(6.0))
    ind = indicator_grassmannian(snaps, space, n_neigh=2, r_T=1)
    assert np.max(ind.values) <= 1e-12


def test_grassmannian_identity_oracle():
    # one k=1 scalar cell has 4 dofs; identity snapshots give I_G = sqrt(4 - r_T)
    mesh = build_cartesian_mesh(1, 1, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 1)
    snaps = SnapshotSet(matrix=np.eye(4), params=np.arange(4.0))
    for r_t in (1, 2, 3):
        ind = indicator_grassmannian(snaps, space, n_neigh=0, r_T=r_t)
        assert np.isclose(ind.values[0], np.sqrt(4 - r_t), atol=1e-12)
    with pytest.raises(ValueError):
        indicator_grassmannian(snaps, space, n_neigh=0, r_T=5)


def test_grassmannian_full_rank_is_zero():
    # invariant: n_neigh=0 and r_T >= local rank gives an identically zero field
    mesh = build_cartesian_mesh(2, 2, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 1)
    rng = np.random.default_rng(7)
    modes = rng.standard_normal((space.N, 2))
    X = modes @ rng.standard_normal((2, 5))
    snaps = SnapshotSet(matrix=X, params=np.arange(5.0))
    ind = indicator_grassmannian(snaps, space, n_neigh=0, r_T=2)
    assert np.max(ind.values) <= 1e-12


def test_repartition_oracle():
    ind = IndicatorField(values=np.array([3.0, 1.0, 2.0, 4.0]), kind="test")
    labels = repartition(ind, 50)
    assert np.array_equal(labels, [1, 0, 0, 1])
    # determinism and tie-breaking by cell id
    tie = IndicatorField(values=np.array([1.0, 1.0, 1.0, 2.0]), kind="test")
    assert np.array_equal(repartition(tie, 50), [0, 0, 1, 1])
    assert np.array_equal(repartition(tie, 50), repartition(tie, 50))
    with pytest.raises(ValueError):
        repartition(ind, 50, k=3)
    with pytest.raises(ValueError):
        repartition(ind, 0)
    with pytest.raises(ValueError):
        repartition(ind, 10)   # floor(0.4) rounds to an empty low region


def test_reconstruction_scan():
    snaps, space, labels = synthetic_rank_one_snapshots()
    rows = reconstruction_scan(snaps, space, "grassmannian", [50.0, 100.0], 1,
                               n_neigh=0)
    p50, p100 = rows
    assert p100[1] == p100[3]                  # degenerate split: low == global
    assert p50[1] < p50[3]                     # rank-1 region is easy to compress
    # identical snapshots: all errors vanish
    same = SnapshotSet(matrix=np.ones((space.N, 4)), params=np.arange(4.0))
    for row in reconstruction_scan(same, space, "variance", [50.0], 1):
        assert max(row[1], row[2], row[3]) <= 1e-12
    with pytest.raises(ValueError):
        reconstruction_scan(snaps, space, "bogus", [50.0], 1)


def test_two_region_partition_round_trip():
    snaps, space, labels = synthetic_rank_one_snapshots()
    ind = indicator_grassmannian(snaps, space, n_neigh=0, r_T=1)
    got = repartition(ind, 50)
    assert np.array_equal(got, labels)
    part = partition_from_labels(space.mesh, got)
    assert part.K == 2
