import numpy as np
import pytest

from fsdg import (DGSpace, assemble, build_cartesian_mesh, convergence_study,
                  make_adr_system, manufactured_adr, norms, solve)
from fsdg.systems import make_reaction_system

ADR_BC = {'left': 'dirichlet', 'right': 'dirichlet',
          'bottom': 'neumann', 'top': 'neumann'}


def test_unit_cell_mass_matrix():
    # one k=1 cell: the scalar mass matrix is [[4,2,2,1],[2,4,1,2],[2,1,4,2],[1,2,2,4]]/36
    mesh = build_cartesian_mesh(1, 1, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 1)
    asm = assemble(make_reaction_system(m=1, a0=1.0), space)
    ref = np.array([[4, 2, 2, 1], [2, 4, 1, 2], [2, 1, 4, 2], [1, 2, 2, 4]]) / 36.0
    assert np.allclose(asm.X_L.toarray(), ref, atol=1e-15)
    assert np.allclose(asm.A.toarray(), ref, atol=1e-15)


def test_degree_validation():
    mesh = build_cartesian_mesh(2, 2, (0, 1, 0, 1))
    with pytest.raises(ValueError):
        DGSpace(mesh, 0, 1)


def test_interpolation_and_projection():
    mesh = build_cartesian_mesh(3, 2, (0, 1, 0, 1))
    space = DGSpace(mesh, 2, 1)

    def f(pts):
        return (pts[:, 0] ** 2 + 2 * pts[:, 1])[:, None]

    v = space.interpolate(f)
    vals = space.eval_cells(v)
    exact = f(space.cell_quad_points().reshape(-1, 2)).reshape(vals.shape)
    assert np.allclose(vals, exact, atol=1e-13)

    grads = space.eval_grad_cells(v)
    gx = 2 * space.cell_quad_points()[:, :, 0]
    assert np.allclose(grads[:, :, 0, 0], gx, atol=1e-12)
    assert np.allclose(grads[:, :, 0, 1], 2.0, atol=1e-12)


def _poly_problem():
    kappa, mu = 0.4, 1.5
    beta = (1.0, 0.0)

    def exact(pts):
        x = pts[:, 0]
        return np.column_stack([np.full_like(x, -kappa), np.zeros_like(x), x])

    def source(pts):
        x = pts[:, 0]
        return np.column_stack([np.zeros_like(x), np.zeros_like(x),
                                mu * x + beta[0]])

    sys = make_adr_system(kappa, beta, mu, ADR_BC, g=exact, source=source)
    return sys, exact


def test_polynomial_consistency():
    sys, exact = _poly_problem()
    for k in (1, 2):
        mesh = build_cartesian_mesh(3, 2, (0, 1, 0, 1))
        space = DGSpace(mesh, k, 3)
        asm = assemble(sys, space)
        z_exact = space.interpolate(exact)
        res = asm.A @ z_exact - asm.L
        assert np.linalg.norm(res) <= 1e-12 * np.linalg.norm(asm.L)
        z = solve(asm)
        assert np.linalg.norm(z - z_exact) <= 1e-10


def test_adjoint_form_matches():
    sys, _ = _poly_problem()
    mesh = build_cartesian_mesh(3, 3, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 3)
    a1 = assemble(sys, space).A
    a2 = assemble(sys, space, adjoint=True).A
    assert np.max(np.abs((a1 - a2).toarray())) <= 1e-12


def test_discrete_coercivity():
    sys, _ = _poly_problem()
    mesh = build_cartesian_mesh(3, 3, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 3)
    asm = assemble(sys, space)
    rng = np.random.default_rng(0)
    for _ in range(50):
        y = rng.standard_normal(space.N)
        lhs = y @ (asm.A @ y)
        rhs = y @ (asm.X_R @ y)
        assert lhs >= rhs - 1e-10 * (y @ (asm.X_L @ y))


def test_norms_of_polynomial_error():
    sys, exact = _poly_problem()
    mesh = build_cartesian_mesh(4, 4, (0, 1, 0, 1))
    space = DGSpace(mesh, 2, 3)
    asm = assemble(sys, space)
    z = solve(asm)
    rep = norms(asm, space, z, exact=exact)
    assert rep.l2 <= 1e-10
    assert rep.triple <= 1e-9
    assert rep.triple_star <= 1e-8
    # norms of the solution itself are positive and ordered
    full = norms(asm, space, z)
    assert 0 < full.l2 <= full.triple <= full.triple_star


def test_convergence_study_exact_and_errors():
    table = convergence_study(manufactured_adr("polynomial"), [1], [2, 3, 4])
    assert table[1]["status"] == "exact"
    with pytest.raises(ValueError):
        convergence_study(manufactured_adr("polynomial"), [1], [2, 4])


def test_norm_vector_length_check():
    sys, _ = _poly_problem()
    mesh = build_cartesian_mesh(2, 2, (0, 1, 0, 1))
    space = DGSpace(mesh, 1, 3)
    asm = assemble(sys, space)
    with pytest.raises(ValueError):
        norms(asm, space, np.zeros(3))
