"""Friedrichs' systems as evaluable coefficient fields.

A system is A z = A0 z + sum_k A^k d_k z = f with symmetric A^k and the
positivity condition A0 + A0^t - X >= 2*mu0*I, X = sum_k d_k A^k. Boundary
conditions enter through D = sum_k n_k A^k and a monotone, strictly adjoint
operator M via (D - M)(z - g) = 0.

All coefficient callables are vectorized: they take point arrays of shape
(n, d) and return (n, m, m), (n, d, m, m) or (n, m) arrays.
"""

from dataclasses import dataclass, field

import numpy as np


def constant_matrix_field(mat):
    mat = np.asarray(mat, dtype=float)

    def f(pts):
        return np.broadcast_to(mat, (len(pts),) + mat.shape).copy()

    return f


def zero_vector_field(m):
    def f(pts):
        return np.zeros((len(pts), m))

    return f


def matrix_abs(mats):
    """Matrix absolute value of a batch of symmetric matrices, shape (..., m, m)."""
    w, v = np.linalg.eigh(mats)
    return np.einsum('...ij,...j,...kj->...ik', v, np.abs(w), v)


@dataclass(frozen=True)
class FriedrichsSystem:
    m: int
    d: int
    a0: callable                  # (n,d pts) -> (n, m, m)
    ak: callable                  # -> (n, d, m, m)
    div_ak: callable              # X = sum_k d_k A^k, supplied analytically
    source: callable              # f -> (n, m)
    boundary_value: callable      # g -> (n, m)
    boundary_m: callable          # (pts, normals) -> (n, m, m)
    boundary_penalty: callable    # S^b -> (n, m, m)
    si_scale: float               # interface stabilization S^i = si_scale * |D_F|
    mu0: float
    params: dict = field(default_factory=dict)


def boundary_D(sys, n, x=None):
    """D(n) = sum_k n_k A^k at point x (origin by default)."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("normal must be a unit vector")
    if x is None:
        x = np.zeros(sys.d)
    ak = sys.ak(np.asarray(x, dtype=float)[None, :])[0]
    return np.einsum('k,kab->ab', n, ak)


def boundary_D_field(sys, pts, normals):
    ak = sys.ak(pts)
    return np.einsum('nk,nkab->nab', normals, ak)


@dataclass(frozen=True)
class BoundaryCheckResult:
    symmetric: bool
    positive: bool
    monotone: bool
    strictly_adjoint: bool
    max_asymmetry: float
    min_positivity_eig: float     # min eig of A0+A0^t-X over sampled points
    min_monotonicity_eig: float   # min eig of M+M^t over boundary samples
    kernel_ranks: np.ndarray      # rank of [ker(D-M) | ker(D+M)] per sample

    @property
    def ok(self):
        return self.symmetric and self.positive and self.monotone and self.strictly_adjoint


def _null_space(mat, rtol=1e-10):
    _, s, vt = np.linalg.svd(mat)
    tol = rtol * (s[0] if s.size and s[0] > 0 else 1.0)
    return vt[np.sum(s > tol):].T


def _sample_points(sys, mesh, n_interior, n_boundary, rng):
    if mesh is not None:
        x0, x1, y0, y1 = mesh.bounds
        pts = np.column_stack([rng.uniform(x0, x1, n_interior),
                               rng.uniform(y0, y1, n_interior)])
        fids = rng.choice(mesh.boundary_faces(), size=n_boundary)
        bpts = np.empty((n_boundary, 2))
        normals = np.empty((n_boundary, 2))
        for i, fid in enumerate(fids):
            f = mesh.faces[fid]
            t = rng.uniform(0, 1)
            p = f.center.copy()
            p[1 - f.axis] += (t - 0.5) * f.measure
            bpts[i] = p
            normals[i] = f.normal
        return pts, bpts, normals
    pts = rng.uniform(0, 1, size=(n_interior, sys.d))
    bpts = rng.uniform(0, 1, size=(n_boundary, sys.d))
    normals = rng.standard_normal((n_boundary, sys.d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return pts, bpts, normals


def check_axioms(sys, mesh=None, n_points=120, rng=None):
    """Verify symmetry, positivity, monotonicity and strict adjointness numerically.

    Samples quadrature-like interior points and boundary points with their
    normals (random unit normals when no mesh is given, e.g. for Maxwell).
    Reports failures instead of raising.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    pts, bpts, normals = _sample_points(sys, mesh, n_points, n_points, rng)

    ak = sys.ak(pts)
    if not np.all(np.isfinite(ak)):
        raise ValueError("non-finite coefficient values")
    asym = np.max(np.abs(ak - np.swapaxes(ak, -1, -2)))

    a0 = sys.a0(pts)
    pos = a0 + np.swapaxes(a0, -1, -2) - sys.div_ak(pts)
    min_pos = np.min(np.linalg.eigvalsh(0.5 * (pos + np.swapaxes(pos, -1, -2))))

    M = sys.boundary_m(bpts, normals)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite boundary operator values")
    min_mono = np.min(np.linalg.eigvalsh(M + np.swapaxes(M, -1, -2)))

    D = boundary_D_field(sys, bpts, normals)
    ranks = np.empty(len(bpts), dtype=int)
    for i in range(len(bpts)):
        n1 = _null_space(D[i] - M[i])
        n2 = _null_space(D[i] + M[i])
        if n1.shape[1] + n2.shape[1] == 0:
            ranks[i] = 0
        else:
            ranks[i] = np.linalg.matrix_rank(np.hstack([n1, n2]), tol=1e-10)

    return BoundaryCheckResult(
        symmetric=bool(asym <= 1e-12),
        positive=bool(min_pos >= 2 * sys.mu0 - 1e-10),
        monotone=bool(min_mono >= -1e-10),
        strictly_adjoint=bool(np.all(ranks == sys.m)),
        max_asymmetry=float(asym),
        min_positivity_eig=float(min_pos),
        min_monotonicity_eig=float(min_mono),
        kernel_ranks=ranks,
    )


def _side_of(normal):
    """Tag of an axis-aligned outward normal: left/right/bottom/top by dominant axis."""
    if abs(normal[0]) >= abs(normal[1]):
        return 'left' if normal[0] < 0 else 'right'
    return 'bottom' if normal[1] < 0 else 'top'


def _as_scalar_field(v):
    if callable(v):
        return v
    return lambda pts: np.full(len(pts), float(v))


def _as_vector_field(v, d):
    if callable(v):
        return v
    arr = np.asarray(v, dtype=float)
    return lambda pts: np.broadcast_to(arr, (len(pts), d)).copy()


def make_adr_system(kappa, beta, mu, bc, g=None, source=None, div_beta=0.0,
                    bounds=(0.0, 1.0, 0.0, 1.0), penalty=1.0, params=None):
    """Advection-diffusion-reaction in mixed first-order form, z = (sigma, u), m=3.

    kappa, mu: positive scalars or scalar fields; beta: velocity (pair or field);
    bc: dict side -> 'dirichlet' | 'neumann' | ('robin', gamma) for sides
    left/right/bottom/top; g: full boundary datum (only the components
    constrained by the tagged condition are read); div_beta: analytic
    divergence of beta (scalar or field).
    """
    m, d = 3, 2
    kap = _as_scalar_field(kappa)
    bet = _as_vector_field(beta, 2)
    muf = _as_scalar_field(mu)
    divb = _as_scalar_field(div_beta)

    def a0(pts):
        out = np.zeros((len(pts), m, m))
        ik = 1.0 / kap(pts)
        out[:, 0, 0] = ik
        out[:, 1, 1] = ik
        out[:, 2, 2] = muf(pts)
        return out

    def ak(pts):
        out = np.zeros((len(pts), d, m, m))
        b = bet(pts)
        for k in range(d):
            out[:, k, k, 2] = 1.0
            out[:, k, 2, k] = 1.0
            out[:, k, 2, 2] = b[:, k]
        return out

    def div_ak(pts):
        out = np.zeros((len(pts), m, m))
        out[:, 2, 2] = divb(pts)
        return out

    def seg(pts, normals):
        b = bet(pts)
        bn = np.einsum('nk,nk->n', b, normals)
        M = np.zeros((len(pts), m, m))
        S = np.zeros((len(pts), m, m))
        for i, nrm in enumerate(normals):
            tag = bc[_side_of(nrm)]
            gamma = tag[1] if isinstance(tag, tuple) else 0.0
            kind = tag[0] if isinstance(tag, tuple) else tag
            if kind == 'dirichlet':
                M[i, 0, 2] = -nrm[0]
                M[i, 1, 2] = -nrm[1]
                M[i, 2, 0] = nrm[0]
                M[i, 2, 1] = nrm[1]
                S[i, 2, 2] = penalty
            elif kind in ('neumann', 'robin'):
                M[i, 0, 2] = nrm[0]
                M[i, 1, 2] = nrm[1]
                M[i, 2, 0] = -nrm[0]
                M[i, 2, 1] = -nrm[1]
                M[i, 2, 2] = 2.0 * gamma + bn[i]
                v = np.array([nrm[0], nrm[1], -gamma])
                S[i] = penalty * np.outer(v, v)
            else:
                raise ValueError(f"unknown boundary tag {tag!r}")
        return M, S

    # positivity constant from sampled eigenvalues of A0+A0^t-X
    x0, x1, y0, y1 = bounds
    gx, gy = np.meshgrid(np.linspace(x0, x1, 25), np.linspace(y0, y1, 25))
    spts = np.column_stack([gx.ravel(), gy.ravel()])
    mu0 = float(min(np.min(1.0 / kap(spts)), np.min(muf(spts) - 0.5 * divb(spts))))
    if mu0 <= 0:
        raise ValueError("positivity violated: mu - div(beta)/2 must stay positive")

    return FriedrichsSystem(
        m=m, d=d, a0=a0, ak=ak, div_ak=div_ak,
        source=source if source is not None else zero_vector_field(m),
        boundary_value=g if g is not None else zero_vector_field(m),
        boundary_m=lambda pts, normals: seg(pts, normals)[0],
        boundary_penalty=lambda pts, normals: seg(pts, normals)[1],
        si_scale=1.0, mu0=mu0, params=dict(params or {}),
    )


def _elasticity_ek(d):
    """E^k tensors, sigma flattened row-major: E^k[(i*d+j), l] = -1/2(d_ik d_jl + d_il d_jk)."""
    ek = np.zeros((d, d * d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                for l in range(d):
                    ek[k, i * d + j, l] = -0.5 * ((i == k) * (j == l) + (i == l) * (j == k))
    return ek


def make_elasticity_system_2d(mu1, mu2, mu3, bc, body_force=None, g=None,
                              penalty=1.0, params=None):
    """Compressible linear elasticity in d=2, z = (sigma flattened, u), m=6."""
    if mu1 <= 0 or mu2 <= 0:
        raise ValueError("Lame-type constants mu1, mu2 must be positive")
    if mu3 < 0:
        raise ValueError("mu3 must be nonnegative")
    d = 2
    m = d * d + d
    ek = _elasticity_ek(d)

    zvec = np.eye(d).reshape(-1)
    a0_mat = np.zeros((m, m))
    a0_mat[:d * d, :d * d] = np.eye(d * d) - mu1 / (2 * mu2 + d * mu1) * np.outer(zvec, zvec)
    a0_mat[d * d:, d * d:] = mu3 / (2 * mu2) * np.eye(d)

    ak_mat = np.zeros((d, m, m))
    for k in range(d):
        ak_mat[k, :d * d, d * d:] = ek[k]
        ak_mat[k, d * d:, :d * d] = ek[k].T

    r = body_force

    def source(pts):
        out = np.zeros((len(pts), m))
        if r is not None:
            out[:, d * d:] = r(pts)
        return out

    def seg(pts, normals):
        M = np.zeros((len(pts), m, m))
        S = np.zeros((len(pts), m, m))
        for i, nrm in enumerate(normals):
            N = np.einsum('k,kal->al', nrm, ek)     # maps u to sigma-block
            tag = bc[_side_of(nrm)]
            if tag == 'dirichlet':
                M[i, :d * d, d * d:] = -N
                M[i, d * d:, :d * d] = N.T
                S[i, d * d:, d * d:] = penalty * np.eye(d)
            elif tag == 'neumann':
                M[i, :d * d, d * d:] = N
                M[i, d * d:, :d * d] = -N.T
                S[i, :d * d, :d * d] = penalty * (N @ N.T)
            else:
                raise ValueError(f"unknown boundary tag {tag!r}")
        return M, S

    mu0 = float(np.min(np.linalg.eigvalsh(a0_mat)))

    return FriedrichsSystem(
        m=m, d=d,
        a0=constant_matrix_field(a0_mat),
        ak=constant_matrix_field(ak_mat),
        div_ak=constant_matrix_field(np.zeros((m, m))),
        source=source,
        boundary_value=g if g is not None else zero_vector_field(m),
        boundary_m=lambda pts, normals: seg(pts, normals)[0],
        boundary_penalty=lambda pts, normals: seg(pts, normals)[1],
        si_scale=1.0, mu0=mu0,
        params=dict(params or {'mu1': mu1, 'mu2': mu2, 'mu3': mu3}),
    )


def make_maxwell_matrices(mu, sigma, params=None):
    """Stationary Maxwell, z = (H, E), m=6, d=3. Matrix level only (no 3D assembly)."""
    if mu <= 0 or sigma <= 0:
        raise ValueError("mu and sigma must be positive")
    m, d = 6, 3
    a0_mat = np.zeros((m, m))
    a0_mat[:3, :3] = mu * np.eye(3)
    a0_mat[3:, 3:] = sigma * np.eye(3)

    # R^k blocks: R^k_ij = eps_{ikj}; D(n) gets the cross-product matrix T, Tx = n x x
    ak_mat = np.zeros((d, m, m))
    eps = np.zeros((3, 3, 3))
    for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
        eps[i, j, k] = 1.0
        eps[k, j, i] = -1.0
    for k in range(d):
        rk = eps[:, k, :]
        ak_mat[k, :3, 3:] = rk
        ak_mat[k, 3:, :3] = rk.T

    def boundary_m(pts, normals):
        out = np.zeros((len(pts), m, m))
        for i, nrm in enumerate(normals):
            T = np.array([[0.0, -nrm[2], nrm[1]],
                          [nrm[2], 0.0, -nrm[0]],
                          [-nrm[1], nrm[0], 0.0]])
            out[i, :3, 3:] = -T
            out[i, 3:, :3] = T.T
        return out

    return FriedrichsSystem(
        m=m, d=d,
        a0=constant_matrix_field(a0_mat),
        ak=constant_matrix_field(ak_mat),
        div_ak=constant_matrix_field(np.zeros((m, m))),
        source=zero_vector_field(m),
        boundary_value=zero_vector_field(m),
        boundary_m=boundary_m,
        boundary_penalty=lambda pts, normals: np.zeros((len(pts), m, m)),
        si_scale=1.0, mu0=float(min(mu, sigma)),
        params=dict(params or {'mu': mu, 'sigma': sigma}),
    )


def make_advection_reaction_system(a0, b, g=None, source=None, params=None):
    """Scalar advection-reaction (m=1, d=2) with upwind boundary operator M = |b.n|."""
    m, d = 1, 2
    b = np.asarray(b, dtype=float)

    def ak(pts):
        out = np.zeros((len(pts), d, m, m))
        out[:, 0, 0, 0] = b[0]
        out[:, 1, 0, 0] = b[1]
        return out

    def boundary_m(pts, normals):
        bn = normals @ b
        return np.abs(bn)[:, None, None]

    return FriedrichsSystem(
        m=m, d=d,
        a0=constant_matrix_field(np.array([[float(a0)]])),
        ak=ak,
        div_ak=constant_matrix_field(np.zeros((m, m))),
        source=source if source is not None else zero_vector_field(m),
        boundary_value=g if g is not None else zero_vector_field(m),
        boundary_m=boundary_m,
        boundary_penalty=lambda pts, normals: np.zeros((len(pts), m, m)),
        si_scale=1.0, mu0=float(a0),
        params=dict(params or {}),
    )


def make_reaction_system(m=1, a0=1.0, source=None, params=None):
    """Pure reaction system (A^k = 0, D = M = 0); the DG operator is a mass matrix."""
    d = 2
    return FriedrichsSystem(
        m=m, d=d,
        a0=constant_matrix_field(float(a0) * np.eye(m)),
        ak=constant_matrix_field(np.zeros((d, m, m))),
        div_ak=constant_matrix_field(np.zeros((m, m))),
        source=source if source is not None else zero_vector_field(m),
        boundary_value=zero_vector_field(m),
        boundary_m=lambda pts, normals: np.zeros((len(pts), m, m)),
        boundary_penalty=lambda pts, normals: np.zeros((len(pts), m, m)),
        si_scale=1.0, mu0=float(a0),
        params=dict(params or {}),
    )


def dissipative_transform(sys, xi, beta, sample_points=None):
    """Recover positivity by the change of unknown v(x) = exp(-beta xi.x) z(x).

    Returns the system for v: A0 gains beta * sum_k xi_k A^k, source and
    boundary data are scaled by exp(-beta xi.x). Solutions map back via
    z(x) = exp(beta xi.x) v(x).
    """
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("xi must be a unit vector")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0:
        return sys

    if sample_points is None:
        g = np.linspace(0.0, 1.0, 6)
        sample_points = np.stack(np.meshgrid(*([g] * sys.d)), axis=-1).reshape(-1, sys.d)

    if np.max(np.abs(sys.ak(sample_points))) <= 1e-14:
        raise ValueError("transform cannot help: all A^k vanish")

    def a0_new(pts):
        return sys.a0(pts) + beta * np.einsum('k,nkab->nab', xi, sys.ak(pts))

    def weight(pts):
        return np.exp(-beta * (pts @ xi))

    def source_new(pts):
        return weight(pts)[:, None] * sys.source(pts)

    def boundary_value_new(pts):
        return weight(pts)[:, None] * sys.boundary_value(pts)

    pos = a0_new(sample_points)
    pos = pos + np.swapaxes(pos, -1, -2) - sys.div_ak(sample_points)
    eigs = np.linalg.eigvalsh(0.5 * (pos + np.swapaxes(pos, -1, -2)))
    mu0_new = 0.5 * float(np.min(eigs))
    if mu0_new <= 0:
        raise ValueError(f"positivity still violated after transform: "
                         f"deficient eigenvalue {np.min(eigs):.3e}")

    return FriedrichsSystem(
        m=sys.m, d=sys.d, a0=a0_new, ak=sys.ak, div_ak=sys.div_ak,
        source=source_new, boundary_value=boundary_value_new,
        boundary_m=sys.boundary_m, boundary_penalty=sys.boundary_penalty,
        si_scale=sys.si_scale, mu0=mu0_new, params=dict(sys.params),
    )
