"""Stabilized DG discretization of Friedrichs' systems on Cartesian meshes.

The bilinear form is

    a_h(z, y) = sum_T (A z, y)_T + 1/2 sum_{bnd F} ((M - D) z, y)_F
              - sum_{int F} (D_F [[z]], {{y}})_F + s_h(z, y)

with stabilization s_h(z, y) = sum_{bnd F} (S^b z, y)_F
+ sum_{int F} (S^i [[z]], [[y]])_F, S^i = si_scale * |D_F|, and right-hand side
l_h(y) = (f, y) + 1/2 sum_{bnd F} ((M - D) g, y)_F + sum_{bnd F} (S^b g, y)_F.

[[u]] = u|T1 - u|T2 and {{u}} = (u|T1 + u|T2)/2, with T1 the lower cell id.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import quadrature as quad
from .systems import matrix_abs

_SIGN = {1: 1.0, 2: -1.0}   # jump signs for the two sides of an interior face


class DGSpace:
    """Fully discontinuous tensor-product Lagrange space of degree k.

    Nodes are Gauss-Lobatto points per direction; quadrature is (k+2)-point
    Gauss-Legendre per direction, exact for all polynomial-coefficient
    bilinear-form integrands. Dof layout: cell-major, then component, then
    local node (ln = ax*(k+1) + ay).
    """

    def __init__(self, mesh, degree, m):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.mesh = mesh
        self.degree = degree
        self.m = m
        k = degree
        self.n1 = k + 1
        self.nloc = self.n1 ** 2
        self.n_cell_dof = m * self.nloc
        self.N = mesh.n_cells * self.n_cell_dof

        self.nodes1d = quad.gauss_lobatto(self.n1)
        self.nq1 = k + 2
        self.q1, self.w1 = quad.gauss_legendre(self.nq1)
        self.nq2 = self.nq1 ** 2

        bv = quad.lagrange_values(self.nodes1d, self.q1)       # (nq1, n1)
        bd = quad.lagrange_derivatives(self.nodes1d, self.q1)
        # 2D tensor basis at cell quadrature points, q = qx*nq1 + qy
        self.phi = np.einsum('pa,qb->pqab', bv, bv).reshape(self.nq2, self.n1, self.n1)
        self.phi = self.phi.reshape(self.nq2, self.nloc)
        dref = np.empty((self.nq2, self.nloc, 2))
        dref[:, :, 0] = np.einsum('pa,qb->pqab', bd, bv).reshape(self.nq2, self.nloc)
        dref[:, :, 1] = np.einsum('pa,qb->pqab', bv, bd).reshape(self.nq2, self.nloc)
        self.dphi_ref = dref

        # traces on the four reference sides at the face quadrature points
        end0 = quad.lagrange_values(self.nodes1d, np.array([0.0]))[0]
        end1 = quad.lagrange_values(self.nodes1d, np.array([1.0]))[0]
        self.trace = {
            'left': np.einsum('a,qb->qab', end0, bv).reshape(self.nq1, self.nloc),
            'right': np.einsum('a,qb->qab', end1, bv).reshape(self.nq1, self.nloc),
            'bottom': np.einsum('qa,b->qab', bv, end0).reshape(self.nq1, self.nloc),
            'top': np.einsum('qa,b->qab', bv, end1).reshape(self.nq1, self.nloc),
        }

        # reference coordinates of the nodal points
        gx, gy = np.meshgrid(self.nodes1d, self.nodes1d, indexing='ij')
        self.node_ref = np.column_stack([gx.ravel(), gy.ravel()])
        qx, qy = np.meshgrid(self.q1, self.q1, indexing='ij')
        self.quad_ref = np.column_stack([qx.ravel(), qy.ravel()])
        self.w2 = np.outer(self.w1, self.w1).ravel()

        self._groups = self._build_face_groups()

    # -- geometry helpers ------------------------------------------------

    def cell_scale(self):
        return np.array([self.mesh.dx, self.mesh.dy])

    def cell_quad_points(self):
        return (self.mesh.cell_origin[:, None, :]
                + self.quad_ref[None, :, :] * self.cell_scale())

    def node_points(self):
        return (self.mesh.cell_origin[:, None, :]
                + self.node_ref[None, :, :] * self.cell_scale())

    def dof_indices(self):
        """(n_cells, m, nloc) array of global dof indices."""
        base = np.arange(self.mesh.n_cells)[:, None, None] * self.n_cell_dof
        comp = np.arange(self.m)[None, :, None] * self.nloc
        loc = np.arange(self.nloc)[None, None, :]
        return base + comp + loc

    def subdomain_dofs(self, partition):
        """Per-subdomain sorted global dof index arrays."""
        idx = self.dof_indices().reshape(self.mesh.n_cells, -1)
        return [np.sort(idx[partition.owner == i].ravel()) for i in range(partition.K)]

    def _build_face_groups(self):
        mesh = self.mesh
        interior = {0: [], 1: []}
        boundary = {}
        for fid, f in enumerate(mesh.faces):
            if f.kind == 0:
                interior[f.axis].append(fid)
            else:
                side = ('left' if f.normal[0] < 0 else 'right') if f.axis == 0 else \
                       ('bottom' if f.normal[1] < 0 else 'top')
                boundary.setdefault(side, []).append(fid)
        groups = {'interior': {}, 'boundary': {}}
        for axis, fids in interior.items():
            if not fids:
                continue
            fids = np.array(fids)
            c1 = np.array([mesh.faces[i].owners[0] for i in fids])
            c2 = np.array([mesh.faces[i].owners[1] for i in fids])
            pts = self._face_points(fids)
            tr1 = self.trace['right' if axis == 0 else 'top']
            tr2 = self.trace['left' if axis == 0 else 'bottom']
            normal = np.array([1.0, 0.0]) if axis == 0 else np.array([0.0, 1.0])
            wq = self.w1 * mesh.faces[fids[0]].measure
            groups['interior'][axis] = dict(fids=fids, cells=(c1, c2),
                                            traces=(tr1, tr2), pts=pts,
                                            normal=normal, wq=wq)
        opposite = {'left': 'left', 'right': 'right', 'bottom': 'bottom', 'top': 'top'}
        for side, fids in boundary.items():
            fids = np.array(fids)
            cells = np.array([mesh.faces[i].owners[0] for i in fids])
            pts = self._face_points(fids)
            normal = mesh.faces[fids[0]].normal
            wq = self.w1 * mesh.faces[fids[0]].measure
            groups['boundary'][side] = dict(fids=fids, cells=cells,
                                            trace=self.trace[opposite[side]],
                                            pts=pts, normal=normal, wq=wq)
        return groups

    def _face_points(self, fids):
        pts = np.empty((len(fids), self.nq1, 2))
        for i, fid in enumerate(fids):
            f = self.mesh.faces[fid]
            tang = 1 - f.axis
            pts[i, :, f.axis] = f.center[f.axis]
            pts[i, :, tang] = f.center[tang] + (self.q1 - 0.5) * f.measure
        return pts

    # -- field evaluation ------------------------------------------------

    def interpolate(self, func):
        pts = self.node_points().reshape(-1, 2)
        vals = func(pts).reshape(self.mesh.n_cells, self.nloc, self.m)
        return np.transpose(vals, (0, 2, 1)).ravel()

    def eval_cells(self, v):
        """(n_cells, nq2, m) values of the dof vector at cell quadrature points."""
        vc = v.reshape(self.mesh.n_cells, self.m, self.nloc)
        return np.einsum('cml,ql->cqm', vc, self.phi)

    def eval_grad_cells(self, v):
        """(n_cells, nq2, m, 2) physical gradients at cell quadrature points."""
        vc = v.reshape(self.mesh.n_cells, self.m, self.nloc)
        scale = self.cell_scale()
        out = np.einsum('cml,qlk->cqmk', vc, self.dphi_ref)
        return out / scale

    def eval_trace(self, v, cells, trace):
        """(len(cells), nq1, m) traces of v on a face group side."""
        vc = v.reshape(self.mesh.n_cells, self.m, self.nloc)[cells]
        return np.einsum('fml,ql->fqm', vc, trace)


@dataclass
class AssembledSystem:
    A: sp.csr_matrix
    L: np.ndarray
    X_L: sp.csr_matrix       # block-diagonal L2 mass matrix
    X_R: sp.csr_matrix       # R-norm Gram matrix: mu0 X_L + 1/2 M_bnd + S
    S: sp.csr_matrix         # stabilization quadratic form
    M_bnd: sp.csr_matrix     # boundary face mass with M^sym
    sys: object
    space: object
    partition: object = None

    @property
    def mu0(self):
        return self.sys.mu0

    def block_view(self):
        if self.partition is None:
            raise ValueError("assembled without a partition")
        return self.space.subdomain_dofs(self.partition)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("non-finite integrand encountered during assembly")


def _volume_blocks(sys, space, adjoint=False):
    """Per-cell local operator blocks (n_cells, m, nloc, m, nloc) and rhs."""
    mesh = space.mesh
    pts = space.cell_quad_points().reshape(-1, 2)
    a0 = sys.a0(pts).reshape(mesh.n_cells, space.nq2, space.m, space.m)
    ak = sys.ak(pts).reshape(mesh.n_cells, space.nq2, 2, space.m, space.m)
    f = sys.source(pts).reshape(mesh.n_cells, space.nq2, space.m)
    _check_finite(a0, ak, f)
    w = space.w2 * mesh.dx * mesh.dy
    scale = space.cell_scale()
    dphi = space.dphi_ref / scale   # (nq2, nloc, 2) physical derivatives

    if not adjoint:
        blocks = np.einsum('q,qi,cqab,qj->caibj', w, space.phi, a0, space.phi)
        blocks += np.einsum('q,qi,cqkab,qjk->caibj', w, space.phi, ak, dphi)
    else:
        x = sys.div_ak(pts).reshape(mesh.n_cells, space.nq2, space.m, space.m)
        a0t = np.swapaxes(a0, -1, -2) - x
        blocks = np.einsum('q,qj,cqba,qi->caibj', w, space.phi, a0t, space.phi)
        blocks -= np.einsum('q,qj,cqkba,qik->caibj', w, space.phi, ak, dphi)
    rhs = np.einsum('q,qi,cqa->cai', w, space.phi, f)
    return blocks, rhs


def _interior_face_blocks(sys, space, adjoint=False):
    """Yield (cells1, cells2, {(s,t): blocks}) per interior face group.

    blocks[(s,t)] has shape (nf, m, nloc, m, nloc): rows test side s, cols
    trial side t, sides numbered 1 (T1) and 2 (T2).
    """
    for axis, g in space._groups['interior'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        ak = sys.ak(pts).reshape(nf, space.nq1, 2, space.m, space.m)
        D = ak[:, :, axis]
        S = sys.si_scale * matrix_abs(D)
        _check_finite(D, S)
        tr = {1: g['traces'][0], 2: g['traces'][1]}
        out = {}
        for s in (1, 2):
            for t in (1, 2):
                if not adjoint:
                    C = -0.5 * _SIGN[t] * D + _SIGN[s] * _SIGN[t] * S
                else:
                    C = 0.5 * _SIGN[s] * D + _SIGN[s] * _SIGN[t] * S
                out[(s, t)] = np.einsum('q,qi,fqab,qj->faibj',
                                        g['wq'], tr[s], C, tr[t])
        yield g['cells'][0], g['cells'][1], out


def _boundary_face_blocks(sys, space, adjoint=False):
    """Yield (cells, blocks, rhs) per boundary face group."""
    for side, g in space._groups['boundary'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        normals = np.broadcast_to(g['normal'], (len(pts), 2))
        ak = sys.ak(pts)
        D = np.einsum('k,nkab->nab', g['normal'], ak).reshape(nf, space.nq1, space.m, space.m)
        M = sys.boundary_m(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        Sb = sys.boundary_penalty(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        gv = sys.boundary_value(pts).reshape(nf, space.nq1, space.m)
        _check_finite(D, M, Sb, gv)
        sgn = -1.0 if adjoint else 1.0
        C = 0.5 * (M + sgn * (-D)) + Sb
        tr = g['trace']
        blocks = np.einsum('q,qi,fqab,qj->faibj', g['wq'], tr, C, tr)
        Crhs = 0.5 * (M - D) + Sb
        rhs = np.einsum('q,qi,fqab,fqb->fai', g['wq'], tr, Crhs, gv)
        yield g['cells'], blocks, rhs


def _norm_matrix_parts(sys, space):
    """COO pieces for X_L (cell mass), M_bnd (boundary M^sym mass), S (stabilization)."""
    mesh = space.mesh
    idx = space.dof_indices()
    nd = space.n_cell_dof

    w = space.w2 * mesh.dx * mesh.dy
    mass_loc = np.einsum('q,qi,qj->ij', w, space.phi, space.phi)
    rows_c = np.repeat(idx.reshape(mesh.n_cells, -1), nd, axis=1).ravel()
    cols_c = np.tile(idx.reshape(mesh.n_cells, -1), (1, nd)).ravel()
    mass_blocks = np.zeros((mesh.n_cells, space.m, space.nloc, space.m, space.nloc))
    for a in range(space.m):
        mass_blocks[:, a, :, a, :] = mass_loc
    xl = sp.coo_matrix((mass_blocks.ravel(), (rows_c, cols_c)),
                       shape=(space.N, space.N)).tocsr()

    mb_r, mb_c, mb_v = [], [], []
    s_r, s_c, s_v = [], [], []

    for side, g in space._groups['boundary'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        normals = np.broadcast_to(g['normal'], (len(pts), 2))
        M = sys.boundary_m(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        Msym = 0.5 * (M + np.swapaxes(M, -1, -2))
        Sb = sys.boundary_penalty(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        tr = g['trace']
        bm = np.einsum('q,qi,fqab,qj->faibj', g['wq'], tr, Msym, tr)
        bs = np.einsum('q,qi,fqab,qj->faibj', g['wq'], tr, Sb, tr)
        fidx = idx[g['cells']].reshape(nf, -1)
        rows = np.repeat(fidx, nd, axis=1).ravel()
        cols = np.tile(fidx, (1, nd)).ravel()
        mb_r.append(rows); mb_c.append(cols); mb_v.append(bm.ravel())
        s_r.append(rows); s_c.append(cols); s_v.append(bs.ravel())

    for axis, g in space._groups['interior'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        ak = sys.ak(pts).reshape(nf, space.nq1, 2, space.m, space.m)
        S = sys.si_scale * matrix_abs(ak[:, :, axis])
        tr = {1: g['traces'][0], 2: g['traces'][1]}
        cells = {1: g['cells'][0], 2: g['cells'][1]}
        for s in (1, 2):
            for t in (1, 2):
                blk = _SIGN[s] * _SIGN[t] * np.einsum('q,qi,fqab,qj->faibj',
                                                      g['wq'], tr[s], S, tr[t])
                ridx = idx[cells[s]].reshape(nf, -1)
                cidx = idx[cells[t]].reshape(nf, -1)
                s_r.append(np.repeat(ridx, nd, axis=1).ravel())
                s_c.append(np.tile(cidx, (1, nd)).ravel())
                s_v.append(blk.ravel())

    def coo(r, c, v):
        if not r:
            return sp.csr_matrix((space.N, space.N))
        return sp.coo_matrix((np.concatenate(v),
                              (np.concatenate(r), np.concatenate(c))),
                             shape=(space.N, space.N)).tocsr()

    return xl, coo(mb_r, mb_c, mb_v), coo(s_r, s_c, s_v)


def assemble(sys, space, partition=None, adjoint=False):
    """Assemble the stabilized DG operator, rhs and norm Gram matrices.

    With adjoint=True the operator is built from the integrated-by-parts form
    (volume (z, A~ y), boundary 1/2 (M+D), interior (D {{z}}, [[y]])); for
    polynomial-coefficient systems both forms produce the same matrix.
    """
    idx = space.dof_indices()
    nd = space.n_cell_dof
    rows, cols, vals = [], [], []
    L = np.zeros(space.N)

    vol, rhs = _volume_blocks(sys, space, adjoint=adjoint)
    flat = idx.reshape(space.mesh.n_cells, -1)
    rows.append(np.repeat(flat, nd, axis=1).ravel())
    cols.append(np.tile(flat, (1, nd)).ravel())
    vals.append(vol.ravel())
    np.add.at(L, flat.ravel(), rhs.ravel())

    for c1, c2, blocks in _interior_face_blocks(sys, space, adjoint=adjoint):
        cells = {1: c1, 2: c2}
        nf = len(c1)
        for (s, t), blk in blocks.items():
            ridx = idx[cells[s]].reshape(nf, -1)
            cidx = idx[cells[t]].reshape(nf, -1)
            rows.append(np.repeat(ridx, nd, axis=1).ravel())
            cols.append(np.tile(cidx, (1, nd)).ravel())
            vals.append(blk.ravel())

    for cells, blocks, rhs_b in _boundary_face_blocks(sys, space, adjoint=adjoint):
        nf = len(cells)
        fidx = idx[cells].reshape(nf, -1)
        rows.append(np.repeat(fidx, nd, axis=1).ravel())
        cols.append(np.tile(fidx, (1, nd)).ravel())
        vals.append(blocks.ravel())
        np.add.at(L, fidx.ravel(), rhs_b.ravel())

    A = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(space.N, space.N)).tocsr()
    _check_finite(A.data, L)

    xl, m_bnd, s_mat = _norm_matrix_parts(sys, space)
    x_r = (sys.mu0 * xl + 0.5 * m_bnd + s_mat).tocsr()
    return AssembledSystem(A=A, L=L, X_L=xl, X_R=x_r, S=s_mat, M_bnd=m_bnd,
                           sys=sys, space=space, partition=partition)


def solve(asm):
    """Direct sparse LU solve with a residual check."""
    lu = spla.splu(asm.A.tocsc())
    z = lu.solve(asm.L)
    res = np.linalg.norm(asm.A @ z - asm.L)
    bound = 1e-10 * (spla.norm(asm.A) * np.linalg.norm(z) + np.linalg.norm(asm.L))
    if not np.isfinite(res) or res > bound:
        raise RuntimeError(f"solver residual {res:.3e} exceeds tolerance {bound:.3e}")
    return z


@dataclass
class NormReport:
    l2: float
    energy: float
    r_norm: float
    jump_seminorm: float       # |.|_S
    boundary_seminorm: float   # |.|_M
    triple: float
    triple_star: float


def norms(asm, space, v, exact=None, exact_grad=None):
    """Norms of v, or of the error field v - exact when a callable is given.

    exact(pts) -> (n, m); exact_grad(pts) -> (n, m, d) enables the broken
    derivative term of the triple norm to use analytic derivatives. L2 and
    all face terms integrate the callable directly (not its interpolant).
    """
    sys = asm.sys
    mesh = space.mesh
    if len(v) != space.N:
        raise ValueError("dof vector length mismatch")

    w_cell = space.w2 * mesh.dx * mesh.dy
    cpts = space.cell_quad_points()
    e_cell = space.eval_cells(v)
    if exact is not None:
        e_cell = e_cell - exact(cpts.reshape(-1, 2)).reshape(e_cell.shape)

    l2_sq = float(np.einsum('q,cqa,cqa->', w_cell, e_cell, e_cell))
    per_cell_l2 = np.einsum('q,cqa,cqa->c', w_cell, e_cell, e_cell)

    # symmetric volume part of the energy identity: ((A0 - X/2) e, e)
    pts_flat = cpts.reshape(-1, 2)
    a0 = sys.a0(pts_flat).reshape(mesh.n_cells, space.nq2, space.m, space.m)
    x = sys.div_ak(pts_flat).reshape(mesh.n_cells, space.nq2, space.m, space.m)
    sym = 0.5 * (a0 + np.swapaxes(a0, -1, -2) - x)
    vol_sq = float(np.einsum('q,cqa,cqab,cqb->', w_cell, e_cell, sym, e_cell))

    # broken derivative term: sum_T h_T || sum_k A^k d_k e ||_T^2
    ak = sys.ak(pts_flat).reshape(mesh.n_cells, space.nq2, 2, space.m, space.m)
    grad = space.eval_grad_cells(v)
    if exact is not None:
        if exact_grad is not None:
            grad = grad - exact_grad(pts_flat).reshape(grad.shape)
        else:
            grad = grad - space.eval_grad_cells(space.interpolate(exact))
    adv = np.einsum('cqkab,cqbk->cqa', ak, grad)
    broken = float(np.einsum('c,q,cqa,cqa->', mesh.diameters, w_cell, adv, adv))

    m_sq = 0.0
    s_sq = 0.0
    bnd_l2 = np.zeros(mesh.n_cells)   # per-cell boundary-trace L2 for triple_star
    for side, g in space._groups['boundary'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        normals = np.broadcast_to(g['normal'], (len(pts), 2))
        tr_v = space.eval_trace(v, g['cells'], g['trace'])
        if exact is not None:
            tr_v = tr_v - exact(pts).reshape(tr_v.shape)
        M = sys.boundary_m(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        Sb = sys.boundary_penalty(pts, normals).reshape(nf, space.nq1, space.m, space.m)
        m_sq += 0.5 * float(np.einsum('q,fqa,fqab,fqb->', g['wq'], tr_v, M, tr_v))
        s_sq += float(np.einsum('q,fqa,fqab,fqb->', g['wq'], tr_v, Sb, tr_v))
        np.add.at(bnd_l2, g['cells'],
                  np.einsum('q,fqa,fqa->f', g['wq'], tr_v, tr_v))

    for axis, g in space._groups['interior'].items():
        pts = g['pts'].reshape(-1, 2)
        nf = len(g['fids'])
        ak_f = sys.ak(pts).reshape(nf, space.nq1, 2, space.m, space.m)
        S = sys.si_scale * matrix_abs(ak_f[:, :, axis])
        t1 = space.eval_trace(v, g['cells'][0], g['traces'][0])
        t2 = space.eval_trace(v, g['cells'][1], g['traces'][1])
        if exact is not None:
            ex = exact(pts).reshape(t1.shape)
            t1 = t1 - ex
            t2 = t2 - ex
        jump = t1 - t2
        s_sq += float(np.einsum('q,fqa,fqab,fqb->', g['wq'], jump, S, jump))
        np.add.at(bnd_l2, g['cells'][0], np.einsum('q,fqa,fqa->f', g['wq'], t1, t1))
        np.add.at(bnd_l2, g['cells'][1], np.einsum('q,fqa,fqa->f', g['wq'], t2, t2))

    m_sq = max(m_sq, 0.0)
    s_sq = max(s_sq, 0.0)
    energy_sq = max(vol_sq + m_sq + s_sq, 0.0)
    r_sq = max(sys.mu0 * l2_sq + m_sq + s_sq, 0.0)
    triple_sq = l2_sq + m_sq + s_sq + broken
    star_sq = triple_sq + float(np.sum(per_cell_l2 / mesh.diameters) + np.sum(bnd_l2))

    return NormReport(
        l2=np.sqrt(l2_sq), energy=np.sqrt(energy_sq), r_norm=np.sqrt(r_sq),
        jump_seminorm=np.sqrt(s_sq), boundary_seminorm=np.sqrt(m_sq),
        triple=np.sqrt(triple_sq), triple_star=np.sqrt(star_sq),
    )


def convergence_study(make_problem, degrees, sizes):
    """h-convergence against a manufactured solution.

    make_problem(n, k) must return (sys, mesh, exact, exact_grad). Returns
    {degree: {'rows': [(h, dofs, l2, energy, triple)], 'slope': float|None,
    'status': 'fit'|'exact', 'monotone': bool}} with the slope fitted by least
    squares on log(triple) vs log(h).
    """
    if len(sizes) < 3:
        raise ValueError("need at least 3 mesh levels")
    table = {}
    for k in degrees:
        rows = []
        for n in sizes:
            sys, mesh, exact, exact_grad = make_problem(n, k)
            space = DGSpace(mesh, k, sys.m)
            asm = assemble(sys, space)
            z = solve(asm)
            rep = norms(asm, space, z, exact=exact, exact_grad=exact_grad)
            h = float(mesh.diameters[0])
            rows.append((h, space.N, rep.l2, rep.energy, rep.triple))
        triples = np.array([r[4] for r in rows])
        hs = np.array([r[0] for r in rows])
        if np.all(triples <= 1e-9):
            slope, status = None, 'exact'
        else:
            slope = float(np.polyfit(np.log(hs), np.log(triples), 1)[0])
            status = 'fit'
        monotone = bool(np.all(np.diff(triples) <= 0))
        table[k] = {'rows': rows, 'slope': slope, 'status': status,
                    'monotone': monotone}
    return table
