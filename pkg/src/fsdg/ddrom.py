"""Domain-decomposed ROM: block assembly, local bases, indicators, repartitioning."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .dg import _volume_blocks, _interior_face_blocks, _boundary_face_blocks
from .rom import ReducedBasis, pod, reconstruction_error


@dataclass
class BlockSystem:
    partition: object
    dofs: list                   # per-subdomain sorted global dof arrays
    blocks: dict                 # (i, j) -> csr, local row/col indexing
    rhs: list                    # per-subdomain rhs blocks
    N: int
    sys: object = None
    space: object = None

    def reassemble(self):
        """Scatter all blocks back into a global sparse matrix."""
        rows, cols, vals = [], [], []
        for (i, j), blk in self.blocks.items():
            coo = blk.tocoo()
            rows.append(self.dofs[i][coo.row])
            cols.append(self.dofs[j][coo.col])
            vals.append(coo.data)
        L = np.zeros(self.N)
        for i, r in enumerate(self.rhs):
            L[self.dofs[i]] = r
        A = sp.coo_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.N, self.N)).tocsr()
        return A, L


def _dof_ownership(space, partition):
    dofs = space.subdomain_dofs(partition)
    g2l = np.empty(space.N, dtype=int)
    for d in dofs:
        g2l[d] = np.arange(len(d))
    return dofs, g2l


def block_assemble(asm, partition=None):
    """Re-assemble the DG system as subdomain blocks.

    Every cell and face contribution is routed to the block (i, j) given by
    the subdomain ownership of its row and column cells; interface face
    cross-couplings land in the off-diagonal blocks. Summing all blocks back
    reproduces the monolithic matrix (additivity of the integrals).
    """
    partition = partition if partition is not None else asm.partition
    if partition is None:
        raise ValueError("no partition given")
    sys, space = asm.sys, asm.space
    owner = partition.owner
    K = partition.K
    dofs, g2l = _dof_ownership(space, partition)
    idx = space.dof_indices()
    nd = space.n_cell_dof

    acc = {}   # (i, j) -> [rows, cols, vals]

    def push(i, j, rows, cols, vals):
        acc.setdefault((i, j), [[], [], []])
        acc[(i, j)][0].append(g2l[rows])
        acc[(i, j)][1].append(g2l[cols])
        acc[(i, j)][2].append(vals)

    rhs = [np.zeros(len(d)) for d in dofs]

    vol, vrhs = _volume_blocks(sys, space)
    flat = idx.reshape(space.mesh.n_cells, -1)
    for i in range(K):
        mask = owner == i
        if not np.any(mask):
            continue
        f = flat[mask]
        push(i, i, np.repeat(f, nd, axis=1).ravel(), np.tile(f, (1, nd)).ravel(),
             vol[mask].ravel())
        np.add.at(rhs[i], g2l[f.ravel()], vrhs[mask].ravel())

    for c1, c2, blocks in _interior_face_blocks(sys, space):
        cells = {1: c1, 2: c2}
        for (s, t), blk in blocks.items():
            oi, oj = owner[cells[s]], owner[cells[t]]
            for i in range(K):
                for j in range(K):
                    mask = (oi == i) & (oj == j)
                    if not np.any(mask):
                        continue
                    ridx = idx[cells[s][mask]].reshape(mask.sum(), -1)
                    cidx = idx[cells[t][mask]].reshape(mask.sum(), -1)
                    push(i, j, np.repeat(ridx, nd, axis=1).ravel(),
                         np.tile(cidx, (1, nd)).ravel(), blk[mask].ravel())

    for cells, blocks, brhs in _boundary_face_blocks(sys, space):
        oc = owner[cells]
        for i in range(K):
            mask = oc == i
            if not np.any(mask):
                continue
            fidx = idx[cells[mask]].reshape(mask.sum(), -1)
            push(i, i, np.repeat(fidx, nd, axis=1).ravel(),
                 np.tile(fidx, (1, nd)).ravel(), blocks[mask].ravel())
            np.add.at(rhs[i], g2l[fidx.ravel()], brhs[mask].ravel())

    out = {}
    for (i, j), (r, c, v) in acc.items():
        out[(i, j)] = sp.coo_matrix(
            (np.concatenate(v), (np.concatenate(r), np.concatenate(c))),
            shape=(len(dofs[i]), len(dofs[j]))).tocsr()

    return BlockSystem(partition=partition, dofs=dofs, blocks=out, rhs=rhs,
                       N=space.N, sys=sys, space=space)


def add_interface_penalty(blocks, scale):
    """Add scale * (jump, jump) face mass on interface faces only."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if scale == 0:
        return blocks
    space = blocks.space
    partition = blocks.partition
    owner = partition.owner
    idx = space.dof_indices()
    nd = space.n_cell_dof
    _, g2l = _dof_ownership(space, partition)
    sign = {1: 1.0, 2: -1.0}

    interface = set()
    for fids in partition.interface_faces.values():
        interface.update(fids)

    new = {k: v.tolil(copy=True) for k, v in blocks.blocks.items()}
    for axis, g in space._groups['interior'].items():
        sel = np.array([fid in interface for fid in g['fids']])
        if not np.any(sel):
            continue
        tr = {1: g['traces'][0], 2: g['traces'][1]}
        cells = {1: g['cells'][0][sel], 2: g['cells'][1][sel]}
        wq = g['wq']
        for s in (1, 2):
            for t in (1, 2):
                loc = scale * sign[s] * sign[t] * np.einsum('q,qi,qj->ij', wq, tr[s], tr[t])
                for f in range(sel.sum()):
                    oi, oj = owner[cells[s][f]], owner[cells[t][f]]
                    ridx = idx[cells[s][f]].reshape(-1)
                    cidx = idx[cells[t][f]].reshape(-1)
                    blk = new.setdefault((oi, oj), sp.lil_matrix(
                        (len(blocks.dofs[oi]), len(blocks.dofs[oj]))))
                    lr, lc = g2l[ridx], g2l[cidx]
                    full = np.zeros((nd, nd))
                    for a in range(space.m):
                        sl = slice(a * space.nloc, (a + 1) * space.nloc)
                        full[sl, sl] = loc
                    blk[np.ix_(lr, lc)] = blk[np.ix_(lr, lc)].toarray() + full
    return BlockSystem(partition=partition, dofs=blocks.dofs,
                       blocks={k: v.tocsr() for k, v in new.items()},
                       rhs=blocks.rhs, N=blocks.N, sys=blocks.sys, space=space)


@dataclass
class LocalBases:
    dofs: list
    bases: list                  # per-subdomain ReducedBasis
    rs: list

    @property
    def total_r(self):
        return sum(self.rs)


def local_pod(snapshots, space, partition, r_list):
    """Per-subdomain POD of the row-restricted snapshot matrix."""
    if np.isscalar(r_list):
        r_list = [int(r_list)] * partition.K
    if len(r_list) != partition.K:
        raise ValueError("need one r per subdomain")
    X = snapshots.matrix if hasattr(snapshots, "matrix") else np.asarray(snapshots)
    dofs = space.subdomain_dofs(partition)
    bases = []
    for d, r in zip(dofs, r_list):
        bases.append(pod(X[d, :], r=r))
    return LocalBases(dofs=dofs, bases=bases, rs=[b.r for b in bases])


def block_project(blocks, bases):
    """Project blocks onto the local bases: B_ij = V_i^t A_ij V_j, L_i = V_i^t F_i."""
    K = blocks.partition.K
    rs = bases.rs
    offs = np.concatenate([[0], np.cumsum(rs)])
    R = offs[-1]
    B = np.zeros((R, R))
    Lr = np.zeros(R)
    for (i, j), blk in blocks.blocks.items():
        Vi, Vj = bases.bases[i].V, bases.bases[j].V
        B[offs[i]:offs[i + 1], offs[j]:offs[j + 1]] += Vi.T @ (blk @ Vj)
    for i in range(K):
        Lr[offs[i]:offs[i + 1]] = bases.bases[i].V.T @ blocks.rhs[i]
    return B, Lr


def block_solve(blocks, bases):
    """Dense solve of the projected block system; returns the lifted dof vector."""
    B, Lr = block_project(blocks, bases)
    c = np.linalg.solve(B, Lr)
    offs = np.concatenate([[0], np.cumsum(bases.rs)])
    z = np.zeros(blocks.N)
    for i, d in enumerate(blocks.dofs):
        z[d] = bases.bases[i].V @ c[offs[i]:offs[i + 1]]
    return z


def identity_bases(blocks):
    """Full (identity) local bases: the DD-ROM then reproduces the FOM."""
    bases = [ReducedBasis(V=np.eye(len(d)), sigma=np.ones(len(d)), r=len(d))
             for d in blocks.dofs]
    return LocalBases(dofs=blocks.dofs, bases=bases, rs=[b.r for b in bases])


@dataclass
class IndicatorField:
    values: np.ndarray           # per-cell, nonnegative
    kind: str
    hyper: dict = field(default_factory=dict)


def indicator_variance(snapshots, space):
    """I_var(T) = integral over T of the Euclidean norm of the pointwise
    per-component biased (1/n) variance vector across snapshots."""
    X = snapshots.matrix if hasattr(snapshots, "matrix") else np.asarray(snapshots)
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least 2 snapshots")
    mesh = space.mesh
    vals = np.stack([space.eval_cells(X[:, i]) for i in range(n)], axis=0)
    var = vals.var(axis=0)                       # (n_cells, nq2, m), biased 1/n
    norm = np.sqrt(np.einsum('cqa,cqa->cq', var, var))
    w = space.w2 * mesh.dx * mesh.dy
    return IndicatorField(values=norm @ w, kind="variance")


def _neighbors(mesh, n_neigh):
    """n_neigh nearest cells per cell by barycenter distance, ties by cell id."""
    b = mesh.barycenters
    d2 = np.sum((b[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    out = np.empty((mesh.n_cells, n_neigh), dtype=int)
    ids = np.arange(mesh.n_cells)
    for c in range(mesh.n_cells):
        order = np.lexsort((ids, d2[c]))
        order = order[order != c]
        out[c] = order[:n_neigh]
    return out


def indicator_grassmannian(snapshots, space, n_neigh=3, r_T=1):
    """I_G(T): Frobenius residual of the best rank-r_T fit of the snapshot rows
    restricted to cell T and its n_neigh nearest cells."""
    if n_neigh < 0 or r_T < 1:
        raise ValueError("need n_neigh >= 0 and r_T >= 1")
    X = snapshots.matrix if hasattr(snapshots, "matrix") else np.asarray(snapshots)
    mesh = space.mesh
    idx = space.dof_indices().reshape(mesh.n_cells, -1)
    neigh = _neighbors(mesh, min(n_neigh, mesh.n_cells - 1)) if n_neigh else None
    vals = np.empty(mesh.n_cells)
    for c in range(mesh.n_cells):
        cells = [c] if neigh is None else [c, *neigh[c]]
        rows = idx[cells].ravel()
        Xt = X[rows, :]
        s = np.linalg.svd(Xt, compute_uv=False)
        if r_T > min(Xt.shape):
            raise ValueError(f"r_T={r_T} exceeds available rank {min(Xt.shape)}")
        vals[c] = np.sqrt(np.sum(s[r_T:] ** 2))
    return IndicatorField(values=vals, kind="grassmannian",
                          hyper={'n_neigh': n_neigh, 'r_T': r_T})


def repartition(indicator, p_low, k=2):
    """Label the floor(p_low% * n_cells) lowest-indicator cells 0, the rest 1."""
    if k != 2:
        raise ValueError("only k=2 repartitioning is supported")
    if not 0 < p_low < 100:
        raise ValueError("p_low must be in (0, 100)")
    v = indicator.values
    n = len(v)
    n_low = int(np.floor(p_low / 100.0 * n))
    if n_low == 0:
        raise ValueError("p_low rounds to an empty low region")
    order = np.lexsort((np.arange(n), v))
    labels = np.ones(n, dtype=int)
    labels[order[:n_low]] = 0
    return labels


def reconstruction_scan(snapshots, space, kind, p_grid, r_i, n_neigh=3, r_T=1):
    """Relative Frobenius reconstruction errors of rank-r_i local POD on the
    low/high regions of each threshold, plus the global rank-r_i error."""
    X = snapshots.matrix if hasattr(snapshots, "matrix") else np.asarray(snapshots)
    if kind == "variance":
        ind = indicator_variance(snapshots, space)
    elif kind == "grassmannian":
        ind = indicator_grassmannian(snapshots, space, n_neigh=n_neigh, r_T=r_T)
    else:
        raise ValueError(f"unknown indicator kind {kind!r}")
    idx = space.dof_indices().reshape(space.mesh.n_cells, -1)
    norm_x = np.linalg.norm(X)
    vg = pod(X, r=r_i)
    err_global = reconstruction_error(X, vg.V) / norm_x if norm_x else 0.0

    def region_err(rows):
        sub = X[rows, :]
        nrm = np.linalg.norm(sub)
        if nrm == 0:
            return 0.0
        vb = pod(sub, r=min(r_i, min(sub.shape)))
        return reconstruction_error(sub, vb.V) / nrm

    rows_out = []
    for p in p_grid:
        if p >= 100:
            # degenerate split: the low region is the whole domain
            labels = np.zeros(space.mesh.n_cells, dtype=int)
        else:
            labels = repartition(ind, p)
        low = idx[labels == 0].ravel()
        high = idx[labels == 1].ravel()
        err_low = region_err(low)
        err_high = region_err(high) if high.size else 0.0
        rows_out.append((float(p), err_low, err_high, err_global, kind))
    return rows_out
