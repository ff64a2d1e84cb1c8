"""Monodomain reduced-order modeling: POD, Galerkin projection, certified estimators."""

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

SNAPSHOT_MAGIC = b"DDRF"
SNAPSHOT_VERSION = 1


@dataclass
class SnapshotSet:
    matrix: np.ndarray          # N_h x n, columns are FOM solutions
    params: np.ndarray          # n x P parameter vectors
    system: str = ""
    space: dict = field(default_factory=dict)   # mesh hash, degree, m

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.params = np.asarray(self.params, dtype=float)
        if self.params.ndim == 1:
            self.params = self.params[:, None]
        if self.matrix.shape[1] != self.params.shape[0]:
            raise ValueError("column count must equal parameter count")
        if not (np.all(np.isfinite(self.matrix)) and np.all(np.isfinite(self.params))):
            raise ValueError("snapshots must be finite")

    @property
    def n(self):
        return self.matrix.shape[1]


def train_test_split(n, stride=5):
    """Every stride-th sample is a training sample (indices 0, 5, 10, ...)."""
    idx = np.arange(n)
    train = idx[idx % stride == 0]
    test = idx[idx % stride != 0]
    return train, test


@dataclass
class ReducedBasis:
    V: np.ndarray               # N_h x r, orthonormal columns
    sigma: np.ndarray           # all singular values, non-increasing
    r: int


def pod(snapshots, r=None, tol=None):
    """Truncated SVD of the snapshot matrix in the Euclidean dof inner product.

    Either r (mode count) or tol (relative energy tolerance: smallest r with
    tail energy sum_{i>r} sigma_i^2 <= tol^2 * sum sigma_i^2) must be given.
    """
    X = snapshots.matrix if isinstance(snapshots, SnapshotSet) else np.asarray(snapshots)
    u, s, _ = np.linalg.svd(X, full_matrices=False)
    if r is None:
        if tol is None:
            raise ValueError("give either r or tol")
        total = np.sum(s ** 2)
        tails = total - np.cumsum(s ** 2)
        r = int(np.searchsorted(-tails, -tol ** 2 * total) + 1)
        r = min(r, len(s))
    if r < 1 or r > min(X.shape):
        raise ValueError(f"r={r} out of range for {X.shape} snapshots")
    return ReducedBasis(V=u[:, :r].copy(), sigma=s, r=int(r))


def reconstruction_error(X, V):
    """Frobenius norm of X - V V^t X."""
    return float(np.linalg.norm(X - V @ (V.T @ X)))


def project(asm, basis):
    """Galerkin projection: B = V^t A V, L_r = V^t L."""
    V = basis.V
    if V.shape[0] != asm.A.shape[0]:
        raise ValueError("basis/operator dimension mismatch")
    return V.T @ (asm.A @ V), V.T @ asm.L


def online_solve(reduced, basis):
    """Solve the dense reduced system and lift back to dof space."""
    B, Lr = reduced
    if B.shape[0] == 0:
        raise ValueError("empty reduced system")
    c = np.linalg.solve(B, Lr)
    res = np.linalg.norm(B @ c - Lr)
    if res > 1e-12 * max(np.linalg.norm(Lr), np.linalg.norm(B) * np.linalg.norm(c)):
        raise RuntimeError(f"reduced solve residual {res:.3e} too large")
    return basis.V @ c


@dataclass
class EstimateRecord:
    eta_r: float
    eta_r_energy: float
    eta_l: float
    eta_l_energy: float
    err_l2: float = np.nan        # true relative errors, when z_h given
    err_r: float = np.nan
    err_energy: float = np.nan
    denominator_is_fom: bool = True


@dataclass
class EstimatorReport:
    records: list
    is_train: np.ndarray
    params: np.ndarray

    def violations(self, slack=1e-10):
        """Count samples violating err_r <= eta_r or err_l2 <= eta_l."""
        bad = 0
        for rec in self.records:
            if np.isfinite(rec.err_r) and rec.err_r > rec.eta_r + slack:
                bad += 1
            elif np.isfinite(rec.err_l2) and rec.err_l2 > rec.eta_l + slack:
                bad += 1
        return bad


def _quad_norm(mat_solve, res):
    """sqrt(res^t X^{-1} res) given a solver for X."""
    rhat = mat_solve(res)
    return float(np.sqrt(max(rhat @ res, 0.0)))


def estimate(asm, z_rb, z_h=None):
    """The four residual-based a posteriori estimators for a reduced solution.

    eta_r bounds the relative R-norm error, eta_l the relative L2 error,
    and the _energy variants bound the relative energy-norm error. When the
    FOM solution z_h is withheld, denominators fall back to z_rb (flagged).
    """
    if asm.mu0 <= 0:
        raise ValueError("estimators need mu0 > 0 (X_R must be SPD)")
    res = asm.L - asm.A @ z_rb
    xr_lu = spla.splu(asm.X_R.tocsc())
    xl_lu = spla.splu(asm.X_L.tocsc())
    rhat_r_norm = _quad_norm(xr_lu.solve, res)
    rhat_l_norm = _quad_norm(xl_lu.solve, res)

    ref = z_h if z_h is not None else z_rb
    ref_l2 = float(np.sqrt(ref @ (asm.X_L @ ref)))
    ref_r = float(np.sqrt(ref @ (asm.X_R @ ref)))
    ref_energy = float(np.sqrt(max(ref @ (asm.A @ ref), 0.0)))

    rec = EstimateRecord(
        eta_r=rhat_r_norm / ref_r,
        eta_r_energy=rhat_r_norm / ref_energy,
        eta_l=rhat_l_norm / (asm.mu0 * ref_l2),
        eta_l_energy=rhat_l_norm / (np.sqrt(asm.mu0) * ref_energy),
        denominator_is_fom=z_h is not None,
    )
    if z_h is not None:
        e = z_h - z_rb
        rec.err_l2 = float(np.sqrt(e @ (asm.X_L @ e))) / ref_l2
        rec.err_r = float(np.sqrt(e @ (asm.X_R @ e))) / ref_r
        rec.err_energy = float(np.sqrt(max(e @ (asm.A @ e), 0.0))) / ref_energy
    return rec


def write_snapshots(path, snaps):
    """Binary snapshot file: magic, u32 version, u64 rows, u64 cols, u32 P,
    rows*cols f64 column-major, cols*P f64 parameter block. Little-endian."""
    rows, cols = snaps.matrix.shape
    p = snaps.params.shape[1]
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<IQQI", SNAPSHOT_VERSION, rows, cols, p))
        fh.write(np.asfortranarray(snaps.matrix, dtype="<f8").tobytes(order="F"))
        fh.write(np.ascontiguousarray(snaps.params, dtype="<f8").tobytes())


def read_snapshots(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError("not a snapshot file (bad magic)")
        version, rows, cols, p = struct.unpack("<IQQI", fh.read(24))
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        mat = np.frombuffer(fh.read(8 * rows * cols), dtype="<f8")
        mat = mat.reshape((rows, cols), order="F")
        params = np.frombuffer(fh.read(8 * cols * p), dtype="<f8").reshape(cols, p)
    return SnapshotSet(matrix=mat.copy(), params=params.copy())
