"""Ready-made problem families: manufactured solutions for convergence studies,
parametric families for ROM training, and synthetic snapshot sets for the
indicator experiments."""

from dataclasses import dataclass, field

import numpy as np

from .dg import DGSpace
from .mesh import build_cartesian_mesh
from .rom import SnapshotSet
from .systems import make_adr_system, make_advection_reaction_system


def _smooth_exact():
    """u = sin(pi x) cos(pi y) + 0.3 x and its derivatives."""
    pi = np.pi

    def u(x, y):
        return np.sin(pi * x) * np.cos(pi * y) + 0.3 * x

    def ux(x, y):
        return pi * np.cos(pi * x) * np.cos(pi * y) + 0.3

    def uy(x, y):
        return -pi * np.sin(pi * x) * np.sin(pi * y)

    def uxx(x, y):
        return -pi ** 2 * np.sin(pi * x) * np.cos(pi * y)

    def uyy(x, y):
        return -pi ** 2 * np.sin(pi * x) * np.cos(pi * y)

    def uxy(x, y):
        return -pi ** 2 * np.cos(pi * x) * np.sin(pi * y)

    return u, ux, uy, uxx, uyy, uxy


def manufactured_adr(kind="smooth"):
    """Return make_problem(n, degree) for an h-convergence study.

    kind 'smooth' uses a trigonometric exact solution (finite rates), kind
    'polynomial' a linear one that the scheme reproduces exactly.
    """
    if kind == "smooth":
        kappa, mu = 0.5, 1.0
        beta = (1.0, 0.5)
        u, ux, uy, uxx, uyy, uxy = _smooth_exact()
    elif kind == "polynomial":
        kappa, mu = 0.3, 2.0
        beta = (1.0, 1.0)
        u = lambda x, y: x + 2.0 * y
        ux = lambda x, y: np.ones_like(x)
        uy = lambda x, y: np.full_like(x, 2.0)
        uxx = uyy = uxy = lambda x, y: np.zeros_like(x)
    else:
        raise ValueError(f"unknown manufactured kind {kind!r}")

    bc = {s: 'dirichlet' for s in ('left', 'right', 'bottom', 'top')}

    def exact(pts):
        x, y = pts[:, 0], pts[:, 1]
        return np.column_stack([-kappa * ux(x, y), -kappa * uy(x, y), u(x, y)])

    def exact_grad(pts):
        x, y = pts[:, 0], pts[:, 1]
        out = np.empty((len(pts), 3, 2))
        out[:, 0, 0] = -kappa * uxx(x, y)
        out[:, 0, 1] = -kappa * uxy(x, y)
        out[:, 1, 0] = -kappa * uxy(x, y)
        out[:, 1, 1] = -kappa * uyy(x, y)
        out[:, 2, 0] = ux(x, y)
        out[:, 2, 1] = uy(x, y)
        return out

    def source(pts):
        x, y = pts[:, 0], pts[:, 1]
        fu = (mu * u(x, y) - kappa * (uxx(x, y) + uyy(x, y))
              + beta[0] * ux(x, y) + beta[1] * uy(x, y))
        return np.column_stack([np.zeros_like(x), np.zeros_like(x), fu])

    def make_problem(n, degree):
        mesh = build_cartesian_mesh(n, n, (0.0, 1.0, 0.0, 1.0))
        sys = make_adr_system(kappa, beta, mu, bc, g=exact, source=source)
        return sys, mesh, exact, exact_grad

    return make_problem


@dataclass(frozen=True)
class ParametricFamily:
    """A parametrized Friedrichs' system with default discretization settings."""
    name: str
    bounds: tuple
    nx: int
    ny: int
    degree: int
    m: int
    param_ranges: np.ndarray          # (P, 2) lower/upper per parameter
    make_system: callable             # rho -> FriedrichsSystem
    split_axis: int = -1              # axis of the two-regime interface, -1 if none
    extras: dict = field(default_factory=dict)

    @property
    def n_params(self):
        return len(self.param_ranges)

    def mesh(self, nx=None, ny=None):
        return build_cartesian_mesh(nx or self.nx, ny or self.ny, self.bounds)

    def sample(self, count, seed):
        """count parameter vectors, uniform over the ranges."""
        rng = np.random.default_rng(seed)
        lo, hi = self.param_ranges[:, 0], self.param_ranges[:, 1]
        return rng.uniform(lo, hi, size=(count, self.n_params))

    def true_labels(self, mesh):
        """Regime membership (0 low / 1 high) of each cell, for split families."""
        if self.split_axis < 0:
            raise ValueError(f"{self.name} has no regime split")
        return (mesh.barycenters[:, self.split_axis] > 0).astype(int)


def _adr_smooth():
    bc = {s: 'dirichlet' for s in ('left', 'right', 'bottom', 'top')}

    def make_system(rho):
        mu, b = rho

        def source(pts):
            out = np.zeros((len(pts), 3))
            out[:, 2] = 1.0
            return out

        return make_adr_system(0.05, (b, 0.0), mu, bc, source=source,
                               params={'mu': mu, 'b': b})

    return ParametricFamily(
        name="adr-smooth", bounds=(0.0, 1.0, 0.0, 1.0), nx=8, ny=8, degree=2,
        m=3, param_ranges=np.array([[1.0, 3.0], [0.5, 2.0]]),
        make_system=make_system)


def _adr_two_regime_x():
    bc = {'left': 'dirichlet', 'right': ('robin', 0.0),
          'bottom': 'neumann', 'top': 'neumann'}

    def make_system(rho):
        ra, rb = rho

        def source(pts):
            x, y = pts[:, 0], pts[:, 1]
            out = np.zeros((len(pts), 3))
            out[:, 2] = (x >= 0) * (ra + rb * y)
            return out

        return make_adr_system(0.002, (1.0, 0.0), 16.0, bc, source=source,
                               bounds=(-1.0, 1.0, 0.0, 1.0),
                               params={'ra': ra, 'rb': rb})

    return ParametricFamily(
        name="adr-two-regime-x", bounds=(-1.0, 1.0, 0.0, 1.0), nx=10, ny=6,
        degree=1, m=3, param_ranges=np.array([[0.5, 2.0], [0.5, 2.0]]),
        make_system=make_system, split_axis=0)


def _adr_two_regime_y():
    bc = {'bottom': 'dirichlet', 'top': ('robin', 0.0),
          'left': 'neumann', 'right': 'neumann'}

    def make_system(rho):
        ra, rb, rc, rd = rho

        def source(pts):
            x, y = pts[:, 0], pts[:, 1]
            out = np.zeros((len(pts), 3))
            out[:, 2] = (y >= 0) * (ra + rb * x + rc * np.sin(2 * np.pi * x)
                                    + rd * x * y)
            return out

        return make_adr_system(0.002, (0.0, 1.0), 16.0, bc, source=source,
                               bounds=(0.0, 1.0, -1.0, 1.0),
                               params={'ra': ra, 'rb': rb, 'rc': rc, 'rd': rd})

    return ParametricFamily(
        name="adr-two-regime-y", bounds=(0.0, 1.0, -1.0, 1.0), nx=6, ny=10,
        degree=1, m=3, param_ranges=np.array([[0.5, 2.0]] * 4),
        make_system=make_system, split_axis=1)


_FAMILIES = {
    "adr-smooth": _adr_smooth,
    "adr-two-regime-x": _adr_two_regime_x,
    "adr-two-regime-y": _adr_two_regime_y,
}


def get_family(name):
    if name not in _FAMILIES:
        raise ValueError(f"unknown family {name!r}; known: {sorted(_FAMILIES)}")
    return _FAMILIES[name]()


def advection_strip(nx=32):
    """Scalar advection-reaction strip with zero reaction (the positivity
    constant vanishes, motivating the dissipative change of unknown)."""
    mesh = build_cartesian_mesh(nx, 1, (0.0, 1.0, 0.0, 1.0))

    def source(pts):
        return (np.cos(3 * pts[:, 0]) * np.exp(-pts[:, 0]))[:, None]

    def g(pts):
        return np.full((len(pts), 1), 0.5)

    sys = make_advection_reaction_system(0.0, (1.0, 0.0), g=g, source=source)
    return sys, mesh


def synthetic_rank_one_snapshots(n=24, seed=3):
    """Synthetic snapshot set on a split domain: cells with x < 0 carry a
    randomly scaled copy of one fixed nonconstant field (locally rank 1 but
    with large pointwise variance), cells with x >= 0 carry a 3-dimensional
    variation of smaller amplitude. Returns (snapshots, space, labels) with
    labels the rank-deficient/rich split (0 low, 1 high)."""
    mesh = build_cartesian_mesh(8, 4, (-1.0, 1.0, 0.0, 1.0))
    space = DGSpace(mesh, 1, 1)
    pts = space.node_points()
    left = mesh.barycenters[:, 0] < 0
    idx = space.dof_indices().reshape(mesh.n_cells, -1)

    phi = 1.0 + 0.5 * np.sin(2 * np.pi * pts[:, :, 0]) * np.cos(np.pi * pts[:, :, 1])
    psi = np.stack([np.exp(pts[:, :, 0]),
                    np.sin(np.pi * pts[:, :, 1]),
                    pts[:, :, 0] * pts[:, :, 1]], axis=0)

    rng = np.random.default_rng(seed)
    c = 1.0 + 0.8 * rng.uniform(-1, 1, n)
    abd = 0.25 * rng.uniform(-1, 1, (3, n))

    X = np.zeros((space.N, n))
    for j in range(n):
        f = np.where(left[:, None], c[j] * phi,
                     np.einsum('k,kcl->cl', abd[:, j], psi))
        X[idx.ravel(), j] = f.ravel()

    snaps = SnapshotSet(matrix=X, params=np.arange(n, dtype=float),
                        system="synthetic-rank-one")
    return snaps, space, (~left).astype(int)
