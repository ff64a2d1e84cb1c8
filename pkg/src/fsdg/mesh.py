"""Structured 2D quadrilateral meshes, face classification, subdomain partitions.

Cells are axis-aligned rectangles on a Cartesian grid, numbered column-major
(cell id = ix*ny + iy) so that vertical stripes are contiguous id ranges.
Interior face normals point from the lower-id owner (T1) to the higher-id
owner (T2); boundary normals point outward.
"""

from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre

INTERIOR = 0
BOUNDARY = 1


@dataclass(frozen=True)
class Face:
    kind: int                 # INTERIOR or BOUNDARY
    owners: tuple             # (T1, T2) or (T,)
    normal: np.ndarray        # unit, from T1 side / outward
    measure: float
    axis: int                 # 0: x-normal (vertical face), 1: y-normal
    center: np.ndarray

    def quadrature(self, n):
        """n-point Gauss-Legendre rule along the face; returns (points, weights)."""
        t, w = gauss_legendre(n)
        pts = np.empty((n, 2))
        tang = 1 - self.axis
        pts[:, self.axis] = self.center[self.axis]
        pts[:, tang] = self.center[tang] + (t - 0.5) * self.measure
        return pts, w * self.measure


@dataclass(frozen=True)
class Mesh:
    nx: int
    ny: int
    bounds: tuple             # (x0, x1, y0, y1)
    d: int = 2
    cell_origin: np.ndarray = None      # (n_cells, 2) lower-left corners
    barycenters: np.ndarray = None
    measures: np.ndarray = None
    diameters: np.ndarray = None
    faces: tuple = ()
    cell_to_faces: np.ndarray = None    # (n_cells, 4): left, right, bottom, top

    @property
    def n_cells(self):
        return self.nx * self.ny

    @property
    def dx(self):
        return (self.bounds[1] - self.bounds[0]) / self.nx

    @property
    def dy(self):
        return (self.bounds[3] - self.bounds[2]) / self.ny

    def interior_faces(self):
        return [i for i, f in enumerate(self.faces) if f.kind == INTERIOR]

    def boundary_faces(self):
        return [i for i, f in enumerate(self.faces) if f.kind == BOUNDARY]


def build_cartesian_mesh(nx, ny, bounds):
    """Build an nx-by-ny Cartesian mesh of bounds=(x0, x1, y0, y1)."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be positive")
    x0, x1, y0, y1 = bounds
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate bounds")
    dx = (x1 - x0) / nx
    dy = (y1 - y0) / ny

    cid = lambda ix, iy: ix * ny + iy
    n_cells = nx * ny
    origin = np.empty((n_cells, 2))
    for ix in range(nx):
        for iy in range(ny):
            origin[cid(ix, iy)] = (x0 + ix * dx, y0 + iy * dy)
    bary = origin + 0.5 * np.array([dx, dy])
    measures = np.full(n_cells, dx * dy)
    diameters = np.full(n_cells, np.hypot(dx, dy))

    faces = []
    cell_to_faces = np.full((n_cells, 4), -1, dtype=int)
    # vertical faces (x-normal)
    for ix in range(nx + 1):
        for iy in range(ny):
            xf = x0 + ix * dx
            center = np.array([xf, y0 + (iy + 0.5) * dy])
            if ix == 0:
                f = Face(BOUNDARY, (cid(0, iy),), np.array([-1.0, 0.0]), dy, 0, center)
                cell_to_faces[cid(0, iy), 0] = len(faces)
            elif ix == nx:
                f = Face(BOUNDARY, (cid(nx - 1, iy),), np.array([1.0, 0.0]), dy, 0, center)
                cell_to_faces[cid(nx - 1, iy), 1] = len(faces)
            else:
                t1, t2 = cid(ix - 1, iy), cid(ix, iy)   # t1 < t2: normal +x
                f = Face(INTERIOR, (t1, t2), np.array([1.0, 0.0]), dy, 0, center)
                cell_to_faces[t1, 1] = len(faces)
                cell_to_faces[t2, 0] = len(faces)
            faces.append(f)
    # horizontal faces (y-normal)
    for iy in range(ny + 1):
        for ix in range(nx):
            yf = y0 + iy * dy
            center = np.array([x0 + (ix + 0.5) * dx, yf])
            if iy == 0:
                f = Face(BOUNDARY, (cid(ix, 0),), np.array([0.0, -1.0]), dx, 1, center)
                cell_to_faces[cid(ix, 0), 2] = len(faces)
            elif iy == ny:
                f = Face(BOUNDARY, (cid(ix, ny - 1),), np.array([0.0, 1.0]), dx, 1, center)
                cell_to_faces[cid(ix, ny - 1), 3] = len(faces)
            else:
                t1, t2 = cid(ix, iy - 1), cid(ix, iy)
                f = Face(INTERIOR, (t1, t2), np.array([0.0, 1.0]), dx, 1, center)
                cell_to_faces[t1, 3] = len(faces)
                cell_to_faces[t2, 2] = len(faces)
            faces.append(f)

    return Mesh(nx=nx, ny=ny, bounds=tuple(bounds), cell_origin=origin,
                barycenters=bary, measures=measures, diameters=diameters,
                faces=tuple(faces), cell_to_faces=cell_to_faces)


@dataclass(frozen=True)
class Partition:
    K: int
    owner: np.ndarray                 # per-cell subdomain id
    interface_faces: dict = field(default_factory=dict)  # (i,j) i<j -> tuple of face ids

    def internal_faces(self, mesh, i):
        """Interior faces with both owners in subdomain i."""
        out = []
        for fid in mesh.interior_faces():
            t1, t2 = mesh.faces[fid].owners
            if self.owner[t1] == i and self.owner[t2] == i:
                out.append(fid)
        return out


def _build_interfaces(mesh, owner):
    interface = {}
    for fid in mesh.interior_faces():
        t1, t2 = mesh.faces[fid].owners
        o1, o2 = owner[t1], owner[t2]
        if o1 != o2:
            key = (min(o1, o2), max(o1, o2))
            interface.setdefault(key, []).append(fid)
    return {k: tuple(v) for k, v in interface.items()}


def partition_stripes(mesh, K):
    """Split cells into K contiguous near-equal stripes (column-major ids)."""
    if K < 1 or K > mesh.n_cells:
        raise ValueError("K must be in [1, n_cells]")
    owner = np.empty(mesh.n_cells, dtype=int)
    for i, chunk in enumerate(np.array_split(np.arange(mesh.n_cells), K)):
        owner[chunk] = i
    return Partition(K=K, owner=owner, interface_faces=_build_interfaces(mesh, owner))


def partition_from_labels(mesh, labels):
    """Partition from explicit per-cell labels; labels must be dense in [0, k)."""
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (mesh.n_cells,):
        raise ValueError("labels length must equal cell count")
    k = labels.max() + 1
    if labels.min() < 0 or len(np.unique(labels)) != k:
        raise ValueError("labels must be dense in [0, k)")
    return Partition(K=int(k), owner=labels.copy(),
                     interface_faces=_build_interfaces(mesh, labels))
