"""P1 simplicial meshes of the unit interval and unit square."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi

from .errors import ConfigError


def interval_rule(n_points: int):
    """Gauss-Legendre rule on the reference segment [0, 1] (barycentric form)."""
    x, w = np.polynomial.legendre.leggauss(n_points)
    xi = 0.5 * (x + 1.0)
    bary = np.column_stack([1.0 - xi, xi])
    return bary, 0.5 * w


def triangle_rule(n_points: int):
    """Collapsed Gauss-Jacobi x Gauss-Legendre rule on the reference triangle.

    n points per direction integrate polynomials of degree 2n-1 exactly;
    weights sum to the reference area 1/2.
    """
    xj, wj = roots_jacobi(n_points, 1.0, 0.0)
    xl, wl = np.polynomial.legendre.leggauss(n_points)
    u = 0.5 * (xj + 1.0)          # collapsed direction, weight (1-u)
    v = 0.5 * (xl + 1.0)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wj, wl) * 0.25 * 0.5  # (1-u) weight: 2^-2 from maps, 1/2 from Jacobi scaling
    x = U.ravel()
    y = (V * (1.0 - U)).ravel()
    bary = np.column_stack([1.0 - x - y, x, y])
    return bary, W.ravel()


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming simplicial mesh with a boundary flag per vertex."""

    dim: int
    vertices: np.ndarray   # (nv, dim)
    cells: np.ndarray      # (nc, dim+1)
    boundary: np.ndarray   # (nv,) bool
    n: int = 0

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @cached_property
    def _geometry(self):
        X = self.vertices[self.cells]                 # (nc, dim+1, dim)
        J = np.transpose(X[:, 1:, :] - X[:, :1, :], (0, 2, 1))  # (nc, dim, dim)
        det = np.linalg.det(J) if self.dim > 1 else J[:, 0, 0]
        if np.any(det <= 0):
            raise ConfigError("mesh has non-positive cell measure")
        measure = np.abs(det) / (1.0 if self.dim == 1 else 2.0)
        Jinv = np.linalg.inv(J)                       # (nc, dim, dim)
        ref = np.vstack([-np.ones((1, self.dim)), np.eye(self.dim)])  # (dim+1, dim)
        grads = np.einsum("kd,cde->cke", ref, Jinv)   # (nc, dim+1, dim)
        return measure, grads

    @property
    def measure(self) -> np.ndarray:
        return self._geometry[0]

    @property
    def basis_gradients(self) -> np.ndarray:
        return self._geometry[1]

    def quadrature(self, order_factor: int = 1):
        """Points (nc, nq, dim), barycentric values (nq, dim+1), weights (nc, nq).

        ``order_factor=1`` is the degree-7 rule; k multiplies the points per
        direction by k.
        """
        n = 4 * order_factor
        if self.dim == 1:
            bary, w = interval_rule(n)
            w = w / 1.0
        else:
            bary, w = triangle_rule(n)
            w = w * 2.0  # reference area 1/2 -> weights relative to cell measure
        X = self.vertices[self.cells]
        pts = np.einsum("qk,ckd->cqd", bary, X)
        weights = self.measure[:, None] * w[None, :]
        return pts, bary, weights

    def stiffness(self):
        """P1 Laplacian stiffness matrix (scipy CSR) over all vertices."""
        from scipy.sparse import coo_matrix
        G = self.basis_gradients
        local = np.einsum("cid,cjd->cij", G, G) * self.measure[:, None, None]
        k = self.dim + 1
        rows = np.repeat(self.cells, k, axis=1).ravel()
        cols = np.tile(self.cells, (1, k)).ravel()
        return coo_matrix((local.ravel(), (rows, cols)), shape=(self.n_vertices,) * 2).tocsr()


def interval_mesh(n: int) -> Mesh:
    if n < 1:
        raise ConfigError("need at least one cell")
    x = np.linspace(0.0, 1.0, n + 1)
    cells = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    bnd = np.zeros(n + 1, dtype=bool)
    bnd[[0, -1]] = True
    return Mesh(1, x[:, None], cells, bnd, n)


def square_mesh(n: int) -> Mesh:
    """n x n squares, each split along its diagonal into two triangles."""
    if n < 1:
        raise ConfigError("need at least one cell")
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (n + 1) + j

    I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    I, J = I.ravel(), J.ravel()
    v00, v10, v01, v11 = vid(I, J), vid(I + 1, J), vid(I, J + 1), vid(I + 1, J + 1)
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    cells = np.vstack([lower, upper])
    tol = 1e-14
    bnd = (np.abs(verts) < tol).any(axis=1) | (np.abs(verts - 1.0) < tol).any(axis=1)
    return Mesh(2, verts, cells, bnd, n)


def make_mesh(dim: int, n: int) -> Mesh:
    return interval_mesh(n) if dim == 1 else square_mesh(n)


class MeshFunction:
    """Piecewise-linear function given by its nodal values."""

    def __init__(self, mesh: Mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n_vertices,):
            raise ConfigError(f"expected {mesh.n_vertices} nodal values, got {values.shape}")
        self.mesh = mesh
        self.values = values

    def __repr__(self):
        return f"MeshFunction(dim={self.mesh.dim}, n_vertices={self.mesh.n_vertices})"

    def __mul__(self, c: float) -> "MeshFunction":
        return MeshFunction(self.mesh, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "MeshFunction") -> "MeshFunction":
        return MeshFunction(self.mesh, self.values + other.values)

    def __neg__(self):
        return MeshFunction(self.mesh, -self.values)

    @property
    def is_admissible(self) -> bool:
        return bool(np.all(self.values[self.mesh.boundary] == 0))

    def at_quadrature(self, bary) -> np.ndarray:
        return self.values[self.mesh.cells] @ bary.T     # (nc, nq)

    def cell_gradients(self) -> np.ndarray:
        return np.einsum("ck,ckd->cd", self.values[self.mesh.cells], self.mesh.basis_gradients)

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = ["vertex_id", "x"] + (["y"] if self.mesh.dim == 2 else []) + ["value"]
        w.writerow(cols)
        for i, (pt, v) in enumerate(zip(self.mesh.vertices, self.values)):
            w.writerow([i] + [repr(float(c)) for c in pt] + [repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, mesh: Mesh | None = None) -> "MeshFunction":
        """Parse CSV written by :meth:`to_csv`; the mesh is inferred when omitted."""
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        rows = list(csv.reader(lines))
        head, body = rows[0], rows[1:]
        if head[:2] != ["vertex_id", "x"] or head[-1] != "value":
            raise ConfigError("mesh function CSV needs columns vertex_id, x, [y], value")
        dim = 2 if "y" in head else 1
        data = np.array([[float(v) for v in r] for r in body])
        order = np.argsort(data[:, 0], kind="stable")
        data = data[order]
        coords = data[:, 1:1 + dim]
        if mesh is None:
            nv = data.shape[0]
            n = nv - 1 if dim == 1 else int(round(np.sqrt(nv))) - 1
            mesh = make_mesh(dim, n)
        if mesh.n_vertices != data.shape[0] or not np.allclose(mesh.vertices, coords, atol=1e-12):
            raise ConfigError("mesh/domain mismatch between CSV and mesh")
        return cls(mesh, data[:, -1])


def random_mesh_function(mesh: Mesh, rng: np.random.Generator) -> MeshFunction:
    """Seeded Gaussian nodal values, one Jacobi smoothing pass, zero boundary."""
    v = rng.standard_normal(mesh.n_vertices)
    A = mesh.stiffness()
    diag = A.diagonal()
    # damped Jacobi step for the graph Laplacian: v - (1/2) D^{-1} A v
    v = v - 0.5 * (A @ v) / diag
    v[mesh.boundary] = 0.0
    if not np.any(v):
        v[mesh.free[:1]] = 1.0
    return MeshFunction(mesh, v)
