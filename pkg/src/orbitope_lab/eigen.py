"""Rayleigh-quotient upper bound for lambda_1 on meshed spheres.

The closed orbit of SL_C(2) on C^2 is P^1 = S^2, with the gradient map
mu_p([v]) = vv^*/|v|^2 - I/2 equal to (n . sigma)/2 for the Bloch vector n.
Functions are piecewise linear on the mesh. The Dirichlet energy uses
cotangent weights computed from geodesic edge lengths. The L^2 mass is
lumped, one third of each spherical triangle area per vertex, scaled by
the conformal factor when one is given.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .bly import DiscreteMeasure, bly_inverse, psi_of_xi
from .errors import MeshError, PreconditionError
from .gradient import gradient_coords
from .representation import Representation

MIN_AREA = 1e-14


def bloch_to_p1(xyz: np.ndarray) -> np.ndarray:
    """Unit vectors n in R^3 -> v = (cos(theta/2), e^{i phi} sin(theta/2))."""
    xyz = np.atleast_2d(xyz)
    theta = np.arccos(np.clip(xyz[:, 2], -1.0, 1.0))
    phi = np.arctan2(xyz[:, 1], xyz[:, 0])
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=1)


def _spherical_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Spherical excess via the Van Oosterom-Strackee formula."""
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2 * np.arctan2(num, den)


@dataclass
class RiemannMesh:
    vertices: np.ndarray  # (V, 3) on the unit sphere
    triangles: np.ndarray  # (F, 3), outward orientation
    conformal_factor: np.ndarray | None = None  # e^{2u} sampled at vertices
    points: np.ndarray = field(init=False, repr=False)  # (V, 2) P^1 representatives
    edge_lengths: np.ndarray = field(init=False, repr=False)  # (F, 3), opposite each corner
    areas: np.ndarray = field(init=False, repr=False)  # spherical triangle areas

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.vertices /= np.linalg.norm(self.vertices, axis=1, keepdims=True)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self.points = bloch_to_p1(self.vertices)
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))

        def geo(u, w):
            return np.arccos(np.clip(np.einsum("ij,ij->i", u, w), -1.0, 1.0))

        self.edge_lengths = np.stack([geo(b, c), geo(c, a), geo(a, b)], axis=1)
        self.areas = _spherical_area(a, b, c)
        if np.any(self.areas < MIN_AREA):
            raise MeshError("degenerate triangle", min_area=float(self.areas.min()))
        if self.conformal_factor is not None:
            cf = np.asarray(self.conformal_factor, dtype=float)
            if cf.shape != (len(self.vertices),) or np.any(cf <= 0):
                raise MeshError("conformal factor must be positive, one per vertex")
            self.conformal_factor = cf

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def euler_characteristic(self) -> int:
        t = self.triangles
        edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        n_edges = len(np.unique(edges, axis=0))
        return self.n_vertices - n_edges + len(t)

    @property
    def vertex_weights(self) -> np.ndarray:
        """Lumped mass: a third of each adjacent triangle's area, times the conformal factor."""
        w = np.zeros(self.n_vertices)
        for i in range(3):
            np.add.at(w, self.triangles[:, i], self.areas / 3)
        if self.conformal_factor is not None:
            w *= self.conformal_factor
        return w

    def total_mass(self) -> float:
        return float(self.vertex_weights.sum())

    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.points, self.vertex_weights)

    def stiffness(self) -> scipy.sparse.csr_matrix:
        """Cotangent Laplacian from intrinsic (geodesic) edge lengths."""
        l = self.edge_lengths
        l2 = l ** 2
        s = l.sum(axis=1) / 2
        flat = np.sqrt(np.clip(s * (s - l[:, 0]) * (s - l[:, 1]) * (s - l[:, 2]), 0, None))
        if np.any(flat < MIN_AREA):
            raise MeshError("degenerate triangle", min_area=float(flat.min()))
        rows, cols, vals = [], [], []
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            # cot of the angle at corner i, which faces edge (j, k)
            cot = (l2[:, j] + l2[:, k] - l2[:, i]) / (4 * flat)
            vj, vk = self.triangles[:, j], self.triangles[:, k]
            half = cot / 2
            rows += [vj, vk, vj, vk]
            cols += [vk, vj, vj, vk]
            vals += [-half, -half, half, half]
        n = self.n_vertices
        return scipy.sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                       shape=(n, n)).tocsr()

    def dirichlet_energy(self, f: np.ndarray) -> float:
        return float(f @ (self.stiffness() @ f))


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    phi = (1 + 5 ** 0.5) / 2
    v = np.array([[-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
                  [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
                  [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1]], dtype=float)
    f = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def mesh_sphere(level: int, conformal=None) -> RiemannMesh:
    """Icosahedral subdivision projected to the unit sphere (10*4^level + 2 vertices).

    ``conformal`` is an optional callable mapping (V, 3) vertex positions to
    the positive factor e^{2u}.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = np.array(new)
    v = np.array(verts)
    cf = None if conformal is None else np.asarray(conformal(v), dtype=float)
    return RiemannMesh(v, faces, cf)


def squashed_factor(strength: float = 0.4):
    """Conformal factor e^{2u} = (1 - strength) + strength z^2, flattening the equator."""
    if not 0 <= strength < 1:
        raise ValueError("strength must lie in [0, 1)")
    return lambda v: (1 - strength) + strength * v[:, 2] ** 2


def north_bias_factor(strength: float = 1.0):
    return lambda v: np.exp(strength * v[:, 2])


def _check_model(rep: Representation) -> None:
    if rep.dimV != 2 or rep.model.family != "SL_C" or rep.model.n != 2:
        raise PreconditionError("eigen estimates are implemented for SL_C(2) standard only", module="eigen",
                                family=rep.model.family, dimV=rep.dimV)


def balance(rep: Representation, mesh: RiemannMesh, tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """a in G with sum_i w_i mu_p(rho(a) x_i) = 0; returns (a, residual)."""
    _check_model(rep)
    gamma = mesh.measure()
    a, report = bly_inverse(rep, gamma, np.zeros(rep.model.dim_p), tol=tol)
    return a, report.residuals[-1]


@dataclass
class RayleighReport:
    bound: float
    numerator: float
    denominator: float
    balancing_residual: float
    mesh_size: int
    sum_sq_constant: float  # pointwise value of sum_j f_j^2 on the orbit
    scale_factor: float  # sum_sq_constant relative to the 1/4 normalization

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def balanced_functions(rep: Representation, mesh: RiemannMesh, a: np.ndarray) -> np.ndarray:
    """Vertex values (V, dim_p) of f_j(rho(a) x)."""
    t = rep.tau(rep.model.check_member(a))
    w, v = np.linalg.eigh(t @ t.conj().T)
    rho = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    return gradient_coords(rep, mesh.points @ rho.T)


def rayleigh_bound(rep: Representation, mesh: RiemannMesh, a: np.ndarray,
                   max_residual: float = 1e-6) -> RayleighReport:
    _check_model(rep)
    f = balanced_functions(rep, mesh, a)
    w = mesh.vertex_weights
    residual = float(np.linalg.norm(w @ f) / w.sum())
    if residual > max_residual:
        raise PreconditionError("a does not balance the mesh measure", module="eigen", residual=residual)
    K = mesh.stiffness()
    numerator = float(sum(f[:, j] @ (K @ f[:, j]) for j in range(f.shape[1])))
    sq = np.sum(f ** 2, axis=1)
    denominator = float(w @ sq)
    const = float(sq.mean())
    return RayleighReport(numerator / denominator, numerator, denominator, residual,
                          mesh.n_vertices, const, const / 0.25)


def eigenbound(rep: Representation, level: int, conformal=None) -> RayleighReport:
    mesh = mesh_sphere(level, conformal)
    a, _ = balance(rep, mesh)
    return rayleigh_bound(rep, mesh, a)


def analytic_rotation_check(rep: Representation, mesh: RiemannMesh, a: np.ndarray, k: np.ndarray) -> float:
    """|bound(a) - bound(a k)|, which vanishes by right K-invariance."""
    return abs(rayleigh_bound(rep, mesh, a).bound - rayleigh_bound(rep, mesh, a @ k).bound)


__all__ = [
    "RiemannMesh", "RayleighReport", "mesh_sphere", "balance", "rayleigh_bound", "eigenbound",
    "squashed_factor", "north_bias_factor", "bloch_to_p1", "balanced_functions",
    "analytic_rotation_check", "psi_of_xi",
]
