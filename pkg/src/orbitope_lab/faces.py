"""Moment polytope faces and their correspondence with parabolic data."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, UnsupportedDimensionError
from .gradient import max_locus
from .groups import GroupModel, Subset
from .numeric import subspace_distance
from .representation import Representation, mu_tau_connected_subsets, subspace_VI

MAX_RANK = 4


@dataclass
class Polytope:
    ambient_dim: int
    vertices: np.ndarray  # (m, d)
    facets: list[tuple[np.ndarray, float]]  # unit normal, offset
    tol: float = 1e-8

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))

    @property
    def scale_tol(self) -> float:
        return self.tol * max(1.0, self.diameter)

    def slack(self, y: np.ndarray) -> float:
        """min over facets of offset - <normal, y>; negative outside."""
        y = np.asarray(y, dtype=float)
        return float(min(off - n @ y for n, off in self.facets))

    def slacks(self, ys: np.ndarray) -> np.ndarray:
        normals = np.array([n for n, _ in self.facets])
        offsets = np.array([o for _, o in self.facets])
        return np.min(offsets[None, :] - np.atleast_2d(ys) @ normals.T, axis=1)

    def contains(self, y: np.ndarray, tol: float | None = None) -> bool:
        return self.slack(y) >= -(self.scale_tol if tol is None else tol)

    def support(self, beta: np.ndarray) -> float:
        return float(np.max(self.vertices @ beta))

    def vertex_index(self, y: np.ndarray) -> int | None:
        d = np.linalg.norm(self.vertices - y, axis=1)
        i = int(np.argmin(d))
        return i if d[i] < 1e3 * self.scale_tol else None


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in out):
            out.append(p)
    return np.array(out)


def convex_hull(points: np.ndarray, tol: float = 1e-8) -> Polytope:
    """H- and V-representation of conv(points) in R^d, d <= 4, full-dimensional.

    Facets come from exhaustive d-subsets of the input points, which is
    fine for the few dozen points a weight diagram has.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    if d > MAX_RANK:
        raise UnsupportedDimensionError("hull dimension above 4 is unsupported", dim=d)
    scale = max(1.0, float(np.max(np.abs(pts))))
    t = tol * scale
    pts = _dedupe(pts, t)
    if d == 1:
        lo, hi = float(pts.min()), float(pts.max())
        if hi - lo <= t:
            raise ConstructionError("degenerate polytope")
        facets = [(np.array([1.0]), hi), (np.array([-1.0]), -lo)]
        return Polytope(1, np.array([[hi], [lo]]), facets, tol)
    centroid = pts.mean(axis=0)
    facets: list[tuple[np.ndarray, float]] = []
    for idx in itertools.combinations(range(len(pts)), d):
        sub = pts[list(idx)]
        diffs = sub[1:] - sub[0]
        _, s, vh = np.linalg.svd(diffs)
        if s.size < d - 1 or s[-1] <= t:
            continue
        normal = vh[-1]
        offset = float(normal @ sub[0])
        vals = pts @ normal - offset
        if np.all(vals <= t):
            pass
        elif np.all(vals >= -t):
            normal, offset = -normal, -offset
        else:
            continue
        if normal @ centroid - offset > -t:
            raise ConstructionError("degenerate polytope: not full-dimensional")
        if not any(np.linalg.norm(normal - n) < 1e-7 and abs(offset - o) < t for n, o in facets):
            facets.append((normal, offset))
    if not facets:
        raise ConstructionError("degenerate polytope: not full-dimensional")
    normals = np.array([n for n, _ in facets])
    offsets = np.array([o for _, o in facets])
    verts = []
    for p in pts:
        tight = np.abs(normals @ p - offsets) <= t
        if tight.sum() >= d and np.linalg.matrix_rank(normals[tight], tol=1e-7) == d:
            verts.append(p)
    order = np.lexsort(np.array(verts).T[::-1])
    return Polytope(d, np.array(verts)[order], facets, tol)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.linalg.norm(np.atleast_2d(a)[:, None] - np.atleast_2d(b)[None], axis=-1)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def weyl_orbit(model: GroupModel, x: np.ndarray) -> np.ndarray:
    return _dedupe(np.array([w @ x for w in model.weyl_group()]), 1e-9)


def moment_polytope(rep: Representation) -> Polytope:
    model = rep.model
    if model.rank > MAX_RANK:
        raise UnsupportedDimensionError("rank above 4 is unsupported", rank=model.rank)
    tol = model.tol.geom
    from_weights = convex_hull(rep.weights.vectors(), tol)
    from_weyl = convex_hull(weyl_orbit(model, rep.weights.mu), tol)
    gap = hausdorff(from_weights.vertices, from_weyl.vertices)
    if gap > tol * max(1.0, from_weights.diameter):
        raise ConstructionError("weight hull differs from the Weyl-orbit hull", hausdorff=gap)
    return from_weights


@dataclass
class FaceDescriptor:
    vertex_subset: tuple[int, ...]
    defining_beta: np.ndarray  # a coordinates
    dim_face: int
    I: Subset | None = None
    J: Subset | None = None
    W_I_basis: np.ndarray | None = field(default=None, repr=False)


def _affine_dim(points: np.ndarray, tol: float) -> int:
    if len(points) <= 1:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=tol))


def exposed_face(P: Polytope, beta: np.ndarray) -> FaceDescriptor:
    beta = np.asarray(beta, dtype=float)
    vals = P.vertices @ beta
    spread = max(P.diameter * float(np.linalg.norm(beta)), 1.0)
    idx = tuple(int(i) for i in np.nonzero(vals >= vals.max() - P.tol * spread)[0])
    return FaceDescriptor(idx, beta, _affine_dim(P.vertices[list(idx)], 1e-7))


@dataclass
class FaceLattice:
    faces: list[tuple[int, ...]]
    dims: list[int]
    inclusions: set[tuple[int, int]]  # (i, j): faces[i] is a proper subface of faces[j]
    orbit_of: list[int]

    @property
    def orbits(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for i, o in enumerate(self.orbit_of):
            groups.setdefault(o, []).append(i)
        return list(groups.values())

    def proper(self) -> list[int]:
        full = max(range(len(self.faces)), key=lambda i: len(self.faces[i]))
        return [i for i in range(len(self.faces)) if i != full]

    def count_by_dim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for d in self.dims:
            out[d] = out.get(d, 0) + 1
        return out


def vertex_permutations(P: Polytope, model: GroupModel) -> list[list[int]]:
    perms = []
    for w in model.weyl_group():
        perm = []
        for v in P.vertices:
            j = P.vertex_index(w @ v)
            if j is None:
                raise ConstructionError("polytope is not Weyl-invariant")
            perm.append(j)
        perms.append(perm)
    return perms


def face_lattice(P: Polytope, model: GroupModel | None = None) -> FaceLattice:
    if P.ambient_dim > MAX_RANK:
        raise UnsupportedDimensionError("rank above 4 is unsupported", rank=P.ambient_dim)
    t = P.scale_tol
    facet_sets = []
    for n, off in P.facets:
        facet_sets.append(frozenset(np.nonzero(np.abs(P.vertices @ n - off) <= t)[0].tolist()))
    found = set(facet_sets)
    frontier = set(facet_sets)
    while frontier:
        new = set()
        for a in frontier:
            for b in facet_sets:
                c = a & b
                if c and c not in found:
                    new.add(c)
        found |= new
        frontier = new
    found.add(frozenset(range(len(P.vertices))))
    faces = sorted((tuple(sorted(f)) for f in found), key=lambda f: (len(f), f))
    dims = [_affine_dim(P.vertices[list(f)], 1e-7) for f in faces]
    faces_dims = sorted(zip(dims, faces))
    dims = [d for d, _ in faces_dims]
    faces = [f for _, f in faces_dims]
    sets = [set(f) for f in faces]
    inclusions = {(i, j) for i, j in itertools.permutations(range(len(faces)), 2) if sets[i] < sets[j]}
    if model is not None:
        perms = vertex_permutations(P, model)
        keys = [min(tuple(sorted(p[v] for v in f)) for p in perms) for f in faces]
    else:
        keys = [f for f in faces]
    ids: dict[tuple, int] = {}
    orbit_of = [ids.setdefault(k, len(ids)) for k in keys]
    return FaceLattice(faces, dims, inclusions, orbit_of)


def face_correspondence(rep: Representation, P: Polytope | None = None) -> list[FaceDescriptor]:
    model = rep.model
    P = moment_polytope(rep) if P is None else P
    x = rep.weights.mu
    out = []
    for I, J in mu_tau_connected_subsets(rep):
        beta = model.chamber_element_for(J)
        vals = model.simple_roots @ beta
        t = model.vanishing_tol(beta)
        pattern = tuple(i for i in range(model.rank) if abs(vals[i]) < t)
        if pattern != J or np.any(vals < -t):
            raise ConstructionError("chamber element violates the vanishing pattern",
                                    J=list(J), simple_values=vals.tolist())
        face = exposed_face(P, beta)
        xi = P.vertex_index(x)
        if xi is None or xi not in face.vertex_subset:
            raise ConstructionError("face does not contain the highest weight", I=list(I))
        W = subspace_VI(rep, model.largest_connected_subset(x, J))
        top = max_locus(rep, beta, model.tol)
        angle = subspace_distance(W, top)
        if angle > 1e-8:
            raise ConstructionError("V_I differs from the maximal eigenspace of beta_J",
                                    I=list(I), angle=angle)
        face.I, face.J, face.W_I_basis = I, J, W
        out.append(face)
    if len({f.vertex_subset for f in out}) != len(out):
        raise ConstructionError("face correspondence is not injective")
    return out


def face_classes_containing(P: Polytope, lattice: FaceLattice, point: np.ndarray) -> set[int]:
    """Weyl-orbit ids of faces that contain the given vertex."""
    idx = P.vertex_index(point)
    return {lattice.orbit_of[i] for i, f in enumerate(lattice.faces) if idx in f}


def orbitope_membership(rep: Representation, xi: np.ndarray, P: Polytope | None = None,
                        slack: float = 0.0) -> bool:
    """Membership of xi in conv(mu_p(O)), via the chamber representative in P.

    With ``slack > 0`` the point must clear every facet by that margin.
    """
    P = moment_polytope(rep) if P is None else P
    h, _ = rep.model.chamber_project(xi)
    s = P.slack(h)
    return s > slack if slack > 0 else s >= -P.scale_tol


def orbitope_slack(rep: Representation, xi: np.ndarray, P: Polytope | None = None) -> float:
    P = moment_polytope(rep) if P is None else P
    h, _ = rep.model.chamber_project(xi)
    return P.slack(h)
