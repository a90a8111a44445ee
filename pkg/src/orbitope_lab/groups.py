"""Matrix models of real semisimple groups.

A :class:`GroupModel` fixes the Cartan decomposition g = k + p, a maximal
abelian a in p, restricted roots, simple roots and the Weyl group. Elements
of p and a are handled either as N x N matrices or as real coordinate
vectors over the orthonormal bases ``p_basis`` / ``a_basis`` (inner product
Re tr(X Y^*)); ``a_basis`` is always the leading block of ``p_basis``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ChamberError,
    ConfigurationError,
    ModelMembershipError,
    PreconditionError,
    SubspaceError,
)
from .numeric import DEFAULT_TOL, KAK, ToleranceProfile, kak_decompose

Subset = tuple[int, ...]


def inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.real(np.trace(x @ np.conj(y).T)))


def joint_eigenspaces(ops: Sequence[np.ndarray], tol: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Simultaneous eigenspaces of commuting Hermitian operators.

    Splits the space one operator at a time, so weights that agree on a
    generic combination are never merged by accident. Returns a list of
    (eigenvalue vector, orthonormal basis) pairs.
    """
    dim = ops[0].shape[0]
    blocks: list[tuple[list[float], np.ndarray]] = [([], np.eye(dim, dtype=ops[0].dtype))]
    scale = 1.0 + max(np.linalg.norm(op, 2) for op in ops)
    for op in ops:
        refined = []
        for vals, basis in blocks:
            sub = basis.conj().T @ op @ basis
            sub = (sub + sub.conj().T) / 2
            w, v = np.linalg.eigh(sub)
            order = np.argsort(-w, kind="stable")
            w, v = w[order], v[:, order]
            start = 0
            for i in range(1, len(w) + 1):
                if i == len(w) or w[start] - w[i] > tol * scale:
                    refined.append((vals + [float(np.mean(w[start:i]))], basis @ v[:, start:i]))
                    start = i
        blocks = refined
    return [(np.array(vals), basis) for vals, basis in blocks]


@dataclass(frozen=True)
class ParabolicDatum:
    beta: np.ndarray  # p coordinates of the input element
    chamber_beta: np.ndarray  # a coordinates of its chamber representative
    conjugator: np.ndarray  # k with Ad(k) beta = chamber_beta
    vanishing_set: Subset
    ad_values: tuple[float, ...]
    ad_spaces: tuple[np.ndarray, ...]  # real coordinates over the g basis
    dim_g: int

    @property
    def dim_nonneg(self) -> int:
        return sum(s.shape[1] for lam, s in zip(self.ad_values, self.ad_spaces) if lam >= -1e-9)


@dataclass
class GroupModel:
    name: str
    family: str
    n: int
    real: bool
    k_basis: list[np.ndarray]
    p_basis: list[np.ndarray]
    rank: int
    regular_element: np.ndarray  # a coordinates of a fixed regular chamber element
    tol: ToleranceProfile = DEFAULT_TOL
    roots: list[tuple[np.ndarray, int]] = field(default_factory=list)
    simple_roots: np.ndarray = field(default=None)  # type: ignore[assignment]
    weyl_generators: list[np.ndarray] = field(default_factory=list)
    weyl_k_generators: list[np.ndarray] = field(default_factory=list)
    root_graph: np.ndarray = field(default=None)  # type: ignore[assignment]

    # ------------------------------------------------------------------ bases
    @property
    def N(self) -> int:
        return self.n

    @property
    def a_basis(self) -> list[np.ndarray]:
        return self.p_basis[: self.rank]

    @property
    def g_basis(self) -> list[np.ndarray]:
        return self.k_basis + self.p_basis

    @property
    def dim_p(self) -> int:
        return len(self.p_basis)

    @property
    def dim_g(self) -> int:
        return len(self.k_basis) + len(self.p_basis)

    def p_matrix(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), np.array(self.p_basis), axes=1)

    def a_matrix(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), np.array(self.a_basis), axes=1)

    def p_coords(self, x: np.ndarray, check: bool = True) -> np.ndarray:
        """Coordinates of ``x`` over ``p_basis``; accepts coordinates or a matrix."""
        x = np.asarray(x)
        if x.ndim == 1:
            if x.shape[0] == self.dim_p:
                return x.astype(float)
            if x.shape[0] == self.rank:
                return np.concatenate([x.astype(float), np.zeros(self.dim_p - self.rank)])
            raise SubspaceError("coordinate vector has the wrong length", length=x.shape[0])
        coords = np.array([inner(x, b) for b in self.p_basis])
        if check:
            resid = np.linalg.norm(x - self.p_matrix(coords))
            if resid > self.tol.geom * (1.0 + np.linalg.norm(x)):
                raise SubspaceError("element does not lie in p", residual=float(resid))
        return coords

    def a_coords(self, x: np.ndarray, check: bool = True) -> np.ndarray:
        x = np.asarray(x)
        if x.ndim == 1:
            if x.shape[0] == self.rank:
                return x.astype(float)
            c = self.p_coords(x)
        else:
            c = self.p_coords(x, check=check)
        if check and np.linalg.norm(c[self.rank:]) > self.tol.geom * (1.0 + np.linalg.norm(c)):
            raise SubspaceError("element does not lie in a")
        return c[: self.rank]

    def to_g_coords(self, x: np.ndarray) -> np.ndarray:
        return np.array([inner(x, b) for b in self.g_basis])

    def from_g_coords(self, c: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=float), np.array(self.g_basis), axes=1)

    def ad_matrix(self, x: np.ndarray) -> np.ndarray:
        """Real matrix of ad(x) on g in the orthonormal basis k_basis + p_basis."""
        basis = self.g_basis
        cols = [self.to_g_coords(x @ b - b @ x) for b in basis]
        return np.array(cols).T

    # --------------------------------------------------------------- elements
    def exp_p(self, xi: np.ndarray) -> np.ndarray:
        """exp(xi) for xi in p, computed spectrally (xi is Hermitian)."""
        m = self.p_matrix(self.p_coords(xi))
        w, v = np.linalg.eigh(m)
        g = (v * np.exp(w)) @ v.conj().T
        return np.real(g) if self.real else g

    def random_k(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Haar-distributed elements of K = SO(n) or SU(n); batched when ``size`` given."""
        count = 1 if size is None else size
        n = self.n
        if self.real:
            z = rng.standard_normal((count, n, n))
        else:
            z = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        q = q * (d / np.abs(d))[:, None, :]
        det = np.linalg.det(q)
        if self.real:
            q[:, :, 0] *= np.sign(det)[:, None]
        else:
            q = q * (det ** (-1.0 / n))[:, None, None]
        return q[0] if size is None else q

    def random_p(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.dim_p,) if size is None else (size, self.dim_p)
        return rng.standard_normal(shape)

    def check_member(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g)
        if g.shape != (self.n, self.n):
            raise ModelMembershipError("element has the wrong shape", shape=list(g.shape))
        det = np.linalg.det(g)
        if abs(det - 1.0) > 1e-8 * max(1.0, np.linalg.norm(g) ** self.n):
            raise ModelMembershipError("element does not have determinant one", det=str(det))
        if self.real and np.max(np.abs(np.imag(g))) > 1e-10:
            raise ModelMembershipError("element is not real")
        return np.real(g) if self.real else g

    def kak(self, g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """g = k1 exp(H) k2 with H returned as chamber coordinates in a."""
        res: KAK = kak_decompose(self.check_member(g), real=self.real)
        return res.k1, self.a_coords(np.diag(res.h)), res.k2

    # ------------------------------------------------------------------ roots
    def root_value(self, alpha: np.ndarray, x: np.ndarray) -> float:
        return float(np.dot(alpha, self.a_coords(x)))

    def simple_values(self, x: np.ndarray) -> np.ndarray:
        return self.simple_roots @ self.a_coords(x)

    def vanishing_tol(self, x: np.ndarray) -> float:
        return self.tol.geom * (1.0 + float(np.linalg.norm(x)))

    def in_chamber(self, x: np.ndarray) -> bool:
        x = self.a_coords(x)
        return bool(np.all(self.simple_roots @ x >= -self.vanishing_tol(x)))

    def weyl_group(self) -> list[np.ndarray]:
        """All Weyl group elements as orthogonal matrices on a coordinates."""
        elems = [np.eye(self.rank)]
        seen = {_key(elems[0])}
        frontier = list(elems)
        while frontier:
            nxt = []
            for w in frontier:
                for s in self.weyl_generators:
                    m = s @ w
                    key = _key(m)
                    if key not in seen:
                        seen.add(key)
                        elems.append(m)
                        nxt.append(m)
            frontier = nxt
        return elems

    # --------------------------------------------------------- chamber & K
    def chamber_project(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (H, k) with H in the closed positive chamber and Ad(k) xi = H."""
        m = self.p_matrix(self.p_coords(xi))
        w, v = np.linalg.eigh(m)
        order = np.argsort(-w, kind="stable")
        v = v[:, order]
        if self.real:
            v = np.real(v)
            if np.linalg.det(v) < 0:
                v[:, -1] *= -1
        else:
            v = v * np.linalg.det(v) ** (-1.0 / self.n)
        k = v.conj().T
        h = k @ m @ k.conj().T
        return self.a_coords(np.diag(np.real(np.diag(h)))), k

    def parabolic_from_beta(self, beta: np.ndarray) -> ParabolicDatum:
        coords = self.p_coords(beta)
        h, k = self.chamber_project(coords)
        t = self.vanishing_tol(coords)
        vanish = tuple(i for i, a in enumerate(self.simple_roots) if abs(a @ h) < t)
        ad = self.ad_matrix(self.p_matrix(coords))
        ad = (ad + ad.T) / 2
        w, v = np.linalg.eigh(ad)
        order = np.argsort(-w)
        w, v = w[order], v[:, order]
        values, spaces = [], []
        start = 0
        for i in range(1, len(w) + 1):
            if i == len(w) or w[start] - w[i] > t:
                values.append(float(np.mean(w[start:i])))
                spaces.append(v[:, start:i])
                start = i
        return ParabolicDatum(coords, h, k, vanish, tuple(values), tuple(spaces), self.dim_g)

    # --------------------------------------------------- connected subsets
    def _orthogonal(self, i: int, j: int) -> bool:
        return not self.root_graph[i, j]

    def components(self, subset: Subset) -> list[Subset]:
        remaining = set(subset)
        comps = []
        while remaining:
            stack = [remaining.pop()]
            comp = set(stack)
            while stack:
                i = stack.pop()
                for j in list(remaining):
                    if self.root_graph[i, j]:
                        remaining.discard(j)
                        comp.add(j)
                        stack.append(j)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_x_connected(self, x: np.ndarray, subset: Subset) -> bool:
        vals = self.simple_values(x)
        t = self.vanishing_tol(self.a_coords(x))
        return all(any(abs(vals[i]) >= t for i in comp) for comp in self.components(subset))

    def x_connected_subsets(self, x: np.ndarray) -> list[Subset]:
        x = self.a_coords(x)
        if not self.in_chamber(x):
            raise ChamberError("point is not in the closed positive chamber",
                               simple_values=self.simple_values(x).tolist())
        out = []
        for size in range(self.rank + 1):
            for subset in itertools.combinations(range(self.rank), size):
                if self.is_x_connected(x, subset):
                    out.append(subset)
        return out

    def saturate(self, x: np.ndarray, subset: Subset) -> Subset:
        x = self.a_coords(x)
        subset = tuple(sorted(subset))
        if not self.is_x_connected(x, subset):
            raise PreconditionError("subset is not x-connected", subset=list(subset))
        vals = self.simple_values(x)
        t = self.vanishing_tol(x)
        extra = [
            a for a in range(self.rank)
            if a not in subset
            and abs(vals[a]) < t
            and all(self._orthogonal(a, b) for b in subset)
        ]
        return tuple(sorted(set(subset) | set(extra)))

    def largest_connected_subset(self, x: np.ndarray, subset: Subset) -> Subset:
        """Union of the x-connected components of ``subset``."""
        vals = self.simple_values(x)
        t = self.vanishing_tol(self.a_coords(x))
        keep = [c for c in self.components(subset) if any(abs(vals[i]) >= t for i in c)]
        return tuple(sorted(i for c in keep for i in c))

    def chamber_element_for(self, subset: Subset) -> np.ndarray:
        """Chamber element whose vanishing simple roots are exactly ``subset``."""
        rhs = np.array([0.0 if i in subset else 1.0 for i in range(self.rank)])
        return np.linalg.solve(self.simple_roots, rhs)

    # ----------------------------------------------------------- validation
    def cartan_residuals(self) -> dict[str, float]:
        def resid(x: np.ndarray, basis: list[np.ndarray]) -> float:
            c = np.array([inner(x, b) for b in basis])
            return float(np.linalg.norm(x - np.tensordot(c, np.array(basis), axes=1)))

        out = {"kk": 0.0, "kp": 0.0, "pp": 0.0, "aa": 0.0}
        for a, b in itertools.product(self.k_basis, self.k_basis):
            out["kk"] = max(out["kk"], resid(a @ b - b @ a, self.k_basis))
        for a, b in itertools.product(self.k_basis, self.p_basis):
            out["kp"] = max(out["kp"], resid(a @ b - b @ a, self.p_basis))
        for a, b in itertools.product(self.p_basis, self.p_basis):
            out["pp"] = max(out["pp"], resid(a @ b - b @ a, self.k_basis))
        for a, b in itertools.product(self.a_basis, self.a_basis):
            out["aa"] = max(out["aa"], float(np.linalg.norm(a @ b - b @ a)))
        return out

    def descriptor(self) -> dict:
        return {"family": self.family, "n": self.n, "tolerances": self.tol.to_dict()}

    def restricted_roots(self) -> list[tuple[np.ndarray, int]]:
        return list(self.roots)


def _key(m: np.ndarray) -> tuple:
    return tuple(np.round(m, 8).ravel() + 0.0)


def _sl_r(n: int) -> tuple[list[np.ndarray], list[np.ndarray], int, np.ndarray]:
    k_basis = []
    for i, j in itertools.combinations(range(n), 2):
        m = np.zeros((n, n))
        m[i, j], m[j, i] = 1, -1
        k_basis.append(m / np.sqrt(2))
    diag = []
    for i in range(n - 1):
        d = np.zeros(n)
        d[: i + 1] = 1.0
        d[i + 1] = -(i + 1)
        diag.append(np.diag(d / np.linalg.norm(d)))
    off = []
    for i, j in itertools.combinations(range(n), 2):
        m = np.zeros((n, n))
        m[i, j] = m[j, i] = 1
        off.append(m / np.sqrt(2))
    reg = np.diag(np.arange(n, 0, -1, dtype=float) - (n + 1) / 2)
    return k_basis, diag + off, n - 1, reg


def _sl_c2() -> tuple[list[np.ndarray], list[np.ndarray], int, np.ndarray]:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    p_basis = [sz / np.sqrt(2), sx / np.sqrt(2), sy / np.sqrt(2)]
    k_basis = [1j * s / np.sqrt(2) for s in (sz, sx, sy)]
    return k_basis, p_basis, 1, sz.copy()


_FAMILY_RE = re.compile(r"^\s*(SL_R|SL_C)\s*(?:\(\s*(\d+)\s*\))?\s*$")


def parse_family(descriptor: str | dict) -> tuple[str, int]:
    if isinstance(descriptor, dict):
        try:
            return str(descriptor["family"]), int(descriptor.get("n", 2))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError("malformed group descriptor", descriptor=str(descriptor)) from exc
    m = _FAMILY_RE.match(descriptor)
    if not m:
        raise ConfigurationError("unsupported group family", family=descriptor)
    return m.group(1), int(m.group(2) or 2)


def build_model(family: str | dict, n: int | None = None,
                tol: ToleranceProfile = DEFAULT_TOL) -> GroupModel:
    """Construct SL_R(n) (n >= 2) or SL_C(2)."""
    if n is None:
        family, n = parse_family(family)
    if family == "SL_R":
        if n < 2:
            raise ConfigurationError("SL_R(n) needs n >= 2", n=n)
        k_basis, p_basis, rank, reg = _sl_r(n)
        real = True
    elif family == "SL_C":
        if n != 2:
            raise ConfigurationError("only SL_C(2) is supported", n=n)
        k_basis, p_basis, rank, reg = _sl_c2()
        real = False
    else:
        raise ConfigurationError("unsupported group family", family=family)
    model = GroupModel(
        name=f"{family}({n})", family=family, n=n, real=real,
        k_basis=k_basis, p_basis=p_basis, rank=rank,
        regular_element=np.zeros(rank), tol=tol,
    )
    model.regular_element = model.a_coords(reg.astype(p_basis[0].dtype))
    _attach_roots(model)
    return model


def _attach_roots(model: GroupModel) -> None:
    ops = [model.ad_matrix(a) for a in model.a_basis]
    ops = [(o + o.T) / 2 for o in ops]
    spaces = joint_eigenspaces(ops, 1e-9)
    roots = [(vals, b.shape[1]) for vals, b in spaces if np.linalg.norm(vals) > 1e-9]
    model.roots = roots
    reg = model.regular_element
    positive = [r for r, _ in roots if r @ reg > 0]
    simple = []
    for r in positive:
        decomposable = any(
            np.allclose(r, p + q, atol=1e-9) for p, q in itertools.combinations(positive, 2)
        ) or any(np.allclose(r, 2 * p, atol=1e-9) for p in positive)
        if not decomposable:
            simple.append(r)
    # order simple roots along the diagonal of their matrix form
    simple.sort(key=lambda r: int(np.argmax(np.real(np.diag(model.a_matrix(r))))))
    model.simple_roots = np.array(simple)
    gram = model.simple_roots @ model.simple_roots.T
    model.root_graph = np.abs(gram) > 1e-9
    np.fill_diagonal(model.root_graph, False)
    model.weyl_generators = [
        np.eye(model.rank) - 2 * np.outer(a, a) / (a @ a) for a in model.simple_roots
    ]
    model.weyl_k_generators = _weyl_k_generators(model)


def _weyl_k_generators(model: GroupModel) -> list[np.ndarray]:
    n = model.n
    gens = []
    if model.family == "SL_R":
        for i in range(n - 1):
            m = np.eye(n)
            m[[i, i + 1]] = m[[i + 1, i]]
            m[i, i + 1] = -1  # determinant correction keeps the element in SO(n)
            gens.append(m)
    else:
        gens.append(np.array([[0, 1], [-1, 0]], dtype=complex))
    return gens
