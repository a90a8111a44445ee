"""Irreducible representations built functorially from the defining one.

Expressions use the grammar ``standard``, ``dual``, ``dual(E)``,
``sym(k, E)``, ``wedge(k, E)``, ``tensor(E, E)``. Symmetric and exterior
powers are realised as isometric subspaces of tensor powers, so both the
Lie algebra action and the group action are available on every node.
"""
from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AmbiguityError, IrreducibilityError, ParseError, PreconditionError
from .groups import GroupModel, Subset, joint_eigenspaces
from .numeric import ProjectivePoint

MAX_DIM = 2000
EXACT_COMMUTANT_DIM = 40


# --------------------------------------------------------------------- nodes
class Node:
    dim: int

    def lie(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def group(self, g: np.ndarray) -> np.ndarray:
        """Group action, batched over leading axes of ``g``."""
        raise NotImplementedError


@dataclass
class Standard(Node):
    n: int

    @property
    def dim(self) -> int:
        return self.n

    def lie(self, x):
        return np.asarray(x, dtype=complex)

    def group(self, g):
        return np.asarray(g, dtype=complex)

    def __str__(self) -> str:
        return "standard"


@dataclass
class Dual(Node):
    child: Node

    @property
    def dim(self) -> int:
        return self.child.dim

    def lie(self, x):
        return -self.child.lie(x).T

    def group(self, g):
        return np.swapaxes(np.linalg.inv(self.child.group(g)), -1, -2)

    def __str__(self) -> str:
        return f"dual({self.child})"


def _bkron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    s = out.shape
    return out.reshape(s[:-4] + (s[-4] * s[-3], s[-2] * s[-1]))


def _apply_on_slot(h: np.ndarray, t: np.ndarray, slot: int) -> np.ndarray:
    """Apply the batched operator h (B, m, m) to tensor axis ``slot`` of t (B, m, ..., m, D)."""
    moved = np.moveaxis(t, slot + 1, 1)
    out = np.einsum("bij,bj...->bi...", h, moved)
    return np.moveaxis(out, 1, slot + 1)


def _power_embedding(m: int, k: int, alternating: bool) -> np.ndarray:
    if alternating:
        index_sets = list(itertools.combinations(range(m), k))
    else:
        index_sets = list(itertools.combinations_with_replacement(range(m), k))
    emb = np.zeros((m ** k, len(index_sets)))
    for col, idx in enumerate(index_sets):
        if alternating:
            words = ((tuple(idx[p] for p in perm), _perm_sign(perm)) for perm in itertools.permutations(range(k)))
        else:
            words = ((w, 1) for w in _distinct_permutations(idx))
        for word, sign in words:
            flat = 0
            for letter in word:
                flat = flat * m + letter
            emb[flat, col] = sign
        emb[:, col] /= np.linalg.norm(emb[:, col])
    return emb


def _distinct_permutations(items: tuple[int, ...]):
    counts: dict[int, int] = {}
    for x in items:
        counts[x] = counts.get(x, 0) + 1
    keys = sorted(counts)

    def rec(prefix: list[int]):
        if len(prefix) == len(items):
            yield tuple(prefix)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                prefix.append(key)
                yield from rec(prefix)
                prefix.pop()
                counts[key] += 1

    return rec([])


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            sign *= (-1) ** (length - 1)
    return sign


@dataclass
class Power(Node):
    k: int
    child: Node
    alternating: bool

    def __post_init__(self) -> None:
        m = self.child.dim
        if self.k < 1 or (self.alternating and self.k > m):
            raise ParseError("power degree out of range", k=self.k, dim=m)
        if m ** self.k > 20000:
            raise ParseError("tensor power too large to realise", size=m ** self.k)

    @cached_property
    def embedding(self) -> np.ndarray:
        return _power_embedding(self.child.dim, self.k, self.alternating)

    @property
    def dim(self) -> int:
        m, k = self.child.dim, self.k
        return math.comb(m, k) if self.alternating else math.comb(m + k - 1, k)

    def _tensor(self, batch: int) -> np.ndarray:
        e = self.embedding
        shape = (1,) + (self.child.dim,) * self.k + (e.shape[1],)
        return np.broadcast_to(e.reshape(shape), (batch,) + shape[1:]).astype(complex)

    def _compress(self, t: np.ndarray) -> np.ndarray:
        e = self.embedding
        return e.T @ t.reshape(t.shape[0], -1, e.shape[1])

    # both actions work factor by factor on the embedded subspace, never
    # forming operators on the full tensor power
    def lie(self, x):
        a = self.child.lie(x)[None]
        t = self._tensor(1)
        total = sum(_apply_on_slot(a, t, slot) for slot in range(self.k))
        return self._compress(total)[0]

    def group(self, g):
        h = self.child.group(g)
        single = h.ndim == 2
        h = h[None] if single else h
        t = self._tensor(h.shape[0])
        for slot in range(self.k):
            t = _apply_on_slot(h, t, slot)
        out = self._compress(t)
        return out[0] if single else out

    def __str__(self) -> str:
        name = "wedge" if self.alternating else "sym"
        return f"{name}({self.k}, {self.child})"


@dataclass
class Tensor(Node):
    left: Node
    right: Node

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim

    def lie(self, x):
        a, b = self.left.lie(x), self.right.lie(x)
        return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)

    def group(self, g):
        return _bkron(self.left.group(g), self.right.group(g))

    def __str__(self) -> str:
        return f"tensor({self.left}, {self.right})"


# -------------------------------------------------------------------- parser
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(.))")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok is not None and tok.strip():
            tokens.append(tok)
        pos = m.end()
    return tokens


def parse_expression(text: str, n: int) -> Node:
    tokens = _tokenize(text)
    pos = 0

    def expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            found = tokens[pos] if pos < len(tokens) else "end of input"
            raise ParseError(f"expected '{tok}', found '{found}'", expression=text)
        pos += 1

    def integer() -> int:
        nonlocal pos
        if pos >= len(tokens) or not tokens[pos].isdigit():
            raise ParseError("expected an integer", expression=text)
        pos += 1
        return int(tokens[pos - 1])

    def expr() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of expression", expression=text)
        name = tokens[pos]
        pos += 1
        if name == "standard":
            return Standard(n)
        if name == "dual":
            if pos < len(tokens) and tokens[pos] == "(":
                expect("(")
                child = expr()
                expect(")")
                return Dual(child)
            return Dual(Standard(n))
        if name in ("sym", "wedge"):
            expect("(")
            k = integer()
            expect(",")
            child = expr()
            expect(")")
            return Power(k, child, alternating=(name == "wedge"))
        if name == "tensor":
            expect("(")
            left = expr()
            expect(",")
            right = expr()
            expect(")")
            return Tensor(left, right)
        raise ParseError(f"unknown constructor '{name}'", expression=text)

    node = expr()
    if pos != len(tokens):
        raise ParseError("trailing input after expression", expression=text)
    return node


# ------------------------------------------------------------ representation
@dataclass
class Representation:
    model: GroupModel
    node: Node
    dtau_k: list[np.ndarray]
    dtau_p: list[np.ndarray]
    commutant_dim: int | None = None

    @property
    def dimV(self) -> int:
        return self.node.dim

    @property
    def expression(self) -> str:
        return str(self.node)

    def dtau(self, x: np.ndarray) -> np.ndarray:
        return self.node.lie(x)

    def dtau_beta(self, beta: np.ndarray) -> np.ndarray:
        """dtau of an element of p given as coordinates or a matrix."""
        c = self.model.p_coords(beta)
        return np.tensordot(c, self.dtau_p_array, axes=1)

    def tau(self, g: np.ndarray) -> np.ndarray:
        return self.node.group(g)

    @cached_property
    def dtau_p_array(self) -> np.ndarray:
        return np.array(self.dtau_p)

    @cached_property
    def weights(self) -> "WeightTable":
        return weight_table(self)

    def homomorphism_residual(self) -> float:
        basis = self.model.g_basis
        images = self.dtau_k + self.dtau_p
        worst = 0.0
        for (x, dx), (y, dy) in itertools.combinations(zip(basis, images), 2):
            lhs = self.dtau(x @ y - y @ x)
            worst = max(worst, float(np.linalg.norm(lhs - (dx @ dy - dy @ dx))))
        return worst


def commutant_dimension(ops: list[np.ndarray]) -> int:
    d = ops[0].shape[0]
    eye = np.eye(d)
    gram = np.zeros((d * d, d * d), dtype=complex)
    for a in ops:
        m = np.kron(a, eye) - np.kron(eye, a.T)
        gram += m.conj().T @ m
    w = np.linalg.eigvalsh(gram)
    scale = max(1.0, float(w[-1]))
    return int(np.sum(w < 1e-9 * scale))


def build_representation(model: GroupModel, expr: str | Node, check_irreducible: bool = True) -> Representation:
    node = parse_expression(expr, model.n) if isinstance(expr, str) else expr
    if node.dim > MAX_DIM:
        raise ParseError("representation dimension exceeds the supported maximum", dim=node.dim)
    rep = Representation(
        model=model,
        node=node,
        dtau_k=[node.lie(x) for x in model.k_basis],
        dtau_p=[node.lie(x) for x in model.p_basis],
    )
    if check_irreducible:
        if node.dim <= EXACT_COMMUTANT_DIM:
            cdim = commutant_dimension(rep.dtau_k + rep.dtau_p)
            rep.commutant_dim = cdim
            if cdim != 1:
                raise IrreducibilityError(
                    "representation is reducible", expression=str(node), commutant_dim=cdim
                )
        else:
            warnings.warn(f"irreducibility not verified for dimension {node.dim}")
    return rep


# ------------------------------------------------------------------- weights
@dataclass
class Weight:
    vector: np.ndarray  # a coordinates, <vector, H> = lambda(H)
    space: np.ndarray  # orthonormal basis of V_lambda
    coeffs: np.ndarray  # mu_tau - lambda = sum coeffs[i] * simple_roots[i]
    support: Subset

    @property
    def multiplicity(self) -> int:
        return self.space.shape[1]


@dataclass
class WeightTable:
    weights: list[Weight]
    highest: int
    highest_vector: ProjectivePoint
    highest_space_dim: int = field(default=1)

    @property
    def mu(self) -> np.ndarray:
        return self.weights[self.highest].vector

    def vectors(self) -> np.ndarray:
        return np.array([w.vector for w in self.weights])


SUPPORT_TOL = 1e-7


def weight_table(rep: Representation) -> WeightTable:
    model = rep.model
    ops = rep.dtau_p[: model.rank]
    spaces = joint_eigenspaces(ops, 1e-9)
    reg = model.regular_element
    spaces.sort(key=lambda item: -float(item[0] @ reg))
    scores = np.array([vals @ reg for vals, _ in spaces])
    best = 0
    if np.sum(scores > scores[best] - 1e-9 * (1 + abs(scores[best]))) > 1:
        raise AmbiguityError("highest weight is not unique")
    mu = spaces[best][0]
    s = model.simple_roots
    weights = []
    for vals, basis in spaces:
        coeffs, *_ = np.linalg.lstsq(s.T, mu - vals, rcond=None)
        resid = np.linalg.norm(s.T @ coeffs - (mu - vals))
        if resid > 1e-9 or np.any(coeffs < -SUPPORT_TOL):
            raise AmbiguityError(
                "weight is not below the highest weight",
                weight=vals.tolist(), coeffs=coeffs.tolist(), residual=float(resid),
            )
        support = tuple(i for i, c in enumerate(coeffs) if c > SUPPORT_TOL)
        weights.append(Weight(vals, basis, coeffs, support))
    top = weights[best].space
    if top.shape[1] > 1:
        warnings.warn("highest restricted weight space has dimension > 1; choosing a canonical vector")
    vec = _canonical_vector(top)
    return WeightTable(weights, best, ProjectivePoint(vec), top.shape[1])


def _canonical_vector(basis: np.ndarray) -> np.ndarray:
    proj = basis @ basis.conj().T
    for i in range(proj.shape[0]):
        v = proj[:, i]
        if np.linalg.norm(v) > 1e-6:
            v = v / np.linalg.norm(v)
            j = int(np.argmax(np.abs(v) > 1e-12))
            return v * (abs(v[j]) / v[j])
    raise AmbiguityError("empty highest weight space")


def mu_tau_connected_subsets(rep: Representation) -> list[tuple[Subset, Subset]]:
    """mu_tau-connected subsets I with their saturations J, as (I, J) pairs."""
    model = rep.model
    mu = rep.weights.mu
    not_orth = np.abs(model.simple_roots @ mu) > model.vanishing_tol(mu)
    out = []
    for size in range(model.rank + 1):
        for subset in itertools.combinations(range(model.rank), size):
            comps = model.components(subset)
            if all(any(not_orth[i] for i in comp) for comp in comps):
                out.append(subset)
    via_chamber = model.x_connected_subsets(mu)
    if out != via_chamber:
        raise AmbiguityError("mu_tau-connected and x-connected enumerations disagree",
                             mu_tau=[list(s) for s in out], x=[list(s) for s in via_chamber])
    return [(i, model.saturate(mu, i)) for i in out]


def is_mu_tau_connected(rep: Representation, subset: Subset) -> bool:
    return rep.model.is_x_connected(rep.weights.mu, tuple(sorted(subset)))


def subspace_VI(rep: Representation, subset: Subset) -> np.ndarray:
    subset = tuple(sorted(subset))
    if not is_mu_tau_connected(rep, subset):
        raise PreconditionError("subset is not mu_tau-connected", module="representation", subset=list(subset))
    chosen = set(subset)
    blocks = [w.space for w in rep.weights.weights if set(w.support) <= chosen]
    return np.hstack(blocks)
