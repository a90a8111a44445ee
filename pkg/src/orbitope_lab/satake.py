"""Satake compactification as trace-one positive semidefinite Hermitian classes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import IndeterminacyError, NotBoundaryPointError, UnclassifiedLimitError
from .faces import face_classes_containing, face_lattice, moment_polytope
from .gradient import max_locus
from .groups import Subset
from .numeric import DEFAULT_TOL, ToleranceProfile, check_hermitian, psd_sqrt, subspace_distance
from .representation import Representation, mu_tau_connected_subsets, subspace_VI

ALIGN_TOL = 1e-6
RAY_HORIZON = 40.0


@dataclass
class SatakePoint:
    A: np.ndarray
    component_W: np.ndarray
    is_interior: bool
    I: Subset | None = None
    k: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return self.component_W.shape[1]

    @classmethod
    def from_matrix(cls, A: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL,
                    interior: bool | None = None) -> "SatakePoint":
        A = check_hermitian(np.asarray(A, dtype=complex), rel_tol=1e-10)
        A = A / np.real(np.trace(A))
        w, v = np.linalg.eigh(A)
        keep = w > tol.rank * max(1.0, float(w.max()))
        W = v[:, keep][:, ::-1]
        if interior is None:
            interior = bool(keep.all())
        if interior:
            W = np.eye(A.shape[0], dtype=complex)
        return cls(A, W, interior)


def satake_embed(rep: Representation, g: np.ndarray) -> SatakePoint:
    g = rep.model.check_member(g)
    t = rep.tau(g)
    a = t @ t.conj().T
    a = (a + a.conj().T) / 2
    return SatakePoint(a / np.real(np.trace(a)), np.eye(rep.dimV, dtype=complex), True)


def act(rep: Representation, h: np.ndarray, p: SatakePoint) -> SatakePoint:
    """G-action h.[A] = [tau(h) A tau(h)^*]."""
    t = rep.tau(rep.model.check_member(h))
    a = t @ p.A @ t.conj().T
    return SatakePoint.from_matrix(a, rep.model.tol, interior=p.is_interior)


def base_point(rep: Representation) -> SatakePoint:
    return SatakePoint(np.eye(rep.dimV, dtype=complex) / rep.dimV,
                       np.eye(rep.dimV, dtype=complex), True)


def ray_limit(rep: Representation, beta) -> SatakePoint:
    """lim_{t -> oo} i_tau(exp(t beta)): the normalised projector onto Max(beta)."""
    coords = rep.model.p_coords(beta)
    if np.linalg.norm(coords) == 0:
        warnings.warn("degenerate ray: beta = 0 gives the base point")
        return base_point(rep)
    W = max_locus(rep, coords, rep.model.tol)
    A = W @ W.conj().T / W.shape[1]
    return SatakePoint(A, W, W.shape[1] == rep.dimV)


@dataclass
class BoundaryComponent:
    I: Subset
    J: Subset
    V_I: np.ndarray
    base_point: SatakePoint


def enumerate_boundary_components(rep: Representation, check: bool = True) -> list[BoundaryComponent]:
    rank = rep.model.rank
    out = []
    for I, J in mu_tau_connected_subsets(rep):
        if len(I) == rank:
            continue
        V = subspace_VI(rep, I)
        A = V @ V.conj().T / V.shape[1]
        out.append(BoundaryComponent(I, J, V, SatakePoint(A, V, False, I=I)))
    if check:
        P = moment_polytope(rep)
        lattice = face_lattice(P, rep.model)
        classes = face_classes_containing(P, lattice, rep.weights.mu)
        if len(out) + 1 != len(classes):
            raise UnclassifiedLimitError("boundary component count disagrees with face classes",
                                         components=len(out), face_classes=len(classes))
    return out


@dataclass
class ClassifiedLimit:
    interior: bool
    I: Subset
    k: np.ndarray
    positive_part: np.ndarray
    g: np.ndarray | None = None
    angle: float = 0.0
    candidates: list[Subset] = field(default_factory=list)


def _interior_representative(rep: Representation, A: np.ndarray) -> np.ndarray:
    """g = exp(xi), xi in p, with tau(g) tau(g)^* proportional to A."""
    w, v = np.linalg.eigh(A)
    half_log = (v * (0.5 * np.log(w))) @ v.conj().T
    cols = [d.ravel() for d in rep.dtau_p] + [np.eye(rep.dimV).ravel()]
    m = np.array(cols).T
    stacked = np.concatenate([m.real, m.imag])
    target = np.concatenate([half_log.ravel().real, half_log.ravel().imag])
    sol, *_ = np.linalg.lstsq(stacked, target, rcond=None)
    resid = np.linalg.norm(stacked @ sol - target)
    if resid > 1e-6 * (1 + np.linalg.norm(target)):
        raise UnclassifiedLimitError("interior point is not in the image of the embedding",
                                     residual=float(resid))
    return rep.model.exp_p(sol[:-1])


def _mixed_moment(rep: Representation, basis: np.ndarray) -> np.ndarray:
    proj = basis @ basis.conj().T / basis.shape[1]
    return np.array([np.real(np.trace(proj @ d)) for d in rep.dtau_p])


def _alignment_error(rep: Representation, k: np.ndarray, V: np.ndarray, Q: np.ndarray) -> float:
    return subspace_distance(rep.tau(k) @ V, Q)


def _align(rep: Representation, V: np.ndarray, Q: np.ndarray, seed: int, n_random: int = 50) -> tuple[np.ndarray, float]:
    """Find k in K with tau(k) V = span(Q)."""
    model = rep.model
    # moment seed: the mixed-state gradient of span(Q) is Ad(k) of that of V
    _, kc = model.chamber_project(_mixed_moment(rep, Q))
    seeds = [kc.conj().T]
    best_k, best = seeds[0], _alignment_error(rep, seeds[0], V, Q)
    if best < ALIGN_TOL:
        return best_k, best
    rng = np.random.default_rng(seed)
    seeds += [np.eye(model.n, dtype=complex)] + list(model.random_k(rng, n_random))
    kb = np.array(model.k_basis)
    r = V.shape[1]

    def objective(theta: np.ndarray, k0: np.ndarray) -> float:
        k = k0 @ scipy.linalg.expm(np.tensordot(theta, kb, axes=1))
        t = rep.tau(k) @ V
        return float(r - np.linalg.norm(Q.conj().T @ t) ** 2)

    for k0 in seeds:
        res = scipy.optimize.minimize(objective, np.zeros(len(kb)), args=(k0,), method="BFGS",
                                      options={"gtol": 1e-14, "maxiter": 500})
        k = k0 @ scipy.linalg.expm(np.tensordot(res.x, kb, axes=1))
        err = _alignment_error(rep, k, V, Q)
        if err < best:
            best_k, best = k, err
        if best < ALIGN_TOL:
            break
    return best_k, best


def classify_limit(rep: Representation, p: SatakePoint | np.ndarray, seed: int = 0) -> ClassifiedLimit:
    point = p if isinstance(p, SatakePoint) else SatakePoint.from_matrix(p, rep.model.tol)
    A = point.A
    model = rep.model
    if point.is_interior or point.rank == rep.dimV:
        g = _interior_representative(rep, A)
        full = tuple(range(model.rank))
        return ClassifiedLimit(True, full, np.eye(model.n), A, g=g)
    Q = point.component_W
    r = Q.shape[1]
    candidates = [(I, subspace_VI(rep, I)) for I, _ in mu_tau_connected_subsets(rep)
                  if len(I) < model.rank]
    matching = [(I, V) for I, V in candidates if V.shape[1] == r]
    if not matching:
        raise NotBoundaryPointError("no boundary component has a matching dimension", rank=r)
    best = None
    for I, V in matching:
        k, err = _align(rep, V, Q, seed)
        if best is None or err < best[2]:
            best = (I, V, err, k)
        if err < ALIGN_TOL:
            break
    I, V, err, k = best
    if err >= ALIGN_TOL:
        raise UnclassifiedLimitError("no K-translate of a V_I matches the range",
                                     residual_angle=err, rank=r)
    t = rep.tau(k) @ V
    positive = t.conj().T @ A @ t
    return ClassifiedLimit(False, I, k, (positive + positive.conj().T) / 2, angle=err,
                           candidates=[c for c, _ in matching])


# ----------------------------------------------------------- rational maps
@dataclass
class RationalMapDescriptor:
    W: np.ndarray  # orthonormal basis (dimV x r)
    rho_g: np.ndarray  # positive Hermitian operator on W, in W coordinates
    tol: float = DEFAULT_TOL.rank

    def operator(self) -> np.ndarray:
        """x -> W rho_g W^* x as an operator on V."""
        return self.W @ self.rho_g @ self.W.conj().T

    def apply(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Batched evaluation; returns (images, determinate mask)."""
        x = np.atleast_2d(points)
        c = x @ np.conj(self.W)
        ok = np.linalg.norm(c, axis=1) > self.tol
        y = (c @ self.rho_g.T) @ self.W.T
        norms = np.linalg.norm(y, axis=1, keepdims=True)
        y = np.where(ok[:, None], y / np.where(norms > 0, norms, 1.0), 0.0)
        return y, ok


def rational_map(W: np.ndarray, rho: np.ndarray | None = None) -> RationalMapDescriptor:
    """R = L_rho o pi_W; ``rho`` is an operator on V (compressed to W) or None."""
    W = np.asarray(W, dtype=complex)
    rho_w = np.eye(W.shape[1], dtype=complex) if rho is None else W.conj().T @ rho @ W
    return RationalMapDescriptor(W, (rho_w + rho_w.conj().T) / 2)


def rational_map_of_element(rep: Representation, g: np.ndarray, W: np.ndarray | None = None) -> RationalMapDescriptor:
    t = rep.tau(rep.model.check_member(g))
    rho = psd_sqrt(t @ t.conj().T)
    W = np.eye(rep.dimV, dtype=complex) if W is None else W
    return rational_map(W, rho)


def rational_map_of_point(p: SatakePoint) -> RationalMapDescriptor:
    """The self-map of O attached to a Satake point: x -> [sqrt(A) x]."""
    return rational_map(p.component_W, psd_sqrt(p.A))


def rational_eval(desc: RationalMapDescriptor, x) -> np.ndarray:
    v = x.vector if hasattr(x, "vector") else np.asarray(x, dtype=complex)
    y, ok = desc.apply(v / np.linalg.norm(v))
    if not ok[0]:
        raise IndeterminacyError("point lies in P(W^perp), where the rational map is undefined")
    return y[0]


def satake_point_to_dict(p: SatakePoint) -> dict:
    out = {
        "A": [[[float(z.real), float(z.imag)] for z in row] for row in p.A],
        "rank": p.rank,
        "interior": p.is_interior,
        "component_I": None if p.I is None else list(p.I),
    }
    if p.k is not None:
        out["k"] = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(p.k, dtype=complex)]
    return out


def satake_point_from_dict(data: dict, tol: ToleranceProfile = DEFAULT_TOL) -> SatakePoint:
    A = np.array([[complex(re, im) for re, im in row] for row in data["A"]])
    p = SatakePoint.from_matrix(A, tol, interior=data.get("interior"))
    if data.get("component_I") is not None:
        p.I = tuple(data["component_I"])
    if data.get("k") is not None:
        p.k = np.array([[complex(re, im) for re, im in row] for row in data["k"]])
    return p
