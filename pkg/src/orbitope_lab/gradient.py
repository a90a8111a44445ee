"""Gradient map on P(V) together with its height functions and flow.

Also hosts Haar sampling of the closed orbit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import DEFAULT_TOL, EigenDecomposition, ProjectivePoint, ToleranceProfile, herm_eig
from .representation import Representation


def _vec(x) -> np.ndarray:
    if isinstance(x, ProjectivePoint):
        return x.vector
    v = np.asarray(x, dtype=complex)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@dataclass(frozen=True)
class GradientValue:
    coords: np.ndarray  # over p_basis
    as_matrix: np.ndarray

    def a_part(self, rank: int) -> np.ndarray:
        return self.coords[:rank]


def gradient_coords(rep: Representation, points: np.ndarray) -> np.ndarray:
    """Batched gradient map: rows of ``points`` (not necessarily unit) -> p coordinates."""
    x = np.asarray(points, dtype=complex)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    norms = np.sum(np.abs(x) ** 2, axis=1)
    out = np.empty((x.shape[0], rep.model.dim_p))
    for j, d in enumerate(rep.dtau_p):
        out[:, j] = np.real(np.sum(np.conj(x) * (x @ d.T), axis=1)) / norms
    return out[0] if single else out


def gradient_map(rep: Representation, x) -> GradientValue:
    c = gradient_coords(rep, _vec(x))
    return GradientValue(c, rep.model.p_matrix(c))


def abelian_gradient(rep: Representation, x) -> np.ndarray:
    """Projection of the gradient map onto a, as a coordinates (batched)."""
    v = np.atleast_2d(_vec(x))
    norms = np.sum(np.abs(v) ** 2, axis=1)
    cols = [np.real(np.sum(np.conj(v) * (v @ d.T), axis=1)) / norms for d in rep.dtau_p[: rep.model.rank]]
    out = np.stack(cols, axis=1)
    return out[0] if np.ndim(_vec(x)) == 1 else out


def _beta_eig(rep: Representation, beta, tol: ToleranceProfile) -> EigenDecomposition:
    return herm_eig(rep.dtau_beta(beta), tol)


def height_function(rep: Representation, x, beta, tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Weighted quotient sum(lambda_i |x_i|^2) / sum(|x_i|^2) over the dtau(beta) eigenspaces."""
    v = _vec(x)
    eig = _beta_eig(rep, beta, tol)
    parts = np.array([np.sum(np.abs(b.conj().T @ v) ** 2) for b in eig.spaces])
    return float(np.dot(eig.values, parts) / parts.sum())


def norm_square(rep: Representation, x) -> float:
    c = gradient_coords(rep, _vec(x))
    return 0.5 * float(c @ c)


def _components(eig: EigenDecomposition, v: np.ndarray) -> list[np.ndarray]:
    return [b.conj().T @ v for b in eig.spaces]


def flow(rep: Representation, x, beta, t: float, tol: ToleranceProfile = DEFAULT_TOL) -> ProjectivePoint:
    """[exp(t dtau(beta)) x], evaluated spectrally with exponents recentred.

    Components below the rank tolerance are treated as zero, matching
    :func:`flow_limit`.
    """
    v = _vec(x)
    eig = _beta_eig(rep, beta, tol)
    comps = _components(eig, v)
    active = [i for i, c in enumerate(comps) if np.linalg.norm(c) > tol.rank]
    shift = max(t * eig.values[i] for i in active)
    out = np.zeros_like(v)
    for i in active:
        out = out + np.exp(t * eig.values[i] - shift) * (eig.spaces[i] @ comps[i])
    return ProjectivePoint(out)


def flow_limit(rep: Representation, x, beta, tol: ToleranceProfile = DEFAULT_TOL) -> ProjectivePoint:
    """Projection onto the highest dtau(beta)-eigenspace that the point meets."""
    v = _vec(x)
    eig = _beta_eig(rep, beta, tol)
    for b, c in zip(eig.spaces, _components(eig, v)):
        if np.linalg.norm(c) > tol.rank:
            return ProjectivePoint(b @ c)
    raise AssertionError("unit vector meets no eigenspace")  # unreachable


def max_locus(rep: Representation, beta, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of W with Max(beta) = P(W)."""
    return _beta_eig(rep, beta, tol).top


def max_value(rep: Representation, beta, tol: ToleranceProfile = DEFAULT_TOL) -> float:
    return _beta_eig(rep, beta, tol).values[0]


@dataclass
class OrbitSample:
    points: np.ndarray  # (n, dimV) unit vectors
    k_elements: np.ndarray  # (n, N, N)
    seed: int

    def __len__(self) -> int:
        return self.points.shape[0]

    def point(self, i: int) -> ProjectivePoint:
        return ProjectivePoint(self.points[i])


def sample_closed_orbit(rep: Representation, n: int, seed: int, batch: int = 20000) -> OrbitSample:
    """Points k [v_tau] with k Haar-distributed on K."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    ks = rep.model.random_k(rng, n)
    v = rep.weights.highest_vector.vector
    pts = np.empty((n, rep.dimV), dtype=complex)
    for start in range(0, n, batch):
        pts[start:start + batch] = rep.tau(ks[start:start + batch]) @ v
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return OrbitSample(pts, ks, seed)


def sample_projective_space(dim: int, n: int, seed: int) -> np.ndarray:
    """Fubini-Study uniform points of P(C^dim) as unit row vectors."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def unstable_manifold_member(rep: Representation, x, beta, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """True when x lies outside P(W^perp), i.e. its flow limit lands in Max(beta)."""
    w = max_locus(rep, beta, tol)
    return bool(np.linalg.norm(w.conj().T @ _vec(x)) > tol.rank)
