"""Dense linear algebra helpers shared by every other module."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DecompositionError,
    ModelMembershipError,
    NotPSDError,
    ScaledComputationError,
    SymmetryViolationError,
)


@dataclass(frozen=True)
class ToleranceProfile:
    eig_cluster: float = 1e-9
    geom: float = 1e-8
    rank: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("eig_cluster", "geom", "rank"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")

    @classmethod
    def from_dict(cls, data: dict | None) -> "ToleranceProfile":
        return cls(**(data or {}))

    def to_dict(self) -> dict[str, float]:
        return {"eig_cluster": self.eig_cluster, "geom": self.geom, "rank": self.rank}


DEFAULT_TOL = ToleranceProfile()


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of P(V), stored as a unit vector.

    The phase of ``vector`` carries no meaning; compare points with
    :meth:`same` or :func:`projective_distance`.
    """

    vector: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if not n > 0 or not np.isfinite(n):
            raise ValueError("projective point needs a nonzero finite vector")
        v = v / n
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def same(self, other: "ProjectivePoint", tol: float = DEFAULT_TOL.geom) -> bool:
        return abs(np.vdot(self.vector, other.vector)) >= 1.0 - tol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.dim == other.dim and self.same(other)

    __hash__ = None  # type: ignore[assignment]


def projective_distance(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Phase-aligned Euclidean distance between unit vectors (batched on axis -1).

    ``min_phi |u - e^{i phi} w|`` is accurate to machine precision near 0,
    unlike ``sqrt(1 - |<u,w>|^2)``.
    """
    u = np.asarray(u, dtype=complex)
    w = np.asarray(w, dtype=complex)
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    overlap = np.sum(np.conj(w) * u, axis=-1)
    phase = np.where(np.abs(overlap) > 0, overlap / np.maximum(np.abs(overlap), 1e-300), 1.0)
    return np.linalg.norm(u - phase[..., None] * w, axis=-1)


@dataclass(frozen=True)
class EigenDecomposition:
    values: tuple[float, ...]
    spaces: tuple[np.ndarray, ...]
    tolerance: float = DEFAULT_TOL.eig_cluster

    @property
    def clusters(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.values, self.spaces))

    def projectors(self) -> list[np.ndarray]:
        return [b @ b.conj().T for b in self.spaces]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.values, self.projectors()))

    @property
    def top(self) -> np.ndarray:
        return self.spaces[0]


def check_hermitian(a: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SymmetryViolationError("operator is not square", shape=list(a.shape))
    scale = max(np.linalg.norm(a), 1.0)
    violation = np.linalg.norm(a - a.conj().T) / scale
    if violation > rel_tol:
        raise SymmetryViolationError(
            "operator is not Hermitian", relative_violation=float(violation)
        )
    return (a + a.conj().T) / 2


def herm_eig(a: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL) -> EigenDecomposition:
    """Eigendecomposition with eigenvalues grouped into clusters, decreasing.

    Consecutive eigenvalues closer than ``eig_cluster * (1 + spectral radius)``
    share a cluster.
    """
    a = check_hermitian(a)
    w, v = np.linalg.eigh(a)
    w, v = w[::-1], v[:, ::-1]
    thresh = tol.eig_cluster * (1.0 + np.max(np.abs(w)))
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[groups[-1][-1]] - w[i] <= thresh:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = tuple(float(np.mean(w[g])) for g in groups)
    spaces = tuple(v[:, g] for g in groups)
    return EigenDecomposition(values, spaces, tol.eig_cluster)


def mat_exp(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ScaledComputationError("matrix exponential of non-finite input")
    norm = np.linalg.norm(a, 2)
    if norm > 700:
        raise ScaledComputationError(
            "matrix exponential would overflow", norm=float(norm)
        )
    return scipy.linalg.expm(a)


def psd_sqrt(a: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    a = check_hermitian(a, rel_tol=1e-10)
    w, v = np.linalg.eigh(a)
    # clamp tolerance is relative to the spectral radius
    floor = tol.rank * max(1.0, float(np.max(np.abs(w))))
    if w.min() < -floor:
        raise NotPSDError("operator has a negative eigenvalue", min_eigenvalue=float(w.min()))
    w = np.clip(w, 0.0, None)
    b = (v * np.sqrt(w)) @ v.conj().T
    return (b + b.conj().T) / 2


def polar_decompose(g: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Left polar decomposition ``g = rho @ k`` with ``rho = sqrt(g g^*)``."""
    g = np.asarray(g)
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= tol.rank * max(1.0, s[0]):
        raise DecompositionError("polar decomposition of a singular operator",
                                 smallest_singular_value=float(s[-1]))
    k, rho = scipy.linalg.polar(g, side="left")
    rho = (rho + rho.conj().T) / 2
    return rho, k


def orthonormal_columns(b: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis for the column span of ``b`` (rank-revealing)."""
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    if b.size == 0:
        return np.zeros((b.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((b.shape[0], 0), dtype=complex)
    r = int(np.sum(s > tol * s[0]))
    return u[:, :r]


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between two column spans.

    Uses the sine formulation for small angles so that values near zero
    are resolved to machine precision.
    """
    a = orthonormal_columns(a)
    b = orthonormal_columns(b)
    if a.shape[1] != b.shape[1]:
        return np.array([np.pi / 2])
    resid = b - a @ (a.conj().T @ b)
    sines = np.linalg.svd(resid, compute_uv=False)
    return np.arcsin(np.clip(sines, 0.0, 1.0))


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    ang = principal_angles(a, b)
    return float(np.max(ang)) if ang.size else 0.0


@dataclass
class KAK:
    k1: np.ndarray
    h: np.ndarray  # chamber coordinates (decreasing log singular values)
    k2: np.ndarray
    diag: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


def kak_decompose(g: np.ndarray, real: bool, tol: float = 1e-8) -> KAK:
    """``g = k1 @ diag(exp(h)) @ k2`` for g in SL(N) with k1, k2 in SO(N)/SU(N).

    ``h`` holds the diagonal of the Cartan element, sorted decreasingly.
    """
    g = np.asarray(g)
    n = g.shape[0]
    if abs(np.linalg.det(g) - 1.0) > tol * max(1.0, np.linalg.norm(g) ** n):
        raise ModelMembershipError("element is not in SL(N)", det=str(np.linalg.det(g)))
    if real and np.max(np.abs(np.imag(g))) > tol:
        raise ModelMembershipError("element is not real")
    if real:
        g = np.real(g)
    u, s, vh = np.linalg.svd(g)
    if real:
        if np.linalg.det(u) < 0:
            u[:, 0] *= -1
            vh[0, :] *= -1
    else:
        phase = np.linalg.det(u)
        u = u * phase ** (-1.0 / n)
        vh = vh * phase ** (1.0 / n)
    h = np.log(s)
    return KAK(u, h, vh, np.diag(s))
