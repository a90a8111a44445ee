"""Measures on the closed orbit with their Bourguignon-Li-Yau and Furstenberg maps.

Measures are finite atom lists. Every integral against a measure is a
weighted sum over atoms, so "a.e. defined" maps simply drop atoms in
their indeterminacy locus (with a warning) and renormalise.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import EvaluationError, MassLossError, PreconditionError, SolverError
from .faces import Polytope, moment_polytope, orbitope_slack
from .gradient import gradient_coords, sample_closed_orbit
from .representation import Representation
from .satake import (
    RationalMapDescriptor,
    SatakePoint,
    rational_map_of_element,
    rational_map_of_point,
)

WEIGHT_TOL = 1e-3


@dataclass
class DiscreteMeasure:
    points: np.ndarray  # (n, dimV) unit vectors
    weights: np.ndarray  # (n,), positive, sum 1

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=complex))
        self.points = self.points / np.linalg.norm(self.points, axis=1, keepdims=True)
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.shape[0] != self.points.shape[0] or np.any(w <= 0):
            raise ValueError("weights must be positive, one per atom")
        self.weights = w / w.sum()

    def __len__(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        d = self.points.shape[1]
        writer.writerow([f"{p}{i}" for i in range(d) for p in ("re", "im")] + ["weight"])
        for x, w in zip(self.points, self.weights):
            row = []
            for z in x:
                row += [format(z.real, ".17g"), format(z.imag, ".17g")]
            writer.writerow(row + [format(w, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscreteMeasure":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        data = np.array([[float(v) for v in r] for r in rows if r])
        pts = data[:, :-1:2] + 1j * data[:, 1:-1:2]
        return cls(pts, data[:, -1])


def delta(point: np.ndarray) -> DiscreteMeasure:
    return DiscreteMeasure(np.asarray(point)[None, :], np.ones(1))


def haar_measure(rep: Representation, n: int, seed: int) -> DiscreteMeasure:
    """Uniform weights on Haar-sampled points k [v_tau] of the closed orbit."""
    sample = sample_closed_orbit(rep, n, seed)
    return DiscreteMeasure(sample.points, np.full(n, 1.0 / n))


def moment(rep: Representation, gamma: DiscreteMeasure) -> np.ndarray:
    """Integral of the gradient map (p coordinates)."""
    return gamma.integrate(gradient_coords(rep, gamma.points))


# ----------------------------------------------------------- admissibility
@dataclass
class AdmissibilityWitness:
    normal: np.ndarray
    mass: float
    reason: str


def _hyperplane_through(points: np.ndarray) -> np.ndarray:
    """Unit normal n with <n, x> = 0 for every row x."""
    _, _, vh = np.linalg.svd(np.conj(points))
    return np.conj(vh[-1])


def _mass_on(gamma: DiscreteMeasure, normal: np.ndarray, tol: float) -> float:
    return float(gamma.weights[np.abs(gamma.points @ np.conj(normal)) < tol].sum())


def admissible(rep: Representation, gamma: DiscreteMeasure, weight_tol: float = WEIGHT_TOL,
               trials: int = 1000, seed: int = 0, tol: float = 1e-9) -> tuple[bool, AdmissibilityWitness | None]:
    """Atomic surrogate for "no hyperplane section carries mass".

    Atomic measures always charge some hyperplane; the surrogate fails when
    a hyperplane is found carrying at least ``weight_tol`` of the mass.
    The hyperplane through the heaviest dimV-1 atoms is tried first. A
    singular weighted Gram matrix means all atoms share one hyperplane.
    Last comes a randomized search over hyperplanes spanned by dimV-1 atoms.
    """
    d = gamma.points.shape[1]
    order = np.argsort(-gamma.weights)[: d - 1]
    heavy = gamma.points[order]
    normal = _hyperplane_through(heavy)
    mass = _mass_on(gamma, normal, tol)
    if mass >= weight_tol:
        return False, AdmissibilityWitness(normal, mass, "heavy atoms span a charged hyperplane")
    gram = (gamma.points.T * gamma.weights) @ np.conj(gamma.points)
    w, v = np.linalg.eigh((gram + gram.conj().T) / 2)
    if w[0] < tol:
        normal = np.conj(v[:, 0])
        return False, AdmissibilityWitness(normal, _mass_on(gamma, normal, np.sqrt(tol)),
                                           "all mass lies in one hyperplane")
    rng = np.random.default_rng(seed)
    n = len(gamma)
    if n >= d - 1:
        for _ in range(trials):
            idx = rng.choice(n, size=d - 1, replace=False, p=gamma.weights)
            normal = _hyperplane_through(gamma.points[idx])
            mass = _mass_on(gamma, normal, tol)
            if mass >= weight_tol:
                return False, AdmissibilityWitness(normal, mass, "randomized search found a charged hyperplane")
    return True, None


# --------------------------------------------------------------- evaluation
def _descriptor(rep: Representation, p) -> RationalMapDescriptor:
    if isinstance(p, RationalMapDescriptor):
        return p
    if isinstance(p, SatakePoint):
        return rational_map_of_point(p)
    return rational_map_of_element(rep, np.asarray(p))


def pushforward(rep: Representation, desc, gamma: DiscreteMeasure,
                weight_tol: float = WEIGHT_TOL) -> DiscreteMeasure:
    desc = _descriptor(rep, desc)
    y, ok = desc.apply(gamma.points)
    lost = float(gamma.weights[~ok].sum())
    if not ok.any():
        raise EvaluationError("all mass lies in the indeterminacy locus")
    if lost > weight_tol:
        raise MassLossError("pushforward drops too much mass", lost=lost)
    if lost > 0:
        warnings.warn(f"dropping {lost:.3g} of the mass in the indeterminacy locus")
    return DiscreteMeasure(y[ok], gamma.weights[ok])


def bly_evaluate(rep: Representation, gamma: DiscreteMeasure, p) -> np.ndarray:
    """Psi_gamma(p) in p coordinates; p may also be a group element or a rational map."""
    desc = _descriptor(rep, p)
    y, ok = desc.apply(gamma.points)
    if not ok.any():
        raise EvaluationError("all mass lies in the indeterminacy locus")
    w = gamma.weights[ok]
    if not ok.all():
        warnings.warn(f"dropping {1 - w.sum():.3g} of the mass in the indeterminacy locus")
    return np.tensordot(w / w.sum(), gradient_coords(rep, y[ok]), axes=1)


def psi_of_xi(rep: Representation, gamma: DiscreteMeasure, xi: np.ndarray) -> np.ndarray:
    """Psi_gamma(exp(xi) K) for xi in p, using rho(exp xi) = exp(dtau(xi))."""
    w, v = np.linalg.eigh(rep.dtau_beta(xi))
    rho = (v * np.exp(w - w.max())) @ v.conj().T
    return gamma.integrate(gradient_coords(rep, gamma.points @ rho.T))


@dataclass
class SolverReport:
    converged: bool
    iterations: int
    residuals: list[float] = field(default_factory=list)
    method: str = "newton"

    def to_dict(self) -> dict:
        return {"converged": self.converged, "iterations": self.iterations,
                "residuals": self.residuals, "method": self.method}


def _fd_jacobian(f, xi: np.ndarray, f0: np.ndarray | None = None) -> np.ndarray:
    h = 1e-5 * (np.linalg.norm(xi) + 1.0)
    cols = []
    for j in range(xi.shape[0]):
        e = np.zeros_like(xi)
        e[j] = h
        cols.append((f(xi + e) - f(xi - e)) / (2 * h))
    return np.array(cols).T


def bly_inverse(rep: Representation, gamma: DiscreteMeasure, target, tol: float = 1e-6,
                max_iter: int = 60, P: Polytope | None = None, check_admissible: bool = True,
                ) -> tuple[np.ndarray, SolverReport]:
    """Find g = exp(xi) with Psi_gamma(gK) = target (target in the interior of the orbitope)."""
    model = rep.model
    target = model.p_coords(target)
    P = moment_polytope(rep) if P is None else P
    slack = orbitope_slack(rep, target, P)
    if slack <= model.tol.geom:
        raise PreconditionError("target is not strictly inside the orbitope", module="bly", facet_slack=slack)
    if check_admissible:
        ok, witness = admissible(rep, gamma)
        if not ok:
            raise PreconditionError("measure fails the admissibility surrogate", module="bly",
                                    mass=witness.mass, reason=witness.reason)

    def residual(xi: np.ndarray) -> np.ndarray:
        return psi_of_xi(rep, gamma, xi) - target

    xi = np.zeros(model.dim_p)
    r = residual(xi)
    report = SolverReport(False, 0, [float(np.linalg.norm(r))])
    for it in range(1, max_iter + 1):
        if report.residuals[-1] <= tol:
            break
        jac = _fd_jacobian(residual, xi)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-4:
            cand = xi + lam * step
            rc = residual(cand)
            if np.linalg.norm(rc) < report.residuals[-1]:
                break
            lam *= 0.5
        else:
            break
        xi, r = cand, rc
        report.iterations = it
        report.residuals.append(float(np.linalg.norm(r)))
    if report.residuals[-1] > tol:
        res = scipy.optimize.least_squares(residual, xi, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        xi = res.x
        report.method = "newton+trust-region"
        report.iterations += int(res.nfev)
        report.residuals.append(float(np.linalg.norm(residual(xi))))
    report.converged = report.residuals[-1] <= tol
    if not report.converged:
        raise SolverError("Bourguignon-Li-Yau inversion did not converge",
                          residuals=report.residuals[-10:])
    return model.exp_p(xi), report


# -------------------------------------------------------------- Furstenberg
def furstenberg_map(rep: Representation, p, nu: DiscreteMeasure) -> DiscreteMeasure:
    """Gamma(p) = pushforward of nu under the rational map of p."""
    return pushforward(rep, p, nu)


def _test_values(rep: Representation, gamma: DiscreteMeasure, degree: int) -> np.ndarray:
    f = gradient_coords(rep, gamma.points)
    cols = [f]
    if degree >= 2:
        i, j = np.triu_indices(f.shape[1])
        cols.append(f[:, i] * f[:, j])
    return np.hstack(cols)


def weak_distance(rep: Representation, gamma1: DiscreteMeasure, gamma2: DiscreteMeasure,
                  degree: int = 2) -> float:
    """Sup over gradient-map components (and their products) of integral differences."""
    if degree not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    a = gamma1.integrate(_test_values(rep, gamma1, degree))
    b = gamma2.integrate(_test_values(rep, gamma2, degree))
    return float(np.max(np.abs(a - b)))


def max_atom_spread(gamma: DiscreteMeasure) -> float:
    """Upper bound on the max pairwise projective distance between atoms."""
    from .numeric import projective_distance

    d = projective_distance(gamma.points, np.broadcast_to(gamma.points[0], gamma.points.shape))
    return float(2 * d.max())
