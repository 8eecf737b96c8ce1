"""Design reduction, Loewner domination and in-class optimization.

Given a model, a parameter guess and an arbitrary design, the reduction
replaces the design by one with the minimal support structure that
carries at least as much information in the Loewner order.  The
improving design reproduces the psi moments of the input and gains in
every quadratic direction Q of the trailing block, which makes the
information difference positive semidefinite.  For the upper direction
the improving design is the upper principal representation of the
input's moment point (it contains B, and A too when k is even); for the
lower direction it is the lower one.  Designs whose index is already
below k/2 have a unique representing measure, so they are returned
unchanged.

Both hypotheses are determinant conditions on augmented systems and are
checked by sampling before any computation; a failed check raises a
precondition error rather than producing an output whose domination
guarantee has no backing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .chebyshev import augment, check_chebyshev
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyError,
    PreconditionError,
)
from .models import RegressionModel, information_matrix, psi_k_Q, psi_system
from .moments import Design, HalfIndex, MomentPoint, design_index, moment_point
from .principal import RepresentationStructure, lower_principal, upper_principal

PSD_TOL = 1e-8
JACOBI_TOL = 1e-12
NUM_Q_DIRECTIONS = 64
# Sampling effort of the per-call hypothesis check; lighter than the
# standalone defaults because a reduction checks one augmented system
# per Q direction.
# precondition gate reuses the determinant checker's own defaults
CHECK_GRID = 512
CHECK_TUPLES = 2000


def jacobi_spectrum(S, tol: float = JACOBI_TOL, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over the upper triangle until the off-diagonal Frobenius mass
    falls below tol times the total Frobenius norm.  Returns the
    eigenvalues sorted ascending.
    """
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigurationError("jacobi_spectrum needs a square matrix")
    if np.abs(A - A.T).max() > 1e-10 * max(1.0, np.abs(A).max()):
        raise ConfigurationError("jacobi_spectrum needs a symmetric matrix")
    A = (A + A.T) / 2.0
    n = A.shape[0]
    if n == 1:
        return np.array([A[0, 0]])
    total = float(np.linalg.norm(A))
    if total == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = math.sqrt(max(0.0, float(np.sum(A * A)) - float(np.sum(np.diag(A) ** 2))))
        if off <= tol * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= tol * total / (n * n):
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                A = (A + A.T) / 2.0
    else:
        raise ConvergenceError("jacobi sweeps did not converge")
    return np.sort(np.diag(A))


@dataclass(frozen=True)
class ReductionReport:
    input: Design
    output: Design
    direction: str  # "upper" or "lower"
    branch: str  # "Identity", "OddCase" or "EvenCase"
    input_index: HalfIndex
    moments_in: MomentPoint
    moments_out: MomentPoint
    loewner_min_eigenvalue: float
    q_checks: List[Tuple[Tuple[float, ...], float]]
    difference_spectrum: Tuple[float, ...]


@dataclass(frozen=True)
class DominationReport:
    difference_spectrum: Tuple[float, ...]
    dominates: bool
    tolerance: float


def _sphere_directions(p1: int, count: int = NUM_Q_DIRECTIONS) -> List[np.ndarray]:
    """Deterministic unit directions: one for p1 = 1, a low-discrepancy
    sphere sample otherwise (the hypothesis is scale invariant in Q)."""
    if p1 == 1:
        return [np.array([1.0])]
    from scipy.stats import norm, qmc

    sampler = qmc.Halton(d=p1, scramble=False)
    out: List[np.ndarray] = []
    while len(out) < count:
        u = sampler.random(4 * count)
        z = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
        for row in z:
            nrm = float(np.linalg.norm(row))
            if nrm > 1e-8:
                out.append(row / nrm)
                if len(out) == count:
                    break
    return out


def _check_direction(system, psi, direction: str, qs, seed: int, grid: int, tuples: int):
    base = check_chebyshev(system, num_random_tuples=tuples, grid_size=grid, seed=seed)
    if not base.verified:
        raise PreconditionError(
            f"base psi system fails the determinant condition at tuple {base.witness}",
            witness=base.witness,
        )
    sign = 1.0 if direction == "upper" else -1.0
    for Q in qs:
        f = psi_k_Q(psi, Q)
        omega = (lambda g: (lambda x: sign * g(x)))(f)
        rep = check_chebyshev(
            augment(system, omega), num_random_tuples=tuples, grid_size=grid, seed=seed
        )
        if not rep.verified:
            raise PreconditionError(
                f"augmented system for direction {direction!r} fails the determinant "
                f"condition at tuple {rep.witness} (Q = {tuple(float(v) for v in Q)})",
                witness=rep.witness,
                q_vector=tuple(float(v) for v in Q),
            )


def _moment_gain(system, f, out: Design, inp: Design) -> float:
    def integral(design: Design) -> float:
        vals = np.atleast_1d(np.asarray(f(design.points_array()), dtype=float))
        return math.fsum(float(v) * w for v, w in zip(vals, design.weights))

    return integral(out) - integral(inp)


def reduce_design(
    model: RegressionModel,
    theta,
    xi: Design,
    direction: str = "upper",
    *,
    seed: int = 0,
    grid_size: int = 2001,
    newton_tol: float = 1e-11,
    max_iter: int = 50,
    check_grid: int = CHECK_GRID,
    check_tuples: int = CHECK_TUPLES,
) -> ReductionReport:
    """Reduce a design to its dominating principal representation.

    Verifies the determinant hypotheses for the requested direction on
    sampled Q directions, computes the moment point, and returns either
    the design itself (branch Identity, when its index is below k/2) or
    the principal representation matching all k moments.  The report
    records the per-Q moment gains and the spectrum of the information
    difference M(output) - M(input).
    """
    if direction not in ("upper", "lower"):
        raise ConfigurationError(f"direction must be 'upper' or 'lower', got {direction!r}")
    psi = psi_system(model, theta)
    system = psi.system
    k = system.k
    qs = _sphere_directions(psi.p1)
    _check_direction(system, psi, direction, qs, seed, check_grid, check_tuples)

    c0 = moment_point(system, xi)
    idx = design_index(xi)
    p = model.p
    if idx.value < k / 2.0:
        return ReductionReport(
            input=xi,
            output=xi,
            direction=direction,
            branch="Identity",
            input_index=idx,
            moments_in=c0,
            moments_out=c0,
            loewner_min_eigenvalue=0.0,
            q_checks=[(tuple(float(v) for v in Q), 0.0) for Q in qs],
            difference_spectrum=tuple([0.0] * p),
        )

    # The representation maximizing the Q gains is the upper principal
    # one when +psi_k^Q augments to a Chebyshev system, and the lower
    # one when -psi_k^Q does (minimizing -psi_k^Q maximizes the gain).
    f0 = psi_k_Q(psi, qs[0])
    if direction == "upper":
        probe = f0
        result = upper_principal(
            system, c0, probe=probe, grid_size=grid_size, newton_tol=newton_tol, max_iter=max_iter
        )
    else:
        probe = lambda x: -f0(x)
        probe.__name__ = "neg_psi_k_Q"
        result = lower_principal(
            system, c0, probe=probe, grid_size=grid_size, newton_tol=newton_tol, max_iter=max_iter
        )
    out = result.design

    moments_out = moment_point(system, out)
    q_checks = []
    for Q in qs:
        gain = _moment_gain(system, psi_k_Q(psi, Q), out, xi)
        q_checks.append((tuple(float(v) for v in Q), float(gain)))

    diff = information_matrix(model, theta, out) - information_matrix(model, theta, xi)
    spectrum = jacobi_spectrum(diff)
    return ReductionReport(
        input=xi,
        output=out,
        direction=direction,
        branch="OddCase" if k % 2 else "EvenCase",
        input_index=idx,
        moments_in=c0,
        moments_out=moments_out,
        loewner_min_eigenvalue=float(spectrum[0]),
        q_checks=q_checks,
        difference_spectrum=tuple(float(v) for v in spectrum),
    )


def verify_domination(
    model: RegressionModel, theta, xi1: Design, xi2: Design, tolerance: float = PSD_TOL
) -> DominationReport:
    """Spectrum of M(xi1) - M(xi2) and the PSD verdict.

    Dominates when the smallest eigenvalue is no smaller than
    -tolerance * max(1, spectral norm of the difference).
    """
    diff = information_matrix(model, theta, xi1) - information_matrix(model, theta, xi2)
    spectrum = jacobi_spectrum(diff)
    spectral_norm = float(np.abs(spectrum).max())
    dominates = bool(spectrum[0] >= -tolerance * max(1.0, spectral_norm))
    return DominationReport(
        difference_spectrum=tuple(float(v) for v in spectrum),
        dominates=dominates,
        tolerance=float(tolerance),
    )


def criterion_value(model: RegressionModel, theta, design: Design, criterion: str = "d") -> float:
    """log det M for criterion "d", -trace(M^{-1}) for criterion "a".

    Returns -inf when the information matrix is singular.  Rank is judged
    from the eigenvalues: a rank-deficient M produced by a too-small
    support otherwise leaks float-noise determinants of either sign.
    """
    if criterion not in ("d", "a"):
        raise ConfigurationError(f"criterion must be 'd' or 'a', got {criterion!r}")
    M = information_matrix(model, theta, design)
    eigs = jacobi_spectrum(M)
    if eigs[0] <= 1e-13 * max(1.0, eigs[-1]):
        return -math.inf
    if criterion == "d":
        return float(np.sum(np.log(eigs)))
    return -float(np.sum(1.0 / eigs))


def _expit(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def optimize_in_class(
    model: RegressionModel,
    theta,
    criterion: str = "d",
    direction: str = "upper",
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = 500,
) -> Design:
    """Search the complete-class structure for a locally optimal design.

    Designs are parametrized by the principal-representation structure
    of the chosen direction: endpoint membership is fixed, free points
    map through a logistic squashing (kept sorted) and weights through a
    softmax.  Each restart runs Nelder-Mead from a seeded
    low-discrepancy initial simplex; the best design over all restarts
    is returned, with exact ties broken lexicographically on the support
    points and weights.  The determinant hypothesis of the chosen
    direction is the caller's responsibility.
    """
    from scipy.optimize import minimize
    from scipy.stats import qmc

    if direction not in ("upper", "lower"):
        raise ConfigurationError(f"direction must be 'upper' or 'lower', got {direction!r}")
    if criterion not in ("d", "a"):
        raise ConfigurationError(f"criterion must be 'd' or 'a', got {criterion!r}")
    psi = psi_system(model, theta)
    k = psi.k
    structure = (
        RepresentationStructure.upper(k) if direction == "upper" else RepresentationStructure.lower(k)
    )
    a, b = model.design_interval.lower, model.design_interval.upper
    n_pts = structure.num_points
    n_free = structure.interior_points
    dim = n_free + (n_pts - 1)

    def assemble(z: np.ndarray) -> Optional[Design]:
        free = np.sort(_expit(z[:n_free])) * (b - a) + a if n_free else np.empty(0)
        pts: List[float] = []
        if structure.includes_A:
            pts.append(a)
        pts.extend(float(v) for v in free)
        if structure.includes_B:
            pts.append(b)
        logits = np.append(z[n_free:], 0.0)
        logits -= logits.max()
        w = np.exp(logits)
        w /= w.sum()
        try:
            return Design(points=tuple(pts), weights=tuple(w), interval=model.design_interval)
        except (ConfigurationError, ValueError):
            return None

    # Singular matrices map to a large finite penalty; infinities would
    # poison Nelder-Mead's simplex comparisons.
    PENALTY = 1e300

    def objective(z: np.ndarray) -> float:
        d = assemble(z)
        if d is None:
            return PENALTY
        val = criterion_value(model, theta, d, criterion)
        return -val if math.isfinite(val) else PENALTY

    if dim == 0:
        d = assemble(np.empty(0))
        if d is None or not math.isfinite(criterion_value(model, theta, d, criterion)):
            raise DegeneracyError("the structure admits no nonsingular design")
        return d

    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    candidates = []
    for _ in range(restarts):
        simplex = 6.0 * sampler.random(dim + 1) - 3.0
        res = minimize(
            objective,
            x0=simplex[0],
            method="Nelder-Mead",
            options={
                "maxiter": max_iter,
                "initial_simplex": simplex,
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        d = assemble(res.x)
        if d is None:
            continue
        val = criterion_value(model, theta, d, criterion)
        if math.isfinite(val):
            candidates.append((val, d))
    if not candidates:
        raise DegeneracyError("every restart ended on a singular information matrix")
    candidates.sort(key=lambda t: (-t[0],) + t[1].points + t[1].weights)
    return candidates[0][1]
