"""Upper and lower principal representations of moment points.

An interior moment point of a k-function Chebyshev system has exactly
one representing measure of index k/2 containing the endpoint B (the
upper principal representation, which also contains A when k is even)
and exactly one avoiding B (the lower one, which contains A when k is
odd and avoids both endpoints when k is even).  Among all measures
sharing the moment point these two extremize the integral of any
function Omega that augments the system to a Chebyshev system, the
upper one maximizing and the lower one minimizing, and the measures do
not depend on which valid Omega is used.

The solver runs in two stages.  A finite linear program on an
equispaced grid locates the support approximately (an optimal basic
solution of a moment LP carries at most k atoms), then a damped Newton
iteration on the exact moment-matching equations removes the grid bias,
with the support structure pinned by the parity of k.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .chebyshev import ChebyshevSystem, basis_matrix, derivative_matrix, _call_on_array
from .errors import (
    ConfigurationError,
    ConvergenceError,
    EvaluationError,
    SingularityError,
)
from .moments import Design, MomentPoint
from .simplex import solve_lp

DEFAULT_GRID = 2001
NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 50
# Grid atoms closer than this many grid spacings are one true support
# point split by discretization.
CLUSTER_SPACINGS = 3.0


@dataclass(frozen=True)
class RepresentationStructure:
    """Support count and endpoint membership of a principal representation."""

    num_points: int
    includes_A: bool
    includes_B: bool
    parity: str  # "odd" or "even"

    @staticmethod
    def upper(k: int) -> "RepresentationStructure":
        if k % 2 == 0:
            return RepresentationStructure(k // 2 + 1, True, True, "even")
        return RepresentationStructure((k + 1) // 2, False, True, "odd")

    @staticmethod
    def lower(k: int) -> "RepresentationStructure":
        if k % 2 == 0:
            return RepresentationStructure(k // 2, False, False, "even")
        return RepresentationStructure((k + 1) // 2, True, False, "odd")

    @property
    def interior_points(self) -> int:
        return self.num_points - int(self.includes_A) - int(self.includes_B)

    @property
    def free_unknowns(self) -> int:
        return self.interior_points + self.num_points


@dataclass(frozen=True)
class PrincipalResult:
    design: Design
    residual_norm: float
    lp_objective: float
    newton_iterations: int
    structure: RepresentationStructure


def _as_objective_values(objective: Callable, grid: np.ndarray) -> np.ndarray:
    vals = _call_on_array(objective, grid)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("objective evaluation is non-finite on the grid")
    return vals


def grid_lp_extremum(
    system: ChebyshevSystem,
    c0: MomentPoint,
    objective: Callable,
    sense: str = "max",
    grid_size: int = DEFAULT_GRID,
    feas_tol: Optional[float] = None,
):
    """Extremize the objective moment over grid measures matching c0.

    Solves, by a dense two-phase simplex with Bland's rule, the program

        max/min  sum_g w_g * objective(x_g)
        s.t.     sum_g w_g * psi_i(x_g) = c_i   for i = 0..k-1,
                 w >= 0

    on an equispaced grid of the interval.  Returns the optimal value and
    the design formed by the strictly positive basic weights; that design
    has at most k support points.
    """
    k = system.k
    if c0.k != k:
        raise ConfigurationError("moment point dimension does not match the system")
    if grid_size < 2 * k + 1:
        raise ConfigurationError(f"grid_size must be at least 2k+1 = {2 * k + 1}")
    a, b = system.interval.lower, system.interval.upper
    grid = np.linspace(a, b, grid_size)
    V = basis_matrix(system, grid)
    obj = _as_objective_values(objective, grid)
    result = solve_lp(V, c0.array(), obj, sense=sense, feas_tol=feas_tol)
    pos = result.x > 1e-14
    design = Design(
        points=tuple(float(x) for x in grid[pos]),
        weights=tuple(float(w) for w in result.x[pos]),
        interval=system.interval,
    )
    return float(result.value), design


def refine_newton(
    system: ChebyshevSystem,
    c0: MomentPoint,
    structure: RepresentationStructure,
    initial: Design,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> PrincipalResult:
    """Newton iteration on the moment-matching equations.

    Unknowns are the interior support points and all weights, exactly k
    of them by the structure invariant.  The residual is

        F(t, w)_i = sum_j w_j psi_i(t_j) - c_i .

    Steps are damped to keep the points strictly ordered inside the
    interval and the weights positive, and must not increase the
    residual norm.  Success means ||F||_inf <= tol * max(1, ||c0||_inf).
    """
    k = system.k
    a, b = system.interval.lower, system.interval.upper
    if structure.free_unknowns != k:
        raise ConfigurationError("structure unknowns do not match the system dimension")
    if initial.size != structure.num_points:
        raise ConfigurationError(
            f"initial design has {initial.size} points, structure wants {structure.num_points}"
        )
    if structure.includes_A != (initial.points[0] == a) or structure.includes_B != (
        initial.points[-1] == b
    ):
        raise ConfigurationError("initial design endpoint membership violates the structure")

    lo = 1 if structure.includes_A else 0
    hi = len(initial.points) - (1 if structure.includes_B else 0)
    t_int = np.array(initial.points[lo:hi], dtype=float)
    w = np.array(initial.weights, dtype=float)
    ni = t_int.size
    c = c0.array()
    scale = max(1.0, float(np.abs(c).max()))
    gap_min = 1e-13 * system.interval.length

    def full_points(ts: np.ndarray) -> np.ndarray:
        parts = []
        if structure.includes_A:
            parts.append([a])
        parts.append(ts)
        if structure.includes_B:
            parts.append([b])
        return np.concatenate(parts)

    def feasible(ts: np.ndarray, ws: np.ndarray) -> bool:
        if np.any(ws <= 0.0):
            return False
        pts = full_points(ts)
        if pts[0] < a or pts[-1] > b:
            return False
        return bool(np.all(np.diff(pts) > gap_min))

    def residual(ts: np.ndarray, ws: np.ndarray) -> np.ndarray:
        return basis_matrix(system, full_points(ts)) @ ws - c

    F = residual(t_int, w)
    res = float(np.abs(F).max())
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if res <= tol * scale:
            break
        pts = full_points(t_int)
        V = basis_matrix(system, pts)
        J = np.empty((k, k))
        if ni:
            dV = derivative_matrix(system, t_int)
            for j in range(ni):
                J[:, j] = w[lo + j] * dV[:, j]
        J[:, ni:] = V
        try:
            if np.linalg.cond(J) > 1e14:
                raise SingularityError(
                    "moment Jacobian is numerically singular; the moment point "
                    "is degenerate for this structure"
                )
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as err:
            raise SingularityError(f"moment Jacobian not solvable: {err}") from err

        alpha = 1.0
        accepted = False
        while alpha >= 1e-12:
            t_new = t_int + alpha * step[:ni]
            w_new = w + alpha * step[ni:]
            if feasible(t_new, w_new):
                F_new = residual(t_new, w_new)
                res_new = float(np.abs(F_new).max())
                if res_new <= res * (1.0 - 1e-4 * alpha) or res_new <= tol * scale:
                    t_int, w, F, res = t_new, w_new, F_new, res_new
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"newton step stalled at residual {res:.3e}", residual=res
            )
    if res > tol * scale:
        raise ConvergenceError(
            f"newton did not reach tolerance, residual {res:.3e}", residual=res
        )

    design = Design(
        points=tuple(float(x) for x in full_points(t_int)),
        weights=tuple(float(v) for v in w),
        interval=system.interval,
    )
    return PrincipalResult(
        design=design,
        residual_norm=res,
        lp_objective=float("nan"),
        newton_iterations=iterations,
        structure=structure,
    )


def default_probe(system: ChebyshevSystem) -> Callable:
    """Probe objective psi_{k-1}(x) * (x - A) / (B - A).

    For the regression systems in the catalog this coincides, up to a
    positive factor, with the quadratic-form augmentation of the
    complete-class argument, so the LP optimizer lands directly on the
    principal support.
    """
    last = system.basis[-1]
    a = system.interval.lower
    length = system.interval.length

    def probe(x):
        x = np.asarray(x, dtype=float)
        return _call_on_array(last, x) * (x - a) / length

    probe.__name__ = "psi_last_scaled_identity"
    return probe


def _monomial_probe(k: int) -> Callable:
    def probe(x):
        return np.asarray(x, dtype=float) ** k

    probe.__name__ = f"x_power_{k}"
    return probe


def _merge_clusters(design: Design, tol: float) -> Design:
    """Merge runs of support points closer than tol (weighted centroids).

    A cluster containing an endpoint collapses onto the endpoint.
    """
    a, b = design.interval.lower, design.interval.upper
    pts = list(design.points)
    ws = list(design.weights)
    changed = True
    while changed and len(pts) > 1:
        changed = False
        new_p, new_w = [pts[0]], [ws[0]]
        for p, wgt in zip(pts[1:], ws[1:]):
            if p - new_p[-1] <= tol:
                q, v = new_p[-1], new_w[-1]
                if q == a or q == b:
                    keep = q
                elif p == a or p == b:
                    keep = p
                else:
                    keep = (q * v + p * wgt) / (v + wgt)
                new_p[-1], new_w[-1] = keep, v + wgt
                changed = True
            else:
                new_p.append(p)
                new_w.append(wgt)
        pts, ws = new_p, new_w
    return Design(points=tuple(pts), weights=tuple(ws), interval=design.interval)


def _shape_to_structure(
    design: Design, structure: RepresentationStructure, tol: float
) -> Optional[Design]:
    """Coerce an LP support onto the structure, or report a mismatch."""
    a, b = design.interval.lower, design.interval.upper
    pts = list(design.points)
    ws = list(design.weights)

    if structure.includes_B and pts[-1] != b:
        if b - pts[-1] <= 10.0 * tol:
            pts[-1] = b
        else:
            return None
    if structure.includes_A and pts[0] != a:
        if pts[0] - a <= 10.0 * tol:
            pts[0] = a
        else:
            return None
    if not structure.includes_B and pts[-1] == b:
        return None
    if not structure.includes_A and pts[0] == a:
        return None

    while len(pts) > structure.num_points:
        gaps = [pts[i + 1] - pts[i] for i in range(len(pts) - 1)]
        i = int(np.argmin(gaps))
        p, q = pts[i], pts[i + 1]
        v, u = ws[i], ws[i + 1]
        if p == a or p == b:
            keep = p
        elif q == a or q == b:
            keep = q
        else:
            keep = (p * v + q * u) / (v + u)
        pts[i : i + 2] = [keep]
        ws[i : i + 2] = [v + u]
    if len(pts) < structure.num_points:
        return None
    return Design(points=tuple(pts), weights=tuple(ws), interval=design.interval)


def _moment_residual(system: ChebyshevSystem, design: Design, c0: MomentPoint) -> float:
    V = basis_matrix(system, design.points_array())
    diff = V @ design.weights_array() - c0.array()
    return float(np.abs(diff).max())


def _moments_close(system: ChebyshevSystem, design: Design, c0: MomentPoint) -> bool:
    V = basis_matrix(system, design.points_array())
    got = V @ design.weights_array()
    want = c0.array()
    return bool(np.all(np.abs(got - want) <= 1e-9 * np.maximum(1.0, np.abs(want))))


def _principal(
    system: ChebyshevSystem,
    c0: MomentPoint,
    which: str,
    probe: Optional[Callable],
    grid_size: int,
    newton_tol: float,
    max_iter: int,
    lp_feas_tol: Optional[float],
) -> PrincipalResult:
    k = system.k
    structure = (
        RepresentationStructure.upper(k) if which == "upper" else RepresentationStructure.lower(k)
    )
    sense = "max" if which == "upper" else "min"
    probes = [probe] if probe is not None else [default_probe(system), _monomial_probe(k)]
    spacing = system.interval.length / (grid_size - 1)
    cluster_tol = CLUSTER_SPACINGS * spacing
    c_scale = max(1.0, float(np.abs(c0.array()).max()))

    last_error: Optional[Exception] = None
    fallback: Optional[PrincipalResult] = None
    for omega in probes:
        value, lp_design = grid_lp_extremum(
            system, c0, omega, sense=sense, grid_size=grid_size, feas_tol=lp_feas_tol
        )
        merged = _merge_clusters(lp_design, cluster_tol)
        resid = _moment_residual(system, merged, c0)
        if merged.size < structure.num_points:
            # Degenerate (boundary) moment point: its representation is
            # unique with fewer atoms than the interior structure, and
            # the Newton system below would be singular.
            if resid <= 1e-6 * c_scale:
                return PrincipalResult(
                    design=merged,
                    residual_norm=resid,
                    lp_objective=value,
                    newton_iterations=0,
                    structure=structure,
                )
        shaped = _shape_to_structure(merged, structure, cluster_tol)
        if shaped is None:
            if fallback is None and merged.size <= structure.num_points and resid <= 1e-6 * c_scale:
                fallback = PrincipalResult(merged, resid, value, 0, structure)
            continue
        try:
            result = refine_newton(system, c0, structure, shaped, newton_tol, max_iter)
        except (ConvergenceError, SingularityError) as err:
            last_error = err
            if fallback is None and merged.size <= structure.num_points and resid <= 1e-6 * c_scale:
                fallback = PrincipalResult(merged, resid, value, 0, structure)
            continue
        if _moments_close(system, result.design, c0):
            return replace(result, lp_objective=value)
        last_error = ConvergenceError(
            "refined design drifted off the moment point", residual=result.residual_norm
        )
    if fallback is not None:
        return fallback
    if last_error is not None:
        raise last_error
    raise ConvergenceError("no probe produced a usable principal representation")


def upper_principal(
    system: ChebyshevSystem,
    c0: MomentPoint,
    probe: Optional[Callable] = None,
    grid_size: int = DEFAULT_GRID,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    lp_feas_tol: Optional[float] = None,
) -> PrincipalResult:
    """The representing measure maximizing every valid probe moment.

    Contains B among its support points, and A as well when k is even.
    """
    return _principal(system, c0, "upper", probe, grid_size, newton_tol, max_iter, lp_feas_tol)


def lower_principal(
    system: ChebyshevSystem,
    c0: MomentPoint,
    probe: Optional[Callable] = None,
    grid_size: int = DEFAULT_GRID,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    lp_feas_tol: Optional[float] = None,
) -> PrincipalResult:
    """The representing measure minimizing every valid probe moment.

    Avoids B; contains A when k is odd and avoids both endpoints when k
    is even.
    """
    return _principal(system, c0, "lower", probe, grid_size, newton_tol, max_iter, lp_feas_tol)
