"""Dense two-phase simplex for small equality-constrained programs.

Solves max/min c.x subject to A x = b, x >= 0, on a dense tableau.
Pivoting is Dantzig's rule with a fallback to Bland's rule under
degenerate stalling, so cycling cannot occur.  Sized for moment
problems: a handful of constraint rows against a few thousand grid
columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleError, UnboundedError

PIVOT_TOL = 1e-10
COST_TOL = 1e-9
MAX_PIVOTS = 20000
STALL_LIMIT = 30


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    basis: list
    iterations: int


def _pivot(T: np.ndarray, red: np.ndarray, basis: list, row: int, col: int):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    red -= red[col] * T[row, :-1]
    basis[row] = col


def _iterate(T: np.ndarray, red: np.ndarray, basis: list, cost_scale: float) -> int:
    """Run pivots to optimality.  Returns the pivot count.

    Entering column by Dantzig's most-negative rule while progress is
    made; after STALL_LIMIT consecutive degenerate pivots the rule
    switches to Bland's smallest-index rule, whose termination guarantee
    breaks any cycle.  A strictly improving pivot switches back.
    """
    m = T.shape[0]
    ncols = T.shape[1] - 1
    tol = COST_TOL * cost_scale
    count = 0
    stall = 0
    while True:
        if stall < STALL_LIMIT:
            entering = int(np.argmin(red[:ncols]))
            if red[entering] >= -tol:
                return count
        else:
            negative = np.flatnonzero(red[:ncols] < -tol)
            if negative.size == 0:
                return count
            entering = int(negative[0])
        # Ratio test; ties resolved by the smallest basic variable index.
        best_ratio = None
        leave = -1
        for i in range(m):
            a = T[i, entering]
            if a > PIVOT_TOL:
                ratio = T[i, -1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio - 1e-12
                    or (abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            raise UnboundedError(
                "unbounded linear program; impossible for a compact moment grid"
            )
        stall = stall + 1 if best_ratio <= 1e-12 else 0
        _pivot(T, red, basis, leave, entering)
        count += 1
        if count > MAX_PIVOTS:
            raise ConvergenceError("simplex pivot limit exceeded")


def solve_lp(A, b, c, sense: str = "max", feas_tol: float | None = None) -> LPResult:
    """Optimize c.x over {A x = b, x >= 0}.

    Phase one minimizes the sum of artificial variables; a residual above
    ``feas_tol`` (default 1e-8 relative to max|b|) raises InfeasibleError.
    Redundant constraint rows discovered while driving artificials out are
    dropped.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if feas_tol is None:
        feas_tol = 1e-8 * max(1.0, float(np.abs(b).max()))
    if sense not in ("max", "min"):
        raise ValueError(f"unknown sense {sense!r}")
    cmin = -c if sense == "max" else c.copy()

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # Phase one tableau: [A | I | b], basis = artificials.
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    red = np.concatenate([-A.sum(axis=0), np.zeros(m)])
    iters = _iterate(T, red, basis, 1.0)

    # Objective of phase one = sum of the artificial basic values.
    phase1 = float(sum(T[i, -1] for i in range(m) if basis[i] >= n))
    if phase1 > feas_tol:
        raise InfeasibleError(
            f"no nonnegative solution matches the constraints (residual {phase1:.3e})"
        )

    # Drive remaining artificials out of the basis; an all-zero structural
    # row is a redundant constraint and is deleted.
    drop_rows = []
    for i in range(m):
        if basis[i] >= n:
            pivot_col = -1
            for j in range(n):
                if abs(T[i, j]) > PIVOT_TOL:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(T, red, basis, i, pivot_col)
            else:
                drop_rows.append(i)
    if drop_rows:
        keep = [i for i in range(m) if i not in drop_rows]
        T = T[keep]
        basis = [basis[i] for i in keep]
        m = len(keep)

    # Phase two on structural columns only.
    T = np.hstack([T[:, :n], T[:, -1:]])
    red = cmin - cmin[basis] @ T[:, :n]
    cost_scale = max(1.0, float(np.abs(cmin).max()) if n else 1.0)
    iters += _iterate(T, red, basis, cost_scale)

    x = np.zeros(n)
    for i in range(m):
        x[basis[i]] = T[i, -1]
    residual = float(np.abs(A @ x - b).max()) if m else 0.0
    if residual > 10.0 * feas_tol:
        raise ConvergenceError(f"simplex solution drifted, residual {residual:.3e}")
    value = float(c @ x)
    return LPResult(x=x, value=value, basis=basis, iterations=iters)
