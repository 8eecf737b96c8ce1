"""Nonlinear regression models and their induced function systems.

For a model with mean function eta(x, theta) and gradient g = d eta /
d theta, the information matrix of a design xi is

    M(xi, theta) = sum_j w_j g(x_j) g(x_j)^T .

A model carries a regular matrix P(theta), independent of the design,
and the transformed matrix C = P^{-1} M P^{-T} factors pointwise as
C(x) = h(x) h(x)^T with h = P^{-1} g.  Splitting off the trailing p1
coordinates of h partitions C(x) into blocks C11 (leading square), C21
(trailing rows) and C22 (trailing square).  The distinct non-constant
entries of C11 and C21, with the constant 1 prepended, form the psi
system whose moments a dominating design must reproduce, while the
quadratic forms Q^T C22(x) Q over nonzero Q are the directions in which
it must gain.

Each catalog entry pins the ordering of its psi functions.  The
ordering is mathematically irrelevant for the moment constraints but
the determinant condition is sign sensitive, so the catalog declares
the permutation that makes the base system positively oriented.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .chebyshev import ChebyshevSystem, Interval
from .errors import ConfigurationError, DomainError, EvaluationError

DEDUP_GRID_SIZE = 256
DEDUP_TOL = 1e-10


@dataclass(frozen=True)
class RegressionModel:
    """Catalog model: mean function, gradient and block transformation.

    ``gradient`` and ``gradient_dx`` accept an ndarray of x values and
    return an array of shape (p, n); ``gradient_dx`` is the x derivative
    of the gradient, used to carry analytic derivatives through to the
    Newton refinement.  ``p1`` is the size of the trailing block.
    """

    name: str
    p: int
    eta: Callable
    gradient: Callable
    p_matrix: Callable
    design_interval: Interval
    p1: int = 1
    gradient_dx: Optional[Callable] = None
    psi_order: Optional[Tuple[int, ...]] = None
    expected_k: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.p1 <= self.p:
            raise ConfigurationError(f"p1 must lie in 1..{self.p}, got {self.p1}")


@dataclass(frozen=True)
class PsiSystem:
    """The induced moment system of a model at a parameter value.

    ``system`` holds 1, psi_1, ..., psi_{k-1} in catalog order;
    ``c22_map`` evaluates the trailing block C22(x); ``element_index``
    maps each (row, col) position of C11 and C21 to ("psi", basis index)
    or ("const", value).
    """

    system: ChebyshevSystem
    c22_map: Callable
    element_index: Dict[Tuple[int, int], Tuple]
    p1: int
    h_tail: Callable  # x -> (p1, n) factor of C22 = h_tail h_tail^T

    @property
    def k(self) -> int:
        return self.system.k


def _grad_values(model: RegressionModel, theta, xs) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    G = np.asarray(model.gradient(xs, theta), dtype=float)
    if G.shape != (model.p, xs.size):
        raise ConfigurationError(
            f"gradient of {model.name} returned shape {G.shape}, expected {(model.p, xs.size)}"
        )
    if not np.all(np.isfinite(G)):
        bad = xs[~np.isfinite(G).all(axis=0)][0]
        raise EvaluationError(f"gradient of {model.name} non-finite at x={bad!r}")
    return G


def _check_theta(model: RegressionModel, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.p,):
        raise ConfigurationError(
            f"model {model.name} needs {model.p} parameters, got {theta.shape}"
        )
    return theta


def information_matrix(model: RegressionModel, theta, design) -> np.ndarray:
    """M = sum_j w_j g(x_j) g(x_j)^T, a symmetric PSD p x p matrix."""
    theta = _check_theta(model, theta)
    if (
        design.interval.lower != model.design_interval.lower
        or design.interval.upper != model.design_interval.upper
    ):
        raise DomainError("design interval differs from the model design interval")
    G = _grad_values(model, theta, design.points_array())
    W = design.weights_array()
    M = (G * W) @ G.T
    return (M + M.T) / 2.0


def _p_inverse(model: RegressionModel, theta) -> np.ndarray:
    P = np.asarray(model.p_matrix(theta), dtype=float)
    if P.shape != (model.p, model.p):
        raise ConfigurationError(f"P matrix of {model.name} has shape {P.shape}")
    if not np.all(np.isfinite(P)) or np.linalg.cond(P) > 1e12:
        raise ConfigurationError(f"P matrix of {model.name} is numerically singular")
    return np.linalg.inv(P)


def c_matrix(model: RegressionModel, theta, design) -> np.ndarray:
    """C = P^{-1} M P^{-T}; the identity M = P C P^T holds to round-off."""
    theta = _check_theta(model, theta)
    M = information_matrix(model, theta, design)
    Pinv = _p_inverse(model, theta)
    C = Pinv @ M @ Pinv.T
    return (C + C.T) / 2.0


def psi_system(model: RegressionModel, theta) -> PsiSystem:
    """Deduplicated entries of C11 and C21, ordered per the catalog.

    Entries are compared on a 256-point Chebyshev-spaced grid; two
    entries agreeing within 1e-10 (relative to their magnitude) are the
    same psi, and constants are discarded.  When the model declares an
    expected k, a mismatch raises a configuration error, which catches
    deduplication ambiguities at known parameter values.
    """
    theta = _check_theta(model, theta)
    p, p1 = model.p, model.p1
    r = p - p1
    Pinv = _p_inverse(model, theta)
    a, b = model.design_interval.lower, model.design_interval.upper

    mid, half = (a + b) / 2.0, (b - a) / 2.0
    angles = np.pi * (2.0 * np.arange(DEDUP_GRID_SIZE) + 1.0) / (2.0 * DEDUP_GRID_SIZE)
    grid = np.sort(mid + half * np.cos(angles))
    H = Pinv @ _grad_values(model, theta, grid)  # (p, n)

    positions = [(i, j) for i in range(r) for j in range(r)]
    positions += [(i, j) for i in range(r, p) for j in range(r)]

    element_index: Dict[Tuple[int, int], Tuple] = {}
    reps: list = []  # (values_on_grid, (i, j) of first appearance)
    for (i, j) in positions:
        vals = H[i] * H[j]
        lo, hi = float(vals.min()), float(vals.max())
        if hi - lo <= DEDUP_TOL * max(1.0, abs(hi), abs(lo)):
            element_index[(i, j)] = ("const", float(vals.mean()))
            continue
        match = -1
        for idx, (rv, _) in enumerate(reps):
            tol = DEDUP_TOL * max(1.0, float(np.abs(vals).max()), float(np.abs(rv).max()))
            if np.abs(vals - rv).max() <= tol:
                match = idx
                break
        if match < 0:
            reps.append((vals, (i, j)))
            match = len(reps) - 1
        element_index[(i, j)] = ("psi", match)

    n_distinct = len(reps)
    k = 1 + n_distinct
    if model.expected_k is not None and k != model.expected_k:
        raise ConfigurationError(
            f"{model.name}: deduplication found k={k}, catalog declares {model.expected_k}; "
            "entries may coincide at this parameter value"
        )

    order = model.psi_order if model.psi_order is not None else tuple(range(n_distinct))
    if sorted(order) != list(range(n_distinct)):
        raise ConfigurationError(f"{model.name}: psi_order is not a permutation of 0..{n_distinct - 1}")
    # order[m] = scan index placed at basis slot m+1.
    slot_of_scan = {scan: slot + 1 for slot, scan in enumerate(order)}
    for pos, tag in element_index.items():
        if tag[0] == "psi":
            element_index[pos] = ("psi", slot_of_scan[tag[1]])

    def make_psi(i: int, j: int) -> Callable:
        def f(xs):
            xs = np.atleast_1d(np.asarray(xs, dtype=float))
            Hx = Pinv @ _grad_values(model, theta, xs)
            return Hx[i] * Hx[j]

        f.__name__ = f"psi_h{i}_h{j}"
        return f

    def make_dpsi(i: int, j: int) -> Callable:
        def df(xs):
            xs = np.atleast_1d(np.asarray(xs, dtype=float))
            Hx = Pinv @ _grad_values(model, theta, xs)
            Gx = np.asarray(model.gradient_dx(xs, theta), dtype=float)
            dHx = Pinv @ Gx
            return dHx[i] * Hx[j] + Hx[i] * dHx[j]

        return df

    basis = [lambda x: np.ones_like(np.asarray(x, dtype=float))]
    for scan in order:
        i, j = reps[scan][1]
        basis.append(make_psi(i, j))
    derivatives = None
    if model.gradient_dx is not None:
        derivatives = [lambda x: np.zeros_like(np.asarray(x, dtype=float))]
        for scan in order:
            i, j = reps[scan][1]
            derivatives.append(make_dpsi(i, j))

    system = ChebyshevSystem(
        interval=model.design_interval,
        basis=tuple(basis),
        derivatives=tuple(derivatives) if derivatives else None,
        name=f"{model.name}_psi",
    )

    def h_tail(xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return (Pinv @ _grad_values(model, theta, xs))[r:]

    def c22_map(x):
        v = h_tail(np.asarray([x], dtype=float))[:, 0]
        return np.outer(v, v)

    return PsiSystem(
        system=system,
        c22_map=c22_map,
        element_index=element_index,
        p1=p1,
        h_tail=h_tail,
    )


def psi_k_Q(psi: PsiSystem, Q) -> Callable:
    """The direction function x -> Q^T C22(x) Q for a nonzero Q.

    Since C22 = h h^T with the trailing block h of length p1, the value
    is the square of Q . h(x).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (psi.p1,):
        raise DomainError(f"Q must have length p1={psi.p1}")
    if float(np.linalg.norm(Q)) == 0.0:
        raise DomainError("Q must be nonzero")

    def f(xs):
        arr = np.asarray(xs, dtype=float)
        proj = Q @ psi.h_tail(arr)
        vals = proj * proj
        if arr.ndim == 0:
            return float(vals[0])
        return vals

    f.__name__ = "psi_k_Q"
    return f


def _theta_positive(name: str, theta: np.ndarray, idx: int):
    if theta[idx] <= 0.0:
        raise ConfigurationError(f"{name}: theta[{idx}] must be positive, got {theta[idx]}")


def _theta_nonzero(name: str, theta: np.ndarray, idx: int):
    if theta[idx] == 0.0:
        raise ConfigurationError(f"{name}: theta[{idx}] must be nonzero")


def _michaelis_menten(interval: Interval, p1: int) -> RegressionModel:
    """eta = theta1 * x / (theta2 + x); requires theta2 > 0 and A >= 0."""
    if interval.lower < 0.0:
        raise ConfigurationError("michaelis_menten needs a nonnegative design interval")

    def eta(x, th):
        x = np.asarray(x, dtype=float)
        return th[0] * x / (th[1] + x)

    def gradient(x, th):
        x = np.asarray(x, dtype=float)
        d = th[1] + x
        return np.stack([x / d, -th[0] * x / d**2])

    def gradient_dx(x, th):
        x = np.asarray(x, dtype=float)
        d = th[1] + x
        return np.stack([th[1] / d**2, -th[0] * (th[1] - x) / d**3])

    return RegressionModel(
        name="michaelis_menten",
        p=2,
        eta=eta,
        gradient=gradient,
        p_matrix=lambda th: np.diag([1.0, -th[0]]),
        design_interval=interval,
        p1=p1,
        gradient_dx=gradient_dx,
        psi_order=(1, 0) if p1 == 1 else None,
        expected_k=3 if p1 == 1 else None,
    )


def _exponential(interval: Interval, p1: int) -> RegressionModel:
    """eta = theta1 * exp(theta2 * x)."""

    def eta(x, th):
        return th[0] * np.exp(th[1] * np.asarray(x, dtype=float))

    def gradient(x, th):
        x = np.asarray(x, dtype=float)
        e = np.exp(th[1] * x)
        return np.stack([e, th[0] * x * e])

    def gradient_dx(x, th):
        x = np.asarray(x, dtype=float)
        e = np.exp(th[1] * x)
        return np.stack([th[1] * e, th[0] * e * (1.0 + th[1] * x)])

    return RegressionModel(
        name="exponential",
        p=2,
        eta=eta,
        gradient=gradient,
        p_matrix=lambda th: np.diag([1.0, th[0]]),
        design_interval=interval,
        p1=p1,
        gradient_dx=gradient_dx,
        psi_order=(0, 1) if p1 == 1 else None,
        expected_k=3 if p1 == 1 else None,
    )


def _exponential3(interval: Interval, p1: int) -> RegressionModel:
    """eta = theta1 + theta2 * exp(theta3 * x)."""

    def eta(x, th):
        return th[0] + th[1] * np.exp(th[2] * np.asarray(x, dtype=float))

    def gradient(x, th):
        x = np.asarray(x, dtype=float)
        e = np.exp(th[2] * x)
        return np.stack([np.ones_like(x), e, th[1] * x * e])

    def gradient_dx(x, th):
        x = np.asarray(x, dtype=float)
        e = np.exp(th[2] * x)
        return np.stack([np.zeros_like(x), th[2] * e, th[1] * e * (1.0 + th[2] * x)])

    # Scan order of the distinct entries is (e, e^2, x e, x e^2) in the
    # shorthand e = exp(theta3 x).  The declared order interleaves them
    # as (e, x e, e^2, x e^2), an odd permutation, which orients the
    # base determinants positively for either sign of theta3.
    return RegressionModel(
        name="exponential3",
        p=3,
        eta=eta,
        gradient=gradient,
        p_matrix=lambda th: np.diag([1.0, 1.0, th[1]]),
        design_interval=interval,
        p1=p1,
        gradient_dx=gradient_dx,
        psi_order=(0, 2, 1, 3) if p1 == 1 else None,
        expected_k=5 if p1 == 1 else None,
    )


def _polynomial(interval: Interval, p1: int, degree: int) -> RegressionModel:
    """eta = theta1 + theta2 x + ... + theta_{d+1} x^d, the linear model."""
    if degree < 1:
        raise ConfigurationError("polynomial degree must be at least 1")
    p = degree + 1

    def eta(x, th):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), th)

    def gradient(x, th):
        x = np.asarray(x, dtype=float)
        return np.stack([x**i for i in range(p)])

    def gradient_dx(x, th):
        x = np.asarray(x, dtype=float)
        rows = [np.zeros_like(x)]
        rows += [i * x ** (i - 1) for i in range(1, p)]
        return np.stack(rows)

    return RegressionModel(
        name="polynomial",
        p=p,
        eta=eta,
        gradient=gradient,
        p_matrix=lambda th: np.eye(p),
        design_interval=interval,
        p1=p1,
        gradient_dx=gradient_dx,
        psi_order=None,
        expected_k=2 * degree if p1 == 1 else None,
    )


CATALOG_NAMES = ("michaelis_menten", "exponential", "exponential3", "polynomial")


def make_model(name: str, theta, interval, p1: int = 1) -> RegressionModel:
    """Build a catalog model bound to a design interval.

    ``theta`` is used for dimension and admissibility checks only; the
    operations all take the parameter vector explicitly.
    """
    if isinstance(interval, (tuple, list)):
        interval = Interval(interval[0], interval[1])
    theta = np.asarray(theta, dtype=float)
    if name == "michaelis_menten":
        model = _michaelis_menten(interval, p1)
        _check_theta(model, theta)
        _theta_nonzero(name, theta, 0)
        _theta_positive(name, theta, 1)
    elif name == "exponential":
        model = _exponential(interval, p1)
        _check_theta(model, theta)
        _theta_nonzero(name, theta, 0)
        _theta_nonzero(name, theta, 1)
    elif name == "exponential3":
        model = _exponential3(interval, p1)
        _check_theta(model, theta)
        _theta_nonzero(name, theta, 1)
        _theta_nonzero(name, theta, 2)
    elif name == "polynomial":
        model = _polynomial(interval, p1, degree=len(theta) - 1)
    else:
        raise ConfigurationError(
            f"unknown model {name!r}; catalog: {', '.join(CATALOG_NAMES)}"
        )
    return model
