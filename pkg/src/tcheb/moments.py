"""Designs, generalized moment points and the half-counted index.

A design is a finitely supported probability measure on the design
interval.  Its moment point with respect to a k-function system is the
vector of integrals of the basis functions.  The index of a design
counts interior support points fully and interval endpoints as 1/2; a
moment point is a boundary point of the moment space exactly when every
representing measure has index below k/2, in which case the
representation is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .chebyshev import ChebyshevSystem, Interval, basis_matrix
from .errors import ConfigurationError, DomainError

# Support points closer than this times (B - A) are merged into one.
MERGE_REL = 1e-10
# Points within this times (B - A) of an endpoint snap onto it before
# index counting; the half-counting rule needs a deterministic boundary.
SNAP_REL = 1e-10
# |sum(weights) - 1| accepted at construction, after which the weights
# are renormalized so that math.fsum(weights) == 1.0 exactly.
INGEST_WEIGHT_TOL = 1e-9

# Default relative tolerance on the gamma gap in classify_point.
CLASSIFY_TOL = 1e-9


def _exact_unit_sum(weights: list) -> list:
    """Scale weights to sum to 1, then absorb the fsum residual.

    The correction goes into the largest weight so the perturbation is
    relatively smallest; it loops because one adjustment may still leave
    a one-ulp residual.
    """
    total = math.fsum(weights)
    ws = [w / total for w in weights]
    for _ in range(10):
        residual = 1.0 - math.fsum(ws)
        if residual == 0.0:
            break
        ws[ws.index(max(ws))] += residual
    return ws


@dataclass(frozen=True)
class Design:
    """Finitely supported probability measure on its interval.

    Construction normalizes the support: points snap to nearby
    endpoints, near-coincident points merge with weights summed,
    zero-weight points drop, and weights are renormalized to sum to 1
    exactly under math.fsum.  Weight sums farther than 1e-9 from 1 and
    negative weights are rejected.
    """

    points: Tuple[float, ...]
    weights: Tuple[float, ...]
    interval: Interval

    def __post_init__(self):
        pts = [float(p) for p in self.points]
        ws = [float(w) for w in self.weights]
        if len(pts) != len(ws):
            raise ConfigurationError("points and weights differ in length")
        if any(w < 0.0 for w in ws):
            raise ConfigurationError("design weights must be nonnegative")
        pairs = [(p, w) for p, w in zip(pts, ws) if w > 0.0]
        if not pairs:
            raise ConfigurationError("a design needs at least one point of positive weight")

        a, b = self.interval.lower, self.interval.upper
        tol = SNAP_REL * self.interval.length
        snapped = []
        for p, w in pairs:
            if abs(p - a) <= tol:
                p = a
            elif abs(p - b) <= tol:
                p = b
            if p < a or p > b:
                raise DomainError(f"design point {p!r} outside [{a}, {b}]")
            snapped.append((p, w))
        snapped.sort(key=lambda t: t[0])

        merged = []
        for p, w in snapped:
            if merged and p - merged[-1][0] <= tol:
                q, v = merged[-1]
                if q == a or q == b:
                    keep = q
                elif p == b:
                    keep = p
                else:
                    keep = (q * v + p * w) / (v + w)
                merged[-1] = (keep, v + w)
            else:
                merged.append((p, w))

        total = math.fsum(w for _, w in merged)
        if abs(total - 1.0) > INGEST_WEIGHT_TOL:
            raise ConfigurationError(f"design weights sum to {total!r}, expected 1")
        ws = _exact_unit_sum([w for _, w in merged])
        object.__setattr__(self, "points", tuple(p for p, _ in merged))
        object.__setattr__(self, "weights", tuple(ws))

    @property
    def size(self) -> int:
        return len(self.points)

    def points_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def as_json_obj(self) -> dict:
        return {
            "points": list(self.points),
            "weights": list(self.weights),
            "interval": [self.interval.lower, self.interval.upper],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "Design":
        if not isinstance(obj, dict):
            raise ConfigurationError("design JSON must be an object")
        missing = {"points", "weights", "interval"} - set(obj)
        if missing:
            raise ConfigurationError(f"design JSON missing fields: {sorted(missing)}")
        interval = obj["interval"]
        if not (isinstance(interval, (list, tuple)) and len(interval) == 2):
            raise ConfigurationError("design interval must be a pair [A, B]")
        return cls(
            points=tuple(obj["points"]),
            weights=tuple(obj["weights"]),
            interval=Interval(interval[0], interval[1]),
        )


class HalfIndex:
    """Index value stored as twice the index, so halves stay exact."""

    __slots__ = ("twice",)

    def __init__(self, twice: int):
        self.twice = int(twice)

    @property
    def value(self) -> float:
        return self.twice / 2.0

    def _other(self, other) -> float:
        if isinstance(other, HalfIndex):
            return other.value
        return float(other)

    def __eq__(self, other):
        try:
            return self.value == self._other(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.value < self._other(other)

    def __le__(self, other):
        return self.value <= self._other(other)

    def __gt__(self, other):
        return self.value > self._other(other)

    def __ge__(self, other):
        return self.value >= self._other(other)

    def __hash__(self):
        return hash(("HalfIndex", self.twice))

    def __repr__(self):
        return f"HalfIndex({self.value})"


@dataclass(frozen=True)
class MomentPoint:
    """Vector of generalized moments together with its generating system."""

    coordinates: Tuple[float, ...]
    system: ChebyshevSystem

    @property
    def k(self) -> int:
        return len(self.coordinates)

    def array(self) -> np.ndarray:
        return np.asarray(self.coordinates, dtype=float)


@dataclass(frozen=True)
class BoundaryReport:
    classification: str  # "Boundary" or "Interior"
    gamma_lower: float
    gamma_upper: float
    probe: str


def _same_interval(i1: Interval, i2: Interval) -> bool:
    return i1.lower == i2.lower and i1.upper == i2.upper


def moment_point(system: ChebyshevSystem, design: Design) -> MomentPoint:
    """Moments c_i = sum_j w_j psi_i(x_j), accumulated with math.fsum.

    With psi_0 identically one the zeroth coordinate equals
    math.fsum(weights), which Design construction pins to exactly 1.0.
    """
    if not _same_interval(design.interval, system.interval):
        raise DomainError("design and system live on different intervals")
    V = basis_matrix(system, design.points_array())
    w = design.weights
    coords = tuple(
        math.fsum(V[i, j] * w[j] for j in range(len(w))) for i in range(system.k)
    )
    return MomentPoint(coordinates=coords, system=system)


def design_index(design: Design) -> HalfIndex:
    """Interior support points count 1, endpoint support points count 1/2."""
    a, b = design.interval.lower, design.interval.upper
    twice = 0
    for p in design.points:
        twice += 1 if (p == a or p == b) else 2
    return HalfIndex(twice)


def classify_point(
    system: ChebyshevSystem,
    c0: MomentPoint,
    probe: Callable,
    tolerance: float = CLASSIFY_TOL,
    grid_size: int = 2001,
) -> BoundaryReport:
    """Boundary or interior classification via the probe-moment interval.

    Maximizing and minimizing the probe moment over all measures with
    moment point c0 yields an interval [gamma_lower, gamma_upper]; the
    point is a boundary point exactly when that interval collapses, in
    which case its representing measure is unique.  The probe must
    augment the system to a Chebyshev system for the geometry to hold;
    that is the caller's obligation.
    """
    # Imported here: principal_rep builds on this module.
    from .principal import grid_lp_extremum

    # Boundary moment points sit within O(grid spacing^2) of the grid
    # moment body, so classification runs the LPs with a relaxed
    # feasibility acceptance.
    slack = 1e-6 * max(1.0, float(np.max(np.abs(c0.array()))))
    gamma_upper, _ = grid_lp_extremum(
        system, c0, probe, sense="max", grid_size=grid_size, feas_tol=slack
    )
    gamma_lower, _ = grid_lp_extremum(
        system, c0, probe, sense="min", grid_size=grid_size, feas_tol=slack
    )
    gap = gamma_upper - gamma_lower
    boundary = gap <= tolerance * max(1.0, abs(gamma_upper))
    return BoundaryReport(
        classification="Boundary" if boundary else "Interior",
        gamma_lower=float(gamma_lower),
        gamma_upper=float(gamma_upper),
        probe=getattr(probe, "__name__", "probe"),
    )
