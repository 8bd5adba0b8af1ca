"""Domain types and Pareto machinery shared by every algorithm and metric.

Everything in this module is a pure function of its inputs. Objective and
decision vectors are numpy float arrays, frozen (read-only) once they enter a
:class:`Solution` or :class:`Population`, so values can be shared freely
across threads.

All objectives are minimized. Problems with maximized criteria negate them at
evaluation time (see :mod:`prefemo.problems`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Dominance(enum.Enum):
    """Outcome of a pairwise Pareto comparison."""

    A_DOMINATES = "a_dominates"
    B_DOMINATES = "b_dominates"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


def as_objectives(values) -> np.ndarray:
    """Validate and convert a value sequence into an objective vector.

    Args:
        values: Sequence of at least two finite reals.

    Returns:
        1-D float64 array (a copy; caller mutations cannot leak in).

    Raises:
        ValueError: On wrong dimensionality or non-finite entries.
    """
    f = np.array(values, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise ValueError(f"objective vector must be 1-D with m >= 2, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("objective vector contains NaN or infinite entries")
    return f


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Solution:
    """A decision vector together with its evaluated objectives.

    Attributes:
        x: Decision vector (n reals).
        f: Objective vector (m reals, minimization orientation).
        id: Token unique within the population that owns this solution.
    """

    x: np.ndarray
    f: np.ndarray
    id: int

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "f", _frozen(as_objectives(self.f)))


@dataclass(frozen=True)
class BoxBounds:
    """Axis-aligned box constraining the decision space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen(self.lower)
        up = _frozen(self.upper)
        if lo.shape != up.shape or lo.ndim != 1:
            raise ValueError("lower/upper must be 1-D vectors of equal length")
        if not np.all(lo < up):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def n(self) -> int:
        return self.lower.size

    def contains(self, x: np.ndarray, atol: float = 1e-12) -> bool:
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform samples in the box, shape (count, n)."""
        return rng.uniform(self.lower, self.upper, size=(count, self.n))


class Population:
    """Ordered multiset of solutions with cached ideal/nadir estimates.

    The ideal point is the running per-objective minimum over every solution
    this population lineage has ever observed (monotone under
    :meth:`evolve`). The nadir estimate is the per-objective maximum over the
    current non-dominated set.
    """

    __slots__ = ("members", "ideal", "nadir_est")

    def __init__(self, members, prior_ideal: np.ndarray | None = None):
        members = tuple(members)
        if not members:
            raise ValueError("population must be non-empty")
        F = objective_matrix(members)
        ideal = F.min(axis=0)
        if prior_ideal is not None:
            ideal = np.minimum(ideal, prior_ideal)
        front0 = nondominated_fronts(F)[0]
        nadir = F[front0].max(axis=0)
        self.members: tuple[Solution, ...] = members
        self.ideal = _frozen(ideal)
        self.nadir_est = _frozen(np.maximum(nadir, ideal))

    @classmethod
    def evolve(cls, prior: "Population", members) -> "Population":
        """New population carrying forward the prior's ideal-point estimate."""
        return cls(members, prior_ideal=prior.ideal)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def objectives(self) -> np.ndarray:
        return objective_matrix(self.members)


def objective_matrix(solutions) -> np.ndarray:
    """Stack solution objectives into an (N, m) matrix."""
    return np.array([s.f for s in solutions], dtype=float)


def pareto_compare(a: np.ndarray, b: np.ndarray) -> Dominance:
    """Compare two objective vectors under Pareto dominance (minimization).

    Equal vectors are mutually non-dominating and reported as EQUAL; strict
    dominance requires weak improvement everywhere and a difference somewhere.

    Raises:
        ValueError: If the vectors differ in dimension.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if np.array_equal(a, b):
        return Dominance.EQUAL
    if np.all(a <= b):
        return Dominance.A_DOMINATES
    if np.all(b <= a):
        return Dominance.B_DOMINATES
    return Dominance.INCOMPARABLE


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff objective vector ``a`` Pareto-dominates ``b``."""
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """Pairwise dominance for an (N, m) objective matrix.

    Returns:
        Boolean (N, N) array where ``out[i, j]`` means row i dominates row j.
    """
    a = F[:, np.newaxis, :]
    b = F[np.newaxis, :, :]
    return np.all(a <= b, axis=2) & np.any(a < b, axis=2)


def fronts_from_dominance(dom: np.ndarray) -> list[list[int]]:
    """Peel fronts off an arbitrary pairwise strict-preference matrix.

    Front k holds the rows not bettered by any row still unassigned. Rows are
    listed in ascending index order, so ties break by insertion order. If the
    relation contains a cycle (possible for the preference-modified relations,
    never for Pareto dominance) the remaining members are emitted as one final
    front rather than looping forever.
    """
    n = dom.shape[0]
    count = dom.sum(axis=0).astype(np.int64)
    assigned = np.zeros(n, dtype=bool)
    fronts: list[list[int]] = []
    remaining = n
    while remaining:
        mask = (~assigned) & (count == 0)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            fronts.append([int(i) for i in np.nonzero(~assigned)[0]])
            break
        fronts.append([int(i) for i in idx])
        assigned[idx] = True
        remaining -= idx.size
        count -= dom[idx].sum(axis=0)
    return fronts


def nondominated_fronts(F: np.ndarray) -> list[list[int]]:
    """Fast non-dominated sorting of an (N, m) objective matrix.

    Returns:
        Fronts as lists of row indices; front 0 is the non-dominated set and
        every row appears exactly once.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ValueError("expected a non-empty (N, m) objective matrix")
    return fronts_from_dominance(dominance_matrix(F))


def fast_nondominated_sort(pop: Population) -> list[list[int]]:
    """Sort a population into fronts of member ids (see nondominated_fronts)."""
    fronts = nondominated_fronts(pop.objectives())
    ids = [s.id for s in pop.members]
    return [[ids[i] for i in front] for front in fronts]


def crowding_distance(front) -> np.ndarray:
    """NSGA-II crowding distance for one mutually non-dominated front.

    Per-objective extremes get infinity; an interior member accumulates
    (next - prev) / (max - min) per objective. An objective whose range is
    zero contributes nothing. Fronts of one or two members are all extremes.

    Args:
        front: List of solutions or an (N, m) objective matrix.

    Returns:
        Nonnegative distances (inf allowed), aligned with the input order.
    """
    if isinstance(front, np.ndarray):
        F = np.asarray(front, dtype=float)
    else:
        F = objective_matrix(front)
    k = F.shape[0]
    if k == 0:
        return np.array([], dtype=float)
    if k <= 2:
        return np.full(k, np.inf)
    dist = np.zeros(k, dtype=float)
    for j in range(F.shape[1]):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        if span <= 0.0:
            continue
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        interior = order[1:-1]
        dist[interior] += (col[2:] - col[:-2]) / span
    return dist


def normalize(f: np.ndarray, ideal: np.ndarray, nadir_est: np.ndarray) -> np.ndarray:
    """Affine map of objectives onto roughly [0, 1]^m.

    Dimensions where the nadir estimate equals the ideal map to 0.
    """
    f = np.asarray(f, dtype=float)
    span = np.asarray(nadir_est, dtype=float) - np.asarray(ideal, dtype=float)
    out = np.zeros_like(f)
    ok = span > 0
    out[..., ok] = (f[..., ok] - np.asarray(ideal)[ok]) / span[ok]
    return out
