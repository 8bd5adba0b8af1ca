"""Quality indicators, preference-aware R-metrics, and rank statistics.

The preference-aware scores (the set-accuracy value and the R-variants of
IGD and hypervolume) judge how well a solution set approximates the region
of interest around a decision maker's reference point; the plain IGD and
hypervolume judge whole-front approximation. Significance testing uses the
two-sided Wilcoxon signed-rank test, exact for small samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import dominance_matrix
from .scalarize import ReferencePoint, augmented_asf_matrix

METRIC_IDS = ("EP", "IGD", "HV", "R_IGD", "R_HV")

# Metrics where smaller is better; the rest are maximized.
MINIMIZED_METRICS = frozenset({"EP", "IGD", "R_IGD"})

MC_SAMPLES_DEFAULT = 100_000
EXACT_HV_MAX_DIM = 4
WILCOXON_EXACT_MAX_N = 25


@dataclass(frozen=True)
class MetricRecord:
    """One metric observation with the context that produced it."""

    metric: str
    value: float
    problem: str
    algorithm: str
    scenario: str
    seed: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRIC_IDS:
            raise ValueError(f"unknown metric id {self.metric!r}")
        if self.metric in ("IGD", "HV", "R_IGD", "R_HV") and self.value < 0:
            raise ValueError(f"{self.metric} cannot be negative")


@dataclass(frozen=True)
class TestOutcome:
    """Result of a two-sided significance test at level alpha."""

    __test__ = False  # keep pytest from collecting this as a test class

    statistic: float
    p_value: float
    alpha: float
    n_effective: int

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha


def ep_accuracy(P, zr: ReferencePoint) -> float:
    """Set accuracy: the best weighted Tchebycheff gap to the reference point.

    min over the set of max_i (f_i - z_i) / w_i. Negative when some member
    dominates the reference point. Weights default to the reference point's
    own (1/m unless overridden); zero weights get the 1e-6 substitution.
    """
    F = _as_matrix(P)
    if F.shape[0] == 0:
        raise ValueError("cannot score an empty set")
    w = np.where(zr.weights == 0.0, 1e-6, zr.weights)
    return float(np.min(np.max((F - zr.z) / w, axis=1)))


def igd(P, front_samples) -> float:
    """Inverted generational distance: mean sample-to-set nearest distance."""
    F = _as_matrix(P)
    S = _as_matrix(front_samples)
    if F.shape[0] == 0 or S.shape[0] == 0:
        raise ValueError("both the set and the front samples must be non-empty")
    # (S, N) pairwise distances; sets stay small enough to hold in memory.
    d2 = ((S[:, None, :] - F[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).mean())


def hypervolume(
    P,
    ref,
    method: str = "auto",
    mc_samples: int = MC_SAMPLES_DEFAULT,
    mc_seed: int = 0,
) -> float:
    """Lebesgue measure of the region dominated by P and bounded by ref.

    Members that fail to dominate the reference corner are excluded rather
    than rejected. The exact slicing computation serves up to 4 objectives;
    higher dimensions fall back to seeded Monte Carlo estimation (``method``
    may force "exact" or "monte_carlo").
    """
    F = _as_matrix(P)
    ref = np.asarray(ref, dtype=float)
    F = F[np.all(F < ref, axis=1)]
    if F.shape[0] == 0:
        return 0.0
    F = np.unique(F, axis=0)
    if method == "auto":
        method = "exact" if ref.size <= EXACT_HV_MAX_DIM else "monte_carlo"
    if method == "exact":
        return _hv_exact(F, ref)
    if method == "monte_carlo":
        return _hv_monte_carlo(F, ref, mc_samples, mc_seed)
    raise ValueError(f"unknown hypervolume method {method!r}")


def _pareto_filter(F: np.ndarray) -> np.ndarray:
    if F.shape[0] <= 1:
        return F
    dominated = dominance_matrix(F).any(axis=0)
    return F[~dominated]


def _hv_exact(F: np.ndarray, ref: np.ndarray) -> float:
    """Recursive objective-slicing hypervolume (minimization)."""
    F = _pareto_filter(F)
    m = ref.size
    if m == 2:
        return _hv_2d(F, ref)
    order = np.argsort(F[:, -1], kind="stable")
    F = F[order]
    z = F[:, -1]
    volume = 0.0
    for i in range(F.shape[0]):
        depth = (z[i + 1] if i + 1 < F.shape[0] else ref[-1]) - z[i]
        if depth <= 0.0:
            continue
        volume += depth * _hv_exact(F[: i + 1, :-1], ref[:-1])
    return volume


def _hv_2d(F: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(F[:, 0], kind="stable")
    area = 0.0
    prev_y = ref[1]
    for x, y in F[order]:
        if y < prev_y:
            area += (ref[0] - x) * (prev_y - y)
            prev_y = y
    return area


def _hv_monte_carlo(F: np.ndarray, ref: np.ndarray, samples: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    lower = F.min(axis=0)
    box = float(np.prod(ref - lower))
    hits = 0
    remaining = samples
    while remaining > 0:
        chunk = min(remaining, 20_000)
        U = rng.uniform(lower, ref, size=(chunk, ref.size))
        covered = (F[None, :, :] <= U[:, None, :]).all(axis=2).any(axis=1)
        hits += int(covered.sum())
        remaining -= chunk
    return box * hits / samples


@dataclass(frozen=True)
class RegionResult:
    """Output of the R-metric preprocessing pipeline."""

    processed: np.ndarray  # trimmed set translated onto the reference line
    pivot: np.ndarray  # original pivot objectives
    shift: np.ndarray  # translation applied to the trimmed set
    virtual_samples: np.ndarray | None  # front samples near the landing spot
    degenerate: bool  # no front samples survive the restriction


def r_preprocess(
    P,
    zr: ReferencePoint,
    delta_extent: float,
    front_samples=None,
    worst: np.ndarray | None = None,
    rho_aug: float = 1e-4,
) -> RegionResult:
    """Trim a set to the region of interest and translate it for scoring.

    The pivot is the member with the best augmented achievement value
    against the reference point. Members outside the axis-aligned box of
    half-width delta_extent/2 around the pivot are dropped; the survivors
    are rigidly translated so the pivot lands on the reference line (from
    the reference point through the worst point) at its iso-achievement
    position. Front samples, when given, are restricted to the same-size
    box around the landing spot; an empty restriction flags the result
    degenerate (scored worst by the callers).
    """
    F = _as_matrix(P)
    if F.shape[0] == 0:
        raise ValueError("cannot preprocess an empty set")
    if delta_extent <= 0:
        raise ValueError("delta_extent must be positive")
    samples = None if front_samples is None else _as_matrix(front_samples)
    if worst is None:
        basis = samples if samples is not None and samples.shape[0] else F
        span = basis.max(axis=0) - basis.min(axis=0)
        worst = basis.max(axis=0) + 0.1 * np.where(span > 0, span, 1.0)
    worst = np.asarray(worst, dtype=float)

    pivot_idx = int(np.argmin(augmented_asf_matrix(F, zr, rho_aug=rho_aug)))
    pivot = F[pivot_idx]
    half = delta_extent / 2.0
    kept = F[np.all(np.abs(F - pivot) <= half + 1e-12, axis=1)]

    direction = worst - zr.z
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(np.abs(direction) > 1e-12, (pivot - zr.z) / direction, -np.inf)
    delta = float(ratios.max()) if np.any(np.isfinite(ratios)) else 0.0
    iso = zr.z + delta * direction
    shift = iso - pivot

    virtual = None
    degenerate = False
    if samples is not None:
        inside = np.all(np.abs(samples - iso) <= half + 1e-12, axis=1)
        virtual = samples[inside]
        degenerate = virtual.shape[0] == 0
    return RegionResult(kept + shift, pivot, shift, virtual, degenerate)


def r_igd(
    P,
    zr: ReferencePoint,
    delta_extent: float,
    front_samples,
    worst: np.ndarray | None = None,
) -> float:
    """Region-of-interest IGD; +inf when preprocessing degenerates."""
    pre = r_preprocess(P, zr, delta_extent, front_samples, worst)
    if pre.degenerate:
        return math.inf
    return igd(pre.processed, pre.virtual_samples)


def r_hv(
    P,
    zr: ReferencePoint,
    delta_extent: float,
    ref: np.ndarray,
    method: str = "auto",
    mc_samples: int = MC_SAMPLES_DEFAULT,
    mc_seed: int = 0,
) -> float:
    """Region-of-interest hypervolume against a shared reference corner.

    The reference corner doubles as the worst point anchoring the
    translation direction; 0 when nothing dominates the corner.
    """
    pre = r_preprocess(P, zr, delta_extent, None, worst=np.asarray(ref, dtype=float))
    return hypervolume(pre.processed, ref, method=method, mc_samples=mc_samples, mc_seed=mc_seed)


def wilcoxon_signed_rank(a, b, alpha: float = 0.05) -> TestOutcome:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. The null distribution is exact (dynamic
    programming over the signed-rank sums, valid under ties) up to n=25 and
    a tie-corrected normal approximation beyond. All differences zero yields
    p=1, not significant.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and equally long")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return TestOutcome(statistic=0.0, p_value=1.0, alpha=alpha, n_effective=0)
    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= WILCOXON_EXACT_MAX_N:
        p = _exact_two_sided_p(ranks, w_plus)
    else:
        p = _normal_two_sided_p(ranks, w_plus, n)
    return TestOutcome(statistic=w_plus, p_value=min(1.0, p), alpha=alpha, n_effective=n)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_two_sided_p(ranks: np.ndarray, w_plus: float) -> float:
    # Doubling makes the (possibly half-integer) average ranks integral.
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts += shifted
    mean = total / 2.0
    dev = abs(np.rint(2.0 * w_plus) - mean)
    support = np.arange(total + 1, dtype=np.float64)
    mass = counts[np.abs(support - mean) >= dev - 1e-9].sum()
    return float(mass / counts.sum())


def _normal_two_sided_p(ranks: np.ndarray, w_plus: float, n: int) -> float:
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    if var <= 0:
        return 1.0
    z = (w_plus - mean) / math.sqrt(var)
    return math.erfc(abs(z) / math.sqrt(2.0))


def rank_table(values: np.ndarray, minimize: bool = True) -> np.ndarray:
    """Competition ranks per instance column (rank 1 = best, ties share it).

    Args:
        values: (algorithms, instances) metric matrix for one metric.
        minimize: Orientation of the metric (False for hypervolume-like).

    Returns:
        Integer matrix of the same shape; within each column an algorithm's
        rank is 1 plus the number of strictly better algorithms.
    """
    V = np.asarray(values, dtype=float)
    if V.ndim != 2:
        raise ValueError("expected an (algorithms, instances) matrix")
    if not np.all(np.isfinite(V) | np.isposinf(V)):
        raise ValueError("rank table requires finite or +inf entries")
    better = V[:, None, :] < V[None, :, :] if minimize else V[:, None, :] > V[None, :, :]
    return better.sum(axis=0).astype(int) + 1


def _as_matrix(P) -> np.ndarray:
    F = np.asarray(P, dtype=float)
    if F.ndim == 1:
        F = F[np.newaxis, :]
    if F.ndim != 2:
        raise ValueError("expected an (N, m) objective matrix")
    return F
