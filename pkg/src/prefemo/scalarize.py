"""Scalarizing functions, preference relations, and weight-vector machinery.

Covers the Tchebycheff subproblem value, the reference-point weighted
distance, the r-dominance and g-dominance preference relations, the augmented
achievement scalarizing function, simplex-lattice weight generation, the
biased weight mapping used by the decomposition preference algorithms, and
local weight resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dominance, pareto_compare

# Zero weights in the Tchebycheff division are substituted with this floor.
ZERO_WEIGHT_SUBSTITUTE = 1e-6

# Guard against simplex-lattice blowup for extreme (m, H) pairs.
MAX_LATTICE_SIZE = 5_000_000


class RCompare(object):
    """Namespace of r-dominance comparison outcomes."""

    A_RDOMINATES = "a_rdominates"
    B_RDOMINATES = "b_rdominates"
    NEITHER = "neither"


@dataclass(frozen=True)
class ReferencePoint:
    """Decision-maker aspiration vector with per-objective weights.

    Weights default to 1/m each (all objectives equally important) and must
    be nonnegative with unit sum.
    """

    z: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 1 or z.size < 2:
            raise ValueError("reference point must be a 1-D vector with m >= 2")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        if self.weights is None:
            w = np.full(z.size, 1.0 / z.size)
        else:
            w = np.array(self.weights, dtype=float)
            if w.shape != z.shape:
                raise ValueError("weights must match the reference point dimension")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.z.size


def as_weight_vector(w) -> np.ndarray:
    """Validate a simplex point (nonnegative, unit sum)."""
    w = np.array(w, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weight vector must be nonnegative and sum to 1")
    return w


@dataclass(frozen=True)
class WeightSet:
    """A collection of simplex weight vectors, tagged by how it was built."""

    vectors: np.ndarray
    structure: str = "uniform"  # "uniform" or "biased"

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("weight set must be a non-empty (K, m) matrix")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def m(self) -> int:
        return self.vectors.shape[1]


def tchebycheff(f: np.ndarray, w: np.ndarray, z_star: np.ndarray) -> float:
    """Inverted Tchebycheff subproblem value max_i |f_i - z*_i| / w_i.

    Zero weights are replaced by 1e-6 so the value stays finite for any
    finite input.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    w = np.where(w == 0.0, ZERO_WEIGHT_SUBSTITUTE, w)
    return float(np.max(np.abs(f - np.asarray(z_star, dtype=float)) / w))


def weighted_distance(
    f: np.ndarray,
    zr: ReferencePoint,
    fmin: np.ndarray,
    fmax: np.ndarray,
) -> float:
    """Weighted normalized Euclidean distance from f to the reference point.

    Each term is w_i * ((f_i - z_i) / (fmax_i - fmin_i))^2; a degenerate
    objective range contributes 0.
    """
    f = np.asarray(f, dtype=float)
    span = np.asarray(fmax, dtype=float) - np.asarray(fmin, dtype=float)
    diff = np.zeros_like(f)
    ok = span > 0
    diff[ok] = (f[ok] - zr.z[ok]) / span[ok]
    return float(math.sqrt(float(np.sum(zr.weights * diff * diff))))


def weighted_distance_matrix(
    F: np.ndarray,
    zr: ReferencePoint,
    fmin: np.ndarray,
    fmax: np.ndarray,
) -> np.ndarray:
    """Vectorized weighted_distance over the rows of an (N, m) matrix."""
    F = np.asarray(F, dtype=float)
    span = np.asarray(fmax, dtype=float) - np.asarray(fmin, dtype=float)
    diff = np.zeros_like(F)
    ok = span > 0
    diff[:, ok] = (F[:, ok] - zr.z[ok]) / span[ok]
    return np.sqrt((zr.weights * diff * diff).sum(axis=1))


def r_compare(
    fa: np.ndarray,
    fb: np.ndarray,
    zr: ReferencePoint,
    delta: float,
    fmin: np.ndarray,
    fmax: np.ndarray,
    dist_min: float,
    dist_max: float,
) -> str:
    """r-dominance between two objective vectors.

    Pareto dominance decides first. For Pareto-incomparable pairs the
    normalized distance difference (Dist(a) - Dist(b)) / (dist_max -
    dist_min) decides: below -delta means a wins, above +delta means b wins.
    A degenerate distance range (dist_max == dist_min) yields NEITHER.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    rel = pareto_compare(fa, fb)
    if rel is Dominance.A_DOMINATES:
        return RCompare.A_RDOMINATES
    if rel is Dominance.B_DOMINATES:
        return RCompare.B_RDOMINATES
    if rel is Dominance.EQUAL:
        return RCompare.NEITHER
    spread = dist_max - dist_min
    if spread <= 0.0:
        return RCompare.NEITHER
    da = weighted_distance(fa, zr, fmin, fmax)
    db = weighted_distance(fb, zr, fmin, fmax)
    ratio = (da - db) / spread
    if ratio < -delta:
        return RCompare.A_RDOMINATES
    if ratio > delta:
        return RCompare.B_RDOMINATES
    return RCompare.NEITHER


def g_flag(f: np.ndarray, zr: ReferencePoint) -> int:
    """1 iff f satisfies either all or none of the aspiration levels."""
    f = np.asarray(f, dtype=float)
    if f.shape != zr.z.shape:
        raise ValueError("dimension mismatch between objectives and reference point")
    return int(bool(np.all(f <= zr.z) or np.all(f >= zr.z)))


def augmented_asf(
    f: np.ndarray,
    zr: ReferencePoint,
    w: np.ndarray | None = None,
    rho_aug: float = 1e-4,
) -> float:
    """Augmented Tchebycheff achievement scalarizing function.

    max_i w_i (f_i - z_i) plus rho_aug times the sum of the differences.
    Defaults to the reference point's own weights.
    """
    if rho_aug < 0:
        raise ValueError("rho_aug must be nonnegative")
    f = np.asarray(f, dtype=float)
    w = zr.weights if w is None else np.asarray(w, dtype=float)
    diff = f - zr.z
    return float(np.max(w * diff) + rho_aug * float(diff.sum()))


def augmented_asf_matrix(
    F: np.ndarray,
    zr: ReferencePoint,
    w: np.ndarray | None = None,
    rho_aug: float = 1e-4,
) -> np.ndarray:
    """Vectorized augmented_asf over the rows of an (N, m) matrix."""
    F = np.asarray(F, dtype=float)
    w = zr.weights if w is None else np.asarray(w, dtype=float)
    diff = F - zr.z
    return (w * diff).max(axis=1) + rho_aug * diff.sum(axis=1)


def lattice_size(m: int, H: int) -> int:
    """Number of simplex-lattice vectors: C(H + m - 1, m - 1)."""
    return math.comb(H + m - 1, m - 1)


def das_dennis(m: int, H: int) -> WeightSet:
    """Simplex-lattice weight vectors with components in {0, 1/H, ..., 1}.

    Vectors are emitted in deterministic lexicographic order of their integer
    compositions; the count is exactly C(H + m - 1, m - 1).

    Raises:
        ValueError: On m < 2, H < 1, or a lattice too large to enumerate.
    """
    if m < 2 or H < 1:
        raise ValueError("need m >= 2 and H >= 1")
    size = lattice_size(m, H)
    if size > MAX_LATTICE_SIZE:
        raise ValueError(f"lattice of {size} vectors exceeds the {MAX_LATTICE_SIZE} guard")
    out = np.empty((size, m), dtype=float)
    comp = [0] * m
    row = 0

    def rec(pos: int, left: int):
        nonlocal row
        if pos == m - 1:
            comp[pos] = left
            out[row] = comp
            row += 1
            return
        for v in range(left + 1):
            comp[pos] = v
            rec(pos + 1, left - v)

    rec(0, H)
    return WeightSet(out / H, structure="uniform")


def simplex_projection(
    zr: ReferencePoint,
    ideal: np.ndarray | None = None,
    nadir_est: np.ndarray | None = None,
) -> np.ndarray:
    """Project a reference point onto the weight simplex.

    The point is normalized by (nadir_est - ideal), negatives are clamped to
    zero, and the result is renormalized to unit sum. An all-zero result
    (e.g. a point dominating the ideal) falls back to the uniform vector, so
    infeasible and dominating reference points are handled gracefully.
    """
    z = np.array(zr.z, dtype=float)
    if ideal is not None and nadir_est is not None:
        span = np.asarray(nadir_est, dtype=float) - np.asarray(ideal, dtype=float)
        scaled = np.zeros_like(z)
        ok = span > 0
        scaled[ok] = (z[ok] - np.asarray(ideal)[ok]) / span[ok]
        z = scaled
    z = np.clip(z, 0.0, None)
    total = z.sum()
    if total <= 0.0:
        return np.full(z.size, 1.0 / z.size)
    return z / total


def nums_transform(
    ws: WeightSet,
    zr: ReferencePoint,
    tau: float,
    kappa: float = 2.0,
    ideal: np.ndarray | None = None,
    nadir_est: np.ndarray | None = None,
) -> WeightSet:
    """Map a uniform weight set toward the reference point's simplex pivot.

    Each vector w moves to w_c + tau * (d / d_max)^(kappa - 1) * (w - w_c)
    where w_c is the simplex projection of the reference point, d is the
    distance from w to w_c and d_max the largest such distance. The mapping
    keeps every output on the simplex, preserves the ordering of distances to
    the pivot, concentrates vectors near w_c for small tau (leaving a sparse
    tail toward the far corner), and the lattice point nearest the pivot is
    replaced by w_c itself so the pivot is always a member.

    A degenerate input set (all vectors equal) is returned unchanged.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    V = np.array(ws.vectors, dtype=float)
    if np.all(V == V[0]):
        return ws
    w_c = simplex_projection(zr, ideal, nadir_est)
    d = np.linalg.norm(V - w_c, axis=1)
    d_max = d.max()
    if d_max <= 0.0:
        return ws
    scale = tau * (d / d_max) ** (kappa - 1.0)
    out = w_c + scale[:, None] * (V - w_c)
    out[int(np.argmin(d))] = w_c
    # Clean up floating drift; outputs are convex combinations of simplex points.
    out = np.clip(out, 0.0, None)
    out /= out.sum(axis=1, keepdims=True)
    return WeightSet(out, structure="biased")


def rmead2_resample(
    ws: WeightSet,
    best_w: np.ndarray,
    radius: float,
    rng: np.random.Generator,
) -> WeightSet:
    """Resample weight vectors uniformly in an L-inf ball around best_w.

    best_w itself is retained unchanged as the first vector; every other
    vector is redrawn within the given radius, clamped to nonnegative and
    renormalized onto the simplex.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    best_w = as_weight_vector(best_w)
    count = len(ws)
    out = np.empty((count, best_w.size), dtype=float)
    out[0] = best_w
    for i in range(1, count):
        draw = best_w + rng.uniform(-radius, radius, size=best_w.size)
        draw = np.clip(draw, 0.0, None)
        total = draw.sum()
        out[i] = draw / total if total > 0 else np.full_like(best_w, 1.0 / best_w.size)
    return WeightSet(out, structure="biased")


def random_simplex_weights(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (flat Dirichlet) simplex samples via normalized exponentials."""
    draws = rng.exponential(1.0, size=(count, m))
    return draws / draws.sum(axis=1, keepdims=True)


def uniform_weights(m: int, count: int, seed: int = 0) -> WeightSet:
    """A weight set of exactly ``count`` vectors, as even as practical.

    Uses the largest simplex lattice that fits within ``count`` and tops up
    with seeded uniform simplex samples when the lattice cannot hit the count
    exactly (the usual situation for large m, where lattice granularity
    jumps from m to m(m+1)/2 vectors).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    H = 0
    while lattice_size(m, H + 1) <= count and lattice_size(m, H + 1) <= MAX_LATTICE_SIZE:
        H += 1
    base = das_dennis(m, H).vectors if H >= 1 else np.empty((0, m))
    short = count - base.shape[0]
    if short == 0:
        return WeightSet(base, structure="uniform")
    rng = np.random.default_rng(seed)
    extra = random_simplex_weights(m, short, rng)
    return WeightSet(np.vstack([base, extra]), structure="uniform")
