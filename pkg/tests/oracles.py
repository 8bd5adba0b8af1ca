"""Independent brute-force oracles used to freeze expected values.

Everything here is deliberately naive: plain loops and enumeration, sharing
no code path with the implementations under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def dominates_loop(a, b) -> bool:
    at_least_as_good = all(x <= y for x, y in zip(a, b))
    strictly_better = any(x < y for x, y in zip(a, b))
    return at_least_as_good and strictly_better


def brute_force_fronts(F) -> list[list[int]]:
    """Front assignment by repeated extraction of the non-dominated set."""
    remaining = list(range(len(F)))
    fronts: list[list[int]] = []
    while remaining:
        front = [
            i
            for i in remaining
            if not any(dominates_loop(F[j], F[i]) for j in remaining if j != i)
        ]
        fronts.append(front)
        remaining = [i for i in remaining if i not in front]
    return fronts


def wilcoxon_enumeration(a, b) -> tuple[float, float]:
    """Exact two-sided Wilcoxon signed-rank p by enumerating sign patterns."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return 0.0, 1.0
    abs_d = np.abs(d)
    order = np.argsort(abs_d, kind="stable")
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs_d[order[j + 1]] == abs_d[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    w_obs = float(ranks[d > 0].sum())
    mean = ranks.sum() / 2.0
    dev = abs(w_obs - mean)
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        w = float(sum(r for r, s in zip(ranks, signs) if s))
        if abs(w - mean) >= dev - 1e-12:
            hits += 1
    return w_obs, hits / 2.0**n


def hv_inclusion_exclusion(points, ref) -> float:
    """Union volume of the boxes [p, ref] by inclusion-exclusion (small sets)."""
    pts = [np.asarray(p, dtype=float) for p in points]
    ref = np.asarray(ref, dtype=float)
    pts = [p for p in pts if np.all(p < ref)]
    total = 0.0
    for r in range(1, len(pts) + 1):
        for combo in itertools.combinations(pts, r):
            corner = np.max(np.vstack(combo), axis=0)
            vol = float(np.prod(np.clip(ref - corner, 0.0, None)))
            total += vol if r % 2 == 1 else -vol
    return total


def igd_loops(P, samples) -> float:
    total = 0.0
    for s in samples:
        best = math.inf
        for p in P:
            best = min(best, math.dist(list(s), list(p)))
        total += best
    return total / len(samples)
