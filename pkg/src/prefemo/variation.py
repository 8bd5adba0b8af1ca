"""Real-coded variation operators: simulated binary crossover and polynomial
mutation, both bound-respecting and driven by a caller-owned RNG."""

from __future__ import annotations

import numpy as np

from .core import BoxBounds

_EPS = 1e-14


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    eta_c: float,
    p_c: float,
    bounds: BoxBounds,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover producing two children.

    With probability p_c the pair is recombined; each variable then crosses
    with probability 0.5 using the polynomial spread distribution (a spread
    factor of 1 reproduces the parents exactly), and the two values are
    swapped between the children half the time, which is what recombines
    complementary variables from both parents. Children are clipped to the
    bounds.
    """
    c1 = np.array(p1, dtype=float)
    c2 = np.array(p2, dtype=float)
    if p_c <= 0.0 or rng.random() > p_c:
        return c1, c2
    for i in range(c1.size):
        if rng.random() > 0.5:
            continue
        x1, x2 = c1[i], c2[i]
        if abs(x1 - x2) <= _EPS:
            continue
        u = rng.random()
        if u <= 0.5:
            beta = (2.0 * u) ** (1.0 / (eta_c + 1.0))
        else:
            beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0))
        v1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
        v2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
        if rng.random() > 0.5:
            v1, v2 = v2, v1
        c1[i] = v1
        c2[i] = v2
    return bounds.clip(c1), bounds.clip(c2)


def polynomial_mutation(
    x: np.ndarray,
    eta_m: float,
    p_m: float,
    bounds: BoxBounds,
    rng: np.random.Generator,
) -> np.ndarray:
    """Polynomial mutation, perturbing each gene with probability p_m.

    The bounded formulation shapes the perturbation by the gene's distance
    to its bounds, so results stay inside the box by construction.
    """
    out = np.array(x, dtype=float)
    if p_m <= 0.0:
        return out
    lo = bounds.lower
    up = bounds.upper
    for i in range(out.size):
        if rng.random() >= p_m:
            continue
        span = up[i] - lo[i]
        delta_l = (out[i] - lo[i]) / span
        delta_r = (up[i] - out[i]) / span
        u = rng.random()
        if u < 0.5:
            val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta_l) ** (eta_m + 1.0)
            delta_q = val ** (1.0 / (eta_m + 1.0)) - 1.0
        else:
            val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta_r) ** (eta_m + 1.0)
            delta_q = 1.0 - val ** (1.0 / (eta_m + 1.0))
        out[i] += delta_q * span
    return bounds.clip(out)
