import numpy as np
import pytest

from prefemo.core import BoxBounds
from prefemo.variation import polynomial_mutation, sbx_crossover


class HalfRng:
    """Stub generator whose uniform draws are always exactly 0.5."""

    def random(self):
        return 0.5


def _unit_bounds(n):
    return BoxBounds(np.zeros(n), np.ones(n))


def test_sbx_spread_factor_one_reproduces_parents():
    p1 = np.array([0.2, 0.4, 0.6])
    p2 = np.array([0.9, 0.1, 0.3])
    c1, c2 = sbx_crossover(p1, p2, eta_c=20, p_c=0.9, bounds=_unit_bounds(3), rng=HalfRng())
    assert np.allclose(c1, p1)
    assert np.allclose(c2, p2)


def test_sbx_disabled_crossover_copies_parents():
    rng = np.random.default_rng(0)
    p1 = np.array([0.2, 0.4])
    p2 = np.array([0.9, 0.1])
    for _ in range(20):
        c1, c2 = sbx_crossover(p1, p2, eta_c=20, p_c=0.0, bounds=_unit_bounds(2), rng=rng)
        assert np.array_equal(c1, p1) and np.array_equal(c2, p2)


def test_sbx_deterministic_and_bounded():
    p1 = np.array([0.1, 0.5, 0.9])
    p2 = np.array([0.8, 0.2, 0.4])
    b = _unit_bounds(3)
    out1 = sbx_crossover(p1, p2, 15, 1.0, b, np.random.default_rng(42))
    out2 = sbx_crossover(p1, p2, 15, 1.0, b, np.random.default_rng(42))
    assert np.array_equal(out1[0], out2[0]) and np.array_equal(out1[1], out2[1])
    rng = np.random.default_rng(7)
    for _ in range(200):
        c1, c2 = sbx_crossover(p1, p2, 2, 1.0, b, rng)
        for c in (c1, c2):
            assert np.all(c >= 0.0) and np.all(c <= 1.0)


def test_mutation_disabled_keeps_vector():
    x = np.array([0.3, 0.7])
    out = polynomial_mutation(x, 20, 0.0, _unit_bounds(2), np.random.default_rng(1))
    assert np.array_equal(out, x)


def test_mutation_midpoint_draw_is_identity():
    x = np.array([0.3, 0.7])
    out = polynomial_mutation(x, 20, 1.0, _unit_bounds(2), HalfRng())
    assert np.allclose(out, x)


def test_mutation_respects_bounds_at_edges():
    b = _unit_bounds(4)
    x = np.array([0.0, 1.0, 0.0, 1.0])
    rng = np.random.default_rng(5)
    for _ in range(200):
        out = polynomial_mutation(x, 20, 1.0, b, rng)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)


def test_mutation_deterministic():
    x = np.array([0.25, 0.5, 0.75])
    b = _unit_bounds(3)
    a = polynomial_mutation(x, 20, 1.0, b, np.random.default_rng(9))
    c = polynomial_mutation(x, 20, 1.0, b, np.random.default_rng(9))
    assert np.array_equal(a, c)
    assert not np.array_equal(a, x)
