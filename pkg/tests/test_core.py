import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefemo.core import (
    BoxBounds,
    Dominance,
    Population,
    Solution,
    as_objectives,
    crowding_distance,
    fast_nondominated_sort,
    nondominated_fronts,
    normalize,
    pareto_compare,
)

from .oracles import brute_force_fronts, dominates_loop

vectors = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=2, max_size=5
)


def test_pareto_compare_examples():
    assert pareto_compare([1, 2], [2, 3]) is Dominance.A_DOMINATES
    assert pareto_compare([1, 3], [3, 1]) is Dominance.INCOMPARABLE
    assert pareto_compare([1, 2], [1, 2]) is Dominance.EQUAL
    assert pareto_compare([2, 3], [1, 2]) is Dominance.B_DOMINATES
    # weak improvement still dominates
    assert pareto_compare([1, 2], [1, 3]) is Dominance.A_DOMINATES


def test_pareto_compare_dimension_mismatch():
    with pytest.raises(ValueError):
        pareto_compare([1, 2], [1, 2, 3])


def test_objective_vector_invariants():
    with pytest.raises(ValueError):
        as_objectives([1.0])
    with pytest.raises(ValueError):
        as_objectives([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_objectives([1.0, float("inf")])


@given(st.lists(vectors, min_size=3, max_size=3).filter(lambda vs: len({len(v) for v in vs}) == 1))
def test_dominance_is_strict_partial_order(vs):
    a, b, c = (np.array(v) for v in vs)
    # irreflexive
    assert pareto_compare(a, a) is Dominance.EQUAL
    # antisymmetric
    if pareto_compare(a, b) is Dominance.A_DOMINATES:
        assert pareto_compare(b, a) is Dominance.B_DOMINATES
    # transitive
    if dominates_loop(a, b) and dominates_loop(b, c):
        assert dominates_loop(a, c)


def test_fronts_simple():
    F = np.array([[1, 2], [2, 1], [3, 3]])
    assert nondominated_fronts(F) == [[0, 1], [2]]


def test_fronts_singleton():
    assert nondominated_fronts(np.array([[1.0, 2.0]])) == [[0]]


def test_fronts_match_bruteforce_random():
    rng = np.random.default_rng(7)
    F = rng.random((20, 2))
    assert nondominated_fronts(F) == brute_force_fronts(F)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=50),
    st.integers(min_value=2, max_value=4),
    st.integers(min_value=0, max_value=2**31),
)
def test_fronts_match_bruteforce_property(n, m, seed):
    rng = np.random.default_rng(seed)
    # quantized values provoke duplicates and ties
    F = np.floor(rng.random((n, m)) * 6)
    assert nondominated_fronts(F) == brute_force_fronts(F)


def test_fast_nondominated_sort_returns_ids():
    members = [
        Solution(np.zeros(2), [1, 2], id=10),
        Solution(np.zeros(2), [2, 1], id=11),
        Solution(np.zeros(2), [3, 3], id=12),
    ]
    pop = Population(members)
    assert fast_nondominated_sort(pop) == [[10, 11], [12]]


def test_crowding_distance_hand_example():
    # middle point: (2-0)/2 per objective, summed over both
    F = np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]])
    d = crowding_distance(F)
    assert d[0] == np.inf and d[2] == np.inf
    assert d[1] == pytest.approx(2.0)


def test_crowding_distance_small_fronts():
    assert np.all(np.isinf(crowding_distance(np.array([[1.0, 2.0]]))))
    assert np.all(np.isinf(crowding_distance(np.array([[1.0, 2.0], [2.0, 1.0]]))))


def test_crowding_distance_degenerate_objective():
    # objective 0 identical everywhere: only objective 1 contributes
    F = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
    d = crowding_distance(F)
    assert d[0] == np.inf and d[2] == np.inf
    assert d[1] == pytest.approx(1.0 + 0.0)  # (2-0)/2 from objective 1 only


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=3, max_value=12), st.integers(min_value=0, max_value=2**31))
def test_crowding_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    # mutually non-dominated 2-D front
    x = np.sort(rng.random(n))
    F = np.column_stack([x, 1.0 - x])
    base = crowding_distance(F)
    perm = rng.permutation(n)
    assert np.allclose(crowding_distance(F[perm]), base[perm])


def test_normalize_examples():
    ideal = np.array([0.0, 0.0])
    nadir = np.array([2.0, 4.0])
    assert np.allclose(normalize(ideal, ideal, nadir), [0, 0])
    assert np.allclose(normalize(nadir, ideal, nadir), [1, 1])
    assert np.allclose(normalize((ideal + nadir) / 2, ideal, nadir), [0.5, 0.5])


def test_normalize_degenerate_dimension():
    out = normalize(np.array([3.0, 5.0]), np.array([3.0, 0.0]), np.array([3.0, 10.0]))
    assert np.allclose(out, [0.0, 0.5])


@given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=2, max_size=5))
def test_normalize_idempotent_on_unit_box(values):
    f = np.array(values)
    ideal = np.zeros_like(f)
    nadir = np.ones_like(f)
    once = normalize(f, ideal, nadir)
    assert np.allclose(normalize(once, ideal, nadir), once)


def test_population_estimates():
    members = [
        Solution(np.zeros(1), [1.0, 4.0], id=0),
        Solution(np.zeros(1), [2.0, 2.0], id=1),
        Solution(np.zeros(1), [4.0, 1.0], id=2),
        Solution(np.zeros(1), [5.0, 5.0], id=3),  # dominated, excluded from nadir
    ]
    pop = Population(members)
    assert np.allclose(pop.ideal, [1.0, 1.0])
    assert np.allclose(pop.nadir_est, [4.0, 4.0])
    F = pop.objectives()
    assert np.all(pop.ideal <= F.min(axis=0))
    assert np.all(pop.nadir_est >= pop.ideal)


def test_population_evolve_keeps_ideal_monotone():
    first = Population([Solution(np.zeros(1), [0.5, 3.0], id=0)])
    second = Population.evolve(first, [Solution(np.zeros(1), [1.0, 4.0], id=1)])
    assert np.allclose(second.ideal, [0.5, 3.0])


def test_bounds_validation_and_ops():
    with pytest.raises(ValueError):
        BoxBounds(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
    b = BoxBounds(np.zeros(2), np.ones(2))
    assert b.contains(np.array([0.5, 0.5]))
    assert not b.contains(np.array([1.5, 0.5]))
    assert np.allclose(b.clip(np.array([-1.0, 2.0])), [0.0, 1.0])
    rng = np.random.default_rng(0)
    X = b.sample(rng, 5)
    assert X.shape == (5, 2) and np.all(X >= 0) and np.all(X <= 1)


def test_solutions_are_frozen():
    s = Solution(np.array([0.1]), [1.0, 2.0], id=0)
    with pytest.raises(ValueError):
        s.f[0] = 9.0
