import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefemo.metrics import (
    MetricRecord,
    TestOutcome,
    ep_accuracy,
    hypervolume,
    igd,
    r_hv,
    r_igd,
    r_preprocess,
    rank_table,
    wilcoxon_signed_rank,
)
from prefemo.problems import make_spec, sample_true_front
from prefemo.scalarize import ReferencePoint

from .oracles import hv_inclusion_exclusion, igd_loops, wilcoxon_enumeration


def test_ep_accuracy_examples():
    assert ep_accuracy([[0.4, 0.6]], ReferencePoint([0.3, 0.5])) == pytest.approx(0.2)
    assert ep_accuracy([[0.2, 0.2]], ReferencePoint([0.3, 0.3])) == pytest.approx(-0.2)
    assert ep_accuracy([[0.3, 0.5]], ReferencePoint([0.3, 0.5])) == pytest.approx(0.0)
    # minimum over the set
    P = [[0.4, 0.6], [0.35, 0.55], [0.9, 0.9]]
    assert ep_accuracy(P, ReferencePoint([0.3, 0.5])) == pytest.approx(0.1)


def test_ep_accuracy_empty_set_rejected():
    with pytest.raises(ValueError):
        ep_accuracy(np.empty((0, 2)), ReferencePoint([0.0, 0.0]))


@given(
    st.lists(
        st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=2, max_size=2),
        min_size=1,
        max_size=6,
    ),
    st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=2, max_size=2),
)
def test_ep_translation_property(points, shift):
    P = np.array(points)
    t = np.array(shift)
    zr = ReferencePoint([0.5, 0.5])
    zr_shifted = ReferencePoint(zr.z + t)
    a = ep_accuracy(P, zr)
    b = ep_accuracy(P + t, zr_shifted)
    assert a == pytest.approx(b, abs=1e-9)


def test_igd_examples():
    samples = [[0.0, 1.0], [1.0, 0.0]]
    assert igd([[0.0, 1.0]], samples) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert igd(samples, samples) == pytest.approx(0.0, abs=1e-15)
    # adding a member never increases the score
    base = igd([[0.4, 0.4]], samples)
    assert igd([[0.4, 0.4], [0.9, 0.05]], samples) <= base


def test_igd_matches_loop_oracle():
    rng = np.random.default_rng(11)
    P = rng.random((7, 3))
    S = rng.random((13, 3))
    assert igd(P, S) == pytest.approx(igd_loops(P, S), rel=1e-12)


def test_hypervolume_exact_examples():
    assert hypervolume([[0.5, 0.5]], [1.0, 1.0]) == pytest.approx(0.25)
    pts = [[0.25, 0.75], [0.75, 0.25]]
    assert hypervolume(pts, [1.0, 1.0]) == pytest.approx(0.3125)
    # duplicates do not change the union
    assert hypervolume(pts + pts, [1.0, 1.0]) == pytest.approx(0.3125)
    # members beyond the reference are excluded, not errors
    assert hypervolume(pts + [[2.0, 2.0]], [1.0, 1.0]) == pytest.approx(0.3125)
    assert hypervolume([[2.0, 2.0]], [1.0, 1.0]) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=2, max_value=4),
    st.integers(min_value=0, max_value=2**31),
)
def test_hypervolume_matches_inclusion_exclusion(n, m, seed):
    rng = np.random.default_rng(seed)
    P = rng.random((n, m))
    ref = np.ones(m)
    expected = hv_inclusion_exclusion(P, ref)
    assert hypervolume(P, ref, method="exact") == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_hypervolume_monotone_under_union():
    rng = np.random.default_rng(5)
    P = rng.random((6, 3))
    ref = np.ones(3)
    base = hypervolume(P, ref)
    extended = np.vstack([P, rng.random(3) * 0.5])
    assert hypervolume(extended, ref) >= base - 1e-12


def test_hypervolume_monte_carlo_close_to_exact():
    rng = np.random.default_rng(9)
    P = rng.random((10, 3)) * 0.8
    ref = np.ones(3)
    exact = hypervolume(P, ref, method="exact")
    mc = hypervolume(P, ref, method="monte_carlo", mc_samples=100_000, mc_seed=17)
    assert mc == pytest.approx(exact, rel=0.02)
    # repeatable under the same seed
    again = hypervolume(P, ref, method="monte_carlo", mc_samples=100_000, mc_seed=17)
    assert mc == again


def test_hypervolume_auto_switches_to_monte_carlo():
    rng = np.random.default_rng(2)
    P = rng.random((5, 5)) * 0.5
    v = hypervolume(P, np.ones(5))
    assert 0.0 < v < 1.0


# ---------------------------------------------------------------- R-metrics


def test_r_preprocess_single_member():
    zr = ReferencePoint([0.2, 0.2])
    out = r_preprocess([[0.5, 0.5]], zr, delta_extent=0.4, worst=np.array([1.1, 1.1]))
    # the only member is the pivot: translated onto the reference line
    assert out.processed.shape == (1, 2)
    direction = np.array([1.1, 1.1]) - zr.z
    ratios = (np.array([0.5, 0.5]) - zr.z) / direction
    iso = zr.z + ratios.max() * direction
    assert np.allclose(out.processed[0], iso)


def test_r_preprocess_translation_is_rigid():
    rng = np.random.default_rng(4)
    P = 0.4 + 0.05 * rng.random((8, 2))
    zr = ReferencePoint([0.3, 0.3])
    out = r_preprocess(P, zr, delta_extent=1.0, worst=np.array([1.0, 1.0]))
    kept = P  # wide extent keeps everything
    d_before = np.linalg.norm(kept[:, None] - kept[None, :], axis=2)
    d_after = np.linalg.norm(
        out.processed[:, None] - out.processed[None, :], axis=2
    )
    assert np.allclose(d_before, d_after, atol=1e-12)


def test_r_preprocess_trim_box():
    zr = ReferencePoint([0.0, 0.0])
    P = np.array([[0.5, 0.5], [0.58, 0.5], [0.9, 0.2], [0.5, 0.93]])
    out = r_preprocess(P, zr, delta_extent=0.2, worst=np.array([1.0, 1.0]))
    # pivot is (0.5, 0.5); only members within L-inf 0.1 of it survive
    assert out.processed.shape[0] == 2
    assert np.all(np.abs((out.processed - out.shift) - out.pivot) <= 0.1 + 1e-12)


def test_r_igd_prefers_centered_set():
    spec = make_spec("ZDT1")
    samples = sample_true_front(spec, 800)
    zr = ReferencePoint([0.5, 1 - math.sqrt(0.5)])
    centered = samples[np.abs(samples[:, 0] - 0.5) <= 0.05]
    offset = samples[np.abs(samples[:, 0] - 0.7) <= 0.05]
    good = r_igd(centered, zr, 0.2, samples)
    bad = r_igd(offset, zr, 0.2, samples)
    assert good < bad


def test_r_igd_degenerate_sentinels():
    zr = ReferencePoint([0.5, 0.5])
    # front samples far from the landing region -> degenerate
    out = r_igd([[5.0, 5.0]], zr, 0.1, [[0.0, 1.0], [1.0, 0.0]])
    assert out == math.inf
    assert r_hv([[5.0, 5.0]], zr, 0.1, np.array([1.0, 1.0])) == 0.0


def test_r_igd_zero_when_set_equals_local_front():
    spec = make_spec("ZDT1")
    samples = sample_true_front(spec, 401)
    # reference point placed exactly on a front sample: the pivot sits on the
    # reference line, the translation vanishes, and the trimmed set equals
    # the restricted samples
    zr = ReferencePoint(samples[280])
    pre = r_preprocess(samples, zr, 0.3, samples)
    assert np.allclose(pre.shift, 0.0, atol=1e-12)
    assert r_igd(samples, zr, 0.3, samples) == pytest.approx(0.0, abs=1e-12)
    # a merely centered (not exact) reference point still scores near zero
    near = r_igd(samples, ReferencePoint([0.5, 1 - math.sqrt(0.5)]), 0.3, samples)
    assert near < 0.005


def test_r_hv_monotone_in_extent():
    rng = np.random.default_rng(8)
    t = rng.random(40)
    P = np.column_stack([t**2, 1 - t])
    zr = ReferencePoint([0.5, 1 - math.sqrt(0.5)])
    ref = np.array([1.1, 1.1])
    values = [r_hv(P, zr, ext, ref) for ext in (0.1, 0.2, 0.4, 0.8)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------- wilcoxon


def test_wilcoxon_identical_samples():
    out = wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert out.p_value == 1.0
    assert not out.significant
    assert out.n_effective == 0


def test_wilcoxon_six_positive():
    a = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    b = a - np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    out = wilcoxon_signed_rank(a, b)
    assert out.p_value == pytest.approx(2 / 64)
    assert out.significant


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31))
def test_wilcoxon_matches_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=n)
    b = rng.normal(size=n)
    stat, p = wilcoxon_enumeration(a, b)
    out = wilcoxon_signed_rank(a, b)
    assert out.statistic == pytest.approx(stat)
    assert out.p_value == pytest.approx(p, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=9), st.integers(min_value=0, max_value=2**31))
def test_wilcoxon_matches_enumeration_with_ties(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, size=n).astype(float)
    b = rng.integers(0, 4, size=n).astype(float)
    stat, p = wilcoxon_enumeration(a, b)
    out = wilcoxon_signed_rank(a, b)
    assert out.statistic == pytest.approx(stat)
    assert out.p_value == pytest.approx(p, abs=1e-12)


def test_wilcoxon_normal_approximation_sane():
    rng = np.random.default_rng(123)
    a = rng.normal(0.8, 1.0, size=40)
    b = rng.normal(0.0, 1.0, size=40)
    out = wilcoxon_signed_rank(a, b)
    assert out.n_effective == 40
    assert out.p_value < 0.01
    assert out.significant


# ---------------------------------------------------------------- ranks


def test_rank_table_examples():
    values = np.array([[0.1], [0.2], [0.3]])
    assert rank_table(values).ravel().tolist() == [1, 2, 3]
    tied = np.array([[0.1], [0.1], [0.3]])
    assert rank_table(tied).ravel().tolist() == [1, 1, 3]
    hv = np.array([[0.5], [0.9]])
    assert rank_table(hv, minimize=False).ravel().tolist() == [2, 1]


def test_rank_table_multiple_instances():
    values = np.array([[0.1, 0.9], [0.2, 0.8]])
    ranks = rank_table(values)
    assert ranks.tolist() == [[1, 2], [2, 1]]


def test_metric_record_validation():
    MetricRecord("EP", -0.5, "zdt1_m2", "pbea", "balanced-on_pf", 3)
    with pytest.raises(ValueError):
        MetricRecord("HV", -1.0, "p", "a", "s", 0)
    with pytest.raises(ValueError):
        MetricRecord("XX", 0.0, "p", "a", "s", 0)


def test_outcome_significance_definition():
    out = TestOutcome(statistic=1.0, p_value=0.049, alpha=0.05, n_effective=9)
    assert out.significant
    out2 = TestOutcome(statistic=1.0, p_value=0.05, alpha=0.05, n_effective=9)
    assert not out2.significant
