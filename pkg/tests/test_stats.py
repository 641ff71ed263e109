import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtri

from monoseq import bound_report, build_value_table, build_variance_table, clt_statistic, ks_to_standard_normal, summarize
from monoseq.stats import HIST_BINS, PropertyRecord, clt_inverse, histogram, property_report
from monoseq.value_engine import ValueTable


def test_clt_examples():
    assert clt_statistic(40, 800) == 0.0
    assert clt_statistic(44, 800) == pytest.approx(math.sqrt(3) * 4 / math.sqrt(40), abs=1e-12)
    assert clt_statistic(44, 800) == pytest.approx(1.095445, abs=1e-6)
    with pytest.raises(ValueError):
        clt_statistic(3, 0)


@given(st.integers(0, 500), st.integers(1, 10**6))
def test_clt_monotone_and_invertible(length, n):
    assert clt_statistic(length + 1, n) > clt_statistic(length, n)
    assert clt_inverse(clt_statistic(length, n), n) == pytest.approx(length, abs=1e-9)


def brute_ks(z):
    from scipy.special import ndtr

    z = np.asarray(z, dtype=float)
    m = len(z)
    best = 0.0
    for t in z:
        below = np.sum(z < t) / m
        upto = np.sum(z <= t) / m
        best = max(best, abs(upto - ndtr(t)), abs(below - ndtr(t)))
    return best


def test_ks_examples():
    m = 1000
    z = ndtri((np.arange(1, m + 1) - 0.5) / m)
    assert ks_to_standard_normal(z) <= 0.0005 + 1e-7
    assert ks_to_standard_normal(np.zeros(100)) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        ks_to_standard_normal([])


@settings(max_examples=100)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20))
def test_ks_matches_brute_force(z):
    assert ks_to_standard_normal(z) == pytest.approx(brute_ks(z), abs=1e-12)
    assert ks_to_standard_normal(sorted(z)) == ks_to_standard_normal(z)
    assert 0.0 <= ks_to_standard_normal(z) <= 1.0


def test_ks_hand_example():
    z = [-1.3, 0.2, 0.2, 2.0, -0.4, 0.9, 1.1, -2.2, 0.0, 0.5]
    assert ks_to_standard_normal(z) == pytest.approx(brute_ks(z), abs=1e-14)


def test_histogram_layout():
    edges, counts = histogram([-9.0, -4.0, 0.0, 3.99, 4.0, 7.0])
    assert len(edges) == HIST_BINS + 3 and len(counts) == HIST_BINS + 2
    assert edges[0] == -np.inf and edges[-1] == np.inf
    assert counts[0] == 1 and counts[-1] == 1
    assert counts.sum() == 6
    centre = HIST_BINS // 2 + 1
    assert edges[centre] < 0.0 < edges[centre + 1]


def test_summarize_examples():
    s = summarize([1, 2] * 500, 2)
    assert s.mean == 1.5
    assert s.variance == pytest.approx(0.25 * 1000 / 999)
    assert s.counts.sum() == 1000
    const = summarize([3, 3, 3], 5)
    assert const.variance == 0.0 and 0.0 <= const.ks_distance <= 1.0
    with pytest.raises(ValueError):
        summarize([1], 2)


@settings(max_examples=30)
@given(st.lists(st.integers(0, 30), min_size=2, max_size=40), st.randoms())
def test_summarize_permutation_invariant(samples, rnd):
    shuffled = list(samples)
    rnd.shuffle(shuffled)
    a, b = summarize(samples, 50), summarize(shuffled, 50)
    assert a.mean == pytest.approx(b.mean) and a.variance == pytest.approx(b.variance)
    assert a.ks_distance == b.ks_distance and np.array_equal(a.counts, b.counts)


def test_bound_report_examples(table100, var100):
    vt2 = build_value_table(2)
    row = bound_report(vt2, build_variance_table(vt2), [2]).rows[0]
    assert row.mean == pytest.approx(1.5) and row.mean < 2.0
    assert row.lower == pytest.approx(-1.5)
    assert row.upper == pytest.approx(0.5 + 2 / 3 * (1 + math.log(2)))
    assert row.passed
    report = bound_report(table100, var100, [1, 10, 100])
    assert report.passed
    assert report.rows[-1].mean < math.sqrt(200)
    assert math.isnan(report.rows[0].gap_ratio)
    with pytest.raises(ValueError):
        bound_report(table100, var100, [101])


def test_property_report_passes(table50_coarse, var50_coarse):
    records = property_report(table50_coarse, var50_coarse)
    names = {r.name for r in records}
    for expected in ("submodular", "threshold_monotone_in_k", "uniform_concave_in_s", "exponential_convex_in_s"):
        assert expected in names
    failed = [r for r in records if not r.passed]
    assert not failed, failed
    sub = next(r for r in records if r.name == "submodular")
    assert sub.max_violation <= 1e-10


def _corrupt(vt, **arrays):
    fields = dict(
        grid=vt.grid,
        horizon=vt.horizon,
        values=vt.values,
        thresholds=vt.thresholds,
        critical=vt.critical,
        derivatives=vt.derivatives,
        kinks=vt.kinks,
    )
    fields.update(arrays)
    return ValueTable(**fields)


def test_property_report_detects_damage(table50_coarse):
    values = table50_coarse.values.copy()
    values[30, 500] += 0.05
    bad = {r.name: r for r in property_report(_corrupt(table50_coarse, values=values))}
    for name in ("monotone_in_s", "submodular", "concave_in_k", "uniform_concave_in_s"):
        assert not bad[name].passed, name
    thresholds = table50_coarse.thresholds.copy()
    thresholds[20] = np.minimum(thresholds[20] + 0.01, 1.0)
    bad = {r.name: r for r in property_report(_corrupt(table50_coarse, thresholds=thresholds))}
    assert not bad["threshold_monotone_in_k"].passed


def test_property_record():
    assert PropertyRecord("x", 0.0, 0.0).passed
    assert not PropertyRecord("x", 1e-9, 1e-10).passed
    assert PropertyRecord("x", 1e-9, 1e-8).to_dict()["passed"] is True
