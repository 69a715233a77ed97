"""Bits-over-random arithmetic: scores, ceilings, depth decomposition."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bor_eval.metrics import (
    bor,
    bor_opt,
    bor_recall,
    ceilings,
    depth_delta,
    enrichment_factor,
    neg_log2,
)
from bor_eval.probability import BaselineParams, Probability, p_rand_coverage


def test_bor_basic():
    baseline = Probability.from_value(0.25)
    assert bor(1.0, baseline).bits == pytest.approx(2.0, abs=1e-15)
    assert bor(0.5, baseline).bits == pytest.approx(1.0, abs=1e-15)
    assert bor(0.25, baseline).bits == pytest.approx(0.0, abs=1e-15)
    assert bor(0.125, baseline).bits == pytest.approx(-1.0, abs=1e-15)


def test_bor_undefined_edges():
    baseline = Probability.from_value(0.25)
    zero_obs = bor(0.0, baseline)
    assert not zero_obs.defined
    assert zero_obs.bits == -math.inf
    zero_base = bor(0.5, Probability.from_value(0.0))
    assert not zero_base.defined
    assert zero_base.bits == math.inf


def test_enrichment_factor_matches_bor():
    baseline = Probability.from_value(0.2)
    ef = enrichment_factor(0.9, baseline)
    assert ef == pytest.approx(4.5, rel=1e-15)
    assert bor(0.9, baseline).bits == pytest.approx(math.log2(ef), rel=1e-15)


def test_neg_log2_uses_complement_when_saturated():
    # -log2(p) for p = 1 - 1e-14: float 'value' alone cannot resolve this.
    p = Probability.from_log_complement(math.log(1e-14))
    expected = -math.log2(1.0 - 1e-14)
    assert neg_log2(p) == pytest.approx(expected, rel=1e-9)
    assert neg_log2(Probability.from_value(1.0)) == 0.0


def test_perfect_observer_hits_ceiling_exactly():
    # bor(1, pbar) must equal the log-of-mean ceiling bit for bit: both
    # routes share the same neg_log2.
    baselines = [p_rand_coverage(BaselineParams(1000, r, 20)) for r in (3, 10, 42)]
    report = ceilings(baselines, 1000, 20)
    from bor_eval.probability import mean_probability

    mean = mean_probability(baselines)
    assert bor(1.0, mean).bits == report.bor_max_log_of_mean


def test_ceiling_report_values():
    baselines = [Probability.from_value(0.5), Probability.from_value(0.25)]
    report = ceilings(baselines, 1024, 1)
    assert report.bor_max_log_of_mean == pytest.approx(-math.log2(0.375), rel=1e-15)
    assert report.bor_max_mean_of_logs == pytest.approx(1.5, rel=1e-15)
    assert report.bor_opt == pytest.approx(10.0, abs=1e-12)


def test_mean_of_logs_at_least_log_of_mean():
    # Jensen: mean of -log2 p_q >= -log2(mean p_q).
    baselines = [p_rand_coverage(BaselineParams(500, r, 10)) for r in (1, 2, 8, 30)]
    report = ceilings(baselines, 500, 10)
    assert report.bor_max_mean_of_logs >= report.bor_max_log_of_mean - 1e-12


def test_bor_opt_exact_power_of_two():
    assert bor_opt(1024, 1) == 10.0
    assert bor_opt(8, 2) == 2.0


def test_bor_recall_examples():
    # recall / (K/N)
    assert bor_recall(0.4, 1000, 20).bits == pytest.approx(math.log2(20.0), rel=1e-12)
    got = bor_recall(0.857, 8_841_823, 1000)
    assert got.bits == pytest.approx(math.log2(0.857 * 8_841_823 / 1000), rel=1e-12)
    assert not bor_recall(0.0, 1000, 20).defined


def test_bor_recall_rejects_out_of_range():
    with pytest.raises(ValueError):
        bor_recall(1.5, 1000, 20)
    with pytest.raises(ValueError):
        bor_recall(-0.1, 1000, 20)


class TestDepthDelta:
    def test_decomposition_closes_by_construction(self):
        d = depth_delta(0.9, 0.95, Probability.from_value(0.01),
                        Probability.from_value(0.05), 10, 50)
        assert d.total == d.gain_term - d.baseline_term
        assert d.gain_term == pytest.approx(math.log2(0.95 / 0.9), rel=1e-12)
        assert d.baseline_term == pytest.approx(math.log2(5.0), rel=1e-12)

    def test_matches_bor_difference(self):
        p1, p2 = 0.6, 0.8
        b1, b2 = Probability.from_value(0.02), Probability.from_value(0.07)
        d = depth_delta(p1, p2, b1, b2, 5, 20)
        explicit = bor(p2, b2).bits - bor(p1, b1).bits
        assert d.total == pytest.approx(explicit, abs=1e-12)

    def test_plateau_prediction(self):
        d = depth_delta(1.0, 1.0, Probability.from_value(0.001),
                        Probability.from_value(0.002), 5, 10)
        assert d.predicted_plateau == -1.0
        d2 = depth_delta(1.0, 1.0, Probability.from_value(0.001),
                         Probability.from_value(0.002), 10, 100, m=2)
        assert d2.predicted_plateau == pytest.approx(-2 * math.log2(10), rel=1e-15)

    def test_saturated_depths_lose_constructed_bits(self):
        # Both depths at 100% success: the whole change is baseline cost.
        pbar1 = Probability.from_value(2.0 ** -8.53)
        pbar2 = Probability.from_value(2.0 ** -5.41)
        d = depth_delta(1.0, 1.0, pbar1, pbar2, 10, 100)
        assert d.gain_term == 0.0
        assert d.total == pytest.approx(-(8.53 - 5.41), rel=1e-12)

    def test_undefined_when_probabilities_vanish(self):
        d = depth_delta(0.0, 0.5, Probability.from_value(0.1),
                        Probability.from_value(0.2), 5, 10)
        assert not d.defined
        assert math.isnan(d.total)
        assert d.predicted_plateau == -1.0  # prediction needs only depths

    def test_rejects_non_increasing_depths(self):
        with pytest.raises(ValueError):
            depth_delta(0.5, 0.5, Probability.from_value(0.1),
                        Probability.from_value(0.1), 10, 10)


@given(
    p1=st.floats(0.01, 1.0),
    p2=st.floats(0.01, 1.0),
    b1=st.floats(1e-6, 0.99),
    ratio=st.floats(1.0, 50.0),
)
@settings(max_examples=150, deadline=None)
def test_delta_closure_property(p1, p2, b1, ratio):
    b2 = min(b1 * ratio, 1.0)
    d = depth_delta(p1, p2, Probability.from_value(b1), Probability.from_value(b2), 3, 9)
    explicit = bor(p2, Probability.from_value(b2)).bits - bor(p1, Probability.from_value(b1)).bits
    assert d.total == pytest.approx(explicit, abs=1e-9)
