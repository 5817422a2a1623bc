import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from percolab.estimators import (
    ProbEstimate,
    RateEstimate,
    alpha_window,
    estimate_alpha,
    estimate_gamma,
    estimate_mu,
    estimate_prob,
    extrapolate_rate,
    fit_dual_decay,
    russo_derivative,
    to_json_safe,
    wilson,
)
from percolab.events import EventSpec, event_hits, event_polynomial
from percolab.lattice import DensityProfile
from percolab.sampler import SeedSpec

H = DensityProfile.homogeneous


def test_sure_event():
    est = estimate_prob(EventSpec("T", 4, H=10), H(1.0), 4, 500, 0)
    assert est.p_hat == 1.0 and est.ci_high == 1.0


def test_zero_successes_keep_positive_upper_bound():
    est = ProbEstimate(0, 1000)
    assert est.p_hat == 0 and est.ci_low == 0 and 0 < est.ci_high < 0.01
    rate = RateEstimate(est, 5, None, "gamma")
    assert rate.one_sided and rate.ci_high is None and math.isfinite(rate.rate)
    assert rate.rate == rate.ci_low == -math.log(est.ci_high) / 5
    assert rate.half_width == math.inf


@given(st.integers(1, 5000), st.data())
def test_wilson_contains_point_estimate(n, data):
    s = data.draw(st.integers(0, n))
    lo, hi = wilson(s, n)
    assert 0 <= lo <= s / n <= hi <= 1


def test_wilson_coverage_on_bernoulli():
    rng = np.random.default_rng(12)
    hits = sum(ProbEstimate(int(k), 1000).covers(0.3) for k in rng.binomial(1000, 0.3, 200))
    assert hits >= 0.93 * 200


@given(st.integers(1, 30), st.integers(2, 10_000), st.data())
def test_rate_is_decreasing_in_p_hat(N, n, data):
    a = data.draw(st.integers(1, n - 1))
    b = data.draw(st.integers(a + 1, n))
    ra = RateEstimate(ProbEstimate(a, n), N, None, "x")
    rb = RateEstimate(ProbEstimate(b, n), N, None, "x")
    assert ra.rate > rb.rate or (b == n and rb.rate == 0)
    assert ra.ci_low <= ra.rate <= ra.ci_high


def test_coverage_of_e_event_against_enumeration():
    spec = EventSpec("E", 2, M=2)
    exact = event_polynomial(spec).prob(0.5)
    covered = sum(estimate_prob(spec, 0.5, 2, 2000, SeedSpec(40 + r)).covers(exact)
                  for r in range(100))
    assert covered >= 93


def test_gamma_matches_enumeration_small():
    exact = event_polynomial(EventSpec("A", 2, M=2, pad=1)).prob(0.6)
    est = estimate_gamma(0.6, 2, 2, 100_000, s=3, pad=1)
    lo, hi = est.ci
    assert lo <= -math.log(exact) / 2 <= hi


def test_mu_matches_enumeration_small():
    exact = event_polynomial(EventSpec("B", 2, M=2)).prob(0.6)
    est = estimate_mu(0.6, 2, 2, 100_000, s=4)
    assert est.prob.covers(exact)


def test_gamma_increases_with_p_under_shared_seed():
    rates = [estimate_gamma(p, 3, 6, 20_000, s=9).rate for p in (0.6, 0.7, 0.8)]
    assert rates[0] < rates[1] < rates[2]


def test_mu_vanishes_as_p_goes_to_zero():
    assert estimate_mu(1e-9, 4, 4, 2000, s=1).rate == 0.0


def test_inclusions_hold_per_sample():
    N, M, p, R = 4, 4, 0.5, 5000
    hits = {k: event_hits(EventSpec(k, N, M=M), H(p), N, R, 31) for k in "BCDE"}
    assert np.all(hits["B"] <= hits["E"])
    assert np.all(hits["E"] <= hits["C"]) and np.all(hits["C"] <= hits["D"])


def test_escalation_reuses_first_replicas():
    # a rare event: the escalated run extends the same replica stream
    spec_rate = estimate_gamma(0.8, 4, 8, 200, s=5, escalate=True)
    assert spec_rate.prob.trials in (200, 2000)
    if spec_rate.prob.trials == 2000:
        base = event_hits(EventSpec("A", 4, M=8), H(0.8), 4, 2000, 5)
        assert base[:200].sum() == 0 and base.sum() == spec_rate.prob.successes


def test_alpha_trivial_and_monotone():
    assert estimate_alpha(1.0, 4, 200).rate == 0.0
    rates = [estimate_alpha(r, 4, 20_000, s=2, W=4).rate for r in (0.3, 0.4, 0.5)]
    assert rates[0] > rates[1] > rates[2]


def test_alpha_window_rule():
    assert alpha_window(10, 0.5, 1.0) == 30
    assert alpha_window(10, 0.01, 5.0) == 10
    assert alpha_window(10, 5.0, 0.1) == 80
    assert alpha_window(10, 1.0, math.inf) == 80


def test_dual_decay_faster_at_high_p():
    hi = fit_dual_decay(0.9, (1, 2, 3), 100_000, s=1)
    lo = fit_dual_decay(0.6, (1, 2, 3), 100_000, s=1)
    assert hi.zeta > lo.zeta > 0


def test_dual_decay_log_prob_decreasing():
    fit = fit_dual_decay(0.7, (1, 2, 3, 4), 100_000, s=2)
    logs = [math.log(e.p_hat) for e in fit.estimates]
    assert all(a > b for a, b in zip(logs, logs[1:]))


def test_dual_decay_drops_empty_points():
    with pytest.warns(UserWarning):
        with pytest.raises(ValueError):
            fit_dual_decay(0.99, (3, 4, 5), 200, s=0)
    with pytest.raises(ValueError):
        fit_dual_decay(0.4, (1, 2), 100)


def test_russo_exact_small_window():
    poly = event_polynomial(EventSpec("Dtilde", 1, m=2))
    for p in np.linspace(0.1, 0.9, 9):
        assert abs(poly.derivative(p) - poly.russo_covariance(p)) <= 1e-12
        assert poly.russo_covariance(p) >= 0


def test_russo_monte_carlo_nonnegative_and_consistent():
    est = russo_derivative(0.5, 2, 1, 100_000, s=3)
    exact = event_polynomial(EventSpec("Dtilde", 2, m=1)).derivative(0.5)
    assert est.cov >= 0 and est.fd >= 0
    assert abs(est.cov - exact) <= 4 * est.cov_se
    assert est.agree()


def _series(rates, intercept, Ns, n=10**7):
    out = []
    for N in Ns:
        p = math.exp(-(intercept + rates * N))
        out.append(RateEstimate(ProbEstimate(round(p * n), n), N, None, "gamma"))
    return out


def test_extrapolation_recovers_exact_line():
    class Exact:
        def __init__(self, N, p):
            self.N, self.one_sided = N, False
            self.prob = type("P", (), {"p_hat": p, "trials": 10**6, "ci_low": p, "ci_high": p})()

    series = [Exact(N, math.exp(-(0.3 + 0.8 * N))) for N in (2, 4, 6, 9)]
    fit = extrapolate_rate(series)
    assert abs(fit.rate - 0.8) <= 1e-12 and abs(fit.intercept - 0.3) <= 1e-12
    assert fit.monotone


def test_extrapolation_needs_three_sizes():
    with pytest.raises(ValueError):
        extrapolate_rate(_series(0.5, 0.1, (2, 3)))
    with pytest.warns(UserWarning):
        s = _series(0.5, 0.1, (2, 3, 4)) + [RateEstimate(ProbEstimate(0, 10), 9, None, "gamma")]
        extrapolate_rate(s)


def test_extrapolation_warns_on_non_monotone():
    s = _series(0.5, 0.1, (2, 3, 4))
    s[1], s[2] = RateEstimate(s[2].prob, 3, None, "g"), RateEstimate(s[1].prob, 4, None, "g")
    s[0] = RateEstimate(ProbEstimate(10, 10**7), 2, None, "g")
    with pytest.warns(UserWarning):
        assert not extrapolate_rate(s).monotone


def test_extrapolated_rate_is_stable_across_ranges():
    # the +-15% stability check at sizes where the events are still observable
    def fit(Ns):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return extrapolate_rate([estimate_gamma(0.7, N, 4 * N, 100_000, s=N, escalate=True)
                                     for N in Ns]).rate

    a, b = fit((2, 3, 4, 5)), fit((3, 4, 5, 6))
    assert abs(a - b) <= 0.15 * max(a, b)


def test_per_size_log_prob_supremum_form():
    # (1/N) log P(E_N) should not decrease with N beyond interval noise
    prev = None
    for N in (1, 2, 3, 4):
        est = estimate_prob(EventSpec("E", N), 0.7, N, 200_000, N)
        lo, hi = math.log(est.ci_low) / N, math.log(est.ci_high) / N
        if prev is not None:
            assert hi >= prev[0]
        prev = (lo, hi)


def test_records_are_json_ready():
    import json

    est = estimate_gamma(0.7, 3, 6, 1000, s=1)
    rec = est.record()
    assert set(rec) >= {"kind", "params", "successes", "trials", "p_hat", "ci", "rate", "ci_rate", "seed"}
    json.dumps(to_json_safe(rec))
