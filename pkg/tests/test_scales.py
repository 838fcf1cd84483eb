"""Radius/time schedules, series exponents and expansion residuals.

High-precision oracles come from mpmath; exact identities use Fractions.
"""

import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from coverlab import scales

E_E = math.exp(math.e)


def test_iterated_logs_are_natural():
    # iterated natural logs, not base-2/base-3 logarithms
    x = math.exp(math.e)            # ln x = e, ln ln x = 1
    assert scales.log2(x) == pytest.approx(1.0, abs=1e-12)
    assert abs(scales.log2(x) - math.log2(x)) > 1.0
    assert scales.log3(math.exp(E_E)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        scales.log3(2.0)


def test_f_closed_form_instance():
    x = math.exp(E_E)           # log3 x = 1, log x = e^e
    assert scales.f(x, 1.0) == pytest.approx(math.exp(math.exp(math.e / 2.0)),
                                             rel=1e-12)
    assert scales.f(x, 1.0) == pytest.approx(49.06, abs=0.01)
    assert scales.f(x, 0.0) == 1.0
    with pytest.raises(ValueError):
        scales.f(E_E, 1.0)


def test_f_high_precision_oracle():
    mp.mp.dps = 40
    x = mp.mpf(10) ** 100
    oracle = mp.e ** mp.sqrt(mp.mpf(1) / 4 * mp.log(x) * mp.log(mp.log(mp.log(x))))
    assert scales.f(1e100, 0.25) == pytest.approx(float(oracle), rel=1e-12)


def test_log_f_matches_f():
    for lx, lam in ((20.0, 0.3), (100.0, 1.0), (16.0, 0.25)):
        assert scales.log_f(lx, lam) == pytest.approx(
            math.log(scales.f(math.exp(lx), lam)), rel=1e-12)


def test_wp_and_phi_closed_forms():
    assert scales.wp(math.e) == pytest.approx(math.e, rel=1e-12)
    assert scales.phi(E_E) == pytest.approx(math.e ** 2, rel=1e-12)
    mp.mp.dps = 40
    oracle = mp.log(100) ** 2 / mp.log(mp.log(100))
    assert scales.phi(100) == pytest.approx(float(oracle), rel=1e-12)
    assert scales.phi(100) == pytest.approx(13.887, abs=0.001)


def test_t_n_values_and_overflow():
    v = scales.t_n(2.0, 3)
    assert not v.overflowed
    assert v.value == pytest.approx(math.exp(8.0), rel=1e-12)
    assert v.log_value == 8.0
    big = scales.t_n(1.05, 200)
    assert big.log_value == pytest.approx(17292.58, abs=0.01)
    assert big.overflowed and math.isinf(big.value)


def test_schedule_params_validation():
    scales.ScheduleParams(0.3, 1.05, 0.01, 0.01)
    with pytest.raises(ValueError):
        scales.ScheduleParams(0.3, 1.0, 0.01, 0.01)


def test_series_exponent_instances():
    up = scales.series_exponent("upper", 0.3, 1.05, 0.01, 0.01)
    assert up.exponent == pytest.approx(1.1036, abs=5e-5)
    assert up.converges
    lo = scales.series_exponent("lower", 0.2, 1.05, 0, 0)
    assert lo.exponent == pytest.approx(0.8, rel=1e-12)
    assert not lo.converges
    with pytest.raises(ValueError):
        scales.series_exponent("sideways", 0.2, 1.05)


def test_series_threshold_exact_identity():
    # with eps1 = eps2 = 0 and alpha = 1 both sides reduce to 4*lam,
    # so the convergence flip sits exactly at lam = 1/4
    for side in ("upper", "lower"):
        e = scales.series_exponent(side, Fraction(1, 4), Fraction(1), 0, 0)
        assert e.exponent == 1
        assert not e.converges
    tiny = Fraction(1, 10 ** 12)
    assert scales.series_exponent("lower", Fraction(1, 4) + tiny, 1, 0, 0).converges
    assert not scales.series_exponent("lower", Fraction(1, 4) - tiny, 1, 0, 0).converges


def test_tilde_event_prob_oracle():
    mp.mp.dps = 50
    params = scales.ScheduleParams(0.3, 1.05, 0.01, 0.01)
    n = 80
    tp = scales.tilde_event_prob(n, params, "upper")
    log_tn = mp.mpf("1.05") ** n
    lf = mp.sqrt(mp.mpf("0.3") * log_tn * mp.log(mp.log(log_tn)))
    llf = mp.log(lf)
    phi_f = lf * lf / llf
    count = mp.floor((mp.mpf(2) / 3 - mp.mpf("0.01")) * phi_f)
    denom = (mp.mpf("0.51")) * mp.mpf("1.05") ** (n + 1) - mp.log(2) - lf
    log_exact = count * mp.log(1 - 3 * llf / denom)
    assert tp.count == int(count)
    assert tp.log_exact == pytest.approx(float(log_exact), rel=1e-9)
    rate = 4 * (1 - mp.mpf("0.015")) / mp.mpf("1.02")
    log_asym = -rate * lf * lf / mp.mpf("1.05") ** (n + 1)
    assert tp.log_asymptotic == pytest.approx(float(log_asym), rel=1e-9)


def test_tilde_event_prob_domain_errors():
    params = scales.ScheduleParams(0.3, 1.05, 0.01, 0.01)
    with pytest.raises(ValueError):
        scales.tilde_event_prob(1, params, "upper")
    with pytest.raises(ValueError):
        scales.tilde_event_prob(50, params, "diagonal")


def test_tilde_event_prob_o1_sensitivity():
    params = scales.ScheduleParams(0.3, 1.05, 0.01, 0.01)
    mid = scales.tilde_event_prob(100, params, "upper", o1=0.0)
    lo = scales.tilde_event_prob(100, params, "upper", o1=1.0)
    hi = scales.tilde_event_prob(100, params, "upper", o1=-1.0)
    assert lo.exact < mid.exact < hi.exact


def test_a_threshold_closed_form():
    r = math.exp(E_E)           # log r = e^e, log2 r = e, log3 r = 1
    want = 64.0 * math.exp(math.e - 1.0)
    assert scales.a_threshold(r) == pytest.approx(want, rel=1e-12)
    assert scales.a_threshold(r) == pytest.approx(356.79, abs=0.01)
    with pytest.raises(ValueError):
        scales.a_threshold(E_E)
    mp.mp.dps = 40
    oracle = 64 * mp.log(10 ** 6) * mp.log(mp.log(mp.log(10 ** 6))) \
        / mp.log(mp.log(10 ** 6))
    assert scales.a_threshold(1e6) == pytest.approx(float(oracle), rel=1e-12)


def test_expansion_residuals_zero_cases():
    assert scales.est1_residual(1.0, 2.0, 0.0, 0.0)[0] == 0.0
    assert scales.est2_residual(0.0, 5.0, 0.0, 0.0)[0] == 0.0
    with pytest.raises(ValueError):
        scales.est1_residual(1.0, 2.0, 0.6, 0.0)


@given(a=st.floats(0.5, 10), b=st.floats(0.5, 10),
       e_frac=st.floats(-0.49, 0.49), d_frac=st.floats(-0.49, 0.49))
def test_est1_bound_holds_under_hypotheses(a, b, e_frac, d_frac):
    # with |eps| < |a|/2 and |delta| < |b|/2 the fitted constant is <= 2
    resid, units = scales.est1_residual(a, b, e_frac * a, d_frac * b)
    assert resid <= 2.0 * units + 1e-12


@given(lam=st.fractions(min_value=0, max_value=2),
       alpha=st.fractions(min_value=1, max_value=3))
def test_series_exponent_exact_on_fractions(lam, alpha):
    up = scales.series_exponent("upper", lam, alpha, 0, 0)
    lo = scales.series_exponent("lower", lam, alpha, 0, 0)
    assert up.exponent == 4 * lam / alpha
    assert lo.exponent == 4 * lam
    assert lo.converges == (4 * lam > 1)


def test_expansion_residual_sweeps():
    assert scales.expansion_residual_check("est1", 10_000, 7) <= 4.0
    assert scales.expansion_residual_check("est2", 10_000, 7) <= 4.0
