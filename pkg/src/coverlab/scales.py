"""Schedule functions and series arithmetic for the cover-time LIL.

Conventions used throughout: all logarithms are natural, and log2/log3
denote two and three iterations of the natural log (never base 2 or 3).
The critical constant for the excursion series sits at lam = 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

E_E = math.exp(math.e)  # domain edge for log3


def log2(x: float) -> float:
    if x <= 1.0:
        raise ValueError("log2 requires x > e^0 ... need ln x > 0")
    return math.log(math.log(x))


def log3(x: float) -> float:
    if x <= math.e:
        raise ValueError("log3 requires x > e")
    v = math.log(math.log(x))
    if v <= 0.0:
        raise ValueError("log3 requires x > e^e")
    return math.log(v)


def f(x: float, lam: float) -> float:
    """exp(sqrt(lam * ln x * ln ln ln x)); the LIL radius schedule."""
    if x <= E_E:
        raise ValueError("f requires x > e^e")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return math.exp(math.sqrt(lam * math.log(x) * log3(x)))


def log_f(log_x: float, lam: float) -> float:
    """ln f(x) given ln x, safe when x itself overflows."""
    if log_x <= math.e:
        raise ValueError("needs ln x > e")
    return math.sqrt(lam * log_x * math.log(math.log(log_x)))


def wp(x: float) -> float:
    """Outer excursion radius schedule x * (ln x)^3."""
    if x <= 1.0:
        raise ValueError("wp requires x > 1")
    return x * math.log(x) ** 3


def phi(x: float) -> float:
    """Excursion-count scale (ln x)^2 / ln ln x."""
    if x <= math.e:
        raise ValueError("phi requires x > e")
    return math.log(x) ** 2 / log2(x)


class TnValue(NamedTuple):
    value: float          # e^(alpha^n); inf when it overflows
    log_value: float      # alpha^n, always finite
    overflowed: bool


def t_n(alpha: float, n: int) -> TnValue:
    """Checkpoint times t_n = e^(alpha^n), with a log-domain fallback."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    log_value = alpha ** n
    try:
        value = math.exp(log_value)
        overflowed = False
    except OverflowError:
        value = math.inf
        overflowed = True
    return TnValue(value, log_value, overflowed)


@dataclass(frozen=True)
class ScheduleParams:
    lam: float
    alpha: float
    eps1: float
    eps2: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if not 0 <= self.eps1 < Fraction(1, 3):
            raise ValueError("eps1 must lie in [0, 1/3)")
        if not 0 <= self.eps2 < Fraction(1, 2):
            raise ValueError("eps2 must lie in [0, 1/2)")


class SeriesExponent(NamedTuple):
    exponent: float
    converges: bool


def series_exponent(side: str, lam, alpha, eps1=0, eps2=0) -> SeriesExponent:
    """Power-law exponent of the excursion-event series.

    upper: (4*lam/alpha) * (1 - 3*eps1/2) / (1 + 2*eps2)
    lower: 4*lam * (1 + 3*eps1/2) / (1 - 2*eps2)

    Exact when called with Fractions; the series converges iff exponent > 1,
    so with eps1 = eps2 = 0 and alpha -> 1 the flip sits exactly at lam = 1/4.
    """
    # written without literal "/2" so Fraction inputs stay exact
    if side == "upper":
        exponent = (4 * lam / alpha) * (2 - 3 * eps1) / (2 * (1 + 2 * eps2))
    elif side == "lower":
        exponent = 4 * lam * (2 + 3 * eps1) / (2 * (1 - 2 * eps2))
    else:
        raise ValueError("side must be 'upper' or 'lower'")
    return SeriesExponent(exponent, exponent > 1)


@dataclass(frozen=True)
class TildeEventProb:
    exact: float            # bracket^count, evaluated in log domain
    log_exact: float
    asymptotic: float       # exp(-4(1 -+ 3eps1/2)/(1 +- 2eps2) * (ln f)^2 / ln t)
    log_asymptotic: float
    ratio: float            # exact / asymptotic
    error_terms: tuple[float, float, float]
    bracket: float
    count: int


def tilde_event_prob(n: int, params: ScheduleParams, side: str, o1: float = 0.0) -> TildeEventProb:
    """Probability that the scheduled excursion count is reached early/late.

    upper side: count = floor((2/3 - eps1) * phi_f), denominator uses
    ln t_{n+1}^(1/2+eps2); lower side: count = floor((2/3 + eps1) * phi_f),
    denominator uses ln t_n^(1/2-eps2).  The unspecified O(1) in the bracket
    is evaluated at `o1` (default 0); re-evaluate at +-1 for sensitivity.
    """
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    lam, alpha, eps1, eps2 = params.lam, params.alpha, params.eps1, params.eps2
    log_tn = alpha ** n
    lf = log_f(log_tn, lam)          # ln f(t_n)
    if lf <= math.e:
        raise ValueError("n too small: f(t_n) out of phi domain")
    llf = math.log(lf)               # log2 f(t_n)
    phi_f = lf * lf / llf

    if side == "upper":
        log_t_outer = (0.5 + eps2) * alpha ** (n + 1)
        count = math.floor((2.0 / 3.0 - eps1) * phi_f)
        rate = 4 * (1 - 3 * eps1 / 2) / (1 + 2 * eps2)
        log_t_for_asym = alpha ** (n + 1)
    else:
        log_t_outer = (0.5 - eps2) * alpha ** n
        count = math.floor((2.0 / 3.0 + eps1) * phi_f)
        rate = 4 * (1 + 3 * eps1 / 2) / (1 - 2 * eps2)
        log_t_for_asym = alpha ** n

    denom = log_t_outer - math.log(2.0) - lf
    if denom <= 0:
        raise ValueError("degenerate bracket: outer radius below 2 f(t_n)")
    gap = (3.0 * llf + o1) / denom
    if not 0.0 < gap < 1.0:
        raise ValueError("degenerate bracket: outside (0,1) for this n")
    bracket = 1.0 - gap

    log_exact = count * math.log1p(-gap)
    log_asym = -rate * lf * lf / log_t_for_asym
    err = (llf ** 2 / log_t_for_asym ** 2 * phi_f,
           phi_f / log_t_for_asym,
           llf / log_t_for_asym)
    return TildeEventProb(
        exact=math.exp(log_exact),
        log_exact=log_exact,
        asymptotic=math.exp(log_asym),
        log_asymptotic=log_asym,
        ratio=math.exp(log_exact - log_asym),
        error_terms=err,
        bracket=bracket,
        count=int(count),
    )


def a_threshold(r: float) -> float:
    """Excursion budget 64 * ln r * log3 r / log2 r for one coupling discrepancy."""
    if r <= E_E:
        raise ValueError("a_threshold requires r > e^e")
    return 64.0 * math.log(r) * log3(r) / log2(r)


def est1_residual(a: float, b: float, eps: float, delta: float) -> tuple[float, float]:
    """Residual and bound units for the ratio expansion (a-eps)/(b+delta).

    Hypotheses: |eps| < |a|/2 and delta < |b|/2.  Returns (|lhs - a/b|,
    |eps/b| + |a*delta/b^2|); the fitted constant is their ratio.
    """
    if not abs(eps) < 0.5 * abs(a):
        raise ValueError("need |eps| < |a|/2")
    if not abs(delta) < 0.5 * abs(b):
        raise ValueError("need |delta| < |b|/2")
    lhs = (a - eps) / (b + delta)
    resid = abs(lhs - a / b)
    units = abs(eps / b) + abs(a * delta / (b * b))
    return resid, units


def est2_residual(alpha: float, beta: float, eps: float, delta: float) -> tuple[float, float]:
    """Residual and bound units for (1 - alpha + eps)^(beta + delta) vs e^(-alpha*beta).

    Hypotheses: alpha^2*beta and beta*eps bounded, alpha and eps/alpha small,
    |delta| < 1.  Returns (|lhs - e^(-alpha*beta)|,
    e^(-alpha*beta) * (alpha^2*beta + beta*|eps| + alpha*|delta|)).
    """
    if not abs(delta) < 1:
        raise ValueError("need |delta| < 1")
    base = 1.0 - alpha + eps
    if base <= 0:
        raise ValueError("base must be positive")
    lhs = base ** (beta + delta)
    ref = math.exp(-alpha * beta)
    resid = abs(lhs - ref)
    units = ref * (alpha * alpha * beta + beta * abs(eps) + alpha * abs(delta))
    return resid, units


def expansion_residual_check(kind: str, samples: int, seed: int) -> float:
    """Max fitted constant over a randomized hypothesis-respecting sweep."""
    import numpy as np

    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    worst = 0.0
    for _ in range(samples):
        if kind == "est1":
            a = rng.uniform(0.5, 10.0) * rng.choice([-1.0, 1.0])
            b = rng.uniform(0.5, 10.0) * rng.choice([-1.0, 1.0])
            eps = rng.uniform(-0.49, 0.49) * abs(a)
            delta = rng.uniform(-0.49, 0.49) * abs(b)
            resid, units = est1_residual(a, b, eps, delta)
        elif kind == "est2":
            alpha = rng.uniform(1e-4, 0.05)
            beta = rng.uniform(0.0, 1.0) / alpha ** 2  # keeps alpha^2*beta <= 1
            eps = rng.uniform(-1.0, 1.0) * min(alpha * 0.1, 1.0 / max(beta, 1.0))
            delta = rng.uniform(-0.99, 0.99)
            resid, units = est2_residual(alpha, beta, eps, delta)
        else:
            raise ValueError("kind must be 'est1' or 'est2'")
        if units > 1e-300 and resid / units > worst:
            worst = resid / units
    return worst
