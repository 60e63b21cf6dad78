"""Student-t distribution and two-sample t-tests in pure Python.

The t CDF is evaluated through the regularized incomplete beta function,
computed with the modified Lentz continued fraction.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

from .errors import DegenerateSample

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 10_000


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta failed to converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - tail if t >= 0 else tail


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    m = math.fsum(xs) / n
    return m, math.fsum((x - m) ** 2 for x in xs) / (n - 1)


class TTestResult(NamedTuple):
    t: float
    df: float
    p: float


def t_test_two_sided(a: Sequence[float], b: Sequence[float], variant: str = "welch") -> TTestResult:
    """Independent two-sample t-test.

    Parameters
    ----------
    a, b : sequences of float
        Samples with at least two finite values each.
    variant : {"welch", "pooled"}
        Unequal-variance (Welch-Satterthwaite df) or pooled-variance test.

    Returns
    -------
    TTestResult
        ``(t, df, p)`` with ``p = 2 * (1 - CDF_t(|t|, df))``.

    Raises
    ------
    DegenerateSample
        Fewer than two values in a group, non-finite data, or zero variance
        in both groups with different means.  Zero variance with equal
        means gives ``t = 0, p = 1``.
    """
    if variant not in ("welch", "pooled"):
        raise ValueError(f"unknown variant {variant!r}")
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSample("each group needs at least two values")
    if not all(math.isfinite(x) for x in a + b):
        raise DegenerateSample("samples must be finite")
    n1, n2 = len(a), len(b)
    m1, v1 = _mean_var(a)
    m2, v2 = _mean_var(b)

    if variant == "pooled":
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se2 = sp2 * (1.0 / n1 + 1.0 / n2)
    else:
        q1, q2 = v1 / n1, v2 / n2
        se2 = q1 + q2
        df = se2 * se2 / (q1 * q1 / (n1 - 1) + q2 * q2 / (n2 - 1)) if se2 > 0 else float(n1 + n2 - 2)

    if se2 == 0:
        if m1 == m2:
            return TTestResult(0.0, df, 1.0)
        raise DegenerateSample("both groups have zero variance but different means")
    t = (m1 - m2) / math.sqrt(se2)
    return TTestResult(t, df, t_sf_two_sided(t, df))
