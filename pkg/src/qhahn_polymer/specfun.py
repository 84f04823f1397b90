"""Special functions: real polygamma, complex log-gamma, and the Airy function.

Polygamma values are computed from the defining series accelerated by the
downward recursion Psi_k(z) = Psi_k(z+1) + (-1)^{k+1} k!/z^{k+1} until the
argument is large, then a Bernoulli asymptotic expansion.  The complex
log-gamma is the analytic log-gamma (continuous off the cut (-inf, 0]),
computed by shifting the argument up and applying the Stirling series.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["polygamma", "digamma", "log_gamma", "airy_ai", "airy_ai_prime"]

# Bernoulli numbers B_2 .. B_16
_BERNOULLI = (
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
)

_SHIFT_TARGET = 18.0


def polygamma(k, x):
    """k-th polygamma function Psi_k(x) = d^{k+1}/dx^{k+1} log Gamma(x), x > 0."""
    k = int(k)
    if k < 0:
        raise ValueError("order k must be >= 0")
    x = float(x)
    if x <= 0:
        raise ValueError("polygamma requires x > 0 (poles at nonpositive integers)")
    acc = 0.0
    # recursion: Psi_k(x) = Psi_k(x+1) + (-1)^{k+1} k! / x^{k+1}
    sign = -1.0 if k % 2 == 0 else 1.0  # = (-1)^{k+1}
    kfac = math.factorial(k)
    while x < _SHIFT_TARGET:
        acc += sign * kfac / x ** (k + 1)
        x += 1.0
    return acc + _polygamma_asymptotic(k, x)


def _polygamma_asymptotic(k, x):
    if k == 0:
        out = math.log(x) - 0.5 / x
        x2 = 1.0 / (x * x)
        p = x2
        for n, b in enumerate(_BERNOULLI, start=1):
            out -= b * p / (2 * n)
            p *= x2
        return out
    # Psi_k(x) ~ (-1)^{k-1} [ (k-1)!/x^k + k!/(2 x^{k+1})
    #            + sum_n B_2n (2n+k-1)! / ((2n)! x^{2n+k}) ]
    s = math.factorial(k - 1) / x**k + math.factorial(k) / (2.0 * x ** (k + 1))
    for n, b in enumerate(_BERNOULLI, start=1):
        s += b * math.factorial(2 * n + k - 1) / math.factorial(2 * n) / x ** (2 * n + k)
    return s if k % 2 == 1 else -s


def digamma(x):
    return polygamma(0, x)


def log_gamma(z):
    """Analytic log Gamma, principal on the positive axis, continuous off (-inf, 0].

    Scalars and numpy arrays are accepted; complex output.  exp(log_gamma(z))
    equals Gamma(z) everywhere off the poles.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    out = np.zeros_like(z)
    # Shift until Re z is large: Stirling is then applied with |arg z| <= pi/2,
    # and the recurrence loggamma(z) = loggamma(z+1) - Log(z) with principal
    # logs preserves the analytic branch on the cut plane.
    for _ in range(256):
        small = z.real < _SHIFT_TARGET
        if not small.any():
            break
        out[small] -= np.log(z[small])
        z[small] += 1.0
    w = 1.0 / z
    w2 = w * w
    s = (z - 0.5) * np.log(z) - z + 0.5 * math.log(2.0 * math.pi)
    p = w
    for n, b in enumerate(_BERNOULLI, start=1):
        s += b / (2 * n * (2 * n - 1)) * p
        p *= w2
    out += s
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Airy function: Maclaurin series for moderate arguments, asymptotic series
# beyond the crossover.  Only the real line is needed.

_AI0 = 0.3550280538878172392600631860041831763980  # Ai(0) = 3^{-2/3}/Gamma(2/3)
_AIP0 = -0.2588194037928067984051835601892039634793  # Ai'(0) = -3^{-1/3}/Gamma(1/3)
_CROSSOVER = 5.8


def airy_ai(x):
    return _airy(float(x))[0]


def airy_ai_prime(x):
    return _airy(float(x))[1]


def _airy(x):
    if x > _CROSSOVER:
        return _airy_asymptotic_pos(x)
    if x < -9.0:
        raise ValueError("Airy series evaluation limited to x >= -9")
    return _airy_series(x)


def _airy_series(x):
    # Ai = c1 f - c2 g with f'' = x f, f(0)=1, f'(0)=0 and g(0)=0, g'(0)=1
    x3 = x * x * x
    f, fp = 1.0, 0.0
    g, gp = x, 1.0
    tf = 1.0
    tg = x
    for k in range(0, 60):
        # term recurrences: tf_{k+1} = tf_k x^3 /((3k+2)(3k+3)), similarly tg
        ntf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
        ntg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
        f += ntf
        g += ntg
        fp += ntf * (3 * k + 3) / x if x != 0.0 else 0.0
        gp += ntg * (3 * k + 4) / x if x != 0.0 else 0.0
        tf, tg = ntf, ntg
        scale = abs(f) + abs(g) + 1.0
        if abs(ntf) < 1e-18 * scale and abs(ntg) < 1e-18 * scale:
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return ai, aip


def _airy_asymptotic_pos(x):
    zeta = 2.0 / 3.0 * x**1.5
    pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    su, sv = 1.0, 1.0
    u = 1.0
    term_u = 1.0
    for k in range(1, 40):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * (2 * k - 1) * k)
        term_u = (-1) ** k * u / zeta**k
        v_over_u = (6 * k + 1) / (1.0 - 6 * k)
        term_v = (-1) ** k * u * v_over_u / zeta**k
        if abs(term_u) > abs(su) :
            break
        su += term_u
        sv += term_v
        if abs(term_u) < 1e-18:
            break
    ai = pref * x**-0.25 * su
    aip = -pref * x**0.25 * sv
    return ai, aip
