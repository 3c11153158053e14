"""Independent reference implementations used only by the test suite.

These deliberately share no code with the package: erfc comes from a
Maclaurin series for small arguments and a Lentz-evaluated continued
fraction for large ones, and Gaussian bin masses are assembled from that
oracle.  Agreement between package and oracle is therefore a dual-route
check, not a tautology.
"""

import math

import numpy as np


def erfc_series(x: float) -> float:
    """erfc via the alternating Maclaurin series of erf (|x| <= ~2)."""
    term = x
    total = x
    k = 0
    while True:
        k += 1
        term *= -x * x / k
        inc = term / (2 * k + 1)
        total += inc
        if abs(inc) < 1e-20 * abs(total) + 1e-300:
            break
        if k > 200:
            raise RuntimeError(f"series did not converge at x={x}")
    return 1.0 - 2.0 / math.sqrt(math.pi) * total


def erfc_lentz(x: float) -> float:
    """erfc via the standard continued fraction, modified Lentz evaluation.

    erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x+ (1/2)/(x+ (2/2)/(x+ (3/2)/(x+ ...))))
    valid for x > 0, efficient for x >~ 2.
    """
    tiny = 1e-300
    f = tiny
    c = tiny
    d = 0.0
    j = 0
    while True:
        j += 1
        a = 1.0 if j == 1 else (j - 1) / 2.0
        d = x + a * d
        d = tiny if d == 0.0 else d
        c = x + a / c
        c = tiny if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            return math.exp(-x * x) / math.sqrt(math.pi) * f
        if j > 500:
            raise RuntimeError(f"continued fraction did not converge at x={x}")


def erfc_oracle(x: float) -> float:
    if x > 2.0:
        return erfc_lentz(x)
    if x < -2.0:
        return 2.0 - erfc_lentz(-x)
    return erfc_series(x)


def gauss_bin_mass(mean: float, lo: float, hi: float) -> float:
    """Mass of the variance-1/2 outcome Gaussian pi^-1/2 exp(-(v-m)^2) on [lo, hi]."""
    upper = 1.0 if lo == -math.inf else 0.5 * erfc_oracle(lo - mean)
    tail = 0.0 if hi == math.inf else 0.5 * erfc_oracle(hi - mean)
    return upper - tail


def mixture_bin_mass(weights, means, lo, hi) -> float:
    return float(sum(w * gauss_bin_mass(m, lo, hi)
                     for w, m in zip(weights, means)))


def brute_force_sequential_state(n: int, alpha: float, r0: complex, r1: complex):
    """Branch fields after n conditional reflections, by direct enumeration."""
    fields = np.empty(2**n, dtype=complex)
    for x in range(2**n):
        f = complex(alpha)
        for i in range(n):
            bit = (x >> (n - 1 - i)) & 1
            f *= r1 if bit else r0
        fields[x] = f
    return fields
