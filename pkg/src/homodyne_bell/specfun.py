"""Special functions behind the binned homodyne probabilities.

Everything that involves factorials, powers of two or Gamma values is carried
as a (sign, log-magnitude) pair and exponentiated once at the end, so mode
indices up to ~60 never overflow an intermediate.
"""

import math

import numpy as np
from scipy import special

_LOG_PI = math.log(math.pi)
_LOG2 = math.log(2.0)


def _is_pole(x):
    return x <= 0 and x == math.floor(x)


def reciprocal_gamma(x):
    """Return 1/Gamma(x), with exact zeros at the poles 0, -1, -2, ..."""
    if _is_pole(x):
        return 0.0
    if abs(x) <= 170.0:
        return 1.0 / math.gamma(x)
    sign, logmag = log_reciprocal_gamma(x)
    return sign * math.exp(logmag)


def log_reciprocal_gamma(x):
    """Return (sign, log|1/Gamma(x)|); sign is 0 at a pole."""
    if _is_pole(x):
        return 0, -math.inf
    if x > 0:
        return 1, -math.lgamma(x)
    # Gamma(x) for x < 0 alternates sign between consecutive poles.
    sign = -1 if math.floor(x) % 2 else 1
    return sign, -math.lgamma(x)


def log_factorial(n):
    return math.lgamma(n + 1.0)


def log_f_coefficient(n, m):
    """(sign, log|F(n, m)|) where 1/F(n, m) = Gamma(1/2 - n/2) Gamma(-m/2)."""
    s1, l1 = log_reciprocal_gamma(0.5 - 0.5 * n)
    s2, l2 = log_reciprocal_gamma(-0.5 * m)
    sign = s1 * s2
    if sign == 0:
        return 0, -math.inf
    return sign, l1 + l2


def f_coefficient(n, m):
    """F(n, m) = 1 / (Gamma(1/2 - n/2) Gamma(-m/2)).

    Zero whenever n is odd or m is even, because one of the Gamma factors
    sits on a pole.
    """
    sign, logmag = log_f_coefficient(n, m)
    if sign == 0:
        return 0.0
    return sign * math.exp(logmag)


def log_half_range_overlap(n, m):
    """(sign, log|I(n, m)|) for I(n, m) = int_0^inf exp(-x^2) H_n H_m dx."""
    if n < 0 or m < 0:
        raise ValueError("mode indices must be nonnegative")
    if n == m:
        # half of the full-line orthogonality integral 2^n n! sqrt(pi)
        return 1, (n - 1) * _LOG2 + log_factorial(n) + 0.5 * _LOG_PI
    if (n - m) % 2 == 0:
        return 0, -math.inf
    # n - m odd: exactly one of F(n, m), F(m, n) is nonzero
    s_nm, l_nm = log_f_coefficient(n, m)
    s_mn, l_mn = log_f_coefficient(m, n)
    if s_nm != 0:
        sign, logf = s_nm, l_nm
    else:
        sign, logf = -s_mn, l_mn
    if n < m:
        sign = -sign
    return sign, _LOG_PI + (n + m) * _LOG2 - math.log(abs(n - m)) + logf


def half_range_overlap(n, m):
    """Half-line Hermite overlap int_0^inf exp(-x^2) H_n(x) H_m(x) dx."""
    sign, logmag = log_half_range_overlap(n, m)
    if sign == 0:
        return 0.0
    return sign * math.exp(logmag)


def oscillator_table(nmax, x):
    """Normalized oscillator functions phi_0..phi_nmax evaluated at ``x``.

    Returns an array of shape ``(nmax + 1,) + np.shape(x)``. Uses the
    normalized three-term recurrence

        phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}

    so raw Hermite values are never formed.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[k]
                      - math.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


def oscillator_fn(n, x):
    """phi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))."""
    if n < 0:
        raise ValueError("n must be >= 0")
    values = oscillator_table(n, x)[n]
    return float(values) if values.ndim == 0 else values


def bessel_i0(z):
    """Modified Bessel function of the first kind, order zero."""
    if z < 0:
        raise ValueError("bessel_i0 is defined here for z >= 0")
    return float(special.i0(z))
