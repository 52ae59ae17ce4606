"""Closed-form binned homodyne statistics as functions of the angle sum psi.

Binning: a quadrature outcome x is "1" if x >= 0 and "0" otherwise. With real
coefficients every joint probability reduces to

    P_11(psi) = P_00(psi) = 1/4 + sum_{n>m} G(n, m) c_n c_m cos((n - m) psi)

with the coupling weights G built once per truncation. Grouping the sum by
harmonic k = n - m turns each evaluation into a short cosine series, which is
what the sweeps and the angle search use.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .exceptions import ProbabilityOutOfRange

_PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """G(n, m) for 0 <= m < n <= truncation, stored lower-triangular."""

    truncation: int
    entries: np.ndarray

    def __getitem__(self, nm):
        n, m = nm
        if n <= m:
            raise IndexError("coupling weights are stored for n > m only")
        return float(self.entries[n, m])

    def harmonics(self, coefficients):
        """Cosine-series amplitudes a_k = sum_{n-m=k} G(n, m) c_n c_m, k = 0..N.

        ``coefficients`` may be shorter than the table; a_0 is always zero.
        """
        c = np.zeros(self.truncation + 1)
        c[: len(coefficients)] = coefficients
        weighted = self.entries * np.outer(c, c)
        amps = np.zeros(self.truncation + 1)
        for k in range(1, self.truncation + 1):
            amps[k] = np.trace(weighted, offset=-k)
        return amps

    def with_entry(self, n, m, value):
        """Copy of the table with one weight replaced (fault injection)."""
        entries = self.entries.copy()
        entries[n, m] = value
        entries.setflags(write=False)
        return CouplingTable(self.truncation, entries)


def coupling_weight(n, m):
    """G(n, m) = 2^(n+m+1) pi / (n! m! (n-m)^2) [F(n,m) - F(m,n)]^2, for n > m."""
    if (n - m) % 2 == 0:
        return 0.0
    # for odd n - m exactly one of the two F terms survives
    s, logf = specfun.log_f_coefficient(n, m)
    if s == 0:
        s, logf = specfun.log_f_coefficient(m, n)
    log_g = ((n + m + 1) * math.log(2.0) + math.log(math.pi)
             - specfun.log_factorial(n) - specfun.log_factorial(m)
             - 2.0 * math.log(n - m) + 2.0 * logf)
    return math.exp(log_g)


def build_coupling_table(truncation):
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    entries = np.zeros((truncation + 1, truncation + 1))
    for n in range(1, truncation + 1):
        for m in range(n):
            entries[n, m] = coupling_weight(n, m)
    entries.setflags(write=False)
    return CouplingTable(truncation, entries)


@dataclass(frozen=True)
class JointProbabilities:
    p11: float
    p00: float
    p10: float
    p01: float

    def as_dict(self):
        return {"p11": self.p11, "p00": self.p00, "p10": self.p10, "p01": self.p01}


def _check_table(state, table):
    if table.truncation < state.truncation:
        raise ValueError(f"coupling table truncation {table.truncation} is below "
                         f"state truncation {state.truncation}")


def p11_series(amps, psi):
    """1/4 + sum_k a_k cos(k psi) for precomputed harmonic amplitudes."""
    psi = np.asarray(psi, dtype=float)
    k = np.arange(len(amps))
    p11 = 0.25 + np.cos(np.multiply.outer(psi, k)) @ amps
    check_p11(p11)
    return p11


def p11_slope_series(amps, psi):
    """d P_11 / d psi for precomputed harmonic amplitudes."""
    psi = np.asarray(psi, dtype=float)
    k = np.arange(len(amps))
    return -np.sin(np.multiply.outer(psi, k)) @ (k * amps)


def check_p11(p11):
    bad = (p11 < -_PROB_TOL) | (p11 > 0.5 + _PROB_TOL)
    if np.any(bad):
        worst = float(np.ravel(p11)[np.argmax(np.ravel(bad))])
        raise ProbabilityOutOfRange(f"P_11 = {worst!r} lies outside [0, 1/2]")


def state_harmonics(state, table):
    _check_table(state, table)
    return table.harmonics(state.coefficients)


def p11_curve(state, table, psi):
    """P_11 at every angle in ``psi`` (array in, array out)."""
    return p11_series(state_harmonics(state, table), psi)


def joint_probabilities(state, table, psi):
    if not math.isfinite(psi):
        raise ValueError("psi must be finite")
    p11 = float(p11_curve(state, table, psi))
    p10 = 0.5 - p11
    return JointProbabilities(p11=p11, p00=p11, p10=p10, p01=p10)


def marginal_p1():
    """Single-site probability of a "1"; independent of the local angle."""
    return 0.5


def correlation_e(state, table, psi):
    """E = P_11 + P_00 - P_10 - P_01 = 4 P_11 - 1."""
    return 4.0 * joint_probabilities(state, table, psi).p11 - 1.0


def correlation_e_series(state, table, psi):
    """E(psi) summed directly with the 2^(n+m+3) weights (no detour via P_11)."""
    _check_table(state, table)
    c = state.coefficients
    total = 0.0
    for n in range(1, len(c)):
        for m in range(n):
            total += 4.0 * table.entries[n, m] * c[n] * c[m] * math.cos((n - m) * psi)
    return total


def _entropy_terms(p, log_base):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log(2.0 * p), 0.0)
    return terms / math.log(log_base)


def check_log_base(log_base):
    if not (log_base == 2 or math.isclose(log_base, math.e)):
        raise ValueError("log_base must be 2 (bits) or e (nats)")


def conditional_information(jp, log_base=2):
    """H = -sum_ab P(a,b) log(2 P(a,b)), with 0 log 0 = 0."""
    check_log_base(log_base)
    return float(np.sum(_entropy_terms([jp.p11, jp.p00, jp.p10, jp.p01], log_base)))


def conditional_information_curve(p11, log_base=2):
    """H from an array of P_11 values, using P_00 = P_11 and P_10 = P_01 = 1/2 - P_11."""
    check_log_base(log_base)
    p11 = np.asarray(p11, dtype=float)
    return 2.0 * (_entropy_terms(p11, log_base) + _entropy_terms(0.5 - p11, log_base))


def information_slope(p11, log_base=2):
    """dH / dP_11 along the symmetric family P_00 = P_11, P_10 = P_01 = 1/2 - P_11."""
    p11 = np.asarray(p11, dtype=float)
    return 2.0 * np.log((0.5 - p11) / p11) / math.log(log_base)


def joint_density(state, x1, x2, psi):
    """Quadrature outcome density |sum_n c_n e^{-i n psi} phi_n(x1) phi_n(x2)|^2."""
    c = state.coefficients
    n = np.arange(len(c))
    phi1 = specfun.oscillator_table(len(c) - 1, x1)
    phi2 = specfun.oscillator_table(len(c) - 1, x2)
    weights = c * np.exp(-1j * n * psi)
    amp = np.tensordot(weights, phi1 * phi2, axes=1)
    out = amp.real ** 2 + amp.imag ** 2
    return float(out) if out.ndim == 0 else out
