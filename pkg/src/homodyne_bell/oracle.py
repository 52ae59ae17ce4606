"""Brute-force checks of the closed forms by direct integration.

The quadrature side shares nothing with the closed-form side except the
normalized oscillator functions used to build the density: no coupling
weights, no Gamma-function overlaps, no cosine series. Overlap integrals are
checked against raw Hermite polynomials from numpy instead.

Integration uses a fixed tensor-product Gauss-Legendre panel rule on
[-L, L]^2 split at the origin, so quadrant sums line up with the binning.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite, legendre

from . import engine, specfun
from .exceptions import ResolutionWarning, VerificationFailure
from .states import circle_state, squeezed_state, two_pair_state, vacuum

PANEL_ORDER = 20
DEFAULT_POINTS = 400


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel rule over [-half_width, half_width]; half_width=None picks 8 + sqrt(2N)."""

    half_width: float = None
    points_per_axis: int = DEFAULT_POINTS
    rule: str = f"gauss-legendre-{PANEL_ORDER}"

    def __post_init__(self):
        if self.half_width is not None and not self.half_width > 0:
            raise ValueError("half_width must be > 0")
        if self.points_per_axis < 32:
            raise ValueError("points_per_axis must be >= 32")
        if self.rule != f"gauss-legendre-{PANEL_ORDER}":
            raise ValueError(f"unsupported rule {self.rule!r}")

    def width_for(self, truncation):
        if self.half_width is not None:
            return self.half_width
        return 8.0 + math.sqrt(2.0 * truncation)


def half_axis_rule(length, points):
    """Nodes and weights on [0, length] from equal Gauss-Legendre panels."""
    panels = max(1, math.ceil(points / PANEL_ORDER))
    xg, wg = legendre.leggauss(PANEL_ORDER)
    edges = np.linspace(0.0, length, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def quadrant_masses(state, psi, spec=QuadratureSpec()):
    """Integrated density over the four sign quadrants (x1 >= 0, x2 >= 0 first).

    Returns (p11, p00, p10, p01, total).
    """
    n_max = state.truncation
    x, w = half_axis_rule(spec.width_for(n_max), spec.points_per_axis // 2)
    phi_pos = specfun.oscillator_table(n_max, x)
    # phi_n(-x) = (-1)^n phi_n(x)
    phi_neg = phi_pos * ((-1.0) ** np.arange(n_max + 1))[:, None]
    weights = state.coefficients * np.exp(-1j * np.arange(n_max + 1) * psi)

    def block(phi_a, phi_b):
        amp = (phi_a * weights[:, None]).T @ phi_b
        return float(w @ (amp.real ** 2 + amp.imag ** 2) @ w)

    p11 = block(phi_pos, phi_pos)
    p00 = block(phi_neg, phi_neg)
    p10 = block(phi_pos, phi_neg)
    p01 = block(phi_neg, phi_pos)
    return p11, p00, p10, p01, p11 + p00 + p10 + p01


def quad_joint_probabilities(state, psi, spec=QuadratureSpec()):
    p11, p00, p10, p01, total = quadrant_masses(state, psi, spec)
    if abs(total - 1.0) > 1e-6:
        warnings.warn(f"density integrates to {total!r}; refine the quadrature",
                      ResolutionWarning, stacklevel=2)
    return engine.JointProbabilities(p11=p11, p00=p00, p10=p10, p01=p01)


def quad_half_range_overlap(n, m, spec=QuadratureSpec()):
    """int_0^inf exp(-x^2) H_n(x) H_m(x) dx with numpy's raw Hermite series."""
    if not (0 <= n <= 20 and 0 <= m <= 20):
        raise ValueError("quadrature overlap supports 0 <= n, m <= 20")
    x, w = half_axis_rule(spec.width_for(max(n, m)), spec.points_per_axis // 2)
    hn = hermite.hermval(x, [0] * n + [1])
    hm = hermite.hermval(x, [0] * m + [1])
    return float(w @ (np.exp(-x * x) * hn * hm))


def quad_coupling_weight(n, m, spec=QuadratureSpec()):
    """G(n, m) rebuilt from a quadrature overlap: 2 I(n,m)^2 / (2^(n+m) n! m! pi)."""
    overlap = quad_half_range_overlap(n, m, spec)
    return 2.0 * overlap * overlap / (
        2.0 ** (n + m) * math.factorial(n) * math.factorial(m) * math.pi)


@dataclass
class Check:
    name: str
    max_deviation: float
    tolerance: float
    worst: str = ""

    @property
    def passed(self):
        return self.max_deviation <= self.tolerance

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "max_deviation": self.max_deviation, "tolerance": self.tolerance,
                "worst": self.worst}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def default_states():
    return [("vacuum", vacuum()),
            ("two_pair(1/sqrt2)", two_pair_state(1.0 / math.sqrt(2.0))),
            ("circle(1.12)", circle_state(1.12, 10)),
            ("squeezed(0.5)", squeezed_state(0.5, 10))]


DEFAULT_PSI = (0.0, math.pi / 8, math.pi / 4, math.pi / 2)


def _track(check, deviation, label):
    if deviation > check.max_deviation or (deviation != deviation):
        check.max_deviation = deviation
        check.worst = label


def verify_all(truncation=10, psi_grid=DEFAULT_PSI, states=None, spec=None,
               table=None, overlap_max=15, prob_tol=1e-8, overlap_tol=1e-9,
               raise_on_failure=False):
    """Compare every closed form with the quadrature oracle.

    ``states`` is a list of (label, state) pairs or bare states. Passing a
    deliberately altered ``table`` is how fault injection is exercised.
    """
    spec = spec or QuadratureSpec()
    states = default_states() if states is None else [
        s if isinstance(s, tuple) else (repr(s), s) for s in states]
    need = max([truncation] + [s.truncation for _, s in states])
    table = table or engine.build_coupling_table(need)

    norm = Check("density normalization", 0.0, 1e-6)
    probs = Check("joint probabilities vs quadrature", 0.0, prob_tol)
    marg = Check("marginal P_1 = 1/2 from quadrature", 0.0, prob_tol)
    for label, state in states:
        for psi in psi_grid:
            p11, p00, p10, p01, total = quadrant_masses(state, psi, spec)
            tag = f"{label} psi={psi:.6g}"
            _track(norm, abs(total - 1.0), tag)
            jp = engine.joint_probabilities(state, table, psi)
            dev = max(abs(p11 - jp.p11), abs(p00 - jp.p00),
                      abs(p10 - jp.p10), abs(p01 - jp.p01))
            _track(probs, dev, tag)
            _track(marg, max(abs(p11 + p10 - 0.5), abs(p00 + p01 - 0.5),
                             abs(p11 + p01 - 0.5)), tag)

    overlap = Check("half-range overlap vs quadrature (relative)", 0.0, overlap_tol)
    for n in range(overlap_max + 1):
        for m in range(overlap_max + 1):
            exact = specfun.half_range_overlap(n, m)
            quad = quad_half_range_overlap(n, m, spec)
            # parity zeros have no magnitude of their own; measure them
            # against the Cauchy-Schwarz bound sqrt(I(n,n) I(m,m))
            scale = abs(exact) or math.sqrt(specfun.half_range_overlap(n, n)
                                            * specfun.half_range_overlap(m, m))
            _track(overlap, abs(quad - exact) / scale, f"I({n},{m})")

    coupling = Check("coupling weights vs quadrature (relative)", 0.0, overlap_tol)
    for n in range(1, min(table.truncation, 20) + 1):
        for m in range(n):
            quad = quad_coupling_weight(n, m, spec)
            scale = max(abs(quad), 1e-3)
            _track(coupling, abs(table[n, m] - quad) / scale, f"G({n},{m})")

    report = VerificationReport([norm, probs, marg, overlap, coupling])
    if raise_on_failure and not report.passed:
        worst = "; ".join(f"{c.name}: {c.max_deviation:.3g} at {c.worst}"
                          for c in report.failures())
        raise VerificationFailure(worst)
    return report
