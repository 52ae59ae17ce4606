"""Clauser-Horne, spin and information-theoretic Bell functionals.

All three use the factorized angle convention psi = theta + phi =
-theta' - phi' = theta + phi', 3 psi = theta' + phi, so each functional is a
combination of one-angle statistics at psi and 3 psi.
"""

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import engine
from .states import circle_state

GRID_STEP = 1e-3
REFINE_XTOL = 1e-10


class BellKind(enum.Enum):
    CLAUSER_HORNE = "ch"
    SPIN = "spin"
    INFO = "info"

    @property
    def bound(self):
        return {"ch": 1.0, "spin": 2.0, "info": 0.0}[self.value]

    @property
    def maximize(self):
        """False for the information-theoretic case, which is violated from below."""
        return self is not BellKind.INFO

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        aliases = {"ch": cls.CLAUSER_HORNE, "clauserhorne": cls.CLAUSER_HORNE,
                   "clauser_horne": cls.CLAUSER_HORNE, "spin": cls.SPIN,
                   "info": cls.INFO, "infotheoretic": cls.INFO}
        try:
            return aliases[str(text).lower()]
        except KeyError:
            raise ValueError(f"unknown Bell kind {text!r}") from None


def margin_for(kind, value):
    """Signed distance past the classical bound; positive means violated."""
    if kind is BellKind.CLAUSER_HORNE:
        return abs(value) - kind.bound
    if kind is BellKind.SPIN:
        return value - kind.bound
    return kind.bound - value


@dataclass(frozen=True)
class BellResult:
    kind: BellKind
    value: float
    psi: float
    violated: bool
    margin: float

    @classmethod
    def build(cls, kind, value, psi):
        margin = margin_for(kind, value)
        return cls(kind=kind, value=float(value), psi=float(psi),
                   violated=bool(margin > 0), margin=float(margin))

    def to_dict(self):
        return {"kind": self.kind.value, "value": self.value, "psi": self.psi,
                "violated": self.violated, "margin": self.margin}


def _combine(kind, p1, p3, log_base):
    if kind is BellKind.CLAUSER_HORNE:
        return (3.0 * p1 - p3) / (2.0 * engine.marginal_p1())
    if kind is BellKind.SPIN:
        return np.abs(3.0 * (4.0 * p1 - 1.0) - (4.0 * p3 - 1.0))
    return (3.0 * engine.conditional_information_curve(p1, log_base)
            - engine.conditional_information_curve(p3, log_base))


def _curve_from_amps(amps, kind, psi, log_base):
    psi = np.asarray(psi, dtype=float)
    return _combine(kind, engine.p11_series(amps, psi),
                    engine.p11_series(amps, 3.0 * psi), log_base)


def _slope_from_amps(amps, kind, psi, log_base):
    p1 = float(engine.p11_series(amps, psi))
    p3 = float(engine.p11_series(amps, 3.0 * psi))
    d1 = float(engine.p11_slope_series(amps, psi))
    d3 = 3.0 * float(engine.p11_slope_series(amps, 3.0 * psi))
    if kind is BellKind.CLAUSER_HORNE:
        return (3.0 * d1 - d3) / (2.0 * engine.marginal_p1())
    if kind is BellKind.SPIN:
        inner = 3.0 * (4.0 * p1 - 1.0) - (4.0 * p3 - 1.0)
        return math.copysign(1.0, inner) * (12.0 * d1 - 4.0 * d3)
    return (3.0 * float(engine.information_slope(p1, log_base)) * d1
            - float(engine.information_slope(p3, log_base)) * d3)


def bell_curve(state, table, kind, psi, log_base=2):
    """Vectorized value of ``kind`` at every angle in ``psi``."""
    kind = BellKind.parse(kind)
    return _curve_from_amps(engine.state_harmonics(state, table), kind, psi, log_base)


def bell_slope(state, table, kind, psi, log_base=2):
    """d/dpsi of ``kind`` at a scalar angle."""
    kind = BellKind.parse(kind)
    return _slope_from_amps(engine.state_harmonics(state, table), kind, psi, log_base)


def b_ch(state, table, psi):
    return float(bell_curve(state, table, BellKind.CLAUSER_HORNE, psi))


def b_spin(state, table, psi):
    return float(bell_curve(state, table, BellKind.SPIN, psi))


def b_info(state, table, psi, log_base=2):
    return float(bell_curve(state, table, BellKind.INFO, psi, log_base))


@functools.lru_cache(maxsize=8)
def _angle_grid(step, harmonics):
    # every functional is even and 2 pi periodic, so [0, pi] covers all extrema
    count = int(math.ceil(math.pi / step))
    grid = np.linspace(0.0, math.pi, count + 1)
    k = np.arange(harmonics)
    cos1 = np.cos(np.outer(grid, k))
    cos3 = np.cos(np.outer(3.0 * grid, k))
    for a in (grid, cos1, cos3):
        a.setflags(write=False)
    return grid, cos1, cos3


def extremize_amplitudes(amps, kind, log_base=2, step=GRID_STEP):
    """(value, psi) of the extremum over psi for precomputed amplitudes."""
    grid, cos1, cos3 = _angle_grid(step, len(amps))
    p1 = 0.25 + cos1 @ amps
    p3 = 0.25 + cos3 @ amps
    engine.check_p11(p1)
    engine.check_p11(p3)
    sign = 1.0 if kind.maximize else -1.0
    values = sign * _combine(kind, p1, p3, log_base)
    i = int(np.argmax(values))
    best_psi, best = float(grid[i]), float(values[i])

    h = grid[1] - grid[0]
    lo, hi = best_psi - h, best_psi + h
    s_lo = _slope_from_amps(amps, kind, lo, log_base)
    s_hi = _slope_from_amps(amps, kind, hi, log_base)
    if sign * s_lo > 0 > sign * s_hi:
        refined = brentq(lambda p: _slope_from_amps(amps, kind, p, log_base),
                         lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    else:
        refined = minimize_scalar(
            lambda p: -sign * float(_curve_from_amps(amps, kind, p, log_base)),
            bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XTOL}).x
    v = sign * float(_curve_from_amps(amps, kind, refined, log_base))
    if v > best:
        best_psi, best = float(refined), v
    best_psi = abs(best_psi)
    if best_psi > math.pi:
        best_psi = 2.0 * math.pi - best_psi
    return sign * best, best_psi


def maximize_over_angle(state, table, kind, log_base=2, step=GRID_STEP):
    """Extremize ``kind`` over psi: dense grid, then local refinement.

    Refinement is a root-find on the analytic slope inside the winning grid
    cell, falling back to a bounded scalar search when the slope does not
    change sign there (extremum on a boundary, or a kink of the spin
    absolute value).

    The extremum is a maximum for CH and spin and a minimum for the
    information-theoretic functional. Returned psi lies in [0, pi].
    """
    kind = BellKind.parse(kind)
    engine.check_log_base(log_base)
    value, psi = extremize_amplitudes(engine.state_harmonics(state, table), kind,
                                      log_base, step)
    return BellResult.build(kind, value, psi)


def psi_sweep(state, table, kind, psi_grid, log_base=2):
    psi_grid = np.asarray(psi_grid, dtype=float)
    if psi_grid.size == 0:
        raise ValueError("psi grid is empty")
    if np.any(np.diff(psi_grid) <= 0):
        raise ValueError("psi grid must be strictly ascending")
    values = bell_curve(state, table, kind, psi_grid, log_base)
    return [(float(p), float(v)) for p, v in zip(psi_grid, values)]


def circle_grid(r_range, psi_range, table, kind, log_base=2):
    """Matrix of ``kind`` values for circle states, rows over r, columns over psi."""
    r_range = np.asarray(r_range, dtype=float)
    psi_range = np.asarray(psi_range, dtype=float)
    if r_range.size == 0 or psi_range.size == 0:
        raise ValueError("r and psi ranges must be non-empty")
    out = np.empty((r_range.size, psi_range.size))
    for i, r in enumerate(r_range):
        state = circle_state(float(r), table.truncation)
        out[i] = bell_curve(state, table, kind, psi_range, log_base)
    return out
