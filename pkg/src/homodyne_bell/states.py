"""Two-mode photon-number-correlated states sum_n c_n |n>|n>.

All constructors renormalize numerically after truncation, so every state
satisfies sum c_n^2 = 1 regardless of where the number basis is cut.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import AllZero, NonFinite, StateSpecError

DEFAULT_TRUNCATION = 10


@dataclass(frozen=True, eq=False)
class CorrelatedState:
    """Real Schmidt coefficients c_0..c_N, unit norm, read-only."""

    coefficients: np.ndarray

    @property
    def truncation(self):
        return len(self.coefficients) - 1

    def padded(self, truncation):
        """Coefficients zero-padded to length ``truncation + 1``."""
        if truncation < self.truncation:
            raise ValueError("cannot pad to a smaller truncation")
        out = np.zeros(truncation + 1)
        out[: len(self.coefficients)] = self.coefficients
        return out

    def to_dict(self):
        return {"coefficients": [float(c) for c in self.coefficients]}

    def __repr__(self):
        coeffs = ", ".join(f"{c:.4g}" for c in self.coefficients)
        return f"CorrelatedState([{coeffs}])"


def from_coefficients(raw):
    c = np.array(raw, dtype=float).ravel()
    if c.size == 0:
        raise AllZero("no coefficients given")
    if not np.all(np.isfinite(c)):
        raise NonFinite(f"non-finite coefficient in {list(raw)!r}")
    peak = np.max(np.abs(c))
    if peak == 0.0:
        raise AllZero("every coefficient is zero")
    # scale first so tiny or huge entries do not under/overflow the norm
    c = c / peak
    c = c / np.linalg.norm(c)
    c.setflags(write=False)
    return CorrelatedState(c)


def vacuum():
    return from_coefficients([1.0])


def circle_state(r, truncation=DEFAULT_TRUNCATION):
    """Pair-coherent ("circle") state with c_n proportional to r^(2n) / n!.

    The renormalization reproduces 1/sqrt(I_0(2 r^2)) in the untruncated
    limit.
    """
    if not r > 0:
        raise ValueError("circle_state needs r > 0")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    n = np.arange(truncation + 1)
    logc = 2.0 * n * math.log(r) - np.array([math.lgamma(k + 1.0) for k in n])
    return from_coefficients(np.exp(logc - logc.max()))


def squeezed_state(s, truncation=DEFAULT_TRUNCATION):
    """Parametric-amplifier state, c_n proportional to tanh(s)^n."""
    if not s >= 0:
        raise ValueError("squeezed_state needs s >= 0")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    return from_coefficients(math.tanh(s) ** np.arange(truncation + 1))


def two_pair_state(c0):
    """c0 |0>|0> + sqrt(1 - c0^2) |1>|1>."""
    if not 0.0 <= c0 <= 1.0:
        raise ValueError("two_pair_state needs 0 <= c0 <= 1")
    return from_coefficients([c0, math.sqrt(max(0.0, 1.0 - c0 * c0))])


def mean_photon_number(state):
    """Per-mode mean photon number sum_n n c_n^2."""
    c = state.coefficients
    return float(np.dot(np.arange(len(c)), c * c))


FAMILIES = {
    "circle": circle_state,
    "squeezed": squeezed_state,
    "two_pair": two_pair_state,
}


def state_from_spec(doc):
    """Build a state from a state-spec mapping.

    Accepts either ``{"coefficients": [...]}`` or
    ``{"family": "circle"|"squeezed"|"two_pair", "parameter": x,
    "truncation": N}``; ``truncation`` is optional and ignored for two_pair.
    """
    if not isinstance(doc, dict):
        raise StateSpecError("state spec must be a JSON object")
    if "coefficients" in doc:
        raw = doc["coefficients"]
        if not isinstance(raw, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
            raise StateSpecError("'coefficients' must be a list of numbers")
        return from_coefficients(raw)
    family = doc.get("family")
    if family not in FAMILIES:
        raise StateSpecError(f"unknown or missing family {family!r}; "
                             f"expected one of {sorted(FAMILIES)}")
    param = doc.get("parameter")
    if isinstance(param, bool) or not isinstance(param, (int, float)):
        raise StateSpecError("'parameter' must be a number")
    if family == "two_pair":
        return two_pair_state(float(param))
    truncation = doc.get("truncation", DEFAULT_TRUNCATION)
    if isinstance(truncation, bool) or not isinstance(truncation, int):
        raise StateSpecError("'truncation' must be an integer")
    return FAMILIES[family](float(param), truncation)


def load_state_spec(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StateSpecError(f"{path}: invalid JSON ({exc})") from exc
    return state_from_spec(doc)
