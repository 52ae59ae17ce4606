import math
import warnings

import numpy as np
import pytest

from homodyne_bell import engine, oracle, specfun, states
from homodyne_bell.exceptions import ResolutionWarning, VerificationFailure


def test_half_axis_rule_integrates_polynomials():
    x, w = oracle.half_axis_rule(3.0, 100)
    assert w.sum() == pytest.approx(3.0, rel=1e-14)
    assert float(w @ x**5) == pytest.approx(3.0**6 / 6, rel=1e-13)


def test_spec_validation():
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(half_width=-1.0)
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(points_per_axis=4)
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(rule="trapezoid")
    assert oracle.QuadratureSpec().width_for(8) == pytest.approx(12.0)


def test_vacuum_quadrants():
    p11, p00, p10, p01, total = oracle.quadrant_masses(states.vacuum(), 0.3)
    for p in (p11, p00, p10, p01):
        assert p == pytest.approx(0.25, abs=1e-10)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_two_pair_quadrant(bell_pair):
    jp = oracle.quad_joint_probabilities(bell_pair, 0.0)
    assert jp.p11 == pytest.approx(0.4091549430918953, abs=1e-10)
    assert jp.p10 == pytest.approx(0.0908450569081047, abs=1e-10)


def test_overlap_examples():
    assert oracle.quad_half_range_overlap(1, 0) == pytest.approx(1.0, abs=1e-12)
    assert oracle.quad_half_range_overlap(4, 2) == pytest.approx(0.0, abs=1e-10)
    assert oracle.quad_half_range_overlap(3, 0) == pytest.approx(-2.0, rel=1e-12)
    assert oracle.quad_half_range_overlap(7, 0) == pytest.approx(-120.0, rel=1e-12)
    assert oracle.quad_coupling_weight(1, 0) == pytest.approx(1 / math.pi, rel=1e-12)


def test_overlap_all_small_indices():
    for n in range(16):
        for m in range(16):
            exact = specfun.half_range_overlap(n, m)
            quad = oracle.quad_half_range_overlap(n, m)
            if exact == 0.0:
                bound = math.sqrt(specfun.half_range_overlap(n, n)
                                  * specfun.half_range_overlap(m, m))
                assert abs(quad) / bound <= 1e-9
            else:
                assert quad == pytest.approx(exact, rel=1e-9)


def test_overlap_index_limit():
    with pytest.raises(ValueError):
        oracle.quad_half_range_overlap(21, 0)


@pytest.mark.parametrize("label,state", oracle.default_states())
def test_closed_forms_match_quadrature(table10, label, state):
    for psi in oracle.DEFAULT_PSI:
        jp = engine.joint_probabilities(state, table10, psi)
        q = oracle.quad_joint_probabilities(state, psi)
        assert max(abs(a - b) for a, b in zip(jp.as_dict().values(), q.as_dict().values())) \
            <= 1e-8


def test_random_states_match_quadrature(table10, random_states):
    for state in random_states[:4]:
        for psi in (0.2, 1.7):
            assert oracle.quad_joint_probabilities(state, psi).p11 == pytest.approx(
                engine.joint_probabilities(state, table10, psi).p11, abs=1e-8)


def test_refinement_is_stable(circle112):
    coarse = oracle.quadrant_masses(circle112, 0.6, oracle.QuadratureSpec(points_per_axis=400))
    fine = oracle.quadrant_masses(circle112, 0.6, oracle.QuadratureSpec(points_per_axis=800))
    assert np.max(np.abs(np.array(coarse) - np.array(fine))) <= 1e-9


def test_resolution_warning(circle112):
    spec = oracle.QuadratureSpec(half_width=1.0, points_per_axis=40)
    with pytest.warns(ResolutionWarning):
        oracle.quad_joint_probabilities(circle112, 0.2, spec)


def test_no_warning_at_default(circle112):
    with warnings.catch_warnings():
        warnings.simplefilter("error", ResolutionWarning)
        oracle.quad_joint_probabilities(circle112, 0.2)


def test_verify_all_passes():
    report = oracle.verify_all()
    assert report.passed, report.to_dict()
    names = [c.name for c in report.checks]
    assert len(names) == 5
    for check in report.checks:
        assert check.max_deviation <= check.tolerance


def test_corrupted_table_is_pinpointed(table10):
    broken = table10.with_entry(1, 0, table10[1, 0] * 1.01)
    report = oracle.verify_all(table=broken)
    assert not report.passed
    failing = {c.name: c for c in report.failures()}
    coupling = failing["coupling weights vs quadrature (relative)"]
    assert coupling.worst == "G(1,0)"
    assert coupling.max_deviation == pytest.approx(0.01, rel=1e-6)
    assert "joint probabilities vs quadrature" in failing


def test_raise_on_failure(table10):
    broken = table10.with_entry(2, 1, table10[2, 1] * 1.05)
    with pytest.raises(VerificationFailure, match="G\\(2,1\\)"):
        oracle.verify_all(table=broken, raise_on_failure=True)


def test_report_serializes():
    doc = oracle.verify_all(states=[states.vacuum()], overlap_max=3, truncation=3).to_dict()
    assert doc["passed"] is True
    assert {"name", "passed", "max_deviation", "tolerance", "worst"} <= set(doc["checks"][0])
