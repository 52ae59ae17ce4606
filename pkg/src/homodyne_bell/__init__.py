"""Bell-inequality tests with binned quadrature homodyne measurements on
two-mode photon-number-correlated states."""

__version__ = "0.1.0"

from .bell import (BellKind, BellResult, b_ch, b_info, b_spin, circle_grid,
                   maximize_over_angle, psi_sweep)
from .engine import (CouplingTable, JointProbabilities, build_coupling_table,
                     conditional_information, correlation_e, joint_density,
                     joint_probabilities, marginal_p1)
from .optimizer import OptimizationReport, OptimizerConfig, optimize_coefficients, table1_report
from .states import (CorrelatedState, circle_state, from_coefficients, mean_photon_number,
                     squeezed_state, two_pair_state, vacuum)

__all__ = [
    "BellKind", "BellResult", "b_ch", "b_info", "b_spin", "circle_grid",
    "maximize_over_angle", "psi_sweep", "CouplingTable", "JointProbabilities",
    "build_coupling_table", "conditional_information", "correlation_e",
    "joint_density", "joint_probabilities", "marginal_p1", "OptimizationReport",
    "OptimizerConfig", "optimize_coefficients", "table1_report", "CorrelatedState",
    "circle_state", "from_coefficients", "mean_photon_number", "squeezed_state",
    "two_pair_state", "vacuum",
]
