"""Data-enabled predictive control from raw time-domain records (Hankel data
equations) or from frequency-response samples (frequency-domain data
equations), plus the closed-loop FRF estimation pipeline that produces the
latter and a receding-horizon / Monte Carlo evaluation harness."""

from . import casestudy
from .config import RunConfig, write_default_config
from .exceptions import InfeasibleError, ParseError, SingularityError
from .freqdomain import (DataEquations, FreqData, f_matrix, freq_data_equations,
                         frf_to_freq_data, hankel_data_equations, is_pe_freq,
                         is_trajectory_consistent, w_vector)
from .frf import (RADIUS_FACTOR_99, ClosedLoopExperiment, FrfEstimate,
                  estimate_frf, run_experiment, sensitivity_check)
from .lti import (SisoTransferFunction, StateSpace, Trajectory, closed_loop,
                  du_sensitivity, freq_response, simulate, spectral_radius,
                  tf_to_ss)
from .numcore import check_finite, least_squares, numerical_rank
from .ocp import (OcpConfig, OcpLayout, OcpProblem, OcpSolution, build_ocp,
                  ocp_to_dict, solution_to_dict, solve_ocp, solve_ocp_or_raise,
                  to_qp)
from .qp import QpProblem, QpResult, SolverStatus, solve_qp
from .signals import (MultisineSpec, PeCheck, SpectrumSamples, TimeSeries,
                      grid_frequencies, hankel, is_pe_time, per_period_dft,
                      synth_multisine)
from .simloop import (CampaignConfig, McRow, RhcConfig, RhcResult,
                      mc_table_from_csv, mc_table_to_csv, monte_carlo,
                      run_mpc_benchmark, run_rhc, warmup_window)

__version__ = "0.1.0"

__all__ = [
    "RADIUS_FACTOR_99", "CampaignConfig", "ClosedLoopExperiment",
    "DataEquations", "FreqData", "FrfEstimate", "InfeasibleError", "McRow",
    "MultisineSpec", "OcpConfig", "OcpLayout", "OcpProblem", "OcpSolution",
    "ParseError", "PeCheck", "QpProblem", "QpResult", "RhcConfig", "RhcResult",
    "RunConfig", "SingularityError", "SisoTransferFunction", "SolverStatus",
    "SpectrumSamples", "StateSpace", "TimeSeries", "Trajectory", "build_ocp",
    "casestudy", "check_finite", "closed_loop", "du_sensitivity",
    "estimate_frf", "f_matrix", "freq_data_equations", "freq_response",
    "frf_to_freq_data", "grid_frequencies", "hankel", "hankel_data_equations",
    "is_pe_freq", "is_pe_time", "is_trajectory_consistent", "least_squares",
    "mc_table_from_csv", "mc_table_to_csv", "monte_carlo", "numerical_rank",
    "ocp_to_dict", "per_period_dft", "run_experiment", "run_mpc_benchmark",
    "run_rhc", "sensitivity_check", "simulate", "solution_to_dict",
    "solve_ocp", "solve_ocp_or_raise", "solve_qp", "spectral_radius",
    "synth_multisine", "tf_to_ss", "to_qp", "w_vector", "warmup_window",
    "write_default_config",
]
