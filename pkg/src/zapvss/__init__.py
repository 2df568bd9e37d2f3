"""Sparse adaptive filtering with zero-attractor step-size control.

A sign-attracted LMS filter plus five interchangeable controllers for the
attractor step-size, and a seeded echo-cancellation simulation harness with
CSV/SVG output.
"""

from .channel import (Channel, ChannelFormatError, generate_dispersive,
                      generate_sparse, load_channel, save_channel)
from .cli import (ConfigError, canonical_config_text, emit_csv, emit_svg,
                  parse_config, parse_config_text)
from .filtercore import (DivergenceError, FilterState, apply_update,
                         predict_error, sign_vec, step)
from .harness import (AlgorithmAggregate, AlgorithmConfig, ChannelSpec,
                      RunTrace, ScenarioConfig, aggregate, build_schedule,
                      compare, derive_stream_seeds, oracle_delta_l1,
                      oracle_delta_projected, recovery_time, residual_error,
                      run_all, run_scenario)
from .metrics import (MetricSample, misalignment_db, norms, sign_agreement,
                      smoothed_mse, sparsity_xi)
from .signal import (ChannelSchedule, DesiredSignal, generate_input,
                     regressor_at, synthesize_desired)
from .stepsize import (ConvergenceDetector, FixedKappa, LiuVss, ProposedL1Vss,
                       ProposedNormVss, YouVss, kappa_smooth, make_controller,
                       proposed_l1_delta, proposed_norm_delta)

__version__ = "0.1.0"

__all__ = [
    "Channel", "ChannelFormatError", "generate_dispersive", "generate_sparse",
    "load_channel", "save_channel",
    "ConfigError", "canonical_config_text", "emit_csv", "emit_svg",
    "parse_config", "parse_config_text",
    "DivergenceError", "FilterState", "apply_update", "predict_error",
    "sign_vec", "step",
    "AlgorithmAggregate", "AlgorithmConfig", "ChannelSpec", "RunTrace",
    "ScenarioConfig", "aggregate", "build_schedule", "compare",
    "derive_stream_seeds", "oracle_delta_l1", "oracle_delta_projected",
    "recovery_time", "residual_error", "run_all", "run_scenario",
    "MetricSample", "misalignment_db", "norms", "sign_agreement",
    "smoothed_mse", "sparsity_xi",
    "ChannelSchedule", "DesiredSignal", "generate_input", "regressor_at",
    "synthesize_desired",
    "ConvergenceDetector", "FixedKappa", "LiuVss", "ProposedL1Vss",
    "ProposedNormVss", "YouVss", "kappa_smooth", "make_controller",
    "proposed_l1_delta", "proposed_norm_delta",
]
