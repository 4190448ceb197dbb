"""Certified single-photon yield bounds for 3-intensity decoy-state QKD
with inexactly controlled pulse intensities.

The pipeline: monitor-click tomography pins each class's mean intensity to a
closed-form interval; those intervals bound every source-decomposition
coefficient; the worst-case corner of the resulting box yields a certified
lower bound on the single-photon counting rate s1 and on the untagged-bit
fraction.  A separate unconditional solver covers arbitrary (adversarial)
intensity error patterns, and a simulator provides ground truth for
soundness testing and the efficiency comparison table.
"""

from .core import (ChannelYields, ClassDecomposition, FluctuationPattern,
                   ObservedRates, SourceDecomposition, compose_counting_rate,
                   ideal_decomposition, multiphoton_ratio, true_decomposition,
                   true_source_decomposition)
from .errors import (DecoyCertError, InfeasibleProblem, InvariantViolation,
                     ProtocolDiscarded, ValidityError)
from .simulator import (AdversarialScenario, ChannelModel, EfficiencyStudyOptions,
                        GroundTruth, PAPER_DELTA_GRID, ScenarioConfig, TableRow,
                        channel_yield, gen_fluctuation_pattern, run_efficiency_table,
                        simulate_adversarial, simulate_from_slot_yields,
                        simulate_observed)
from .source_bounds import (SourceBounds, compute_decoy_bounds,
                            compute_signal_bounds, compute_source_bounds)
from .tomography import (IntensityInterval, certify_intensity, mu_lower_refined,
                         mu_lower_simple, mu_upper, zeta_from_delta,
                         zeta_from_histogram)
from .worst_pattern import (Num5Problem, num5_constants, solve_num5_asymptotic,
                            solve_num5_finite)
from .yield_solver import (ConditionFlags, SolverOptions, YieldBoundResult,
                           bound_s0_dark, check_conditions, solve_closed_form,
                           untagged_fraction, worst_case_s1)

__version__ = "0.1.0"

__all__ = [
    "AdversarialScenario", "ChannelModel", "ChannelYields", "ClassDecomposition",
    "ConditionFlags", "DecoyCertError", "EfficiencyStudyOptions",
    "FluctuationPattern", "GroundTruth", "InfeasibleProblem", "IntensityInterval",
    "InvariantViolation", "Num5Problem", "ObservedRates", "PAPER_DELTA_GRID",
    "ProtocolDiscarded", "ScenarioConfig", "SolverOptions", "SourceBounds",
    "SourceDecomposition", "TableRow", "ValidityError", "YieldBoundResult",
    "bound_s0_dark", "channel_yield", "check_conditions", "compose_counting_rate",
    "compute_decoy_bounds", "compute_signal_bounds", "compute_source_bounds",
    "certify_intensity", "gen_fluctuation_pattern", "ideal_decomposition",
    "multiphoton_ratio", "mu_lower_refined", "mu_lower_simple", "mu_upper",
    "num5_constants", "run_efficiency_table", "simulate_adversarial",
    "simulate_from_slot_yields", "simulate_observed", "solve_closed_form",
    "solve_num5_asymptotic", "solve_num5_finite", "true_decomposition",
    "true_source_decomposition", "untagged_fraction", "worst_case_s1",
    "zeta_from_delta", "zeta_from_histogram",
]
