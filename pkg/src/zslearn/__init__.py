"""Last-iterate learning in two-player zero-sum normal-form games.

Modules:
    games     payoff matrices, values, gradients, exploitability, KL
    feedback  exact or noise-corrupted gradient observations
    learners  MWU / OMWU / M2WU update rules and run loops
    dynamics  replicator(-mutator) flows, stationary points, diagnostics
    harness   experiment configs, seed sweeps, CSV output, presets
    verify    executable invariant suite
"""

from .dynamics import (LyapunovReport, OdeConfig, StationaryPoint, Trajectory,
                       contraction_constants, integrate, lyapunov_decay_check,
                       rmd_vector_field, solve_stationary,
                       value_gap_identity_residual, value_gap_identity_sides,
                       write_trajectory_csv)
from .errors import (DimensionMismatchError, DivergedError,
                     InfiniteDivergenceError, InteriorityError,
                     StationarySolveError)
from .feedback import FeedbackChannel, NoiseModel, derive_seeds, observe
from .games import (GameMatrix, Strategy, StrategyProfile, best_response,
                    brps_fig1_nash, brps_nash, expected_value, exploitability,
                    gradient, kl, kl_profile, make_brps, make_brps_fig1,
                    make_matching_pennies, make_mne, make_random, mne_nash_p1,
                    nash_distance_mne, random_interior, uniform)
from .harness import (AlgoSpec, ExperimentConfig, ExperimentReport,
                      apply_env_overrides, emit_plotdata, load_config,
                      run_experiment, save_config)
from .learners import (LearnerConfig, LearnerState, RunTrace, Schedule,
                       make_state, mutation_gradient, run, run_batch,
                       softmax_step, step_m2wu, step_mwu, step_omwu)
from .presets import make_preset, preset_names
from .verify import CheckResult, format_report, verify_suite

__version__ = "0.1.0"
