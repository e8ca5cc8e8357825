"""Smoothed online target tracking.

A library and CLI for the three-term tracking problem (windowed tracking +
hidden-target perturbation + switching penalties): cost model, online
policies, offline baselines, instance generators, closed-form bound
calculators, and a configuration-driven experiment harness.
"""

from .bounds import (BoundReport, best_df_bound, bound_suite,
                     cort_consistency_term, empirical_ratio, eta, eta2,
                     iga_cr_bound, pga_df_lower_bound)
from .errors import (ConfigError, DimensionError, OracleError, ProtocolError,
                     SmoothTrackError, SolverError, TraceFormatError)
from .instances import (DEFAULT_SCHEDULE, PiecewiseConstant, RandomWalk,
                        TauSchedule, TraceRecord, gen_demo_trace,
                        gen_prediction_gap_instance, gen_random_instance,
                        instance_from_records, load_trace_csv, read_trace_csv,
                        write_trace_csv)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .model import (Box, CostBreakdown, FunctionSpec, HistoryBuffer, Instance,
                    ProblemParams, RunResult, check_function_assumptions,
                    history_sum, make_function, quadratic,
                    register_function_kind, step_cost, trajectory_cost)
from .policies import (BestPolicy, CortPolicy, CortState, InformedGreedyPolicy,
                       NaiveGreedyPolicy, Observation, Policy,
                       PredictionGreedyPolicy, run_best, run_cort, run_iga,
                       run_naive_greedy, run_pga, simulate)
from .predictors import (PredictionStream, file_predictor,
                         moving_average_predictor, perfect_predictor,
                         persistence_predictor, pessimistic_predictor,
                         write_predictions_csv)
from .solvers import (SolverSettings, StepProblem, brute_force_optimal,
                      full_horizon_gradient, grid_search_step, offline_optimal,
                      per_step_argmin, step_gradient, step_objective)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
