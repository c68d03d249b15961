"""Best window selection for difficulty-ordered data pruning."""
from .core import (NumericalError, ScoredDataset, SubsetIndices, ValidationError,
                   sort_by_score, validate_dataset)
from .proxy import (GradientBundle, RegressionSolution, fit_one_vs_rest,
                    gradient_difference, gradient_similarity,
                    neural_collapse_metric, proxy_accuracy, solve_ridge)
from .selection import (SweepReport, ablation_sweep, best_window_select,
                        noise_robust_eval_indices)
from .windows import (WindowSpec, contiguous_window, per_class_window,
                      two_half_windows, wider_window_sample, window_grid)

__version__ = "0.1.0"
