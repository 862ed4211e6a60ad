name = "optimizers"
from .optimizer_core import OptimizerCore
from .differential_evolution import DEConfig, DEOutcome, DESolver, SearchBounds, minimize
from .window_matching import MatchResult, MSEObjective, match_all, match_window, mean_squared_error, mse_objective, windows_for
