"""
Windowed fit of a positive-only three-spike system to a two-spike target.

Each resonance window gets its own objective, its own random stream and its own
differential evolution run. The fit vector is always (b1, b2, b3, dx12, dx23),
with the first spike pinned at x_a.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from deltascatter.exceptions import DomainError, NoResonancesError
from deltascatter.optimizers.differential_evolution import DEConfig, SearchBounds, minimize
from deltascatter.scattering.closed_form import ClosedFormThreeDelta, transmission_closed_3delta
from deltascatter.scattering.resonance_windows import TargetTwoDelta, Window, build_windows, global_window, predict_resonances
from deltascatter.scattering.scattering_core import DeltaSystem
from deltascatter.utils import to_float_list, uniform_k_grid, window_seed_sequence

N_PARAMETERS = 5


def mean_squared_error(reference, candidate):
    """Mean over the last axis of (reference - candidate)^2"""
    reference = np.asarray(reference, dtype=np.float64)
    candidate = np.asarray(candidate, dtype=np.float64)
    return np.mean((reference - candidate) ** 2, axis=-1)


def _three_delta_curves(population: np.ndarray, k_values: np.ndarray):
    """(P, M) transmissions of P parameter vectors on M wavenumbers"""
    beta1, beta2, beta3, dx12, dx23 = (population[:, i, np.newaxis] for i in range(N_PARAMETERS))
    return transmission_closed_3delta(beta1, beta2, beta3, dx12, dx23, k_values[np.newaxis, :])


class MSEObjective(object):
    """Mean squared distance between the target spectrum and a three-spike spectrum on a window

    The target is sampled once at construction. Calling the objective with a
    5-vector returns a float, with a (P, 5) population it returns P values.

    Attributes
    ----------
    target: TargetTwoDelta or closed-form descriptor
        Anything with a transmission(k) method
    window: Window
        Interval the spectra are compared on
    n_samples: int
        Number of uniformly spaced wavenumbers, both window edges included
    k_values: ndarray (n_samples,)
    target_values: ndarray (n_samples,)
    """

    def __init__(self, target, window: Window, n_samples: int = 200):
        if int(n_samples) != n_samples or n_samples < 2:
            raise DomainError(f"n_samples must be an integer >= 2, got {n_samples}")
        if not window.lo > 0:
            raise DomainError(f"Window must lie in k > 0, got [{window.lo}, {window.hi}]")
        self.target = target
        self.window = window
        self.n_samples = int(n_samples)
        self.k_values = uniform_k_grid(window.lo, window.hi, self.n_samples)
        self.target_values = np.asarray(target.transmission(self.k_values), dtype=np.float64)

    def __call__(self, vector):
        vector = np.asarray(vector, dtype=np.float64)
        population = np.atleast_2d(vector)
        if population.ndim != 2 or population.shape[1] != N_PARAMETERS:
            raise DomainError(f"Expected (b1, b2, b3, dx12, dx23) vectors, got shape {vector.shape}")
        values = mean_squared_error(self.target_values, _three_delta_curves(population, self.k_values))
        if vector.ndim == 1:
            return float(values[0])
        return values

    def dense_mse(self, vector, factor: int = 10):
        """MSE of one vector on a grid factor times denser than the training grid"""
        if int(factor) != factor or factor < 1:
            raise DomainError(f"Dense grid factor must be a positive integer, got {factor}")
        k_values = uniform_k_grid(self.window.lo, self.window.hi, int(factor) * self.n_samples)
        target_values = np.asarray(self.target.transmission(k_values), dtype=np.float64)
        population = np.atleast_2d(np.asarray(vector, dtype=np.float64))
        return float(mean_squared_error(target_values, _three_delta_curves(population, k_values))[0])


def mse_objective(target, window: Window, n_samples: int = 200):
    return MSEObjective(target, window, n_samples=n_samples)


@dataclass
class MatchResult:
    """Best three-spike fit found on one window

    Attributes
    ----------
    window: Window
        Window the fit was made on
    best_vector: ndarray (5,)
        (b1, b2, b3, dx12, dx23)
    mse: float
        MSE on the training grid
    iterations_used: int
        Generations run
    converged: bool
        Whether the population met the tolerance test before max_iterations
    objective_evaluations: int
        Number of parameter vectors evaluated
    dense_mse: float
        MSE on the denser reporting grid
    x_a: float
        Position of the first spike
    """

    window: Window
    best_vector: np.ndarray
    mse: float
    iterations_used: int
    converged: bool
    objective_evaluations: int
    dense_mse: float = float("nan")
    x_a: float = 0.0

    def __post_init__(self):
        self.best_vector = np.asarray(self.best_vector, dtype=np.float64)
        if self.best_vector.shape != (N_PARAMETERS,):
            raise DomainError(f"best_vector must have 5 entries, got shape {self.best_vector.shape}")
        if not self.mse >= 0:
            raise DomainError(f"mse must be non-negative, got {self.mse}")

    @property
    def strengths(self):
        return self.best_vector[:3]

    @property
    def spacings(self):
        return self.best_vector[3:]

    def system(self):
        """Three-spike DeltaSystem with x1 = x_a, x2 = x1 + dx12, x3 = x2 + dx23"""
        return DeltaSystem.three_delta(*self.best_vector, x1=self.x_a)

    def descriptor(self):
        return ClosedFormThreeDelta.from_vector(self.best_vector)

    def to_dict(self):
        return {
            "window": self.window.to_dict(),
            "best_vector": to_float_list(self.best_vector),
            "strengths": to_float_list(self.strengths),
            "spacings": to_float_list(self.spacings),
            "x_a": float(self.x_a),
            "mse": float(self.mse),
            "dense_mse": float(self.dense_mse),
            "iterations": int(self.iterations_used),
            "converged": bool(self.converged),
            "objective_evaluations": int(self.objective_evaluations),
        }

    @classmethod
    def from_dict(cls, data: dict):
        return cls(
            window=Window.from_dict(data["window"]),
            best_vector=np.array(data["best_vector"], dtype=np.float64),
            mse=float(data["mse"]),
            iterations_used=int(data["iterations"]),
            converged=bool(data["converged"]),
            objective_evaluations=int(data["objective_evaluations"]),
            dense_mse=float(data.get("dense_mse", float("nan"))),
            x_a=float(data.get("x_a", 0.0)),
        )


def match_window(
    target: TargetTwoDelta,
    window: Window,
    bounds: Optional[SearchBounds] = None,
    config: Optional[DEConfig] = None,
    n_samples: int = 200,
    dense_factor: int = 10,
    x_a: float = 0.0,
    verbose: bool = False,
):
    """Fit a three-spike system to the target on one window

    Parameters
    ----------
    target: TargetTwoDelta
        Two-spike system to imitate
    window: Window
        Interval to fit on
    bounds: SearchBounds
        Box for (b1, b2, b3, dx12, dx23), SearchBounds.default_for(target.alpha1) when omitted
    config: DEConfig
        Solver settings, the window seed is derived from config.seed and window.index
    n_samples: int
        Training grid size
    dense_factor: int
        Density of the reporting grid relative to the training grid
    x_a: float
        Position of the first spike of the fitted system
    verbose: bool
        Show a progress bar over generations

    Returns
    -------
    result: MatchResult
    """
    config = DEConfig() if config is None else config
    bounds = SearchBounds.default_for(target.alpha1) if bounds is None else bounds
    if bounds.dimension != N_PARAMETERS:
        raise DomainError(f"Three-spike fits need 5-dimensional bounds, got {bounds.dimension}")
    objective = mse_objective(target, window, n_samples=n_samples)
    outcome = minimize(objective, bounds, config=config, seed=window_seed_sequence(config.seed, window.index), verbose=verbose)
    return MatchResult(
        window=window,
        best_vector=outcome.best_vector,
        mse=outcome.mse,
        iterations_used=outcome.iterations_used,
        converged=outcome.converged,
        objective_evaluations=outcome.objective_evaluations,
        dense_mse=objective.dense_mse(outcome.best_vector, dense_factor),
        x_a=x_a,
    )


def windows_for(target: TargetTwoDelta, k_min: float, k_max: float, use_global_window: bool = False):
    """Resonance windows of the target in [k_min, k_max], or one window over the whole range"""
    if use_global_window:
        return [global_window(k_min, k_max)]
    resonances = predict_resonances(target, k_min, k_max)
    if len(resonances) == 0:
        raise NoResonancesError(f"No resonances of {target} in [{k_min}, {k_max}]")
    return build_windows(resonances, k_min, k_max)


def match_all(
    target: TargetTwoDelta,
    k_min: float,
    k_max: float,
    bounds: Optional[SearchBounds] = None,
    config: Optional[DEConfig] = None,
    n_samples: int = 200,
    dense_factor: int = 10,
    x_a: float = 0.0,
    use_global_window: bool = False,
    workers: int = 1,
    verbose: bool = False,
):
    """Fit every resonance window of the target independently

    Parameters
    ----------
    target: TargetTwoDelta
        Two-spike system to imitate
    k_min, k_max: float
        Wavenumber range holding the resonances
    bounds, config, n_samples, dense_factor, x_a
        Passed to match_window
    use_global_window: bool
        Fit one system over the whole range instead of one per resonance
    workers: int
        Windows fitted in parallel processes, results are kept in window order
    verbose: bool
        Show a progress bar over windows

    Returns
    -------
    results: list of MatchResult
        One per window, ascending in k
    """
    windows = windows_for(target, k_min, k_max, use_global_window=use_global_window)
    job = partial(
        match_window,
        target,
        bounds=bounds,
        config=config,
        n_samples=n_samples,
        dense_factor=dense_factor,
        x_a=x_a,
    )
    if workers > 1 and len(windows) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(windows))) as executor:
            results: List[MatchResult] = list(tqdm(executor.map(job, windows), total=len(windows), disable=not verbose))
    else:
        results = [job(window) for window in tqdm(windows, disable=not verbose, desc="windows")]
    return results
