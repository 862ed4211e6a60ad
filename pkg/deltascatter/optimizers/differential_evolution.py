"""
Bound constrained differential evolution.

The population lives in the unit cube and is scaled to the search box only when
the objective is evaluated, so every strategy works on [0, 1]^n. Each
generation draws all of its random numbers before any objective evaluation,
which makes the result independent of how the evaluations are scheduled.
"""
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize as scipy_minimize
from scipy.stats import qmc
from tqdm import tqdm

from deltascatter.exceptions import DomainError, OptimizationError
from deltascatter.optimizers.optimizer_core import OptimizerCore

STRATEGIES = ("best1bin", "rand1bin", "currenttobest1bin")
INIT_METHODS = ("random", "latinhypercube")
UPDATING_MODES = ("deferred", "immediate")


@dataclass
class SearchBounds:
    """Box constraints, one (lower, upper) pair per dimension

    For the three-spike fit the dimensions are ordered (b1, b2, b3, dx12, dx23).

    Attributes
    ----------
    lower: tuple of float
        Lower limit of each dimension
    upper: tuple of float
        Upper limit of each dimension, strictly above the lower one
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        self.lower = tuple(float(v) for v in np.ravel(self.lower))
        self.upper = tuple(float(v) for v in np.ravel(self.upper))
        self.validate()

    def validate(self):
        if len(self.lower) == 0 or len(self.lower) != len(self.upper):
            raise DomainError(f"Bounds need matching, non-empty lower and upper limits, got {self.lower}, {self.upper}")
        lower, upper = np.array(self.lower), np.array(self.upper)
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise DomainError("Bounds must be finite")
        if np.any(lower >= upper):
            raise DomainError(f"Every lower bound must be below its upper bound, got {self.lower}, {self.upper}")

    @classmethod
    def from_pairs(cls, pairs):
        pairs = np.asarray(pairs, dtype=np.float64)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DomainError(f"Expected (lower, upper) pairs, got shape {pairs.shape}")
        return cls(tuple(pairs[:, 0]), tuple(pairs[:, 1]))

    @classmethod
    def default_for(
        cls,
        alpha1: float,
        strength_factor: float = 2.0,
        strength_floor: float = 0.5,
        d_min: float = 0.3,
        d_max: float = 5.0,
    ):
        """Bounds of the positive-only three-spike fit of a target with strengths +alpha1 / -alpha1

        Parameters
        ----------
        alpha1: float
            Target strength, the strength ceiling is strength_factor * |alpha1|
        strength_factor: float
            2 by default, 1 tightens the strengths to [strength_floor, |alpha1|]
        strength_floor: float
            Smallest strength allowed, keeps every spike repulsive
        d_min, d_max: float
            Limits of both spacings
        """
        strength_ceiling = strength_factor * abs(alpha1)
        if not strength_ceiling > strength_floor:
            raise DomainError(
                f"Strength ceiling {strength_ceiling} (factor {strength_factor} x |alpha1|) must exceed the floor {strength_floor}"
            )
        return cls(
            lower=(strength_floor,) * 3 + (d_min,) * 2,
            upper=(strength_ceiling,) * 3 + (d_max,) * 2,
        )

    @property
    def dimension(self):
        return len(self.lower)

    def as_array(self):
        """(n, 2) array of limits"""
        return np.column_stack([self.lower, self.upper])

    def contains(self, x):
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= np.array(self.lower)) and np.all(x <= np.array(self.upper)))

    def to_dict(self):
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_dict(cls, data: dict):
        return cls(tuple(data["lower"]), tuple(data["upper"]))


@dataclass
class DEConfig:
    """Differential evolution settings

    Attributes
    ----------
    population_size: int
        Population multiplier, the population holds population_size * n members
        when scale_population_by_dimension is set and population_size otherwise
    max_iterations: int
        Maximum number of generations
    abs_tol, rel_tol: float
        Stop once std(energies) <= abs_tol + rel_tol * |mean(energies)|
    seed: int
        Seed of the random generator
    mutation_factor: float or (float, float)
        Differential weight, a pair means a fresh value drawn uniformly in that
        range once per generation
    crossover_rate: float
        Binomial crossover probability
    strategy: str
        One of best1bin, rand1bin, currenttobest1bin
    init: str
        random or latinhypercube
    updating: str
        deferred (whole generation at once) or immediate (member by member)
    workers: int
        Threads evaluating a generation, only used with deferred updating
    vectorized: bool
        The objective accepts a (P, n) population and returns (P,) values
    polish: bool
        Refine the best member with a bounded local search at the end
    polish_method: str
        scipy.optimize.minimize method used to polish
    n_starts: int
        Independent populations run by minimize, each on its own seed stream,
        the lowest energy wins
    """

    population_size: int = 20
    max_iterations: int = 800
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    seed: int = 42
    mutation_factor: Union[float, Tuple[float, float]] = (0.5, 1.0)
    crossover_rate: float = 0.7
    strategy: str = "best1bin"
    scale_population_by_dimension: bool = True
    init: str = "random"
    updating: str = "deferred"
    workers: int = 1
    vectorized: bool = True
    polish: bool = False
    polish_method: str = "Nelder-Mead"
    n_starts: int = 4

    def __post_init__(self):
        if isinstance(self.mutation_factor, (list, tuple)):
            self.mutation_factor = tuple(float(v) for v in self.mutation_factor)

    def validate(self):
        if int(self.population_size) != self.population_size or self.population_size < 5:
            raise DomainError(f"population_size must be an integer >= 5, got {self.population_size}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise DomainError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(f"Tolerances must be positive, got abs_tol={self.abs_tol}, rel_tol={self.rel_tol}")
        if not 0 < self.crossover_rate <= 1:
            raise DomainError(f"crossover_rate must lie in (0, 1], got {self.crossover_rate}")
        if isinstance(self.mutation_factor, tuple):
            if len(self.mutation_factor) != 2 or not 0 <= self.mutation_factor[0] < self.mutation_factor[1] <= 2:
                raise DomainError(f"Dithered mutation_factor must be (lo, hi) with 0 <= lo < hi <= 2, got {self.mutation_factor}")
        elif not 0 < self.mutation_factor <= 2:
            raise DomainError(f"mutation_factor must lie in (0, 2], got {self.mutation_factor}")
        if self.strategy not in STRATEGIES:
            raise DomainError(f"Unknown strategy {self.strategy}, available strategies: {STRATEGIES}")
        if self.init not in INIT_METHODS:
            raise DomainError(f"Unknown init {self.init}, available methods: {INIT_METHODS}")
        if self.updating not in UPDATING_MODES:
            raise DomainError(f"Unknown updating {self.updating}, available modes: {UPDATING_MODES}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise DomainError(f"workers must be a positive integer, got {self.workers}")
        if int(self.n_starts) != self.n_starts or self.n_starts < 1:
            raise DomainError(f"n_starts must be a positive integer, got {self.n_starts}")
        return self

    def population_members(self, dimension: int):
        if self.scale_population_by_dimension:
            return int(self.population_size) * int(dimension)
        return int(self.population_size)

    def to_dict(self):
        data = asdict(self)
        if isinstance(self.mutation_factor, tuple):
            data["mutation_factor"] = list(self.mutation_factor)
        return data

    @classmethod
    def from_dict(cls, data: dict):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"Unknown DE settings {sorted(unknown)}, available settings: {sorted(known)}")
        return cls(**data)


@dataclass
class DEOutcome:
    """Best member found by a differential evolution run"""

    best_vector: np.ndarray
    mse: float
    iterations_used: int
    converged: bool
    objective_evaluations: int


class DESolver(OptimizerCore):
    """Differential evolution over a SearchBounds box

    Attributes
    ----------
    objective: callable
        Maps an n-vector (or a (P, n) population when vectorized) to a value to minimize
    bounds: SearchBounds
        Search box, every evaluated point lies inside it
    config: DEConfig
        Solver settings
    population: ndarray (P, n)
        Members in unit cube coordinates, the best one kept at row 0
    population_energies: ndarray (P,)
        Objective value of each member, NaN and Inf stored as +inf
    best_history: list of float
        Best energy after initialisation and after every generation
    nfev: int
        Number of objective evaluations (one per member evaluated)
    """

    def __init__(
        self,
        objective: Callable,
        bounds: SearchBounds,
        config: Optional[DEConfig] = None,
        seed=None,
        verbose: bool = False,
    ):
        """
        Parameters
        ----------
        objective: callable
            Function to minimize
        bounds: SearchBounds
            Search box
        config: DEConfig
            Solver settings, defaults when omitted
        seed: int or np.random.SeedSequence
            Overrides config.seed, used to give each window its own stream
        verbose: bool
            Show a progress bar over generations
        """
        config = DEConfig() if config is None else config
        config.validate()
        bounds.validate()
        super().__init__(optimizer_name="differential_evolution", config=config.to_dict(), bounds=bounds.to_dict())
        self.objective = objective
        self.bounds = bounds
        self.config = config
        self.verbose = verbose

        seed = config.seed if seed is None else seed
        if isinstance(seed, np.random.SeedSequence):
            self.seed_entropy = int(seed.entropy)
            self.seed_spawn_key = tuple(int(v) for v in seed.spawn_key)
        else:
            self.seed_entropy = int(seed)
            self.seed_spawn_key = ()
        self.metadata["seed"] = {"entropy": self.seed_entropy, "spawn_key": list(self.seed_spawn_key)}

        self.updating = config.updating
        if self.updating == "immediate" and config.workers > 1:
            warnings.warn("Immediate updating cannot be spread over workers, using deferred updating instead")
            self.updating = "deferred"

        self.limits = bounds.as_array()
        self.parameter_count = bounds.dimension
        self.num_population_members = config.population_members(self.parameter_count)
        self.reset()

    def reset(self):
        super().reset()
        self.rng = np.random.default_rng(np.random.SeedSequence(self.seed_entropy, spawn_key=self.seed_spawn_key))
        if self.config.init == "latinhypercube":
            sampler = qmc.LatinHypercube(d=self.parameter_count, seed=self.rng)
            self.population = sampler.random(n=self.num_population_members)
        else:
            self.population = self.rng.uniform(size=(self.num_population_members, self.parameter_count))
        self.population_energies = np.full(self.num_population_members, np.inf)
        self.scale = None
        self.nfev = 0
        self.best_history = []

    @property
    def x(self):
        """Best member in search-box coordinates"""
        return self._scale_parameters(self.population[0])

    def _scale_parameters(self, trial: np.ndarray):
        lower, upper = self.limits[:, 0], self.limits[:, 1]
        return np.clip(lower + trial * (upper - lower), lower, upper)

    def _unscale_parameters(self, parameters: np.ndarray):
        lower, upper = self.limits[:, 0], self.limits[:, 1]
        return np.clip((parameters - lower) / (upper - lower), 0.0, 1.0)

    def _calculate_population_energies(self, trials: np.ndarray):
        """Objective values of a block of unit cube members, NaN and Inf mapped to +inf"""
        parameters = self._scale_parameters(trials)
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                energies = list(executor.map(self.objective, parameters))
        elif self.config.vectorized:
            energies = self.objective(parameters)
        else:
            energies = [self.objective(p) for p in parameters]
        energies = np.asarray(energies, dtype=np.float64).reshape(-1)
        if energies.size != trials.shape[0]:
            raise OptimizationError(f"Objective returned {energies.size} values for {trials.shape[0]} members")
        self.nfev += trials.shape[0]
        return np.where(np.isfinite(energies), energies, np.inf)

    def _promote_lowest_energy(self):
        # swaps the best member into row 0
        best = np.argmin(self.population_energies)
        self.population_energies[[0, best]] = self.population_energies[[best, 0]]
        self.population[[0, best], :] = self.population[[best, 0], :]

    def _ensure_initial_energies(self):
        if self.global_steps > 0 or np.any(np.isfinite(self.population_energies)):
            return
        self.population_energies = self._calculate_population_energies(self.population)
        if np.all(np.isinf(self.population_energies)):
            raise OptimizationError("Every member of the initial population evaluated to NaN or Inf")
        self._promote_lowest_energy()
        self.best_history.append(float(self.population_energies[0]))

    def _select_samples(self, candidate: int, number_samples: int):
        """Distinct member indices, none equal to candidate"""
        samples = self.rng.choice(self.num_population_members - 1, size=number_samples, replace=False)
        samples[samples >= candidate] += 1
        return samples

    def _mutate(self, candidate: int):
        """Trial vector for one member, binomial crossover of the mutant with the member"""
        rng = self.rng
        population = self.population
        trial = np.copy(population[candidate])
        fill_point = rng.choice(self.parameter_count)
        r0, r1, r2 = self._select_samples(candidate, 3)

        if self.config.strategy == "best1bin":
            bprime = population[0] + self.scale * (population[r0] - population[r1])
        elif self.config.strategy == "rand1bin":
            bprime = population[r0] + self.scale * (population[r1] - population[r2])
        else:
            bprime = population[candidate] + self.scale * (
                population[0] - population[candidate] + population[r0] - population[r1]
            )

        crossovers = rng.uniform(size=self.parameter_count) < self.config.crossover_rate
        # at least one coordinate always comes from the mutant
        crossovers[fill_point] = True
        trial = np.where(crossovers, bprime, trial)
        return np.clip(trial, 0.0, 1.0)

    def step(self):
        """Evolve the population by one generation

        Returns
        -------
        x: ndarray
            Best member after the generation
        energy: float
            Its objective value
        """
        self._ensure_initial_energies()

        if isinstance(self.config.mutation_factor, tuple):
            self.scale = self.rng.uniform(*self.config.mutation_factor)
        else:
            self.scale = float(self.config.mutation_factor)

        if self.updating == "immediate":
            for candidate in range(self.num_population_members):
                trial = self._mutate(candidate)
                energy = self._calculate_population_energies(trial[np.newaxis, :])[0]
                if energy <= self.population_energies[candidate]:
                    self.population[candidate] = trial
                    self.population_energies[candidate] = energy
                    if energy <= self.population_energies[0]:
                        self._promote_lowest_energy()
        else:
            trial_population = np.array([self._mutate(candidate) for candidate in range(self.num_population_members)])
            trial_energies = self._calculate_population_energies(trial_population)
            improved = trial_energies <= self.population_energies
            self.population = np.where(improved[:, np.newaxis], trial_population, self.population)
            self.population_energies = np.where(improved, trial_energies, self.population_energies)
            self._promote_lowest_energy()

        self.global_steps += 1
        self.best_history.append(float(self.population_energies[0]))
        return self.x, float(self.population_energies[0])

    def converged(self):
        if np.any(np.isinf(self.population_energies)):
            return False
        energies = self.population_energies
        return bool(np.std(energies) <= self.config.abs_tol + self.config.rel_tol * np.abs(np.mean(energies)))

    def _scalar_objective(self, x: np.ndarray):
        x = np.clip(x, self.limits[:, 0], self.limits[:, 1])
        if self.config.vectorized:
            value = np.asarray(self.objective(x[np.newaxis, :]), dtype=np.float64).reshape(-1)[0]
        else:
            value = float(self.objective(x))
        return value if np.isfinite(value) else np.inf

    def _polish(self):
        result = scipy_minimize(
            self._scalar_objective,
            np.copy(self.x),
            method=self.config.polish_method,
            bounds=self.limits,
        )
        self.nfev += int(result.nfev)
        polished = np.clip(result.x, self.limits[:, 0], self.limits[:, 1])
        if result.fun < self.population_energies[0]:
            self.population[0] = self._unscale_parameters(polished)
            self.population_energies[0] = float(result.fun)

    def solve(self):
        """Run generations until the population energies converge or max_iterations is reached

        Returns
        -------
        outcome: DEOutcome
        """
        self._ensure_initial_energies()
        converged = False
        remaining = self.config.max_iterations - self.global_steps
        for _ in tqdm(range(remaining), disable=not self.verbose, desc="generations", leave=False):
            self.step()
            if self.converged():
                converged = True
                break

        if self.config.polish:
            self._polish()

        return DEOutcome(
            best_vector=self.x,
            mse=float(self.population_energies[0]),
            iterations_used=int(self.global_steps),
            converged=converged,
            objective_evaluations=int(self.nfev),
        )

    def _state_for_comparison(self):
        state = super()._state_for_comparison()
        state["rng"] = self.rng.bit_generator.state
        return state


def _start_seeds(seed, n_starts: int):
    """Seed of each start, the first one is the given seed itself"""
    if isinstance(seed, np.random.SeedSequence):
        entropy, spawn_key = int(seed.entropy), tuple(int(v) for v in seed.spawn_key)
    else:
        entropy, spawn_key = int(seed), ()
    seeds = [np.random.SeedSequence(entropy, spawn_key=spawn_key)]
    for start in range(1, n_starts):
        seeds.append(np.random.SeedSequence(entropy, spawn_key=spawn_key + (start,)))
    return seeds


def minimize(objective: Callable, bounds: SearchBounds, config: Optional[DEConfig] = None, seed=None, verbose: bool = False):
    """Minimize objective over the box with differential evolution

    config.n_starts populations are evolved independently and the lowest energy
    is kept. Start 0 uses the seed unchanged, start j > 0 appends j to its spawn key.

    Parameters
    ----------
    objective: callable
        Function of an n-vector, or of a (P, n) population when config.vectorized
    bounds: SearchBounds
        Search box
    config: DEConfig
        Solver settings
    seed: int or np.random.SeedSequence
        Overrides config.seed
    verbose: bool
        Show a progress bar over generations

    Returns
    -------
    outcome: DEOutcome
        best_vector, mse, iterations_used and converged of the winning start,
        objective_evaluations summed over all starts
    """
    config = DEConfig() if config is None else config
    config.validate()
    seed = config.seed if seed is None else seed

    best, evaluations = None, 0
    for start_seed in _start_seeds(seed, int(config.n_starts)):
        outcome = DESolver(objective, bounds, config=config, seed=start_seed, verbose=verbose).solve()
        evaluations += outcome.objective_evaluations
        if best is None or outcome.mse < best.mse:
            best = outcome
    best.objective_evaluations = evaluations
    return best
