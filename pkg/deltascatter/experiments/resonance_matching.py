"""
Run configuration, match reports and the resonance sweep.

A run is described by one JSON document:

    {
      "preset": "two_resonances",                        optional, fills "target"
      "target":   {"alpha1": 2.0, "dx": 2.65},
      "system":   {"strengths": [...], "positions": [...]}, spectrum of any system
      "k_range":  {"k_min": 0.01, "k_max": 3.0, "n_points": 3000, "prominence_floor": 0.1},
      "bounds":   {"strength_bound_factor": 2.0, "strength_floor": 0.5, "d_min": 0.3, "d_max": 5.0},
      "de":       {DEConfig fields},
      "matching": {"n_samples": 200, "dense_factor": 10, "x_a": 0.0, "global": false, "workers": 1},
      "verify":   {"k_min": 50.0, "k_max": 500.0, "n_points": 20001},
      "output":   {"out_dir": "results", "plots": false}
    }

Every section and every key is optional, missing values take the defaults above.
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from deltascatter import __version__
from deltascatter.exceptions import DomainError
from deltascatter.experiments.experiment_core import Experiment
from deltascatter.optimizers.differential_evolution import DEConfig, SearchBounds
from deltascatter.optimizers.window_matching import MatchResult, match_all
from deltascatter.scattering.resonance_windows import (
    TargetTwoDelta,
    build_windows,
    detect_peaks,
    predict_resonances,
    separation_for_resonance_count,
)
from deltascatter.scattering.scattering_core import DeltaSystem, spectrum_over_grid
from deltascatter.utils import check_positive, uniform_k_grid

PRESETS = {
    "two_resonances": {"alpha1": 2.0, "dx": 2.65},
    "five_resonances": {"alpha1": 3.0, "dx": 5.97},
}

# JSON section -> {JSON key: RunConfig field}
_SECTIONS = {
    "target": {"alpha1": "alpha1", "dx": "dx"},
    "system": {"strengths": "system_strengths", "positions": "system_positions"},
    "k_range": {"k_min": "k_min", "k_max": "k_max", "n_points": "n_points", "prominence_floor": "prominence_floor"},
    "bounds": {
        "strength_bound_factor": "strength_bound_factor",
        "strength_floor": "strength_floor",
        "d_min": "d_min",
        "d_max": "d_max",
    },
    "matching": {
        "n_samples": "n_samples",
        "dense_factor": "dense_factor",
        "x_a": "x_a",
        "global": "use_global_window",
        "workers": "workers",
    },
    "verify": {"k_min": "verify_k_min", "k_max": "verify_k_max", "n_points": "verify_n_points"},
    "output": {"out_dir": "out_dir", "plots": "plots"},
}


def _check_integer(value, name: str, minimum: int):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value}")


@dataclass
class RunConfig:
    """Everything a command needs, see the module docstring for the JSON layout"""

    alpha1: Optional[float] = None
    dx: Optional[float] = None
    system_strengths: Optional[List[float]] = None
    system_positions: Optional[List[float]] = None
    k_min: float = 0.01
    k_max: float = 3.0
    n_points: int = 3000
    prominence_floor: float = 0.1
    strength_bound_factor: float = 2.0
    strength_floor: float = 0.5
    d_min: float = 0.3
    d_max: float = 5.0
    de: DEConfig = field(default_factory=DEConfig)
    n_samples: int = 200
    dense_factor: int = 10
    x_a: float = 0.0
    use_global_window: bool = False
    workers: int = 1
    verify_k_min: float = 50.0
    verify_k_max: float = 500.0
    verify_n_points: int = 20001
    out_dir: str = "results"
    plots: bool = False

    @property
    def has_target(self):
        return self.alpha1 is not None or self.dx is not None

    def target(self):
        if self.alpha1 is None or self.dx is None:
            raise DomainError("This command needs a target with both alpha1 and dx")
        return TargetTwoDelta(alpha1=float(self.alpha1), dx=float(self.dx))

    def source(self):
        """System whose spectrum is computed, an explicit system wins over the target"""
        if self.system_strengths is not None or self.system_positions is not None:
            if self.system_strengths is None or self.system_positions is None:
                raise DomainError("A system needs both strengths and positions")
            return DeltaSystem.from_arrays(self.system_strengths, self.system_positions)
        if not self.has_target:
            raise DomainError("The configuration names neither a target nor a system")
        return self.target().system(x_a=self.x_a)

    def bounds(self):
        return SearchBounds.default_for(
            self.target().alpha1,
            strength_factor=self.strength_bound_factor,
            strength_floor=self.strength_floor,
            d_min=self.d_min,
            d_max=self.d_max,
        )

    def k_grid(self):
        return uniform_k_grid(self.k_min, self.k_max, self.n_points)

    def verify_grid(self):
        return uniform_k_grid(self.verify_k_min, self.verify_k_max, self.verify_n_points)

    def validate(self):
        """Check every field before any work starts, raises a ValueError subclass on the first problem"""
        self.source()
        if self.has_target:
            self.target()
        self.k_grid()
        self.verify_grid()
        if not self.prominence_floor >= 0:
            raise DomainError(f"prominence_floor must be >= 0, got {self.prominence_floor}")
        check_positive(self.strength_bound_factor, "strength_bound_factor")
        _check_integer(self.n_samples, "n_samples", 2)
        _check_integer(self.dense_factor, "dense_factor", 1)
        _check_integer(self.workers, "workers", 1)
        if not np.isfinite(self.x_a):
            raise DomainError(f"x_a must be finite, got {self.x_a}")
        self.de.validate()
        return self

    def validate_fit(self):
        """validate plus the search bounds, needed only by the commands that fit"""
        self.validate()
        self.bounds()
        return self

    def with_overrides(self, **overrides):
        """Copy with the non-None overrides applied, e.g. command-line flags on top of a file"""
        overrides = {key: value for key, value in overrides.items() if value is not None}
        if "seed" in overrides:
            overrides["de"] = replace(self.de, seed=int(overrides.pop("seed")))
        return replace(self, **overrides)

    def to_dict(self):
        data = {}
        for section, keys in _SECTIONS.items():
            values = {key: getattr(self, attribute) for key, attribute in keys.items()}
            if section in ("target", "system") and all(value is None for value in values.values()):
                continue
            if section == "system":
                values = {key: [float(v) for v in value] for key, value in values.items()}
            data[section] = values
        data["de"] = self.de.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict):
        if not isinstance(data, dict):
            raise DomainError(f"A run configuration must be a JSON object, got {type(data).__name__}")
        unknown = set(data) - set(_SECTIONS) - {"de", "preset"}
        if unknown:
            raise DomainError(f"Unknown configuration sections {sorted(unknown)}")
        kwargs = {}
        if "preset" in data:
            if data["preset"] not in PRESETS:
                raise DomainError(f"Unknown preset {data['preset']}, available presets: {sorted(PRESETS)}")
            kwargs.update(PRESETS[data["preset"]])
        for section, keys in _SECTIONS.items():
            values = data.get(section, {})
            if not isinstance(values, dict):
                raise DomainError(f"Section {section} must be a JSON object")
            unknown = set(values) - set(keys)
            if unknown:
                raise DomainError(f"Unknown keys {sorted(unknown)} in section {section}, available keys: {sorted(keys)}")
            for key, value in values.items():
                kwargs[keys[key]] = value
        if "de" in data:
            if not isinstance(data["de"], dict):
                raise DomainError("Section de must be a JSON object")
            kwargs["de"] = DEConfig.from_dict(data["de"])
        return cls(**kwargs).validate()


@dataclass
class MatchReport:
    """Per window fits of one target plus provenance

    Attributes
    ----------
    results: list of MatchResult
        One per window, in window order
    config: RunConfig
        Configuration the report was produced with
    version: str
        deltascatter version that produced it
    """

    results: List[MatchResult]
    config: RunConfig
    version: str = __version__

    def __post_init__(self):
        if len(self.results) == 0:
            raise DomainError("A match report needs at least one window")

    @property
    def mode(self):
        return "global" if self.config.use_global_window else "windowed"

    @property
    def mse_values(self):
        return np.array([result.mse for result in self.results])

    @property
    def mean_mse(self):
        """Average MSE of the system, the arithmetic mean over its windows"""
        return float(np.mean(self.mse_values))

    def summary(self):
        return {
            "n_windows": len(self.results),
            "mean_mse": self.mean_mse,
            "mean_dense_mse": float(np.mean([result.dense_mse for result in self.results])),
            "max_mse": float(np.max(self.mse_values)),
            "all_converged": all(result.converged for result in self.results),
        }

    def to_dict(self):
        target = self.config.target()
        return {
            "provenance": {
                "tool": "delta-scatter",
                "version": self.version,
                "seed": int(self.config.de.seed),
                "config": self.config.to_dict(),
            },
            "target": {"alpha1": target.alpha1, "alpha2": target.alpha2, "dx": target.dx},
            "mode": self.mode,
            "windows": [result.to_dict() for result in self.results],
            "summary": self.summary(),
        }

    @classmethod
    def from_dict(cls, data: dict):
        return cls(
            results=[MatchResult.from_dict(window) for window in data["windows"]],
            config=RunConfig.from_dict(data["provenance"]["config"]),
            version=data["provenance"].get("version", __version__),
        )

    def to_frame(self):
        """One row per window"""
        rows = []
        for result in self.results:
            row = {
                "n": result.window.index,
                "k_n": result.window.center,
                "window_lo": result.window.lo,
                "window_hi": result.window.hi,
                "mse": result.mse,
                "dense_mse": result.dense_mse,
                "iterations": result.iterations_used,
                "converged": result.converged,
            }
            row.update(dict(zip(("b1", "b2", "b3", "dx12", "dx23"), result.best_vector)))
            rows.append(row)
        return pd.DataFrame(rows)


class ResonanceMatching(Experiment):
    """Spectrum, resonances and windowed fit of one target

    Attributes
    ----------
    config: RunConfig
        Validated run configuration
    verbose: bool
        Show progress bars
    """

    def __init__(self, config: RunConfig, verbose: bool = False):
        config.validate()
        super().__init__(experiment_name="resonance_matching", config=config.to_dict())
        self.config = config
        self.verbose = verbose

    def spectrum(self):
        return spectrum_over_grid(self.config.source(), self.config.k_min, self.config.k_max, self.config.n_points)

    def resonances(self):
        """Windows around the predicted resonances, empty when none falls in range"""
        resonances = predict_resonances(self.config.target(), self.config.k_min, self.config.k_max)
        if len(resonances) == 0:
            return []
        return build_windows(resonances, self.config.k_min, self.config.k_max)

    def detected_peaks(self):
        return detect_peaks(self.spectrum(), prominence_floor=self.config.prominence_floor)

    def run(self):
        """Fit every window and collect the results in a MatchReport"""
        config = self.config.validate_fit()
        results = match_all(
            config.target(),
            config.k_min,
            config.k_max,
            bounds=config.bounds(),
            config=config.de,
            n_samples=config.n_samples,
            dense_factor=config.dense_factor,
            x_a=config.x_a,
            use_global_window=config.use_global_window,
            workers=config.workers,
            verbose=self.verbose,
        )
        return MatchReport(results=results, config=config)


class ResonanceSweep(Experiment):
    """Windowed fits of targets holding 1 to 5 resonances for several strengths

    For each alpha1 and resonance count n, the separation is chosen with
    separation_for_resonance_count so that exactly n resonances fall below k_max.

    Attributes
    ----------
    base_config: RunConfig
        Range, bounds and solver settings shared by every target
    alphas: sequence of float
        Target strengths alpha1
    resonance_counts: sequence of int
        Number of resonances per target
    """

    def __init__(
        self,
        base_config: RunConfig,
        alphas: Sequence[float] = (2.0, 3.0, 4.0),
        resonance_counts: Sequence[int] = (1, 2, 3, 4, 5),
        verbose: bool = False,
    ):
        super().__init__(experiment_name="resonance_sweep", alphas=list(alphas), resonance_counts=list(resonance_counts))
        self.base_config = base_config
        self.alphas = [float(alpha) for alpha in alphas]
        self.resonance_counts = [int(n) for n in resonance_counts]
        self.verbose = verbose

    def configs(self):
        configs = []
        for alpha1 in self.alphas:
            for n_resonances in self.resonance_counts:
                dx = separation_for_resonance_count(n_resonances, k_max=self.base_config.k_max)
                config = replace(self.base_config, alpha1=alpha1, dx=dx, system_strengths=None, system_positions=None)
                configs.append((n_resonances, config.validate_fit()))
        return configs

    def run(self):
        """Fit every target

        Returns
        -------
        frames: dict of pandas.DataFrame
            windows (one row per window), summary (average MSE per target) and
            by_position (average MSE per resonance index over all targets)
        """
        window_frames, summary_rows = [], []
        for n_resonances, config in tqdm(self.configs(), disable=not self.verbose, desc="systems"):
            report = ResonanceMatching(config).run()
            frame = report.to_frame()
            frame.insert(0, "n_resonances", n_resonances)
            frame.insert(0, "dx", config.dx)
            frame.insert(0, "alpha1", config.alpha1)
            window_frames.append(frame)
            summary = report.summary()
            summary_rows.append(
                {
                    "alpha1": config.alpha1,
                    "dx": config.dx,
                    "n_resonances": n_resonances,
                    "n_windows": summary["n_windows"],
                    "average_mse": summary["mean_mse"],
                    "average_dense_mse": summary["mean_dense_mse"],
                    "max_mse": summary["max_mse"],
                }
            )
        windows = pd.concat(window_frames, ignore_index=True)
        by_position = windows.groupby("n", as_index=False).agg(average_mse=("mse", "mean"), n_systems=("mse", "size"))
        return {"windows": windows, "summary": pd.DataFrame(summary_rows), "by_position": by_position}
