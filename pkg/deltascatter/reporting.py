"""
Writers for the files the commands produce: JSON reports, CSV tables and SVG plots.
"""
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib as mpl  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from deltascatter.optimizers.window_matching import MatchResult  # noqa: E402
from deltascatter.scattering.scattering_core import Spectrum, transmission_spectrum  # noqa: E402
from deltascatter.utils import FLOAT_FORMAT, uniform_k_grid  # noqa: E402

# Points per unit k on plotted curves
PLOT_DENSITY = 300


def _prepare(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise OSError(f"Cannot create the directory for {path}: {error}") from error
    return path


def dumps_json(data: dict):
    """Stable text form: sorted keys, full precision floats, trailing newline"""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(data: dict, path):
    path = _prepare(path)
    try:
        path.write_text(dumps_json(data))
    except OSError as error:
        raise OSError(f"Cannot write {path}: {error}") from error
    return path


def read_json(path):
    with open(path) as handle:
        return json.load(handle)


def write_frame(frame: pd.DataFrame, path):
    path = _prepare(path)
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as error:
        raise OSError(f"Cannot write {path}: {error}") from error
    return path


def write_spectrum_csv(spectrum: Spectrum, path):
    """Two column CSV with header k,T and one row per grid point"""
    return write_frame(spectrum.to_frame(), path)


def _save_svg(save_path):
    save_path = _prepare(save_path)
    try:
        plt.savefig(save_path, format="svg", bbox_inches="tight", metadata={"Date": None})
    except OSError as error:
        raise OSError(f"Cannot write {save_path}: {error}") from error
    finally:
        plt.close("all")
    return save_path


def plot_spectrum(spectrum: Spectrum, save_path=None, ax: mpl.axes.Axes = None, label: str = None):
    """Transmission curve T(k)

    Parameters
    ----------
    spectrum: Spectrum
        Curve to plot
    save_path: str or Path
        SVG written here when given
    ax: mpl.axes.Axes
        Axis to draw on, a new figure is created when None
    label: str
        Legend entry

    Returns
    -------
    ax: mpl.axes.Axes
    """
    if ax is None:
        f, ax = plt.subplots(1, 1, figsize=(8, 5))
    ax.plot(spectrum.k_values, spectrum.t_values, label=label)
    ax.set_xlabel("k")
    ax.set_ylabel("T(k)")
    ax.set_ylim(-0.02, 1.02)
    if label is not None:
        ax.legend()
    if save_path is not None:
        _save_svg(save_path)
    return ax


def plot_window_overlay(target, result: MatchResult, save_path=None, ax: mpl.axes.Axes = None, margin: float = 0.5):
    """Target and fitted spectra around one window, window edges dashed and the MSE in the title

    Parameters
    ----------
    target: TargetTwoDelta
        Two-spike target
    result: MatchResult
        Fit of one window
    save_path: str or Path
        SVG written here when given
    ax: mpl.axes.Axes
        Axis to draw on, a new figure is created when None
    margin: float
        Fraction of the window width shown on each side of it

    Returns
    -------
    ax: mpl.axes.Axes
    """
    window = result.window
    lo = max(window.lo - margin * window.width, 0.5 * window.lo)
    hi = window.hi + margin * window.width
    n_points = max(int(PLOT_DENSITY * (hi - lo)), 200)
    k_values = uniform_k_grid(lo, hi, n_points)

    if ax is None:
        f, ax = plt.subplots(1, 1, figsize=(8, 5))
    ax.plot(k_values, target.transmission(k_values), color="black", label="two-spike target")
    fitted = transmission_spectrum(result.descriptor(), k_values)
    ax.plot(fitted.k_values, fitted.t_values, color="tab:red", linestyle="--", label="three-spike fit")
    for edge in (window.lo, window.hi):
        ax.axvline(edge, color="grey", linestyle=":")
    ax.axvspan(window.lo, window.hi, color="grey", alpha=0.1)
    strengths = ", ".join(f"{b:.3f}" for b in result.strengths)
    ax.set_title(f"W{window.index}  MSE = {result.mse:.2e}  b = ({strengths})")
    ax.set_xlabel("k")
    ax.set_ylabel("T(k)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right")
    if save_path is not None:
        _save_svg(save_path)
    return ax


def plot_sweep_summary(summary: pd.DataFrame, save_path=None, ax: mpl.axes.Axes = None):
    """Average MSE per target against its number of resonances, one line per alpha1, log scale"""
    if ax is None:
        f, ax = plt.subplots(1, 1, figsize=(8, 5))
    for alpha1, group in summary.groupby("alpha1"):
        ax.semilogy(group["n_resonances"], group["average_mse"], marker="o", label=f"alpha1 = {alpha1:g}")
    ax.set_xlabel("number of resonances")
    ax.set_ylabel("average MSE")
    ax.set_xticks(np.unique(summary["n_resonances"]))
    ax.legend()
    if save_path is not None:
        _save_svg(save_path)
    return ax
