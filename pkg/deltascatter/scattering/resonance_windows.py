"""
Resonances of the opposite-sign two-spike target and the optimization windows built around them.

With alpha2 = -alpha1 the two-spike spectrum reaches T = 1 whenever cos(2 k dx) = 1,
i.e. at k_n = pi n / dx, n = 1, 2, ... The other ways of reaching T = 1 are not
used as window sources: equal strengths (alpha1 = alpha2) give a single isolated
resonance at k = alpha1, and the remaining branches only give k <= 0.
"""

import warnings
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.signal import find_peaks

from deltascatter.exceptions import DomainError
from deltascatter.scattering.closed_form import transmission_closed_2delta
from deltascatter.scattering.scattering_core import DeltaSystem, Spectrum
from deltascatter.utils import check_positive, check_wavenumber


@dataclass(frozen=True)
class TargetTwoDelta:
    """Two spikes +alpha1 and -alpha1 separated by dx

    Attributes
    ----------
    alpha1: float
        Strength of the left spike (> 0), the right spike has -alpha1
    dx: float
        Separation between the spikes (> 0)
    """

    alpha1: float
    dx: float

    def __post_init__(self):
        check_positive(self.alpha1, "alpha1")
        check_positive(self.dx, "dx")

    @property
    def alpha2(self):
        return -self.alpha1

    def system(self, x_a: float = 0.0):
        return DeltaSystem.two_delta(self.alpha1, self.alpha2, self.dx, x0=x_a)

    def transmission(self, k):
        return transmission_closed_2delta(self.alpha1, self.alpha2, self.dx, k)


@dataclass(frozen=True)
class Window:
    """Symmetric k-interval around one predicted resonance

    Attributes
    ----------
    index: int
        Resonance order n >= 1
    center: float
        Resonance wavenumber k_n
    half_width: float
        Half width w before clipping
    lo, hi: float
        Window limits after clipping to the requested range
    """

    index: int
    center: float
    half_width: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.index < 1:
            raise DomainError(f"Window index must be >= 1, got {self.index}")
        if not 0 < self.lo < self.hi:
            raise DomainError(f"Window needs 0 < lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def clipped(self):
        unclipped = (self.center - self.half_width, self.center + self.half_width)
        return not np.allclose((self.lo, self.hi), unclipped, rtol=1e-12, atol=0.0)

    def to_dict(self):
        return {
            "n": int(self.index),
            "k_n": float(self.center),
            "half_width": float(self.half_width),
            "window_lo": float(self.lo),
            "window_hi": float(self.hi),
        }

    @classmethod
    def from_dict(cls, data: dict):
        return cls(
            index=int(data["n"]),
            center=float(data["k_n"]),
            half_width=float(data["half_width"]),
            lo=float(data["window_lo"]),
            hi=float(data["window_hi"]),
        )


def _check_range(k_min: float, k_max: float):
    k_min = float(check_wavenumber(k_min, "k_min"))
    k_max = float(check_wavenumber(k_max, "k_max"))
    if not k_min < k_max:
        raise DomainError(f"k_min must be smaller than k_max, got [{k_min}, {k_max}]")
    return k_min, k_max


def predict_resonances(target: TargetTwoDelta, k_min: float, k_max: float):
    """All k_n = pi n / dx inside [k_min, k_max], ascending

    Parameters
    ----------
    target: TargetTwoDelta
    k_min, k_max: float
        Range to search, 0 < k_min < k_max

    Returns
    -------
    resonances: list of float
        Possibly empty
    """
    k_min, k_max = _check_range(k_min, k_max)
    spacing = np.pi / target.dx
    first = max(1, int(np.ceil(k_min / spacing)))
    last = int(np.floor(k_max / spacing))
    resonances = [n * spacing for n in range(first, last + 1)]
    return [k for k in resonances if k_min <= k <= k_max]


def n_resonances_in_range(target: TargetTwoDelta, k_min: float, k_max: float):
    return len(predict_resonances(target, k_min, k_max))


def separation_for_resonance_count(n_resonances: int, k_max: float = 3.0):
    """Separation dx that places exactly n_resonances resonances in (0, k_max]

    k_n <= k_max < k_(n+1) holds for dx in [pi n / k_max, pi (n+1) / k_max), the
    middle of that interval is returned.
    """
    if int(n_resonances) != n_resonances or n_resonances < 1:
        raise DomainError(f"n_resonances must be a positive integer, got {n_resonances}")
    check_positive(k_max, "k_max")
    return np.pi * (n_resonances + 0.5) / k_max


def detect_peaks(spectrum: Spectrum, prominence_floor: float = 0.1):
    """Locations of local maxima of T(k) standing more than prominence_floor above their surroundings

    Local maxima are found with scipy.signal.find_peaks. Prominence is measured
    against the lower of the two flanking minima, the minimum of T between the peak
    and the neighbouring peak (or the end of the grid) on each side.

    Parameters
    ----------
    spectrum: Spectrum
        Sampled transmission curve
    prominence_floor: float
        Minimum height above the flanking minimum

    Returns
    -------
    peaks: list of float
        k values of the accepted maxima, ascending
    """
    t_values = spectrum.t_values
    candidates, _ = find_peaks(t_values)
    if candidates.size == 0:
        return []
    edges = np.concatenate([[0], candidates, [t_values.size - 1]])
    peaks = []
    for i, peak in enumerate(candidates):
        left_min = np.min(t_values[edges[i] : peak + 1])
        right_min = np.min(t_values[peak : edges[i + 2] + 1])
        if t_values[peak] - min(left_min, right_min) > prominence_floor:
            peaks.append(float(spectrum.k_values[peak]))
    return peaks


def build_windows(resonances: List[float], k_min: float, k_max: float):
    """Symmetric windows around each resonance

    Half width w is half the mean spacing between consecutive resonances, or k_1 / 2
    when there is a single resonance. Windows reaching outside [k_min, k_max] are
    clipped at the range edge, the centre stays on the resonance.

    Parameters
    ----------
    resonances: list of float
        Ascending resonance wavenumbers inside [k_min, k_max]
    k_min, k_max: float
        Range the windows must stay in

    Returns
    -------
    windows: list of Window
    """
    k_min, k_max = _check_range(k_min, k_max)
    resonances = np.asarray(resonances, dtype=np.float64)
    if resonances.size == 0:
        raise DomainError("Cannot build windows without resonances")
    if np.any(np.diff(resonances) <= 0):
        raise DomainError(f"Resonances must be strictly ascending, got {resonances}")
    if resonances[0] < k_min or resonances[-1] > k_max:
        raise DomainError(f"Resonances must lie inside [{k_min}, {k_max}], got {resonances}")

    if resonances.size > 1:
        half_width = 0.5 * float(np.mean(np.diff(resonances)))
    else:
        half_width = 0.5 * float(resonances[0])

    windows = []
    for index, center in enumerate(resonances, start=1):
        lo = max(center - half_width, k_min)
        hi = min(center + half_width, k_max)
        if lo != center - half_width or hi != center + half_width:
            warnings.warn(f"Window {index} around k={center:.6g} clipped to [{lo:.6g}, {hi:.6g}]")
        windows.append(Window(index=index, center=float(center), half_width=half_width, lo=lo, hi=hi))
    return windows


def global_window(k_min: float, k_max: float):
    """One window spanning the whole range, used when windowing is switched off"""
    k_min, k_max = _check_range(k_min, k_max)
    center = 0.5 * (k_min + k_max)
    return Window(index=1, center=center, half_width=center - k_min, lo=k_min, hi=k_max)
