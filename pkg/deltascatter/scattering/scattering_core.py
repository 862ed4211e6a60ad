"""
Transfer-matrix description of 1-D scattering off a finite set of delta spikes

    V(x) = sum_i alpha_i delta(x - x_i),   x_1 < x_2 < ... < x_N

in natural units (hbar = 1, m = 1/2, k = sqrt(E)). A single spike maps the
plane-wave amplitudes (A, B) on its left to (C, D) on its right through

    M = [[1 + i a/k,              (i a/k) exp(-2 i k x0)],
         [-(i a/k) exp(2 i k x0),  1 - i a/k            ]]

and a system through the ordered product M_total = M_N ... M_2 M_1. The
transmission and reflection probabilities are T = 1/|M11|^2 and
R = |M21/M11|^2.

Every evaluator accepts a scalar k or a 1-D array of k values.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from deltascatter.exceptions import DomainError, InvariantError
from deltascatter.utils import check_finite, check_wavenumber, uniform_k_grid


@dataclass(frozen=True)
class DeltaSpike:
    """Single point scatterer alpha * delta(x - position)

    Attributes
    ----------
    strength: float
        Coupling alpha (units of k), positive for a barrier, negative for a well
    position: float
        Location x0 of the spike
    """

    strength: float
    position: float

    def __post_init__(self):
        if not (np.isfinite(self.strength) and np.isfinite(self.position)):
            raise InvariantError(f"Spike strength and position must be finite, got {self}")


class DeltaSystem(object):
    """Ordered collection of delta spikes, the potential under study

    Positions are checked once here (strictly increasing, at least one spike)
    so the evaluators never need to re-validate the ordering.

    Attributes
    ----------
    spikes: tuple of DeltaSpike
        Spikes sorted from left to right
    strengths: ndarray (N,)
        Strength of each spike
    positions: ndarray (N,)
        Position of each spike
    """

    def __init__(self, spikes: Iterable[DeltaSpike]):
        spikes = tuple(spikes)
        if len(spikes) < 1:
            raise InvariantError("A DeltaSystem needs at least one spike")
        for spike in spikes:
            if not isinstance(spike, DeltaSpike):
                raise InvariantError(f"Expected DeltaSpike instances, got {type(spike)}")
        positions = np.array([s.position for s in spikes], dtype=np.float64)
        if np.any(np.diff(positions) <= 0):
            raise InvariantError(f"Spike positions must be strictly increasing, got {positions}")
        self.spikes = spikes
        self.strengths = np.array([s.strength for s in spikes], dtype=np.float64)
        self.positions = positions

    @classmethod
    def from_arrays(cls, strengths: Sequence[float], positions: Sequence[float]):
        strengths = check_finite(strengths, "strengths")
        positions = check_finite(positions, "positions")
        if strengths.shape != positions.shape or strengths.ndim != 1:
            raise InvariantError(f"strengths and positions must be 1-D and equal length, got {strengths.shape} and {positions.shape}")
        return cls(DeltaSpike(float(a), float(x)) for a, x in zip(strengths, positions))

    @classmethod
    def two_delta(cls, alpha1: float, alpha2: float, dx: float, x0: float = 0.0):
        """Spikes alpha1 at x0 and alpha2 at x0 + dx"""
        if not dx > 0:
            raise DomainError(f"Separation dx must be positive, got {dx}")
        return cls.from_arrays([alpha1, alpha2], [x0, x0 + dx])

    @classmethod
    def three_delta(cls, beta1: float, beta2: float, beta3: float, dx12: float, dx23: float, x1: float = 0.0):
        """Spikes at x1, x2 = x1 + dx12 and x3 = x2 + dx23"""
        if not (dx12 > 0 and dx23 > 0):
            raise DomainError(f"Spacings must be positive, got dx12={dx12}, dx23={dx23}")
        x2 = x1 + dx12
        return cls.from_arrays([beta1, beta2, beta3], [x1, x2, x2 + dx23])

    @property
    def n_spikes(self):
        return len(self.spikes)

    @property
    def total_strength(self):
        """Sum of absolute strengths, sets the scale above which the system becomes transparent"""
        return float(np.sum(np.abs(self.strengths)))

    def shifted(self, offset: float):
        """Same system translated by offset"""
        return DeltaSystem.from_arrays(self.strengths, self.positions + offset)

    def reversed(self):
        """Mirror image x -> -x, spikes listed again from left to right"""
        return DeltaSystem.from_arrays(self.strengths[::-1], -self.positions[::-1])

    def transmission(self, k):
        return transmission_at(self, k)

    def __len__(self):
        return len(self.spikes)

    def __iter__(self):
        return iter(self.spikes)

    def __eq__(self, other):
        if not isinstance(other, DeltaSystem):
            return NotImplemented
        return self.spikes == other.spikes

    def __repr__(self):
        body = ", ".join(f"({s.strength:g} @ {s.position:g})" for s in self.spikes)
        return f"DeltaSystem[{body}]"


@dataclass
class Spectrum:
    """Transmission probability sampled on a wavenumber grid

    Attributes
    ----------
    k_values: ndarray (n,)
        Strictly increasing positive wavenumbers
    t_values: ndarray (n,)
        Transmission probability at each wavenumber
    """

    k_values: np.ndarray
    t_values: np.ndarray

    def __post_init__(self):
        self.k_values = np.asarray(self.k_values, dtype=np.float64)
        self.t_values = np.asarray(self.t_values, dtype=np.float64)
        if self.k_values.ndim != 1 or self.k_values.shape != self.t_values.shape:
            raise InvariantError(f"k and T must be 1-D arrays of equal length, got {self.k_values.shape}, {self.t_values.shape}")
        if self.k_values.size == 0:
            raise DomainError("A spectrum needs at least one sample")
        if np.any(self.k_values <= 0) or np.any(np.diff(self.k_values) <= 0):
            raise InvariantError("Spectrum wavenumbers must be positive and strictly increasing")

    def __len__(self):
        return self.k_values.size

    @property
    def grid_step(self):
        if len(self) < 2:
            return 0.0
        return float(np.max(np.diff(self.k_values)))

    def to_frame(self):
        """pandas DataFrame with columns k and T"""
        return pd.DataFrame({"k": self.k_values, "T": self.t_values})


def delta_transfer_matrix(strength: float, position: float, k):
    """Transfer matrix of a single spike

    Parameters
    ----------
    strength: float
        Coupling alpha of the spike
    position: float
        Location x0 of the spike
    k: float or ndarray
        Wavenumber(s), each >= K_MIN

    Returns
    -------
    m: ndarray complex, (2, 2) for scalar k or (n, 2, 2) for an array of n wavenumbers
    """
    k = check_wavenumber(k)
    strength, position = check_finite([strength, position], "spike")
    b = strength / k
    phase = np.exp(2j * k * position)
    m = np.empty(k.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = 1 + 1j * b
    m[..., 0, 1] = 1j * b / phase
    m[..., 1, 0] = -1j * b * phase
    m[..., 1, 1] = 1 - 1j * b
    return m


def _rotation(theta: np.ndarray):
    """Free propagation of (psi, psi'/k) over a phase theta = k * distance"""
    c, s = np.cos(theta), np.sin(theta)
    r = np.empty(theta.shape + (2, 2), dtype=np.float64)
    r[..., 0, 0] = c
    r[..., 0, 1] = s
    r[..., 1, 0] = -s
    r[..., 1, 1] = c
    return r


def _jump(b: np.ndarray):
    """Derivative jump of (psi, psi'/k) across a spike of reduced strength b = alpha/k"""
    j = np.zeros(b.shape + (2, 2), dtype=np.float64)
    j[..., 0, 0] = 1.0
    j[..., 1, 1] = 1.0
    j[..., 1, 0] = -2.0 * b
    return j


def _plane_wave_basis(g: np.ndarray):
    """Map a real (psi, psi'/k) transfer matrix to the plane-wave amplitude basis"""
    g11, g12, g21, g22 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    m = np.empty(g.shape, dtype=np.complex128)
    m[..., 0, 0] = 0.5 * (g11 + g22) + 0.5j * (g12 - g21)
    m[..., 0, 1] = 0.5 * (g11 - g22) - 0.5j * (g12 + g21)
    m[..., 1, 0] = 0.5 * (g11 - g22) + 0.5j * (g12 + g21)
    m[..., 1, 1] = 0.5 * (g11 + g22) - 0.5j * (g12 - g21)
    return m


def system_transfer_matrix(system: DeltaSystem, k):
    """Ordered product M_N ... M_2 M_1 of the single spike matrices

    The product is accumulated in the real (psi, psi'/k) representation, where a
    spike is a shear and free flight a rotation, and mapped back to the
    plane-wave basis at the end. The plane-wave factors are nearly nilpotent at
    small k and their direct product loses digits to cancellation, the real
    factors do not.

    Parameters
    ----------
    system: DeltaSystem
        Spikes ordered from left to right
    k: float or ndarray
        Wavenumber(s), each >= K_MIN

    Returns
    -------
    m: ndarray complex, (2, 2) for scalar k or (n, 2, 2) for an array of n wavenumbers
    """
    if not isinstance(system, DeltaSystem):
        raise InvariantError(f"Expected a DeltaSystem, got {type(system)}")
    k = check_wavenumber(k)
    g = _rotation(k * system.positions[0])
    previous = system.positions[0]
    for strength, position in zip(system.strengths, system.positions):
        g = np.matmul(_rotation(k * (position - previous)), g)
        g = np.matmul(_jump(strength / k), g)
        previous = position
    g = np.matmul(_rotation(-k * previous), g)
    return _plane_wave_basis(g)


def _as_output(values: np.ndarray):
    if values.ndim == 0:
        return float(values)
    return values


def transmission_at(system: DeltaSystem, k):
    """Transmission probability T = 1 / |M_total[0, 0]|^2, in [0, 1]"""
    m = system_transfer_matrix(system, k)
    return _as_output(1.0 / np.abs(m[..., 0, 0]) ** 2)


def reflection_at(system: DeltaSystem, k):
    """Reflection probability R = |M21 / M11|^2, with T + R = 1"""
    m = system_transfer_matrix(system, k)
    return _as_output(np.abs(m[..., 1, 0] / m[..., 0, 0]) ** 2)


def _evaluate(source, k_values: np.ndarray):
    if hasattr(source, "transmission"):
        return np.asarray(source.transmission(k_values), dtype=np.float64)
    raise DomainError(f"Cannot evaluate a spectrum for {type(source)}, expected a DeltaSystem or closed-form descriptor")


def transmission_spectrum(source, k_values):
    """Spectrum of a DeltaSystem (or closed-form descriptor) on an arbitrary grid"""
    k_values = np.atleast_1d(check_wavenumber(k_values, "k_values"))
    return Spectrum(k_values, np.atleast_1d(_evaluate(source, k_values)))


def spectrum_over_grid(source, k_min: float, k_max: float, n_points: int):
    """Sample T(k) on n_points uniformly spaced wavenumbers in [k_min, k_max]

    Parameters
    ----------
    source: DeltaSystem or closed-form descriptor
        Anything with a transmission(k) method is accepted besides a DeltaSystem
    k_min, k_max: float
        Grid limits, both included
    n_points: int
        Number of samples, at least 2

    Returns
    -------
    spectrum: Spectrum
    """
    return transmission_spectrum(source, uniform_k_grid(k_min, k_max, n_points))


def transfer_matrix_determinant(m: np.ndarray):
    """det(M) for one matrix or a stack of matrices"""
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
