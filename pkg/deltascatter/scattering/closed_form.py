"""
Closed-form transmission of one, two and three spikes.

These are written out term by term and share no code with the matrix product
in scattering_core, so the two paths can be used to check each other.
All functions broadcast over their arguments, which lets the optimizer
evaluate a whole population on a whole grid in one call.
"""

from dataclasses import dataclass

import numpy as np

from deltascatter.exceptions import DomainError
from deltascatter.utils import check_wavenumber


def _check_spacing(value, name: str):
    value = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(value)) or np.any(value <= 0):
        raise DomainError(f"{name} must be finite and positive")
    return value


def _as_output(values):
    values = np.asarray(values)
    if values.ndim == 0:
        return float(values)
    return values


def transmission_closed_1delta(alpha, k):
    """T = 1 / (1 + (alpha/k)^2) for an isolated spike"""
    k = check_wavenumber(k)
    return _as_output(1.0 / (1.0 + (np.asarray(alpha, dtype=np.float64) / k) ** 2))


def transmission_closed_2delta(alpha1, alpha2, dx, k):
    """Two spikes alpha1, alpha2 separated by dx

    T = 1 / (A^2 + B^2) with
        A = 1 + (a1 a2 / k^2) (cos(2 k dx) - 1)
        B = (a1 + a2) / k - (a1 a2 / k^2) sin(2 k dx)
    """
    k = check_wavenumber(k)
    dx = _check_spacing(dx, "dx")
    alpha1 = np.asarray(alpha1, dtype=np.float64)
    alpha2 = np.asarray(alpha2, dtype=np.float64)
    product = alpha1 * alpha2 / k**2
    phase = 2.0 * k * dx
    real = 1.0 + product * (np.cos(phase) - 1.0)
    imag = (alpha1 + alpha2) / k - product * np.sin(phase)
    return _as_output(1.0 / (real**2 + imag**2))


def three_delta_b11(beta1, beta2, beta3, dx12, dx23, k):
    """Real and imaginary part of (M3 M2 M1)[0, 0] for three spikes

    Parameters
    ----------
    beta1, beta2, beta3: float or ndarray
        Spike strengths, left to right
    dx12, dx23: float or ndarray
        Spacings x2 - x1 and x3 - x2, dx13 = dx12 + dx23
    k: float or ndarray
        Wavenumber(s)

    Returns
    -------
    real, imag: ndarray
        Broadcast over all arguments
    """
    k = check_wavenumber(k)
    dx12 = _check_spacing(dx12, "dx12")
    dx23 = _check_spacing(dx23, "dx23")
    b1 = np.asarray(beta1, dtype=np.float64) / k
    b2 = np.asarray(beta2, dtype=np.float64) / k
    b3 = np.asarray(beta3, dtype=np.float64) / k

    phase12 = 2.0 * k * dx12
    phase23 = 2.0 * k * dx23
    phase13 = 2.0 * k * (dx12 + dx23)
    c12, s12 = np.cos(phase12), np.sin(phase12)
    c23, s23 = np.cos(phase23), np.sin(phase23)
    c13, s13 = np.cos(phase13), np.sin(phase13)

    b12, b23, b13 = b1 * b2, b2 * b3, b1 * b3
    b123 = b12 * b3

    real = 1.0 - (b12 + b13 + b23) + b12 * c12 + b23 * c23 + b13 * c13 + b123 * (s12 + s23 - s13)
    imag = (b1 + b2 + b3) - b123 - b12 * s12 - b23 * s23 - b13 * s13 + b123 * (c12 + c23 - c13)
    return real, imag


def transmission_closed_3delta(beta1, beta2, beta3, dx12, dx23, k):
    """T = 1 / (Re(B11)^2 + Im(B11)^2) for three spikes, see three_delta_b11"""
    real, imag = three_delta_b11(beta1, beta2, beta3, dx12, dx23, k)
    return _as_output(1.0 / (real**2 + imag**2))


@dataclass(frozen=True)
class ClosedFormTwoDelta:
    """Two-spike descriptor evaluated through the closed form, usable wherever a DeltaSystem is"""

    alpha1: float
    alpha2: float
    dx: float

    def transmission(self, k):
        return transmission_closed_2delta(self.alpha1, self.alpha2, self.dx, k)


@dataclass(frozen=True)
class ClosedFormThreeDelta:
    """Three-spike descriptor in the optimizer's parametrization (b1, b2, b3, dx12, dx23)"""

    beta1: float
    beta2: float
    beta3: float
    dx12: float
    dx23: float

    @classmethod
    def from_vector(cls, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (5,):
            raise DomainError(f"Expected a 5-vector (b1, b2, b3, dx12, dx23), got shape {vector.shape}")
        return cls(*(float(v) for v in vector))

    def transmission(self, k):
        return transmission_closed_3delta(self.beta1, self.beta2, self.beta3, self.dx12, self.dx23, k)
