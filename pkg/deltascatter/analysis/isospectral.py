"""
Exact isospectrality of a two-spike and a three-spike system at large k.

Expanding |M11|^2 in u = 1/k gives |M11|^2 = 1 + c(k) u^2 + O(u^3), with an
oscillating u^2 coefficient c(k). Two systems can only share T(k) for all
large k if their coefficients agree term by term, which requires equal squared
strength sums and vanishing pairwise strength products, i.e. at most one non
zero spike on each side.
"""
import warnings
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from deltascatter.exceptions import DomainError
from deltascatter.scattering.closed_form import transmission_closed_2delta, transmission_closed_3delta
from deltascatter.utils import check_wavenumber

# k_scan should start this many times above the largest total strength
ASYMPTOTIC_FACTOR = 10.0


@dataclass(frozen=True)
class IsospectralityVerdict:
    """Outcome of the exact isospectrality test

    Attributes
    ----------
    strength_sum_ok: bool
        alpha1^2 + alpha2^2 == beta1^2 + beta2^2 + beta3^2 within tolerance
    pairwise_products_ok: bool
        Every pairwise product on both sides vanishes within tolerance
    trivial_2delta, trivial_3delta: bool
        At most one non zero strength on that side
    strength_sum_residual: float
        (alpha1^2 + alpha2^2) - (beta1^2 + beta2^2 + beta3^2)
    max_pairwise_product: float
        Largest of |alpha1 alpha2|, |beta1 beta2|, |beta2 beta3|, |beta1 beta3|
    tolerance: float
        Threshold both tests were run with
    """

    strength_sum_ok: bool
    pairwise_products_ok: bool
    trivial_2delta: bool
    trivial_3delta: bool
    strength_sum_residual: float
    max_pairwise_product: float
    tolerance: float

    @property
    def residuals(self):
        return self.strength_sum_residual, self.max_pairwise_product

    @property
    def passed(self):
        return self.strength_sum_ok and self.pairwise_products_ok

    def to_dict(self):
        data = asdict(self)
        data["passed"] = self.passed
        return data


def check_exact_conditions(alpha1, alpha2, beta1, beta2, beta3, tolerance: Optional[float] = None):
    """Necessary conditions for T_2delta(k) == T_3delta(k) at all large k

    Parameters
    ----------
    alpha1, alpha2: float
        Two-spike strengths
    beta1, beta2, beta3: float
        Three-spike strengths
    tolerance: float
        Threshold on the residuals (units of strength^2), 1e-12 * max|strength|^2 by default

    Returns
    -------
    verdict: IsospectralityVerdict
    """
    alphas = np.array([alpha1, alpha2], dtype=np.float64)
    betas = np.array([beta1, beta2, beta3], dtype=np.float64)
    if tolerance is None:
        tolerance = 1e-12 * float(np.max(np.abs(np.concatenate([alphas, betas])))) ** 2
    elif not tolerance > 0:
        raise DomainError(f"tolerance must be positive, got {tolerance}")

    residual = float(np.sum(alphas**2) - np.sum(betas**2))
    max_product = float(
        max(abs(alphas[0] * alphas[1]), abs(betas[0] * betas[1]), abs(betas[1] * betas[2]), abs(betas[0] * betas[2]))
    )
    # strengths below sqrt(tolerance) count as zero, consistent with the squared residuals
    zero_level = np.sqrt(tolerance)
    return IsospectralityVerdict(
        strength_sum_ok=bool(abs(residual) <= tolerance),
        pairwise_products_ok=bool(max_product <= tolerance),
        trivial_2delta=bool(np.sum(np.abs(alphas) > zero_level) <= 1),
        trivial_3delta=bool(np.sum(np.abs(betas) > zero_level) <= 1),
        strength_sum_residual=residual,
        max_pairwise_product=max_product,
        tolerance=float(tolerance),
    )


def u2_coefficient_2delta(alpha1, alpha2, dx, k):
    """(alpha1 + alpha2)^2 + 2 alpha1 alpha2 (cos(2 k dx) - 1)"""
    k = check_wavenumber(k)
    value = (alpha1 + alpha2) ** 2 + 2.0 * alpha1 * alpha2 * (np.cos(2.0 * k * dx) - 1.0)
    return float(value) if np.ndim(value) == 0 else value


def u2_coefficient_3delta(beta1, beta2, beta3, dx12, dx23, k):
    """(b1 + b2 + b3)^2 - 2 (b1 b2 + b1 b3 + b2 b3) + 2 sum_ij bi bj cos(2 k dxij)

    Equals |b1 + b2 exp(2ik dx12) + b3 exp(2ik dx13)|^2.
    """
    k = check_wavenumber(k)
    dx13 = dx12 + dx23
    value = (
        (beta1 + beta2 + beta3) ** 2
        - 2.0 * (beta1 * beta2 + beta1 * beta3 + beta2 * beta3)
        + 2.0 * beta1 * beta2 * np.cos(2.0 * k * dx12)
        + 2.0 * beta2 * beta3 * np.cos(2.0 * k * dx23)
        + 2.0 * beta1 * beta3 * np.cos(2.0 * k * dx13)
    )
    return float(value) if np.ndim(value) == 0 else value


def leading_coefficient_gap(alphas: Sequence[float], dx: float, betas: Sequence[float], spacings: Sequence[float], k):
    """Difference of the u^2 coefficients, the limit of -k^2 (T_2delta - T_3delta)"""
    alpha1, alpha2 = alphas
    beta1, beta2, beta3 = betas
    dx12, dx23 = spacings
    return u2_coefficient_2delta(alpha1, alpha2, dx, k) - u2_coefficient_3delta(beta1, beta2, beta3, dx12, dx23, k)


def asymptotic_mismatch_scan(alphas: Sequence[float], dx: float, betas: Sequence[float], spacings: Sequence[float], k_scan):
    """sup over k_scan of k^2 |T_2delta(k) - T_3delta(k)|

    Stays away from zero as the scan extends unless the pair passes
    check_exact_conditions. A warning is issued when the scan starts below
    ASYMPTOTIC_FACTOR times the largest total strength, where the u^2 term no
    longer dominates.

    Parameters
    ----------
    alphas: (float, float)
        Two-spike strengths
    dx: float
        Two-spike separation
    betas: (float, float, float)
        Three-spike strengths
    spacings: (float, float)
        dx12, dx23 of the three-spike system
    k_scan: array_like
        Wavenumbers to scan

    Returns
    -------
    supremum: float
    """
    k_scan = np.atleast_1d(check_wavenumber(k_scan, "k_scan"))
    alpha1, alpha2 = alphas
    beta1, beta2, beta3 = betas
    dx12, dx23 = spacings
    scale = max(abs(alpha1) + abs(alpha2), abs(beta1) + abs(beta2) + abs(beta3))
    if np.min(k_scan) < ASYMPTOTIC_FACTOR * scale:
        warnings.warn(
            f"k_scan starts at {np.min(k_scan):.6g}, below {ASYMPTOTIC_FACTOR:g} x total strength {scale:.6g}, "
            "the scan is not in the asymptotic regime"
        )
    t2 = transmission_closed_2delta(alpha1, alpha2, dx, k_scan)
    t3 = transmission_closed_3delta(beta1, beta2, beta3, dx12, dx23, k_scan)
    return float(np.max(k_scan**2 * np.abs(t2 - t3)))


def verify_pair(
    alphas: Sequence[float],
    dx: float,
    betas: Sequence[float],
    spacings: Sequence[float],
    k_scan,
    tolerance: Optional[float] = None,
):
    """Exact conditions plus the high-k scan for one (two-spike, three-spike) pair

    Returns
    -------
    verdict: dict
        conditions (IsospectralityVerdict as dict), mismatch_supremum,
        max_leading_coefficient_gap and the scanned range
    """
    k_scan = np.atleast_1d(check_wavenumber(k_scan, "k_scan"))
    verdict = check_exact_conditions(*alphas, *betas, tolerance=tolerance)
    gap = leading_coefficient_gap(alphas, dx, betas, spacings, k_scan)
    return {
        "conditions": verdict.to_dict(),
        "mismatch_supremum": asymptotic_mismatch_scan(alphas, dx, betas, spacings, k_scan),
        "max_leading_coefficient_gap": float(np.max(np.abs(gap))),
        "k_scan": {"k_min": float(np.min(k_scan)), "k_max": float(np.max(k_scan)), "n_points": int(k_scan.size)},
    }
