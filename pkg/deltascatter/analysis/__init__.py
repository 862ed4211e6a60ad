name = "analysis"
from .isospectral import (
    IsospectralityVerdict,
    asymptotic_mismatch_scan,
    check_exact_conditions,
    leading_coefficient_gap,
    u2_coefficient_2delta,
    u2_coefficient_3delta,
    verify_pair,
)
