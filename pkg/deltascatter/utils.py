import numpy as np

from deltascatter.exceptions import DomainError, InvariantError

# Smallest wavenumber accepted anywhere in the package, the transfer matrices are singular at k = 0
K_MIN = 1e-6

# Format used for every number written to text files
FLOAT_FORMAT = "%.17g"


def check_wavenumber(k, name: str = "k"):
    """Validate a wavenumber (scalar or array) and return it as a float ndarray

    Parameters
    ----------
    k: float or array_like
        Wavenumber(s) in natural units (hbar = 1, m = 1/2, so k = sqrt(E))
    name: str
        Name used in the error message

    Returns
    -------
    k: ndarray
        float64 array with the same shape as the input (0-d for scalars)
    """
    k = np.asarray(k, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise DomainError(f"{name} must be finite, got {k}")
    if np.any(k < K_MIN):
        raise DomainError(f"{name} must be >= {K_MIN}, got min {np.min(k)}")
    return k


def check_positive(value: float, name: str):
    """Raise DomainError unless value is a finite number strictly greater than zero"""
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be finite and positive, got {value}")
    return value


def check_finite(values, name: str):
    """Raise InvariantError if any entry is NaN or infinite"""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvariantError(f"{name} must be finite, got {values}")
    return values


def uniform_k_grid(k_min: float, k_max: float, n_points: int):
    """Uniformly spaced wavenumber grid including both endpoints

    Parameters
    ----------
    k_min, k_max: float
        Grid limits, 0 < k_min < k_max
    n_points: int
        Number of samples, at least 2

    Returns
    -------
    k_values: ndarray (n_points,)
    """
    k_min = float(check_wavenumber(k_min, "k_min"))
    k_max = float(check_wavenumber(k_max, "k_max"))
    if not k_min < k_max:
        raise DomainError(f"k_min must be smaller than k_max, got [{k_min}, {k_max}]")
    if int(n_points) != n_points or n_points < 2:
        raise DomainError(f"n_points must be an integer >= 2, got {n_points}")
    return np.linspace(k_min, k_max, num=int(n_points))


def window_seed_sequence(seed: int, index: int):
    """Seed of one optimization window

    The global seed and the window index are mixed through a numpy SeedSequence,
    so every window gets its own decorrelated stream and the same (seed, index)
    pair always yields the same stream.
    """
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


def to_float_list(values):
    """Plain python floats, used before writing JSON so that repr keeps full precision"""
    return [float(v) for v in np.ravel(values)]
