"""Exceptions raised by deltascatter.

Everything a caller can trigger with bad input derives from ValueError, so code
that already guards numerical calls with ``except ValueError`` keeps working.
"""


class DomainError(ValueError):
    """Argument outside the domain of an operation (k <= 0, empty grid, bad bounds...)"""


class InvariantError(ValueError):
    """A data structure would violate one of its invariants (unordered spikes, NaN strengths...)"""


class NoResonancesError(DomainError):
    """No predicted resonance falls inside the requested wavenumber range"""


class OptimizationError(RuntimeError):
    """The optimizer cannot make progress, e.g. every population member evaluated to NaN"""
