"""
Base class for the optimizers in this package. It keeps the book-keeping every
solver shares (configuration metadata, persistence, structural equality) so the
concrete solvers only implement the search itself.
"""
import os
import pickle

import pandas as pd
from deepdiff import DeepDiff


class OptimizerCore(object):
    """Abstract class for bound constrained minimizers

    Attributes
    ----------
    optimizer_name: str
        Name of the specific instantiation of the optimizer
    opt_kwargs: dict
        Dictionary of specific parameters to be used by children classes
    metadata: dict
        Description of how the optimizer was built, echoed in reports
    global_steps: int
        Number of generations (or iterations) run so far
    """

    def __init__(self, optimizer_name: str = "default_optimizer", **opt_kwargs):
        self.optimizer_name = optimizer_name
        self.opt_kwargs = opt_kwargs
        self.metadata = {"opt_kwargs": opt_kwargs}
        self.global_steps = 0

    def reset(self):
        """Discard the search state and start again from the configured seed"""
        self.global_steps = 0

    def step(self):
        """Advance the search by one generation"""
        raise NotImplementedError

    def solve(self):
        """Run the search until a stopping criterion is met"""
        raise NotImplementedError

    def _state_for_comparison(self):
        return dict(self.__dict__)

    def save_optimizer(self, save_path: str):
        """Save current state and information in general to re-instantiate the optimizer

        Parameters
        ----------
        save_path: str
            Path to save the optimizer
        """
        with open(os.path.join(save_path), "wb") as handle:
            pickle.dump(self.__dict__, handle, pickle.HIGHEST_PROTOCOL)

    def restore_optimizer(self, save_path: str):
        """Restore saved optimizer

        Parameters
        ----------
        save_path: str
            Path to retrieve the optimizer
        """
        self.__dict__ = pd.read_pickle(save_path)

    def __eq__(self, other):
        if not isinstance(other, OptimizerCore):
            return NotImplemented
        diff = DeepDiff(self._state_for_comparison(), other._state_for_comparison())
        if len(diff) == 0:
            return True
        else:
            return False
