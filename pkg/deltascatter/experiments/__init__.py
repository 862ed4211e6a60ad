name = "experiments"
from .experiment_core import Experiment
from .resonance_matching import PRESETS, MatchReport, ResonanceMatching, ResonanceSweep, RunConfig
