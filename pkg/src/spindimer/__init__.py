"""Thermal quantum correlations (MIN, F-MIN, negativity) of a mixed spin-(1/2,1) Heisenberg dimer."""
from .errors import NumericalGuard, SpinDimerError, ValidationError
from .measures import MEASURES, evaluate, f_min, hs_min, negativity
from .model import DimerParams, analytic_spectrum, build_hamiltonian
from .sweep import Axis, SweepSpec, ThresholdQuery, figure_preset, find_threshold, run_sweep
from .thermal import gibbs_state_analytic, gibbs_state_spectral

__version__ = "0.1.0"

__all__ = [
    "Axis", "DimerParams", "MEASURES", "NumericalGuard", "SpinDimerError", "SweepSpec",
    "ThresholdQuery", "ValidationError", "analytic_spectrum", "build_hamiltonian", "evaluate",
    "f_min", "figure_preset", "find_threshold", "gibbs_state_analytic", "gibbs_state_spectral",
    "hs_min", "negativity", "run_sweep",
]
