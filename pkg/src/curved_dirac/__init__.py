"""Dirac bound states in static curved space-time: spectra, eigenfunctions, su(1,1) algebras."""
from .model import CouplingParams, SystemKind, ValidationError
from .spectrum import Branch, EnergyLevel, NoBoundStateError, all_levels, energy

__all__ = ["Branch", "CouplingParams", "EnergyLevel", "NoBoundStateError", "SystemKind",
           "ValidationError", "all_levels", "energy"]
