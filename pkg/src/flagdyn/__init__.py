"""Lyapunov and Morse decompositions of matrix cocycles on flag bundles."""
from .errors import AmbiguityError, CapacityError, ConfigError, DecompositionError, FlagDynError, InvalidArgument
from .lie_structure import ChamberVector, ThetaSet, WeylElement
from .flags import Flag
from .cocycle_engine import CocycleSystem, ConstantField, SymbolTable, CircleMap
from .oseledets import SpectrumEstimate, estimate_polar_exponent, periodic_spectrum
from .morse_chain import Resolution, build_chain_graph, morse_sets, morse_spectrum, theta_mo
from .conditions import CheckSettings, ConditionReport, run_check

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "CapacityError",
    "ChamberVector",
    "CheckSettings",
    "CircleMap",
    "CocycleSystem",
    "ConditionReport",
    "ConfigError",
    "ConstantField",
    "DecompositionError",
    "Flag",
    "FlagDynError",
    "InvalidArgument",
    "Resolution",
    "SpectrumEstimate",
    "SymbolTable",
    "ThetaSet",
    "WeylElement",
    "build_chain_graph",
    "estimate_polar_exponent",
    "morse_sets",
    "morse_spectrum",
    "periodic_spectrum",
    "run_check",
    "theta_mo",
]
