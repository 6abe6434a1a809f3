"""Fourier analysis on bounded Vilenkin groups at finite resolution."""

__version__ = "0.1.0"

from .core import (
    CellFunction,
    VilenkinBase,
    build_base,
    from_digits,
    haar_integral,
    interval_indicator,
    periodic_base,
    to_digits,
    unit_point,
    walsh_base,
)
from .characters import dirichlet, fejer_kernel, rademacher, vilenkin
from .spectral import Spectrum, analyze, partial_sum, synthesize
from .summation import CoefficientSequence, t_mean, norlund_mean
from .norms import hp_norm, lp_quasinorm, weak_lp_quasinorm, maximal_function, weighted_maximal
from .sharpness import CounterexampleSpec, counterexample, run_sweep

__all__ = [
    "CellFunction",
    "CoefficientSequence",
    "CounterexampleSpec",
    "Spectrum",
    "VilenkinBase",
    "analyze",
    "build_base",
    "counterexample",
    "dirichlet",
    "fejer_kernel",
    "from_digits",
    "haar_integral",
    "hp_norm",
    "interval_indicator",
    "lp_quasinorm",
    "maximal_function",
    "norlund_mean",
    "partial_sum",
    "periodic_base",
    "rademacher",
    "run_sweep",
    "synthesize",
    "t_mean",
    "to_digits",
    "unit_point",
    "vilenkin",
    "walsh_base",
    "weak_lp_quasinorm",
    "weighted_maximal",
]
