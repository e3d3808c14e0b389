"""Minimal discrete harmonic functions of walks killed at the boundary of the quarter plane.

Pipeline: a validated :class:`~qharmonic.model.StepSet` and an eigenvalue
``t`` give a :class:`~qharmonic.kernel.Kernel`; its branch points and periods
give the conformal gluing function (:mod:`qharmonic.gluing`); a point ``p`` of
the segment then gives a :class:`~qharmonic.harmonic.HarmonicFamily` whose
coefficients are the values ``f(i, j)``.  :mod:`qharmonic.verify` checks the
results against the defining equations.
"""

from . import elliptic, errors, gluing, harmonic, io, kernel, model, verify
from .config import DEFAULT, Tolerances, load_tolerances
from .gluing import GluingFn
from .harmonic import HarmonicFamily, HarmonicGrid, build_family, coeffs_grid
from .kernel import BranchPoints, Kernel
from .model import Regime, StepSet, from_dict, simple_walk, solve_t0, validate

__all__ = [
    "elliptic", "errors", "gluing", "harmonic", "io", "kernel", "model", "verify",
    "DEFAULT", "Tolerances", "load_tolerances", "GluingFn", "HarmonicFamily", "HarmonicGrid",
    "build_family", "coeffs_grid", "BranchPoints", "Kernel", "Regime", "StepSet", "from_dict",
    "simple_walk", "solve_t0", "validate",
]

__version__ = "0.1.0"
