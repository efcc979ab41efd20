"""Numerical toolkit for logarithmic double phase Musielak-Orlicz spaces."""

from .coefficients import Coeffs
from .expressions import ScalarField
from .problem_data import (Domain, ProblemData, exponent_summary, pick_epsilon,
                           validate_hypotheses)

__all__ = ["Coeffs", "Domain", "ProblemData", "ScalarField", "exponent_summary",
           "pick_epsilon", "validate_hypotheses"]

__version__ = "0.1.0"
