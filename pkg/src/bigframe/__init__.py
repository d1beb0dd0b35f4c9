"""K-bi-g-frames on finite-dimensional Hilbert spaces."""

from .core import (BiGFrameSystem, ClassificationReport, FrameBounds, GOperatorFamily, Verdict,
                   biframe_operator, classify, optimal_bounds)
from .instances import GeneratorSpec, example_3_4, example_3_6, random_system
from .opkit import DEFAULT_TOL, SpectralTolerance

__all__ = ["BiGFrameSystem", "ClassificationReport", "FrameBounds", "GOperatorFamily", "Verdict",
           "biframe_operator", "classify", "optimal_bounds", "GeneratorSpec", "example_3_4",
           "example_3_6", "random_system", "DEFAULT_TOL", "SpectralTolerance"]
