"""Computational laboratory for discretized point-line incidence geometry."""
from .phase_space import (Configuration, PhasePoint, PhaseRect, ScaleTriple,
                          concentration, covering_number, directed_distance)

__version__ = "0.1.0"

__all__ = ["Configuration", "PhasePoint", "PhaseRect", "ScaleTriple",
           "concentration", "covering_number", "directed_distance"]
