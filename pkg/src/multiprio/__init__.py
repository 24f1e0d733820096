"""Prioritized multi-agent planning with simultaneously explored prioritizations."""

from .coupling import (CapacityError, DirectedCouplingGraph, NotADagError,
                       UndirectedCouplingGraph, enumerate_acyclic_orientations,
                       find_agent_classes, orient)
from .prioritization import priorities_from_sequence
from .schedule import build_schedule, unique_schedule_sets, validate_schedule

__all__ = [
    "CapacityError", "DirectedCouplingGraph", "NotADagError", "UndirectedCouplingGraph",
    "build_schedule", "enumerate_acyclic_orientations", "find_agent_classes", "orient",
    "priorities_from_sequence", "unique_schedule_sets", "validate_schedule",
]

__version__ = "0.1.0"
