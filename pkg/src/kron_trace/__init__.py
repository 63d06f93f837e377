"""Boundary traces of resistance networks and the estimates built on them."""

from .errors import KronTraceError
from .generators import GENERATORS, GeneratedDomain
from .network import ResistanceNetwork, build_network, energy, laplacian, validate
from .potential import SolverConfig, capacity, harmonic_extension, harmonic_measure
from .trace import TraceForm, schur_trace, trace_energy

__all__ = [
    "KronTraceError", "GENERATORS", "GeneratedDomain", "ResistanceNetwork", "build_network",
    "energy", "laplacian", "validate", "SolverConfig", "capacity", "harmonic_extension",
    "harmonic_measure", "TraceForm", "schur_trace", "trace_energy",
]
__version__ = "0.1.0"
