"""Quantum signal processing protocols refined by nested group commutators."""

from .errors import (ConvergenceError, CoverageError, DomainError, InconsistencyError, NormalizationError,
                     ParseError, PreconditionError, QSPError, RefinementError, StructureError, UnitarityError)
from .protocol import (ChebSeries, FunctionSample, Oracle, Protocol, chebyshev_nodes, evaluate,
                       extract_polynomials, project_pi, projection)

__version__ = "0.1.0"

__all__ = [
    "ChebSeries", "FunctionSample", "Oracle", "Protocol", "chebyshev_nodes", "evaluate",
    "extract_polynomials", "project_pi", "projection",
    "QSPError", "DomainError", "NormalizationError", "UnitarityError", "PreconditionError", "StructureError",
    "InconsistencyError", "CoverageError", "ConvergenceError", "RefinementError", "ParseError",
]
