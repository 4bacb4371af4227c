"""Error-disturbance uncertainty relations for finite-dimensional measurement models."""

from .errors import DimensionError, EdurError, InvalidInput, NumericFailure
from .qstate import Observable, QuantumState

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "EdurError",
    "InvalidInput",
    "NumericFailure",
    "Observable",
    "QuantumState",
]
