"""Envy-free cake cutting with Equalize queries, exact rational arithmetic."""
from .allocation import Allocation
from .connected import (divide_3_connected, divide_4_connected, divide_n_connected,
                        divide_n_connected_improved)
from .entirecake import divide_entire
from .errors import ContradictionError, InputError
from .measure import Piece, ValueMeasure
from .queries import QueryLog, equalize, equalize_star, stick_division
from .reductions import divide_4_disconnected, divide_n_disconnected, strong_reduction, weak_reduction

__all__ = [
    "Allocation", "ContradictionError", "InputError", "Piece", "QueryLog", "ValueMeasure",
    "divide_3_connected", "divide_4_connected", "divide_4_disconnected", "divide_entire",
    "divide_n_connected", "divide_n_connected_improved", "divide_n_disconnected",
    "equalize", "equalize_star", "stick_division", "strong_reduction", "weak_reduction",
]
__version__ = "0.1.0"
