"""Exact computations on locally connected continua: names, covers, chains,
Lebesgue numbers, ULAC functions and arc parametrizations."""

from .budget import Budget, BudgetExhausted, LcarcError, PreconditionViolation
from .geometry import RationalBox, point, rat

__all__ = [
    "Budget",
    "BudgetExhausted",
    "LcarcError",
    "PreconditionViolation",
    "RationalBox",
    "point",
    "rat",
]
