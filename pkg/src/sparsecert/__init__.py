"""Certified sparse recovery toolkit: sampling matrices, basis pursuit, RIP/NSP
certificates, explicit sample-complexity bounds and an experiment harness."""

from .errors import BudgetExceeded, HypothesisViolation, InvalidParameter, InvalidState

__version__ = "0.1.0"

__all__ = ["BudgetExceeded", "HypothesisViolation", "InvalidParameter", "InvalidState", "__version__"]
