"""Basis pursuit (min ||z||_1 s.t. Az = y) and an exhaustive l0 oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ensembles import SamplingMatrix
from .errors import BudgetExceeded, InvalidParameter
from .simplex import linprog_simplex


@dataclass
class BasisPursuitResult:
    minimizer: np.ndarray
    objective: float
    feasibility_residual: float
    status: str  # optimal | infeasible | numerical_failure

    def to_json(self) -> dict:
        return {
            "x": [float(v) for v in self.minimizer],
            "objective": self.objective,
            "residual": self.feasibility_residual,
            "status": self.status,
        }


def _matrix(A):
    return A.entries if isinstance(A, SamplingMatrix) else np.asarray(A)


def realify_system(A, y):
    """Stack real and imaginary parts so that a real z solves the complex system."""
    a = _matrix(A)
    y = np.asarray(y)
    if a.ndim != 2 or y.shape != (a.shape[0],):
        raise InvalidParameter(f"y must have length m={a.shape[0]}")
    if np.iscomplexobj(a) or np.iscomplexobj(y):
        a = a.astype(complex)
        y = y.astype(complex)
        return np.vstack([a.real, a.imag]), np.concatenate([y.real, y.imag])
    return a.astype(float), y.astype(float)


def feasibility_tolerance(y) -> float:
    return 1e-9 * (1.0 + float(np.max(np.abs(y), initial=0.0)))


def solve_l1(A, y) -> BasisPursuitResult:
    """Global minimizer of ||z||_1 subject to Az = y via the split z = z+ - z-."""
    a, yr = realify_system(A, y)
    n = a.shape[1]
    c = np.ones(2 * n)
    res = linprog_simplex(c, np.hstack([a, -a]), yr)
    if res.status == "infeasible":
        return BasisPursuitResult(np.full(n, np.nan), math.nan, math.inf, "infeasible")
    if res.status != "optimal":
        return BasisPursuitResult(np.full(n, np.nan), math.nan, math.inf, "numerical_failure")
    z = res.x[:n] - res.x[n:]
    residual = float(np.max(np.abs(a @ z - yr), initial=0.0))
    status = "optimal" if residual <= feasibility_tolerance(yr) else "numerical_failure"
    return BasisPursuitResult(z, float(np.sum(np.abs(z))), residual, status)


@dataclass
class RecoveryReport:
    success: bool
    error_l2: float
    planted_objective: float
    bp_result: BasisPursuitResult

    @property
    def tied_objective(self) -> bool:
        """Minimizer differs from the planted vector but is just as short in l1."""
        return (not self.success) and abs(self.bp_result.objective - self.planted_objective) <= 1e-9 * (
            1.0 + self.planted_objective)

    def to_json(self) -> dict:
        return {
            "success": self.success,
            "error_l2": self.error_l2,
            "planted_objective": self.planted_objective,
            "tied_objective": self.tied_objective,
            "bp_result": self.bp_result.to_json(),
        }


def recovery_tolerance(x0) -> float:
    return 1e-6 * (1.0 + float(np.linalg.norm(x0)))


def recover(A, x0, tol: float | None = None) -> RecoveryReport:
    a = _matrix(A)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (a.shape[1],):
        raise InvalidParameter(f"x0 must have length N={a.shape[1]}")
    bp = solve_l1(a, a @ x0)
    err = float(np.linalg.norm(bp.minimizer - x0)) if bp.status == "optimal" else math.inf
    tol = recovery_tolerance(x0) if tol is None else tol
    return RecoveryReport(err <= tol, err, float(np.sum(np.abs(x0))), bp)


@dataclass
class L0Solution:
    x: np.ndarray
    support: tuple
    sparsity: int


def l0_oracle(A, y, s_max: int, budget: int = 10**6) -> L0Solution | None:
    """Sparsest z with Az = y among supports of size <= s_max, smallest size then lexicographic."""
    a, yr = realify_system(A, y)
    n = a.shape[1]
    if s_max < 0 or s_max > n:
        raise InvalidParameter(f"need 0 <= s_max <= N, got {s_max}")
    total = sum(math.comb(n, k) for k in range(s_max + 1))
    if total > budget:
        raise BudgetExceeded(f"{total} supports exceed the budget of {budget}")
    tol = 1e-9 * (1.0 + float(np.linalg.norm(yr)))
    if np.linalg.norm(yr) <= tol:
        return L0Solution(np.zeros(n), (), 0)
    for k in range(1, s_max + 1):
        for support in itertools.combinations(range(n), k):
            sub = a[:, support]
            coef, *_ = np.linalg.lstsq(sub, yr, rcond=None)
            if np.linalg.norm(sub @ coef - yr) <= tol:
                x = np.zeros(n)
                x[list(support)] = coef
                return L0Solution(x, support, k)
    return None
