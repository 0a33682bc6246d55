"""Explicit constants and parameter schedules of the uniform-recovery bound.

Everything here is closed-form arithmetic in double precision.  Covering
counts grow doubly exponentially in the scale index, so they are handled in
natural-log space throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BudgetExceeded, HypothesisViolation, InvalidParameter

E = math.e
SQRT_E = math.sqrt(E)
LN2 = math.log(2.0)
DELTA_BEST = 4.0 / math.sqrt(41.0)
DELTA_IMPROVED_LIMIT = 2.0 / 3.0
ALPHA = E * LN2 / 8.0
H_LEADING = 2.0**10 / LN2**2  # see the decisions log for the 2^8 vs 2^10 choice


def khintchine_bound(p: float, l2_norm: float) -> float:
    """2^(3/4) (p/e)^(p/2) ||x||_2^p, the Rademacher moment bound for p >= 2."""
    if p < 2:
        raise InvalidParameter(f"Khintchine bound needs p >= 2, got {p}")
    return 2.0**0.75 * (p / E) ** (p / 2.0) * l2_norm**p


def holder_exponents(K: float, s: float) -> tuple[float, float]:
    """p = ln(2^(3/4) K^2 s) and its conjugate q; requires p >= 2."""
    p = math.log(2.0**0.75 * K * K * s)
    if p < 2:
        raise HypothesisViolation([f"p = ln(2^(3/4) K^2 s) = {p:.6g} < 2"])
    return p, p / (p - 1.0)


def covering_radius(K: float, s: float, p: float, k: int) -> float:
    """Radius of the scale-k cover of the l1 ball of radius sqrt(s) (mesh 2^-2k)."""
    return 2.0**-k * 2.0 ** (3.0 / (8.0 * p)) * K * math.sqrt(8.0 * p * s / E)


def covering_log_count(N: int, k: int) -> float:
    """ln N_k with N_k = (2Ne/2^(2k) + e)^(2^(2k)), evaluated without overflow."""
    if N < 1 or k < 0:
        raise InvalidParameter("need N >= 1 and k >= 0")
    M = 4.0**k
    return M * (1.0 + math.log1p(2.0 * N / M))


def lemma_radius(K: float, p: float, M: int) -> float:
    """Radius r with equality in M = 2^(3/(4p)) 8 p K^2 / (r^2 e)."""
    if M < 1 or p < 1:
        raise InvalidParameter("need M >= 1 and p >= 1")
    return math.sqrt(2.0 ** (3.0 / (4.0 * p)) * 8.0 * p * K * K / (M * E))


def maurey_grid(N: int, M: int, max_points: int = 10**6) -> np.ndarray:
    """All z with ||z||_1 <= 1 and M z integral, as rows of M z (integers)."""
    if N < 1 or M < 0:
        raise InvalidParameter("need N >= 1 and M >= 0")
    if math.comb(2 * N + M, M) > max_points:
        raise BudgetExceeded(f"grid for N={N}, M={M} is too large to enumerate")
    rng = range(-M, M + 1)
    pts = [c for c in itertools.product(rng, repeat=N) if sum(map(abs, c)) <= M]
    return np.array(pts, dtype=np.int64).reshape(len(pts), N)


@dataclass(frozen=True)
class GridCount:
    N: int
    M: int
    exact_binomial: int
    log_upper_bound: float
    grid_cardinality: int | None

    @property
    def ordered(self) -> bool:
        log_binom = math.log(self.exact_binomial)
        ok = log_binom <= self.log_upper_bound + 1e-12 * max(1.0, self.log_upper_bound)
        if self.grid_cardinality is not None:
            ok = ok and self.grid_cardinality <= self.exact_binomial
        return ok


def grid_count_bound(N: int, M: int, enumerate_grid: bool | None = None) -> GridCount:
    """Grid size, the multiset count C(2N+M, M) and the bound (2Ne/M + e)^M in log space."""
    if N < 1 or M < 0:
        raise InvalidParameter("need N >= 1 and M >= 0")
    if enumerate_grid is None:
        enumerate_grid = N <= 4 and M <= 8
    elif enumerate_grid and not (N <= 4 and M <= 8):
        raise BudgetExceeded("exact grid enumeration is limited to N <= 4, M <= 8")
    binom = math.comb(2 * N + M, M)
    log_ub = 0.0 if M == 0 else M * (1.0 + math.log1p(2.0 * N / M))
    card = len(maurey_grid(N, M)) if enumerate_grid else None
    result = GridCount(N, M, binom, log_ub, card)
    if not result.ordered:
        raise AssertionError(f"grid count ordering violated: {result}")
    return result


def g_of_delta(delta: float) -> float:
    """delta / (delta sqrt(e) + e)^(1/2)."""
    _check_open_unit("delta", delta)
    return delta / math.sqrt(delta * SQRT_E + E)


def _check_open_unit(name, value):
    if not 0.0 < value < 1.0:
        raise InvalidParameter(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class Constants:
    C1: float
    C2: float
    C: float
    D: float

    @property
    def C_squared(self) -> float:
        return 2.0 * self.C1 * self.C1


def constants(delta: float, lam: float) -> Constants:
    """C1, C2 of the sample bound and C = sqrt(2) C1, D = 2 C2 (inf at the lambda endpoints)."""
    _check_open_unit("delta", delta)
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameter(f"lambda must lie in [0, 1], got {lam}")
    if lam == 1.0:
        c1 = math.inf
    else:
        c1 = 2.0**5 * E**0.25 / LN2 * math.sqrt(SQRT_E + delta) / ((1.0 - lam) * delta)
    if lam == 0.0:
        c2 = math.inf
    else:
        c2 = 2.0**6 * E**1.5 * (delta + SQRT_E) / (delta * lam) ** 2
    return Constants(c1, c2, math.sqrt(2.0) * c1, 2.0 * c2)


def ceil_or_inf(x: float):
    return math.inf if math.isinf(x) else math.ceil(x)


TABLE1_LAMBDAS = (("0", 0.0), ("1/9", 1.0 / 9.0), ("1/2", 0.5), ("1/sqrt(e)", 1.0 / SQRT_E), ("1", 1.0))
TABLE1_DELTAS = (("4/sqrt(41)", DELTA_BEST), ("2/3", 2.0 / 3.0))


@dataclass(frozen=True)
class Table1Row:
    lam_label: str
    lam: float
    delta_label: str
    delta: float
    C_squared: float
    D: float

    @property
    def ceil_C_squared(self):
        return ceil_or_inf(self.C_squared)

    @property
    def ceil_D(self):
        return ceil_or_inf(self.D)


def table1() -> list[Table1Row]:
    """Ceilings of C^2 and D over the standard lambda and delta grid (long format)."""
    rows = []
    for lam_label, lam in TABLE1_LAMBDAS:
        for d_label, d in TABLE1_DELTAS:
            c = constants(d, lam)
            rows.append(Table1Row(lam_label, lam, d_label, d, c.C_squared, c.D))
    return rows


def table1_grid(rows=None) -> list[tuple]:
    """Wide 5 x 4 view: (ceil C^2, ceil D) at 4/sqrt(41), then at 2/3, per lambda."""
    rows = table1() if rows is None else rows
    out = []
    for i in range(0, len(rows), 2):
        a, b = rows[i], rows[i + 1]
        out.append((a.lam_label, a.ceil_C_squared, a.ceil_D, b.ceil_C_squared, b.ceil_D))
    return out


def asymptotic_constants(delta: float) -> tuple[float, float]:
    """(C_inf^2, D_inf): C(delta,0)^2 and D(delta,1) rescaled by (1+delta)/(delta sqrt(e) + e)."""
    _check_open_unit("delta", delta)
    factor = (1.0 + delta) / (delta * SQRT_E + E)
    return constants(delta, 0.0).C_squared * factor, constants(delta, 1.0).D * factor


# -- sample complexity ---------------------------------------------------------


@dataclass(frozen=True)
class BoundInputs:
    N: int
    K: float
    s: int
    delta: float
    epsilon: float
    lam: float
    m: int | None = None

    def violations(self, certificate: bool = False) -> list[str]:
        out = []
        if self.N < 1:
            out.append(f"N = {self.N} < 1")
        if self.K < 1:
            out.append(f"K = {self.K} < 1")
        if self.s < 1:
            out.append(f"s = {self.s} < 1")
        if not 0 < self.delta < 1:
            out.append(f"delta = {self.delta} not in (0, 1)")
        if not 0 < self.epsilon < 1:
            out.append(f"epsilon = {self.epsilon} not in (0, 1)")
        if not 0 < self.lam < 1:
            out.append(f"lambda = {self.lam} not in (0, 1)")
        if self.K >= 1 and self.s >= 1:
            p = math.log(2.0**0.75 * self.K**2 * self.s)
            if p < 2:
                out.append(f"p = ln(2^(3/4) K^2 s) = {p:.6g} < 2")
            elif certificate and not self.N > 4 * p:
                out.append(f"N = {self.N} <= 4p = {4 * p:.6g}")
        if certificate and (self.m is None or self.m < 1):
            out.append(f"m = {self.m} must be a positive integer")
        return out

    def check(self, certificate: bool = False) -> None:
        v = self.violations(certificate)
        if v:
            raise HypothesisViolation(v)


def sample_complexity_rhs(inputs: BoundInputs) -> float:
    """Right-hand side of sqrt(m) > C1 K sqrt(s) (...) in double precision."""
    inputs.check()
    K, s = inputs.K, inputs.s
    c = constants(inputs.delta, inputs.lam)
    p = math.log(2.0**0.75 * K * K * s)
    inner = (math.sqrt(p) * math.log(c.C2 * K * K * s) * math.sqrt(math.log(inputs.N))
             + math.sqrt(math.log(1.0 / inputs.epsilon)))
    return c.C1 * K * math.sqrt(s) * inner


def sample_complexity_extended(inputs: BoundInputs, dps: int = 50) -> int:
    """Same count evaluated with ``dps`` decimal digits (mpmath)."""
    import mpmath

    inputs.check()
    with mpmath.workdps(dps):
        K, s = mpmath.mpf(inputs.K), mpmath.mpf(inputs.s)
        d, lam = mpmath.mpf(inputs.delta), mpmath.mpf(inputs.lam)
        e = mpmath.e
        c1 = 2**5 * e**0.25 / mpmath.log(2) * mpmath.sqrt(mpmath.sqrt(e) + d) / ((1 - lam) * d)
        c2 = 2**6 * e**1.5 * (d + mpmath.sqrt(e)) / (d * lam) ** 2
        p = mpmath.log(mpmath.mpf(2) ** 0.75 * K**2 * s)
        rhs = c1 * K * mpmath.sqrt(s) * (
            mpmath.sqrt(p) * mpmath.log(c2 * K**2 * s) * mpmath.sqrt(mpmath.log(inputs.N))
            + mpmath.sqrt(mpmath.log(1 / mpmath.mpf(inputs.epsilon))))
        return int(mpmath.floor(rhs**2)) + 1


def sample_complexity(inputs: BoundInputs, crosscheck: bool = False) -> int:
    """Smallest integer m with sqrt(m) strictly above the bound's right-hand side."""
    m = 1 + math.floor(sample_complexity_rhs(inputs) ** 2)
    if crosscheck:
        hi = sample_complexity_extended(inputs)
        if hi != m:
            raise ArithmeticError(f"double precision gives m = {m}, extended precision {hi}")
    return m


# -- certificate ------------------------------------------------------------------


@dataclass
class Certificate:
    N: int
    K: float
    s: int
    m: int
    delta: float
    epsilon: float
    lam: float
    p: float
    q: float
    g: float
    alpha: float
    l: int
    L: int
    scales: list = field(default_factory=list)
    n_schedule: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    ln_N_k: list = field(default_factory=list)
    H: float = math.nan
    n: int = 1
    lhs: float = math.nan
    rhs: float = math.nan
    inequality_ok: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        out = asdict(self)
        out["margin"] = self.margin
        return out


def certificate(inputs: BoundInputs) -> Certificate:
    """Evaluate the full parameter schedule for concrete inputs and test the closing inequality

        H + lambda g < delta eps^(1/2n) / (delta eps^(1/2n) + 1)^(1/2q),  n = ceil(ln(1/eps)).
    """
    inputs.check(certificate=True)
    N, K, s, m = inputs.N, inputs.K, inputs.s, inputs.m
    delta, eps, lam = inputs.delta, inputs.epsilon, inputs.lam
    p, q = holder_exponents(K, s)
    g = g_of_delta(delta)
    lg = lam * g
    l = math.floor(0.5 * math.log2(2.0**9 * p / E))
    L = math.ceil(0.5 * math.log2(2.0**9 * K * K * s * p / lg**2))
    scales = list(range(l, L + 1))
    ln_counts = [covering_log_count(N, k) for k in scales]
    log_eps = math.log(1.0 / eps)
    n_sched = [max(0.75 * LN2 + c, log_eps) for c in ln_counts]
    radii = [covering_radius(K, s, p, k) for k in scales]
    H = math.sqrt(H_LEADING * K * K * s / m) * (
        math.sqrt(p) * math.log(2.0**6 * E * K * K * s / lg**2) * math.sqrt(math.log(N / p))
        + math.sqrt(ALPHA * log_eps))
    n = max(1, math.ceil(log_eps))
    root = eps ** (1.0 / (2 * n))
    rhs = delta * root / (delta * root + 1.0) ** (1.0 / (2.0 * q))
    lhs = H + lg
    return Certificate(
        N=N, K=K, s=s, m=m, delta=delta, epsilon=eps, lam=lam,
        p=p, q=q, g=g, alpha=ALPHA, l=l, L=L, scales=scales, n_schedule=n_sched,
        radii=radii, ln_N_k=ln_counts, H=H, n=n, lhs=lhs, rhs=rhs, inequality_ok=lhs < rhs,
    )


# -- RIP thresholds for the null space property ------------------------------------


def delta_threshold_improved(s: int) -> float:
    if s < 2:
        raise InvalidParameter("the improved threshold needs s >= 2")
    if s % 5 == 0:
        return DELTA_IMPROVED_LIMIT
    return math.sqrt((4.0 - 5.0 / s) / (9.0 - 5.0 / s))


def delta_threshold_best(s: int) -> float:
    if s < 1:
        raise InvalidParameter("need s >= 1")
    if s == 1:
        return DELTA_BEST
    return max(DELTA_BEST, delta_threshold_improved(s))


def figure1_data(s_max: int = 200) -> list[tuple[int, float]]:
    if s_max < 1:
        raise InvalidParameter("need s_max >= 1")
    return [(s, delta_threshold_best(s)) for s in range(1, s_max + 1)]
