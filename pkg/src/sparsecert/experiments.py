"""Monte Carlo and exact-enumeration harness.

All randomness is drawn from per-trial substreams, so results do not depend
on how work is split across workers.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .certify import nsp_check, rip_constant
from .ensembles import ALIASES, SamplingMatrix, generate, hadamard, normalize
from .errors import BudgetExceeded, InvalidParameter
from .l1solve import recover
from .rng import MAX_SEED, check_seed, substream

MAX_N = 128
MAX_TRIALS = 10_000
CSV_FIELDS = ("N", "s", "m", "ensemble", "seed", "trials", "successes", "prob", "secs")
MAGNITUDES = ("sign", "gaussian", "uniform")
EXACT_TOL = 1e-12


def fmt(v) -> str:
    """CSV cell: 17 significant digits for floats, ``inf`` for infinity, empty for None."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


# -- phase transition -------------------------------------------------------


@dataclass
class ExperimentConfig:
    ensemble: str = "partial_fourier"
    N: int = 64
    s_values: list = field(default_factory=lambda: [3])
    m_values: list = field(default_factory=lambda: list(range(2, 25, 2)))
    trials: int = 200
    seed: int = 0
    magnitudes: str = "sign"
    recovery_tol: float | None = None
    replace_rows: bool = True
    timing: bool = False
    theory: bool = False
    theory_epsilon: float = 0.01
    theory_lambda: float = 0.5
    csv_path: str | None = None
    json_path: str | None = None
    figure_path: str | None = None
    max_N: int = MAX_N
    max_trials: int = MAX_TRIALS

    def __post_init__(self):
        if isinstance(self.s_values, int):
            self.s_values = [self.s_values]
        if isinstance(self.m_values, int):
            self.m_values = [self.m_values]
        self.s_values = [int(s) for s in self.s_values]
        self.m_values = [int(m) for m in self.m_values]

    def validate(self) -> None:
        if ALIASES.get(self.ensemble) not in ("partial_fourier", "partial_hadamard", "rademacher_rows"):
            raise InvalidParameter(f"no generator for ensemble {self.ensemble!r}")
        self.ensemble = ALIASES[self.ensemble]
        if not self.s_values or not self.m_values:
            raise InvalidParameter("s and m ranges must be nonempty")
        if self.trials < 1:
            raise InvalidParameter("trials must be >= 1")
        if self.magnitudes not in MAGNITUDES:
            raise InvalidParameter(f"magnitudes must be one of {MAGNITUDES}")
        check_seed(self.seed)
        if self.N > self.max_N:
            raise BudgetExceeded(f"N = {self.N} exceeds the budget of {self.max_N}")
        if self.trials > self.max_trials:
            raise BudgetExceeded(f"{self.trials} trials per point exceed the budget of {self.max_trials}")
        if any(not 0 <= s <= self.N for s in self.s_values):
            raise InvalidParameter("every s must lie in [0, N]")
        if any(m < 1 for m in self.m_values):
            raise InvalidParameter("every m must be >= 1")
        if not self.replace_rows and max(self.m_values) > self.N:
            raise InvalidParameter("distinct-row sampling needs m <= N")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class ExperimentRecord:
    N: int
    s: int
    m: int
    ensemble: str
    seed: int
    trials: int
    successes: int
    solver_failures: int
    secs: float | None = None
    m_min: int | None = None

    @property
    def prob(self) -> float:
        return self.successes / self.trials

    def to_json(self) -> dict:
        out = asdict(self)
        out["prob"] = self.prob
        return out

    def csv_row(self, with_theory: bool = False) -> list[str]:
        row = [fmt(self.N), fmt(self.s), fmt(self.m), self.ensemble, fmt(self.seed), fmt(self.trials),
               fmt(self.successes), fmt(self.prob), fmt(self.secs)]
        if with_theory:
            row.append(fmt(self.m_min))
        return row


def planted_signal(rng: np.random.Generator, N: int, s: int, magnitudes: str = "sign") -> np.ndarray:
    x = np.zeros(N)
    if s == 0:
        return x
    support = rng.choice(N, size=s, replace=False)
    signs = rng.integers(0, 2, size=s) * 2.0 - 1.0
    if magnitudes == "sign":
        mags = np.ones(s)
    elif magnitudes == "gaussian":
        mags = np.abs(rng.standard_normal(s))
    else:
        mags = rng.uniform(0.1, 1.0, size=s)
    x[support] = signs * mags
    return x


def run_trial(cfg: ExperimentConfig, s: int, m: int, t: int) -> str:
    """One recovery attempt; returns 'success', 'failure' or 'solver_failure'."""
    rng = substream(cfg.seed, "trial", s, m, t)
    matrix_seed = int(rng.integers(0, MAX_SEED, dtype=np.uint64, endpoint=True))
    A = normalize(generate(cfg.ensemble, cfg.N, m, matrix_seed, cfg.replace_rows))
    x0 = planted_signal(rng, cfg.N, s, cfg.magnitudes)
    rep = recover(A, x0, cfg.recovery_tol)
    if rep.bp_result.status != "optimal":
        return "solver_failure"
    return "success" if rep.success else "failure"


def _run_point(cfg: ExperimentConfig, s: int, m: int) -> tuple[int, int, float]:
    t0 = time.perf_counter()
    ok = fail = 0
    for t in range(cfg.trials):
        outcome = run_trial(cfg, s, m, t)
        ok += outcome == "success"
        fail += outcome == "solver_failure"
    return ok, fail, time.perf_counter() - t0


def _run_point_star(args):
    return _run_point(*args)


def theory_m_min(N: int, s: int, epsilon: float, lam: float) -> int | None:
    """m from the sample bound at order 2s and delta = 4/sqrt(41), or None outside its hypotheses."""
    inputs = bounds.BoundInputs(N=N, K=1.0, s=2 * s, delta=bounds.DELTA_BEST, epsilon=epsilon, lam=lam)
    if s < 1 or inputs.violations():
        return None
    return bounds.sample_complexity(inputs)


def phase_transition(cfg: ExperimentConfig, threads: int = 1) -> list[ExperimentRecord]:
    cfg.validate()
    points = [(s, m) for s in cfg.s_values for m in cfg.m_values]
    jobs = [(cfg, s, m) for s, m in points]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            results = list(pool.map(_run_point_star, jobs))
    else:
        results = [_run_point_star(j) for j in jobs]
    records = []
    for (s, m), (ok, fail, secs) in zip(points, results):
        m_min = theory_m_min(cfg.N, s, cfg.theory_epsilon, cfg.theory_lambda) if cfg.theory else None
        records.append(ExperimentRecord(
            N=cfg.N, s=s, m=m, ensemble=cfg.ensemble, seed=cfg.seed, trials=cfg.trials,
            successes=ok, solver_failures=fail, secs=secs if cfg.timing else None, m_min=m_min))
    return records


def records_to_csv(records, with_theory: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_FIELDS) + (["m_min"] if with_theory else []))
    for r in records:
        w.writerow(r.csv_row(with_theory))
    return buf.getvalue()


def records_to_json(records, cfg: ExperimentConfig | None = None) -> dict:
    out = {"records": [r.to_json() for r in records]}
    if cfg is not None:
        cfg_json = asdict(cfg)
        out["config"] = cfg_json
        out["note"] = ("m_min is the sample bound's value at delta_2s = 4/sqrt(41); it is metadata only "
                       "and far exceeds the swept range, so the sweep tests trends, not the constant.")
    return out


def write_outputs(records, cfg: ExperimentConfig) -> dict:
    """Write whichever of CSV, JSON and SVG the config names; returns the paths written."""
    from .figures import emit_figure

    written = {}
    if cfg.csv_path:
        Path(cfg.csv_path).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.csv_path).write_text(records_to_csv(records, cfg.theory))
        written["csv"] = cfg.csv_path
    if cfg.json_path:
        Path(cfg.json_path).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.json_path).write_text(json.dumps(records_to_json(records, cfg), indent=2, sort_keys=True) + "\n")
        written["json"] = cfg.json_path
    if cfg.figure_path:
        emit_figure(records, "phase_diagram", cfg.figure_path)
        written["figure"] = cfg.figure_path
    return written


# -- exact enumeration ----------------------------------------------------------


@dataclass
class ExactCheck:
    lhs: float
    rhs: float
    ratio: float
    outcomes: int

    @property
    def ok(self) -> bool:
        return self.ratio <= 1.0 + EXACT_TOL

    def to_json(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


def _sign_patterns(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return 1.0 - 2.0 * bits


def khintchine_enumeration_check(x, p: int, max_N: int = 20, chunk: int = 1 << 16) -> ExactCheck:
    """E|sum eps_j x_j|^p over all 2^N sign patterns against the moment bound."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidParameter("x must be a nonempty real vector")
    if int(p) != p or p < 2 or int(p) % 2:
        raise InvalidParameter(f"p must be an even integer >= 2, got {p}")
    p = int(p)
    n = x.size
    if n > max_N:
        raise BudgetExceeded(f"2^{n} sign patterns exceed the enumeration budget 2^{max_N}")
    total = 1 << n
    parts = []
    for start in range(0, total, chunk):
        sums = _sign_patterns(n, start, min(total, start + chunk)) @ x
        parts.append(math.fsum(sums**p))
    moment = math.fsum(parts) / total
    bound = bounds.khintchine_bound(p, float(np.linalg.norm(x)))
    ratio = moment / bound if bound > 0 else 0.0
    check = ExactCheck(moment, bound, ratio, total)
    if not check.ok:
        raise AssertionError(f"Khintchine bound exceeded: {check}")
    return check


def _norm(v: np.ndarray, norm) -> np.ndarray:
    if norm in ("inf", math.inf):
        return np.max(np.abs(v), axis=-1)
    return np.sum(np.abs(v) ** float(norm), axis=-1) ** (1.0 / float(norm))


def symmetrization_check(distributions, p: float, norm=2, budget: int = 10**6) -> ExactCheck:
    """Exact (E||sum(xi_j - E xi_j)||^p)^(1/p) against 2 (E||sum eps_j xi_j||^p)^(1/p).

    ``distributions`` lists, for each j, the finite law of xi_j as ``(prob, vector)`` pairs.
    """
    if p < 1:
        raise InvalidParameter("need p >= 1")
    laws = []
    for law in distributions:
        probs = np.array([float(w) for w, _ in law])
        vecs = np.array([np.atleast_1d(np.asarray(v, dtype=float)) for _, v in law])
        if probs.size == 0 or np.any(probs < 0) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise InvalidParameter("each law needs nonnegative weights summing to 1")
        laws.append((probs, vecs))
    if not laws:
        raise InvalidParameter("need at least one random vector")
    dim = laws[0][1].shape[1]
    if any(v.shape[1] != dim for _, v in laws):
        raise InvalidParameter("all vectors must share one dimension")
    n = len(laws)
    joint = math.prod(len(w) for w, _ in laws)
    outcomes = joint * (1 << n)
    if outcomes > budget:
        raise BudgetExceeded(f"{outcomes} joint outcomes exceed the budget of {budget}")

    means = [w @ v for w, v in laws]
    center = np.sum(means, axis=0)
    combos = np.array(list(itertools.product(*[range(len(w)) for w, _ in laws])))
    prob = np.prod([laws[j][0][combos[:, j]] for j in range(n)], axis=0)
    xi = np.stack([laws[j][1][combos[:, j]] for j in range(n)], axis=1)  # (joint, n, dim)
    lhs = math.fsum(prob * _norm(xi.sum(axis=1) - center, norm) ** p) ** (1.0 / p)
    signs = _sign_patterns(n, 0, 1 << n)  # (2^n, n)
    signed = np.einsum("kn,jnd->jkd", signs, xi)
    sym = np.mean(_norm(signed, norm) ** p, axis=1)
    rhs = 2.0 * math.fsum(prob * sym) ** (1.0 / p)
    ratio = lhs / rhs if rhs > 0 else 0.0
    check = ExactCheck(lhs, rhs, ratio, outcomes)
    if not check.ok:
        raise AssertionError(f"symmetrization bound exceeded: {check}")
    return check


# -- covering lemma -------------------------------------------------------------------


@dataclass
class CoveringCheck:
    N: int
    M: int
    p: float
    radius: float
    max_distance: float
    violations: int
    points_checked: int

    def to_json(self) -> dict:
        return asdict(self)


def l1_ball_points(rng: np.random.Generator, N: int, count: int) -> np.ndarray:
    """Half uniform in the l1 ball, half on its boundary."""
    inner = count // 2
    u = rng.dirichlet(np.ones(N + 1), size=inner)[:, :N]
    b = rng.dirichlet(np.ones(N), size=count - inner)
    pts = np.vstack([u, b])
    return pts * (rng.integers(0, 2, size=pts.shape) * 2.0 - 1.0)


def bounded_rows(rng: np.random.Generator, N: int, kind: int) -> np.ndarray:
    """Random rows with sup-norm at most 1 (K = 1), cycling through three shapes."""
    n_rows = int(rng.integers(1, 6))
    if kind % 3 == 0:
        return rng.uniform(-1.0, 1.0, size=(n_rows, N))
    if kind % 3 == 1:
        return rng.integers(0, 2, size=(n_rows, N)) * 2.0 - 1.0
    return np.exp(2j * np.pi * rng.uniform(size=(n_rows, N)))


def min_grid_distance(rows: np.ndarray, points: np.ndarray, grid: np.ndarray, p: float,
                      chunk_elems: int = 4_000_000) -> np.ndarray:
    """min over grid of d_{X,2p}(point, grid point) for each point."""
    xp = points @ rows.T
    xg = grid @ rows.T
    m = rows.shape[0]
    step = max(1, chunk_elems // max(1, grid.shape[0] * m))
    out = np.empty(points.shape[0])
    for i in range(0, points.shape[0], step):
        diff = np.abs(xp[i:i + step, None, :] - xg[None, :, :]) ** (2.0 * p)
        out[i:i + step] = np.min(np.mean(diff, axis=2), axis=1) ** (1.0 / (2.0 * p))
    return out


def covering_empirical_check(N: int, M: int, p: float = 1.0, realizations: int = 20,
                             samples: int = 10_000, seed: int = 0) -> CoveringCheck:
    if not 1 <= N <= 3:
        raise InvalidParameter("the covering sweep is limited to N in {1, 2, 3}")
    if not 1 <= M <= 8:
        raise InvalidParameter("the covering sweep is limited to M in {1, ..., 8}")
    r = bounds.lemma_radius(1.0, p, M)
    grid = bounds.maurey_grid(N, M) / M
    eye = np.eye(N)
    vertices = np.vstack([eye, -eye])
    worst = 0.0
    bad = 0
    checked = 0
    for k in range(realizations):
        rng = substream(seed, "covering", N, M, k)
        rows = bounded_rows(rng, N, k)
        pts = np.vstack([vertices, l1_ball_points(rng, N, samples)])
        d = min_grid_distance(rows, pts, grid, p)
        worst = max(worst, float(d.max()))
        bad += int(np.sum(d > r))
        checked += pts.shape[0]
    return CoveringCheck(N, M, p, r, worst, bad, checked)


# -- RIP threshold => NSP and recovery sweep ------------------------------------------


def sign_patterns_grid(N: int, s: int, cap: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Every s-sparse sign vector when there are at most ``cap``, else ``cap`` random ones."""
    total = math.comb(N, s) * 2**s
    if total <= cap:
        out = []
        for support in itertools.combinations(range(N), s):
            for signs in itertools.product((1.0, -1.0), repeat=s):
                x = np.zeros(N)
                x[list(support)] = signs
                out.append(x)
        return out
    out = []
    for _ in range(cap):
        x = np.zeros(N)
        support = rng.choice(N, size=s, replace=False)
        x[support] = rng.integers(0, 2, size=s) * 2.0 - 1.0
        out.append(x)
    return out


def desk_matrix(index: int, seed: int) -> SamplingMatrix:
    """Small random matrix from one of the built-in ensembles (N in 6..12)."""
    rng = substream(seed, "desk-matrix", index)
    ensemble = ("partial_fourier", "partial_hadamard", "rademacher_rows")[index % 3]
    N = 8 if ensemble == "partial_hadamard" else int(rng.integers(6, 13))
    m = int(rng.integers(N // 2, N + 1))
    mseed = int(rng.integers(0, MAX_SEED, dtype=np.uint64, endpoint=True))
    return normalize(generate(ensemble, N, m, mseed, replace_rows=ensemble != "partial_hadamard"))


def flat_kernel_matrix(index: int, seed: int, N: int = 16) -> SamplingMatrix:
    """(N-1) x N matrix with orthonormal rows whose kernel vector has nearly flat magnitudes.

    Even indices use N-1 distinct Hadamard rows with random column signs; odd
    indices span the complement of a perturbed sign vector.  Either way
    A^T A = I - v v^T / |v|^2, so delta_2s is the largest 2s-mass of v^2 / |v|^2.
    """
    rng = substream(seed, "flat-kernel", index)
    if index % 2 == 0:
        h = hadamard(N)
        drop = int(rng.integers(0, N))
        cols = rng.integers(0, 2, size=N) * 2.0 - 1.0
        rows = np.delete(h, drop, axis=0) * cols / math.sqrt(N)
    else:
        v = (rng.integers(0, 2, size=N) * 2.0 - 1.0) * (1.0 + rng.uniform(0.0, 0.35) * rng.uniform(-1, 1, size=N))
        q, _ = np.linalg.qr(np.column_stack([v, rng.standard_normal((N, N - 1))]))
        rows = q[:, 1:].T
    return SamplingMatrix(rows, K=float(np.max(np.abs(rows))), ensemble="tabulated",
                          seed=index, normalized=True)


@dataclass
class SweepReport:
    s: int
    threshold: float
    matrices_tested: int
    matrices_rejected: int
    patterns_tested: int
    nsp_counterexamples: int
    recovery_counterexamples: int
    max_delta: float
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.nsp_counterexamples == 0 and self.recovery_counterexamples == 0

    def to_json(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


def threshold_implication_sweep(s: int, n_matrices: int, threshold: float | None = None,
                                generator=desk_matrix, seed: int = 0, pattern_cap: int = 256,
                                max_attempts: int | None = None) -> SweepReport:
    """Matrices with brute-forced delta_2s below the threshold must have the NSP and recover every pattern."""
    if threshold is None:
        threshold = bounds.delta_threshold_best(s)
    max_attempts = 50 * n_matrices if max_attempts is None else max_attempts
    rep = SweepReport(s, threshold, 0, 0, 0, 0, 0, 0.0)
    i = 0
    while rep.matrices_tested < n_matrices:
        if i >= max_attempts:
            raise BudgetExceeded(f"only {rep.matrices_tested} of {n_matrices} matrices met the threshold")
        A = generator(i, seed)
        i += 1
        if 2 * s > A.N:
            rep.matrices_rejected += 1
            continue
        delta = rip_constant(A, 2 * s).delta
        if not delta < threshold:
            rep.matrices_rejected += 1
            continue
        rep.matrices_tested += 1
        rep.max_delta = max(rep.max_delta, delta)
        nsp = nsp_check(A, s)
        if nsp.verdict != "holds":
            rep.nsp_counterexamples += 1
            rep.details.append({"index": i - 1, "delta": delta, "nsp": nsp.to_json()})
        rng = substream(seed, "sweep-patterns", i - 1)
        for x0 in sign_patterns_grid(A.N, s, pattern_cap, rng):
            rep.patterns_tested += 1
            if not recover(A, x0).success:
                rep.recovery_counterexamples += 1
                rep.details.append({"index": i - 1, "delta": delta, "x0": x0.tolist()})
    return rep

