"""Exhaustive certificates for small matrices.

RIP constants come from extreme Gram eigenvalues over every support; the null
space property is decided by linear programs over a kernel basis (or, when
cheaper, by enumerating the vertices of the kernel's l1-ball section).  The
randomized routines here only ever produce lower bounds and say so.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import SamplingMatrix
from .errors import BudgetExceeded, InvalidParameter, InvalidState
from .linalg import hermitian_to_real, jacobi_eigh, kernel_basis
from .rng import substream
from .signals import as_signal, entropy, sorted_blocks
from .simplex import linprog_simplex

NSP_MARGIN = 1e-8
DEFAULT_SUPPORT_BUDGET = 2_000_000
DEFAULT_LP_BUDGET = 200_000
_CHUNK = 20_000


def matrix_entries(A) -> np.ndarray:
    """Entries of a normalized matrix; raw ``SamplingMatrix`` objects are rejected."""
    if isinstance(A, SamplingMatrix):
        if not A.normalized:
            raise InvalidState("certificates need a normalized matrix (see ensembles.normalize)")
        return A.entries
    a = np.asarray(A)
    if a.ndim != 2:
        raise InvalidParameter("matrix must be 2-d")
    return a if np.iscomplexobj(a) else a.astype(float)


def realify(a: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a):
        return np.vstack([a.real, a.imag])
    return a


def _supports(n: int, s: int):
    """Lexicographic s-subsets of range(n) as int arrays, in chunks."""
    it = itertools.combinations(range(n), s)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), s)


# -- RIP ---------------------------------------------------------------------


@dataclass
class RipReport:
    s: int
    delta: float
    extremal_support: tuple
    extremal_vector: np.ndarray
    side: str  # "upper" if lambda_max - 1 is the binding deviation, else "lower"

    def to_json(self) -> dict:
        vec = self.extremal_vector
        if np.iscomplexobj(vec):
            vec_json = [[float(z.real), float(z.imag)] for z in vec]
        else:
            vec_json = [float(v) for v in vec]
        return {
            "s": self.s,
            "delta": self.delta,
            "extremal_support": list(self.extremal_support),
            "extremal_vector": vec_json,
            "side": self.side,
        }


def rip_constant(A, s: int, budget: int = DEFAULT_SUPPORT_BUDGET, real_vectors: bool = False) -> RipReport:
    """Restricted isometry constant delta_s by enumerating every support of size s.

    Complex matrices are handled over complex vectors through the real 2s x 2s
    embedding of each Hermitian Gram matrix; ``real_vectors=True`` restricts
    to real vectors instead (Gram matrix Re(A_S^H A_S)).
    """
    a = matrix_entries(A)
    n = a.shape[1]
    if s < 1 or s > n:
        raise InvalidParameter(f"need 1 <= s <= N, got s={s}, N={n}")
    count = math.comb(n, s)
    if count > budget:
        raise BudgetExceeded(f"C({n},{s}) = {count} supports exceed the budget of {budget}")
    complex_vectors = np.iscomplexobj(a) and not real_vectors

    best = (-1.0, None, None, None)
    for sup in _supports(n, s):
        cols = a[:, sup]  # (m, C, s)
        cols = np.moveaxis(cols, 1, 0)  # (C, m, s)
        gram = np.conj(cols.transpose(0, 2, 1)) @ cols
        gram = hermitian_to_real(gram) if complex_vectors else gram.real
        w, v = jacobi_eigh(gram)
        upper = w[:, -1] - 1.0
        lower = 1.0 - w[:, 0]
        dev = np.maximum(upper, lower)
        i = int(np.argmax(dev))
        if dev[i] > best[0]:
            side = "upper" if upper[i] >= lower[i] else "lower"
            vec = v[i, :, -1] if side == "upper" else v[i, :, 0]
            best = (float(dev[i]), tuple(int(j) for j in sup[i]), vec, side)

    delta, support, vec, side = best
    x = np.zeros(n, dtype=complex if complex_vectors else float)
    if complex_vectors:
        x[list(support)] = vec[:s] + 1j * vec[s:]
    else:
        x[list(support)] = vec
    x /= np.linalg.norm(x)
    return RipReport(s=s, delta=max(delta, 0.0), extremal_support=support, extremal_vector=x, side=side)


def _random_sparse_unit(rng, n: int, s: int, trials: int, complex_vectors: bool):
    supports = np.argsort(rng.random((trials, n)), axis=1)[:, :s]
    vals = rng.standard_normal((trials, s))
    if complex_vectors:
        vals = vals + 1j * rng.standard_normal((trials, s))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    return supports, vals


def rip_sampled_lower_bound(A, s: int, trials: int, seed: int, chunk: int = 20_000) -> float:
    """max | ||Ax||^2 - 1 | over random unit s-sparse x; a lower bound on delta_s."""
    a = matrix_entries(A)
    n = a.shape[1]
    if trials <= 0:
        return 0.0
    s = min(s, n)
    rng = substream(seed, "rip-sampled")
    complex_vectors = np.iscomplexobj(a)
    best = 0.0
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        sup, vals = _random_sparse_unit(rng, n, s, k, complex_vectors)
        cols = np.moveaxis(a[:, sup], 1, 0)  # (k, m, s)
        ax = np.einsum("kms,ks->km", cols, vals)
        dev = np.abs(np.sum(np.abs(ax) ** 2, axis=1) - 1.0)
        best = max(best, float(dev.max()))
        done += k
    return best


# -- NSP ---------------------------------------------------------------------


@dataclass
class NspReport:
    s: int
    verdict: str  # holds | fails | indeterminate
    worst_ratio: float
    witness: np.ndarray | None
    witness_support: tuple
    kernel_dim: int
    method: str

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "verdict": self.verdict,
            "worst_ratio": self.worst_ratio,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "witness_support": list(self.witness_support),
            "kernel_dim": self.kernel_dim,
            "method": self.method,
        }


def _verdict(ratio: float, margin: float) -> str:
    if ratio <= 0.5 - margin:
        return "holds"
    if ratio >= 0.5 + margin:
        return "fails"
    return "indeterminate"


def _top_support(v: np.ndarray, s: int) -> tuple:
    order = np.argsort(-np.abs(v), kind="stable")[:s]
    return tuple(sorted(int(i) for i in order))


def _nsp_lp_value(B: np.ndarray, support, signs):
    """max sum_i signs_i v_i over v = B w with ||v||_1 <= 1, by the bundled simplex."""
    n, d = B.shape
    # variables: w+ (d), w- (d), t (n), slack+ (n), slack- (n), slack_sum (1)
    nv = 2 * d + 3 * n + 1
    A_eq = np.zeros((2 * n + 1, nv))
    A_eq[:n, :d] = B
    A_eq[:n, d:2 * d] = -B
    A_eq[:n, 2 * d:2 * d + n] = -np.eye(n)
    A_eq[:n, 2 * d + n:2 * d + 2 * n] = np.eye(n)
    A_eq[n:2 * n, :d] = -B
    A_eq[n:2 * n, d:2 * d] = B
    A_eq[n:2 * n, 2 * d:2 * d + n] = -np.eye(n)
    A_eq[n:2 * n, 2 * d + 2 * n:2 * d + 3 * n] = np.eye(n)
    A_eq[2 * n, 2 * d:2 * d + n] = 1.0
    A_eq[2 * n, -1] = 1.0
    b = np.zeros(2 * n + 1)
    b[-1] = 1.0
    obj = np.zeros(nv)
    g = signs @ B[list(support)]
    obj[:d] = -g
    obj[d:2 * d] = g
    res = linprog_simplex(obj, A_eq, b)
    if res.status != "optimal":
        raise RuntimeError(f"NSP linear program ended with status {res.status}")
    w = res.x[:d] - res.x[d:2 * d]
    return -res.fun, B @ w


def kernel_vertices(B: np.ndarray, tol: float = 1e-10):
    """Vertices (up to sign) of {v = Bw : ||v||_1 <= 1}, scaled to ||v||_1 = 1.

    Every vertex has at least d - 1 zero coordinates, so each is the null
    direction of some d - 1 rows of the basis ``B`` (shape N x d).
    """
    n, d = B.shape
    found = []
    for zeros in itertools.combinations(range(n), d - 1):
        if d == 1:
            w = np.ones(1)
        else:
            sub = B[list(zeros)]
            _, sv, vt = np.linalg.svd(sub)
            if sv[-1] <= tol * max(1.0, sv[0]):
                continue
            w = vt[-1]
        v = B @ w
        norm1 = np.sum(np.abs(v))
        if norm1 <= tol:
            continue
        v = v / norm1
        v[np.array(zeros, dtype=np.intp)] = 0.0
        v /= np.sum(np.abs(v))
        found.append(v)
    return found


def nsp_costs(n: int, d: int, s: int) -> tuple[int, int]:
    lp = math.comb(n, s) * 2 ** max(s - 1, 0)
    vert = math.comb(n, max(d - 1, 0))
    return lp, vert


def nsp_check(A, s: int, method: str = "auto", budget: int = DEFAULT_LP_BUDGET,
              margin: float = NSP_MARGIN, rank_tol: float = 1e-10) -> NspReport:
    """Decide the null space property of order s.

    ``method="lp"`` solves, for every support S and sign pattern, the LP
    max sum_S sign_i v_i over the kernel with ||v||_1 <= 1 (patterns and
    their negatives give the same value, so one of each pair is solved).
    ``method="vertices"`` evaluates the top-s l1 mass at every vertex of the
    kernel's l1-ball section, which is exact because a convex function attains
    its maximum over a polytope at a vertex.  ``auto`` picks the cheaper one.
    """
    a = realify(matrix_entries(A))
    n = a.shape[1]
    if s < 1 or s > n:
        raise InvalidParameter(f"need 1 <= s <= N, got s={s}, N={n}")
    B = kernel_basis(a, rank_tol)
    d = B.shape[1]
    if d == 0:
        return NspReport(s, "holds", 0.0, None, (), 0, "trivial-kernel")
    lp_cost, vert_cost = nsp_costs(n, d, s)
    if method == "auto":
        method = "vertices" if vert_cost <= lp_cost else "lp"
    cost = lp_cost if method == "lp" else vert_cost
    if cost > budget:
        raise BudgetExceeded(f"NSP check via {method} needs {cost} steps, budget {budget}")

    best_ratio, witness, witness_support = -1.0, None, ()
    if method == "lp":
        for support in itertools.combinations(range(n), s):
            for tail in itertools.product((1.0, -1.0), repeat=s - 1):
                signs = np.array((1.0,) + tail)
                val, v = _nsp_lp_value(B, support, signs)
                if val > best_ratio + 1e-15:
                    best_ratio, witness, witness_support = val, v, support
    elif method == "vertices":
        for v in kernel_vertices(B, rank_tol):
            sup = _top_support(v, s)
            val = float(np.sum(np.abs(v[list(sup)])))
            if val > best_ratio + 1e-15 or (abs(val - best_ratio) <= 1e-15 and sup < witness_support):
                best_ratio, witness, witness_support = val, v, sup
    else:
        raise InvalidParameter(f"unknown NSP method {method!r}")

    witness = witness / np.sum(np.abs(witness))
    return NspReport(s, _verdict(best_ratio, margin), float(best_ratio), witness,
                     tuple(int(i) for i in witness_support), d, method)


def min_kernel_entropy(A, rank_tol: float = 1e-10, budget: int = DEFAULT_LP_BUDGET):
    """Exact minimum l1-entropy over nonzero kernel vectors, with a minimizer.

    On the section ||v||_1 = 1 the entropy is 1/||v||_2^2, and ||v||_2 is
    convex, so the minimum sits at a vertex.  Returns (inf, None) for a
    trivial kernel.
    """
    a = realify(matrix_entries(A))
    B = kernel_basis(a, rank_tol)
    n, d = B.shape
    if d == 0:
        return math.inf, None
    if math.comb(n, d - 1) > budget:
        raise BudgetExceeded(f"kernel vertex scan needs C({n},{d - 1}) steps, budget {budget}")
    best, arg = math.inf, None
    for v in kernel_vertices(B, rank_tol):
        e = entropy(v)
        if e < best:
            best, arg = e, v
    return best, arg


# -- LEIP ----------------------------------------------------------------------


@dataclass
class LeipEstimate:
    t: float
    lower_bound: float
    vector: np.ndarray
    vector_entropy: float
    evaluations: int

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "lower_bound": self.lower_bound,
            "kind": "lower bound on the low entropy isometry constant",
            "vector": [float(v) for v in self.vector],
            "vector_entropy": self.vector_entropy,
            "evaluations": self.evaluations,
        }


def _deviation(gram_real: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|x^T G x - ||x||^2| / ||x||^2 for a batch of rows x."""
    quad = np.einsum("ki,ij,kj->k", x, gram_real, x)
    nrm = np.einsum("ki,ki->k", x, x)
    return np.abs(quad - nrm) / nrm


def _entropies(x: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(x), axis=1) ** 2 / np.einsum("ki,ki->k", x, x)


def leip_estimate(A, t: float, budget: int = 20_000, seed: int = 0,
                  rip_budget: int = DEFAULT_SUPPORT_BUDGET) -> LeipEstimate:
    """Randomized lower bound on the low entropy isometry constant of order t (real vectors).

    Seeds: RIP extremal vectors for every s <= floor(t), flat s-sparse and
    geometrically decaying profiles; then a local ascent that only accepts
    moves staying inside {Ent(x) <= t}.
    """
    if t < 1:
        raise InvalidParameter(f"need t >= 1, got {t}")
    a = matrix_entries(A)
    n = a.shape[1]
    gram = (np.conj(a.T) @ a).real
    rng = substream(seed, "leip")
    seeds = []
    for s in range(1, min(int(math.floor(t + 1e-12)), n) + 1):
        if math.comb(n, s) > rip_budget:
            break
        seeds.append(rip_constant(a, s, real_vectors=True).extremal_vector.real)
    n_random = max(budget // 4, 1)
    smax = max(1, min(int(math.floor(t + 1e-12)), n))
    for _ in range(n_random):
        s = int(rng.integers(1, smax + 1))
        x = np.zeros(n)
        idx = rng.permutation(n)[:s]
        if rng.random() < 0.5:
            x[idx] = rng.choice((-1.0, 1.0), size=s)
        else:
            ratio = rng.uniform(0.05, 1.0)
            x[idx] = ratio ** np.arange(s) * rng.choice((-1.0, 1.0), size=s)
        seeds.append(x)
    X = np.array(seeds)
    ent = _entropies(X)
    X = X[ent <= t + 1e-12]
    vals = _deviation(gram, X)
    evaluations = len(X)
    i = int(np.argmax(vals))
    best_x, best_v = X[i].copy(), float(vals[i])

    # local ascent around the incumbent
    steps = max(budget - evaluations, 0)
    scale = 0.3
    batch = 64
    while steps > 0:
        k = min(batch, steps)
        cand = best_x + scale * rng.standard_normal((k, n)) * (np.abs(best_x).max() + 1e-12)
        ok = _entropies(cand) <= t
        steps -= k
        evaluations += k
        if not np.any(ok):
            scale *= 0.7
            continue
        cand = cand[ok]
        cv = _deviation(gram, cand)
        j = int(np.argmax(cv))
        if cv[j] > best_v:
            best_v, best_x = float(cv[j]), cand[j].copy()
        else:
            scale *= 0.85
        if scale < 1e-6:
            scale = 0.3
    best_x /= np.linalg.norm(best_x)
    return LeipEstimate(t, best_v, best_x, entropy(best_x), evaluations)


# -- executable lemma checks ------------------------------------------------------


@dataclass
class LemmaSweep:
    name: str
    cases: int
    violations: int
    worst_slack: float
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {"name": self.name, "cases": self.cases, "violations": self.violations,
                "worst_slack": self.worst_slack, "ok": self.ok, **self.details}


def check_lemma_tlem(A, s: int, trials: int, seed: int, tol: float = 1e-9) -> LemmaSweep:
    """|<Ax, Ay>| <= delta_2s sqrt(1 - t^2) for disjointly supported unit x, y."""
    a = matrix_entries(A)
    n = a.shape[1]
    order = min(2 * s, n)
    if n < 2:
        raise InvalidParameter("need N >= 2 for disjoint supports")
    delta = rip_constant(a, order).delta
    rng = substream(seed, "tlem")
    complex_vectors = np.iscomplexobj(a)
    violations = 0
    worst = math.inf
    for _ in range(trials):
        k1 = int(rng.integers(1, order))
        k2 = int(rng.integers(1, order - k1 + 1))
        perm = rng.permutation(n)
        sx, sy = perm[:k1], perm[k1:k1 + k2]
        x = np.zeros(n, dtype=complex if complex_vectors else float)
        y = np.zeros_like(x)
        x[sx] = rng.standard_normal(k1) + (1j * rng.standard_normal(k1) if complex_vectors else 0)
        y[sy] = rng.standard_normal(k2) + (1j * rng.standard_normal(k2) if complex_vectors else 0)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        ax, ay = a @ x, a @ y
        dev = float(np.vdot(ax, ax).real) - 1.0
        if delta == 0.0:
            if abs(dev) > 1e-12:
                raise InvalidState("RIP report says delta = 0 but a deviation was observed")
            tt = 0.0
        else:
            tt = float(np.clip(dev / delta, -1.0, 1.0))
        slack = delta * math.sqrt(max(0.0, 1.0 - tt * tt)) - abs(np.vdot(ay, ax))
        worst = min(worst, slack)
        if slack < -tol:
            violations += 1
    return LemmaSweep("tlem", trials, violations, worst, {"delta_2s": delta, "order": order})


def check_lemma_cwx2(x) -> float:
    """(1/sqrt s)||x||_1 + (sqrt s / 4)(x_1 - x_s) - ||x||_2 for sorted nonnegative x."""
    x = as_signal(x)
    if np.any(x < 0) or np.any(np.diff(x) > 0):
        raise InvalidParameter("x must be nonnegative and sorted in decreasing order")
    s = x.size
    rs = math.sqrt(s)
    return math.fsum(x) / rs + rs / 4.0 * (x[0] - x[-1]) - float(np.linalg.norm(x))


def check_lemma_l21(x, t: int, s: int) -> float:
    """Slack of sum_{k>1} ||x_Sk||_2 <= (1/sqrt s)||x_{S1^c}||_1 + (sqrt s/4)|x_{t+1}|.

    Blocks come from ``sorted_blocks(x, t, s)``; the correction term uses the
    largest entry outside the head block.
    """
    part = sorted_blocks(x, t, s)
    xs = part.source
    tail = part.tail
    if tail.size == 0:
        return 0.0
    rs = math.sqrt(s)
    lhs = math.fsum(part.block_norms(2)[1:])
    rhs = float(np.sum(np.abs(xs[tail]))) / rs + rs / 4.0 * abs(xs[tail[0]])
    return rhs - lhs


@dataclass
class Implication:
    premise: bool | None
    conclusion: bool | None
    violated: bool
    evidence: str

    def to_json(self) -> dict:
        return {"premise": self.premise, "conclusion": self.conclusion,
                "violated": self.violated, "evidence": self.evidence}


def check_prop1(A, s: int, t: float, seed: int = 0, leip_budget: int = 4000) -> dict:
    """Check the three entropy implications on one matrix.

    1. NEP(t) with t > 4s  =>  NSP(s)
    2. LEIP constant < 1   =>  NEP(t), checked in contrapositive form: a kernel
       vector with entropy <= t must have isometry deviation exactly 1
    3. s <= t              =>  delta_s <= LEIP constant (against the seeded
       lower bound, which dominates delta_s by construction)
    """
    a = matrix_entries(A)
    ent_min, v_min = min_kernel_entropy(a)
    nep = ent_min >= t
    nsp = nsp_check(a, s)

    premise1 = nep and t > 4 * s
    imp1 = Implication(premise1, nsp.verdict == "holds",
                       violated=premise1 and nsp.verdict == "fails",
                       evidence=f"min kernel entropy {ent_min:.6g}; NSP verdict {nsp.verdict}")

    if v_min is not None and not nep:
        av = realify(a) @ v_min
        dev = abs(float(av @ av) - float(v_min @ v_min)) / float(v_min @ v_min)
        imp2 = Implication(premise=False, conclusion=False, violated=dev < 1 - 1e-9,
                           evidence=f"kernel vector with entropy {ent_min:.6g} has deviation {dev:.12g}")
    else:
        imp2 = Implication(premise=None, conclusion=True, violated=False,
                           evidence="NEP(t) holds; nothing to refute")

    leip = leip_estimate(a, t, budget=leip_budget, seed=seed)
    if s <= t:
        rip = rip_constant(a, s, real_vectors=True).delta
        imp3 = Implication(True, rip <= leip.lower_bound + 1e-9, violated=rip > leip.lower_bound + 1e-9,
                           evidence=f"delta_s {rip:.12g} vs LEIP lower bound {leip.lower_bound:.12g}")
    else:
        imp3 = Implication(False, None, False, "s > t; implication not applicable")
    return {
        "s": s,
        "t": t,
        "min_kernel_entropy": ent_min,
        "nsp": nsp.to_json(),
        "leip_lower_bound": leip.lower_bound,
        "nep_implies_nsp": imp1.to_json(),
        "leip_implies_nep": imp2.to_json(),
        "leip_dominates_rip": imp3.to_json(),
        "violations": int(imp1.violated) + int(imp2.violated) + int(imp3.violated),
    }
