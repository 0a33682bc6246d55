"""Random sampling matrices built from discrete bounded orthonormal systems.

A system is a table of N' rows (one per atom of the sampling measure) with
atom weights; a sampling matrix draws m rows i.i.d. from it.  The built-in
systems are stored with K = 1 (no 1/sqrt(N) factor), so they are orthonormal
under the uniform probability measure and ``normalize`` applies the 1/sqrt(m)
scaling used when comparing ||Ax||_2 to ||x||_2.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameter, InvalidState
from .rng import check_seed, substream

ENSEMBLES = ("partial_fourier", "partial_hadamard", "rademacher_rows", "tabulated")

ALIASES = {
    "fourier": "partial_fourier",
    "partial_fourier": "partial_fourier",
    "hadamard": "partial_hadamard",
    "partial_hadamard": "partial_hadamard",
    "rademacher": "rademacher_rows",
    "rademacher_rows": "rademacher_rows",
    "tabulated": "tabulated",
}


@dataclass(frozen=True)
class SamplingMatrix:
    entries: np.ndarray
    K: float = 1.0
    ensemble: str = "tabulated"
    seed: int = 0
    normalized: bool = False

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise InvalidParameter("a sampling matrix needs shape (m, N) with m, N >= 1")
        if not np.iscomplexobj(a):
            a = a.astype(float)
        else:
            a = a.astype(complex)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.ensemble not in ENSEMBLES:
            raise InvalidParameter(f"unknown ensemble tag {self.ensemble!r}")
        object.__setattr__(self, "seed", check_seed(self.seed))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    def realified(self) -> np.ndarray:
        """Real (2m x N) system [Re A; Im A]; real matrices are returned as is."""
        if not self.is_complex:
            return self.entries
        return np.vstack([self.entries.real, self.entries.imag])

    def to_json(self) -> dict:
        return matrix_to_json(self)


def _draw_rows(n_atoms: int, m: int, seed: int, replace_rows: bool, weights=None) -> np.ndarray:
    rng = substream(seed, "rows")
    if not replace_rows and m > n_atoms:
        raise InvalidParameter(f"cannot draw {m} distinct rows from {n_atoms}")
    return rng.choice(n_atoms, size=m, replace=replace_rows, p=weights)


def _check_dims(N: int, m: int):
    if N < 1 or m < 1:
        raise InvalidParameter(f"need N >= 1 and m >= 1, got N={N}, m={m}")


def fourier_rows(N: int, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    k = np.arange(N, dtype=np.int64)
    # reduce l*k mod N in integers so the phase is exact for every row
    phase = np.outer(rows, k) % N
    return np.exp(2j * np.pi * phase / N)


def hadamard(N: int) -> np.ndarray:
    if N < 1 or N & (N - 1):
        raise InvalidParameter(f"Hadamard systems need N a power of two, got {N}")
    h = np.ones((1, 1))
    while h.shape[0] < N:
        h = np.block([[h, h], [h, -h]])
    return h


def gen_partial_fourier(N: int, m: int, seed: int, replace_rows: bool = True) -> SamplingMatrix:
    _check_dims(N, m)
    rows = _draw_rows(N, m, seed, replace_rows)
    return SamplingMatrix(fourier_rows(N, rows), K=1.0, ensemble="partial_fourier", seed=seed)


def gen_partial_hadamard(N: int, m: int, seed: int, replace_rows: bool = True) -> SamplingMatrix:
    _check_dims(N, m)
    h = hadamard(N)
    rows = _draw_rows(N, m, seed, replace_rows)
    return SamplingMatrix(h[rows], K=1.0, ensemble="partial_hadamard", seed=seed)


def gen_rademacher_rows(N: int, m: int, seed: int) -> SamplingMatrix:
    _check_dims(N, m)
    rng = substream(seed, "rademacher")
    signs = rng.integers(0, 2, size=(m, N)) * 2.0 - 1.0
    return SamplingMatrix(signs, K=1.0, ensemble="rademacher_rows", seed=seed)


def generate(ensemble: str, N: int, m: int, seed: int, replace_rows: bool = True) -> SamplingMatrix:
    tag = ALIASES.get(ensemble)
    if tag == "partial_fourier":
        return gen_partial_fourier(N, m, seed, replace_rows)
    if tag == "partial_hadamard":
        return gen_partial_hadamard(N, m, seed, replace_rows)
    if tag == "rademacher_rows":
        return gen_rademacher_rows(N, m, seed)
    raise InvalidParameter(f"no generator for ensemble {ensemble!r}")


def normalize(A: SamplingMatrix) -> SamplingMatrix:
    """Scale a raw sampling matrix by 1/sqrt(m)."""
    if A.normalized:
        raise InvalidState("matrix is already normalized")
    return replace(A, entries=A.entries / math.sqrt(A.m), normalized=True)


def ensure_normalized(A: SamplingMatrix) -> SamplingMatrix:
    return A if A.normalized else normalize(A)


def empirical_metric(A: SamplingMatrix, u, v, p: float) -> float:
    """d_{X,p}(u, v) = ((1/m) sum_j |<X_j, u - v>|^p)^(1/p) over the raw rows."""
    if p < 1:
        raise InvalidParameter(f"need p >= 1, got {p}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (A.N,) or v.shape != (A.N,):
        raise InvalidParameter(f"vectors must have length N={A.N}")
    inner = np.abs(A.entries @ (u - v))
    scale = inner.max()
    if scale == 0:
        return 0.0
    return float(scale * np.mean((inner / scale) ** p) ** (1.0 / p))


# -- discrete systems --------------------------------------------------------


@dataclass(frozen=True)
class SamplingModel:
    """A discrete orthonormal system: ``row_table[l]`` is drawn with ``atom_weights[l]``."""

    row_table: np.ndarray
    atom_weights: np.ndarray

    @property
    def N(self) -> int:
        return self.row_table.shape[1]


@dataclass(frozen=True)
class ModelReport:
    K_measured: float
    isometry_residual: float
    weight_sum_error: float
    valid: bool
    problems: tuple


def verify_sampling_model(model: SamplingModel, tol: float = 1e-10) -> ModelReport:
    table = np.asarray(model.row_table)
    w = np.asarray(model.atom_weights, dtype=float)
    problems = []
    if table.ndim != 2 or w.shape != (table.shape[0],):
        raise InvalidParameter("row_table must be (N', N) with one weight per row")
    weight_err = abs(math.fsum(w) - 1.0)
    if weight_err > 1e-12:
        problems.append(f"atom weights sum to {math.fsum(w)!r}, not 1")
    if np.any(w < 0):
        problems.append("negative atom weight")
    second_moment = (table.conj().T * w) @ table
    residual = float(np.max(np.abs(second_moment - np.eye(table.shape[1]))))
    if residual > tol:
        problems.append(f"isometry residual {residual:.3e} exceeds {tol:.0e}")
    return ModelReport(
        K_measured=float(np.max(np.abs(table))),
        isometry_residual=residual,
        weight_sum_error=weight_err,
        valid=not problems,
        problems=tuple(problems),
    )


def system_model(ensemble: str, N: int) -> SamplingModel:
    """Full system table of a built-in ensemble under its uniform measure."""
    tag = ALIASES.get(ensemble)
    if tag == "partial_fourier":
        table = fourier_rows(N, np.arange(N))
    elif tag == "partial_hadamard":
        table = hadamard(N)
    elif tag == "rademacher_rows":
        if N > 16:
            raise InvalidParameter("the Rademacher system table has 2^N rows; N <= 16 only")
        table = np.array(list(itertools.product((1.0, -1.0), repeat=N)))
    else:
        raise InvalidParameter(f"no built-in system for {ensemble!r}")
    n_atoms = table.shape[0]
    return SamplingModel(table, np.full(n_atoms, 1.0 / n_atoms))


def sample_model(model: SamplingModel, m: int, seed: int) -> SamplingMatrix:
    """Draw m rows i.i.d. from a tabulated system."""
    _check_dims(model.N, m)
    report = verify_sampling_model(model)
    if not report.valid:
        raise InvalidParameter("; ".join(report.problems))
    w = np.asarray(model.atom_weights, dtype=float)
    rows = _draw_rows(w.size, m, seed, True, weights=w / w.sum())
    return SamplingMatrix(np.asarray(model.row_table)[rows], K=max(1.0, report.K_measured),
                          ensemble="tabulated", seed=seed)


# -- JSON --------------------------------------------------------------------


def matrix_to_json(A: SamplingMatrix) -> dict:
    if A.is_complex:
        data = [[float(z.real), float(z.imag)] for z in A.entries.ravel()]
    else:
        data = [float(v) for v in A.entries.ravel()]
    return {
        "m": A.m,
        "N": A.N,
        "complex": A.is_complex,
        "K": float(A.K),
        "ensemble": A.ensemble,
        "seed": int(A.seed),
        "normalized": bool(A.normalized),
        "data": data,
    }


def matrix_from_json(obj: dict) -> SamplingMatrix:
    try:
        m, N = int(obj["m"]), int(obj["N"])
        is_complex = bool(obj.get("complex", False))
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidParameter(f"malformed matrix JSON: {exc}") from exc
    if is_complex:
        arr = np.asarray(data, dtype=float)
        if arr.shape != (m * N, 2):
            raise InvalidParameter("complex matrix data must be m*N [re, im] pairs")
        entries = (arr[:, 0] + 1j * arr[:, 1]).reshape(m, N)
    else:
        arr = np.asarray(data, dtype=float)
        if arr.size != m * N:
            raise InvalidParameter(f"expected {m * N} entries, got {arr.size}")
        entries = arr.reshape(m, N)
    return SamplingMatrix(
        entries,
        K=float(obj.get("K", 1.0)),
        ensemble=obj.get("ensemble", "tabulated"),
        seed=int(obj.get("seed", 0)),
        normalized=bool(obj.get("normalized", False)),
    )


def load_matrix(path) -> SamplingMatrix:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))
