"""Command-line interface.  JSON on stdout; exit 0 ok, 1 domain error, 2 usage error."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, certify, ensembles, experiments, l1solve, signals
from .errors import BudgetExceeded, HypothesisViolation, InvalidParameter, InvalidState

DOMAIN_ERRORS = (InvalidParameter, InvalidState, BudgetExceeded, HypothesisViolation, ArithmeticError)


class UsageError(Exception):
    pass


# -- serialization ------------------------------------------------------------


def jsonable(obj):
    """Plain JSON types; infinities become the string "inf", NaN becomes null."""
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([experiments.fmt(v) for v in row])
    return buf.getvalue()


def dump_pretty(header, rows) -> str:
    cells = [[str(h) for h in header]] + [[experiments.fmt(v) if isinstance(v, float) and not float(v).is_integer()
                                           else str(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit(args, payload, table=None) -> None:
    """Write ``payload`` as JSON, or ``table = (header, rows)`` as CSV / pretty text."""
    fmt = getattr(args, "format", "json")
    if fmt == "csv":
        if table is None:
            raise UsageError("--format csv is only available for tabular results")
        text = dump_csv(*table)
    elif args.pretty and table is not None:
        text = dump_pretty(*table)
    else:
        text = dump_json(payload)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- inputs ---------------------------------------------------------------------


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{path} is not valid JSON: {exc}") from exc


def load_vector(path) -> np.ndarray:
    """A JSON list of numbers, or of [re, im] pairs; a dict with an "x", "y" or "data" key also works."""
    obj = read_json(path)
    if isinstance(obj, dict):
        for key in ("x", "y", "data"):
            if key in obj:
                obj = obj[key]
                break
        else:
            raise InvalidParameter(f"{path}: expected a list or a dict with key x, y or data")
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim != 1:
        raise InvalidParameter(f"{path}: expected a flat vector")
    return arr


def load_normalized(path) -> ensembles.SamplingMatrix:
    return ensembles.ensure_normalized(ensembles.load_matrix(path))


def check_inputs(args, parser) -> None:
    """Validate every input path before anything runs."""
    for name in ("matrix", "y", "x0", "vector", "config", "dist"):
        path = getattr(args, name, None)
        if path is not None and not Path(path).is_file():
            parser.error(f"--{name.replace('_', '-')}: no such file: {path}")


# -- commands ----------------------------------------------------------------------


def cmd_gen(args):
    A = ensembles.generate(args.ensemble, args.N, args.m, args.seed, replace_rows=not args.distinct_rows)
    if args.normalize:
        A = ensembles.normalize(A)
    emit(args, A.to_json())


def cmd_rip(args):
    A = load_normalized(args.matrix)
    report = certify.rip_constant(A, args.s, budget=args.budget, real_vectors=args.real_vectors)
    out = report.to_json()
    if args.sampled:
        out["sampled_lower_bound"] = certify.rip_sampled_lower_bound(A, args.s, args.sampled, args.seed)
    emit(args, out)


def cmd_nsp(args):
    A = load_normalized(args.matrix)
    emit(args, certify.nsp_check(A, args.s, method=args.method, budget=args.budget))


def cmd_entropy(args):
    if (args.matrix is None) == (args.vector is None):
        raise UsageError("entropy needs exactly one of --matrix or --vector")
    if args.vector is not None:
        x = load_vector(args.vector)
        emit(args, {"entropy": signals.entropy(np.abs(x))})
        return
    A = load_normalized(args.matrix)
    value, vec = certify.min_kernel_entropy(A)
    emit(args, {"min_kernel_entropy": value, "vector": vec})


def cmd_solve(args):
    A = ensembles.load_matrix(args.matrix)
    y = load_vector(args.y)
    emit(args, l1solve.solve_l1(A, y))


def cmd_recover(args):
    A = load_normalized(args.matrix)
    x0 = load_vector(args.x0)
    if np.iscomplexobj(x0):
        raise InvalidParameter("planted signals are real")
    emit(args, l1solve.recover(A, x0, args.tol))


def _bound_inputs(args, m=None) -> bounds.BoundInputs:
    return bounds.BoundInputs(N=args.N, K=args.K, s=args.s, delta=args.delta, epsilon=args.epsilon,
                              lam=args.lam, m=m)


def cmd_bounds_table(args):
    grid = bounds.table1_grid()
    header = ["lambda", "C2_delta_4/sqrt(41)", "D_delta_4/sqrt(41)", "C2_delta_2/3", "D_delta_2/3"]
    payload = {
        "columns": header,
        "rows": [list(r) for r in grid],
        "asymptotic": {label: [bounds.ceil_or_inf(v) for v in bounds.asymptotic_constants(d)]
                       for label, d in bounds.TABLE1_DELTAS},
    }
    emit(args, payload, (header, grid))


def cmd_bounds_thresholds(args):
    if args.s is not None:
        s = args.s
        out = {"s": s, "best": bounds.delta_threshold_best(s),
               "improved": bounds.delta_threshold_improved(s) if s >= 2 else None,
               "baseline": bounds.DELTA_BEST}
        emit(args, out, (["s", "best", "improved", "baseline"], [[s, out["best"], out["improved"], out["baseline"]]]))
        return
    data = bounds.figure1_data(args.s_max)
    emit(args, {"series": data}, (["s", "delta_threshold"], data))


def cmd_bounds_sample_size(args):
    inputs = _bound_inputs(args)
    m = bounds.sample_complexity(inputs, crosscheck=args.crosscheck)
    emit(args, {"m": m, "rhs": bounds.sample_complexity_rhs(inputs), "inputs": inputs})


def cmd_bounds_certificate(args):
    m = args.m
    if m is None:
        m = bounds.sample_complexity(_bound_inputs(args))
    emit(args, bounds.certificate(_bound_inputs(args, m)))


def cmd_bounds_figure1(args):
    from .figures import emit_figure

    data = bounds.figure1_data(args.s_max)
    out = {"series": data}
    if args.figure:
        out["figure"] = str(emit_figure(data, "threshold_curve", args.figure))
    emit(args, out, (["s", "delta_threshold"], data))


def cmd_check_khintchine(args):
    if args.vector is not None:
        x = load_vector(args.vector)
    else:
        from .rng import substream

        x = substream(args.seed, "khintchine-cli").standard_normal(args.N)
    emit(args, experiments.khintchine_enumeration_check(x, args.p))


def cmd_check_symmetrization(args):
    spec = read_json(args.dist)
    laws = spec["laws"] if isinstance(spec, dict) else spec
    norm = "inf" if args.norm == "inf" else float(args.norm)
    emit(args, experiments.symmetrization_check(laws, args.p, norm))


def cmd_check_covering(args):
    out = []
    for M in args.M:
        check = experiments.covering_empirical_check(args.N, M, args.p, args.realizations, args.samples, args.seed)
        out.append({**check.to_json(), "grid": bounds.grid_count_bound(args.N, M)})
    emit(args, {"checks": out, "violations": sum(c["violations"] for c in out)})


def cmd_check_lemmas(args):
    from .rng import substream

    A = load_normalized(args.matrix)
    tlem = certify.check_lemma_tlem(A, args.s, args.trials, args.seed)
    rng = substream(args.seed, "lemma-cli")
    cwx2 = l21 = math.inf
    for _ in range(args.trials):
        x = np.sort(np.abs(rng.standard_normal(int(rng.integers(1, 12)))))[::-1]
        cwx2 = min(cwx2, certify.check_lemma_cwx2(x))
        s = int(rng.integers(1, 6))
        t = int(rng.integers(1, 6))
        l21 = min(l21, certify.check_lemma_l21(rng.standard_normal(t + s * int(rng.integers(1, 5))), t, s))
    emit(args, {
        "tlem": tlem,
        "cwx2": {"cases": args.trials, "worst_slack": cwx2, "violations": int(cwx2 < -1e-12)},
        "l21": {"cases": args.trials, "worst_slack": l21, "violations": int(l21 < -1e-12)},
    })


def _experiment_config(args) -> experiments.ExperimentConfig:
    if args.config:
        cfg = experiments.ExperimentConfig.from_json(read_json(args.config))
    else:
        cfg = experiments.ExperimentConfig()
    overrides = {
        "ensemble": args.ensemble, "N": args.N, "s_values": args.s, "trials": args.trials, "seed": args.seed,
        "magnitudes": args.magnitudes, "csv_path": args.csv, "json_path": args.json, "figure_path": args.figure,
    }
    if args.m is not None:
        overrides["m_values"] = args.m
    elif args.m_range is not None:
        lo, hi, step = args.m_range
        overrides["m_values"] = list(range(lo, hi + 1, step))
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.timing:
        cfg.timing = True
    if args.theory:
        cfg.theory = True
    if args.distinct_rows:
        cfg.replace_rows = False
    cfg.__post_init__()
    return cfg


def cmd_experiment_phase_transition(args):
    cfg = _experiment_config(args)
    records = experiments.phase_transition(cfg, threads=args.threads)
    written = experiments.write_outputs(records, cfg)
    payload = experiments.records_to_json(records, cfg)
    payload["written"] = written
    header = list(experiments.CSV_FIELDS) + (["m_min"] if cfg.theory else [])
    rows = [[r.N, r.s, r.m, r.ensemble, r.seed, r.trials, r.successes, r.prob, r.secs]
            + ([r.m_min] if cfg.theory else []) for r in records]
    emit(args, payload, (header, rows))


# -- parser -------------------------------------------------------------------------


def _common(p, tabular=False):
    p.add_argument("--out", help="write the result here instead of standard output")
    p.add_argument("--pretty", action="store_true", help="human-readable table for tabular results")
    if tabular:
        p.add_argument("--format", choices=("json", "csv"), default="json")


def _bound_flags(p):
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--delta", type=float, default=bounds.DELTA_BEST)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--lam", type=float, default=0.5, help="split parameter lambda in (0, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsecert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a sampling matrix")
    p.add_argument("--ensemble", required=True, choices=sorted(k for k in ensembles.ALIASES if k != "tabulated"))
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true", help="scale by 1/sqrt(m)")
    p.add_argument("--distinct-rows", action="store_true", help="sample rows without replacement")
    _common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("rip", help="restricted isometry constant by exhaustive search")
    p.add_argument("--matrix", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--budget", type=int, default=certify.DEFAULT_SUPPORT_BUDGET)
    p.add_argument("--real-vectors", action="store_true", help="restrict to real vectors for complex matrices")
    p.add_argument("--sampled", type=int, default=0, metavar="TRIALS", help="also report a random lower bound")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_rip)

    p = sub.add_parser("nsp", help="null space property check")
    p.add_argument("--matrix", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--method", choices=("auto", "lp", "vertices"), default="auto")
    p.add_argument("--budget", type=int, default=certify.DEFAULT_LP_BUDGET)
    _common(p)
    p.set_defaults(func=cmd_nsp)

    p = sub.add_parser("entropy", help="l1-entropy of a vector or the minimum over a kernel")
    p.add_argument("--matrix")
    p.add_argument("--vector")
    _common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("solve", help="basis pursuit for A z = y")
    p.add_argument("--matrix", required=True)
    p.add_argument("--y", required=True)
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("recover", help="plant x0, measure, solve, compare")
    p.add_argument("--matrix", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--tol", type=float, default=None)
    _common(p)
    p.set_defaults(func=cmd_recover)

    pb = sub.add_parser("bounds", help="explicit constants and sample-size bounds")
    bsub = pb.add_subparsers(dest="bounds_command", required=True)
    p = bsub.add_parser("table", help="C^2 and D over the lambda/delta grid")
    _common(p, tabular=True)
    p.set_defaults(func=cmd_bounds_table)
    p = bsub.add_parser("thresholds", help="sufficient RIP thresholds for the NSP")
    p.add_argument("--s", type=int)
    p.add_argument("--s-max", type=int, default=200)
    _common(p, tabular=True)
    p.set_defaults(func=cmd_bounds_thresholds)
    p = bsub.add_parser("sample-size", help="smallest m meeting the sample bound")
    _bound_flags(p)
    p.add_argument("--crosscheck", action="store_true", help="confirm with extended precision")
    _common(p)
    p.set_defaults(func=cmd_bounds_sample_size)
    p = bsub.add_parser("certificate", help="full parameter schedule and closing inequality")
    _bound_flags(p)
    p.add_argument("--m", type=int, default=None, help="defaults to the sample-size value")
    _common(p)
    p.set_defaults(func=cmd_bounds_certificate)
    p = bsub.add_parser("figure1", help="threshold curve data and SVG")
    p.add_argument("--s-max", type=int, default=200)
    p.add_argument("--figure", help="SVG output path")
    _common(p, tabular=True)
    p.set_defaults(func=cmd_bounds_figure1)

    pc = sub.add_parser("check", help="exact and Monte Carlo inequality checks")
    csub = pc.add_subparsers(dest="check_command", required=True)
    p = csub.add_parser("khintchine", help="exact Rademacher moment against the bound")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--vector")
    p.add_argument("--N", type=int, default=12, help="length of a random vector when --vector is absent")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_check_khintchine)
    p = csub.add_parser("symmetrization", help="exact symmetrization inequality on finite laws")
    p.add_argument("--dist", required=True, help='JSON: [[[prob, vector], ...], ...] or {"laws": ...}')
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--norm", default="2", help="lq norm exponent or inf")
    _common(p)
    p.set_defaults(func=cmd_check_symmetrization)
    p = csub.add_parser("covering", help="Maurey grid covering radius sweep")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, nargs="+", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--realizations", type=int, default=20)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_check_covering)
    p = csub.add_parser("lemmas", help="randomized sweeps of the block and inner-product lemmas")
    p.add_argument("--matrix", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_check_lemmas)

    pe = sub.add_parser("experiment", help="Monte Carlo experiments")
    esub = pe.add_subparsers(dest="experiment_command", required=True)
    p = esub.add_parser("phase-transition", help="recovery probability against m")
    p.add_argument("--config", help="JSON config; flags override its fields")
    p.add_argument("--ensemble")
    p.add_argument("--N", type=int)
    p.add_argument("--s", type=int, nargs="+")
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--m-range", type=int, nargs=3, metavar=("LO", "HI", "STEP"))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--magnitudes", choices=experiments.MAGNITUDES)
    p.add_argument("--distinct-rows", action="store_true")
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--timing", action="store_true", help="fill the secs column (breaks byte identity)")
    p.add_argument("--theory", action="store_true", help="add the m_min column from the sample bound")
    p.add_argument("--csv", help="also write the CSV here")
    p.add_argument("--json", help="also write the JSON here")
    p.add_argument("--figure", help="also write the SVG phase diagram here")
    _common(p, tabular=True)
    p.set_defaults(func=cmd_experiment_phase_transition)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    check_inputs(args, parser)
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except DOMAIN_ERRORS as exc:
        sys.stderr.write(dump_json({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
