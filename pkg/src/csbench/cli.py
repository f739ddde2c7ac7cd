"""Command-line entry point.

Subcommands: gen (emit a matrix or signal file), certify (certification
report for an ensemble or a matrix file), recover (one instance end to
end), phase (phase-transition sweep to CSV + SVG), campaign (config in,
trials.csv/aggregates.json/manifest.json out).

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .campaign import default_threads, parse_config, run_campaign, write_outputs
from .certify import certify_matrix
from .errors import ConfigError, CsBenchError
from .matrices import (
    MatrixKind,
    build_matrix,
    load_matrix_csv,
    load_matrix_json,
    save_matrix_csv,
    save_matrix_json,
)
from .metrics import compute_trial_metrics, is_success, json_value
from .model import (
    Amplitude,
    NoiseModel,
    generate_sparse_signal,
    measure,
    save_signal_csv,
    save_signal_json,
    sparsity_level,
)
from .phase import PhaseConfig, default_grid, run_phase_diagram
from .recovery import Solver, recover, spec_for
from .rng import derive_seed


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_gen(args) -> int:
    if args.what == "matrix":
        matrix = build_matrix(args.kind, args.m, args.n, seed=args.seed,
                              normalize=not args.no_normalize)
        if args.format == "csv":
            if not args.out:
                raise ConfigError("--out", "csv matrix output needs a file path")
            save_matrix_csv(matrix, args.out)
        elif args.out:
            save_matrix_json(matrix, args.out)
        else:
            doc = {"kind": matrix.kind.value, "m": matrix.m, "n": matrix.n,
                   "seed": matrix.seed, "normalized": matrix.columns_normalized,
                   "data": [[float(v) for v in row] for row in matrix.entries]}
            _emit(json.dumps(doc), None)
    else:
        signal = generate_sparse_signal(args.n, args.k, args.amplitude,
                                        seed=args.seed)
        if args.format == "csv":
            if not args.out:
                raise ConfigError("--out", "csv signal output needs a file path")
            save_signal_csv(signal, args.out)
        elif args.out:
            save_signal_json(signal, args.out, seed=args.seed,
                             amplitude=args.amplitude)
        else:
            _emit(json.dumps({"n": signal.n, "k": signal.k,
                              "support": list(signal.support),
                              "data": [float(v) for v in signal.values]}), None)
    return 0


def _load_matrix_file(path: str):
    if path.endswith(".csv"):
        return load_matrix_csv(path)
    return load_matrix_json(path)


def _cmd_certify(args) -> int:
    if args.matrix:
        matrix = _load_matrix_file(args.matrix)
    elif args.kind:
        matrix = build_matrix(args.kind, args.m, args.n, seed=args.seed,
                              normalize=not args.no_normalize)
    else:
        raise ConfigError("certify", "give either --matrix FILE or --kind/--m/--n")
    orders = tuple(int(tok) for tok in args.rip_orders.split(",") if tok)
    report = certify_matrix(matrix, rip_orders=orders,
                            target_sparsity=args.sparsity,
                            c=args.constant, seed=args.seed)
    _emit(report.dumps(), args.out)
    return 0


def _cmd_recover(args) -> int:
    seed = args.seed
    matrix = build_matrix(args.kind, args.m, args.n,
                          seed=derive_seed(seed, "matrix"),
                          normalize=not args.no_normalize)
    signal = generate_sparse_signal(args.n, args.k, args.amplitude,
                                    seed=derive_seed(seed, "signal"))
    noise = NoiseModel.awgn(args.noise_sigma)
    meas = measure(matrix, signal, noise, seed=derive_seed(seed, "noise"))
    solver = Solver(args.solver)
    spec = spec_for(solver, max(args.k, 1)) \
        if solver is not Solver.BASIS_PURSUIT else spec_for(solver)
    result = recover(matrix, meas, spec)
    y_hat = matrix.entries @ result.x_hat
    report = compute_trial_metrics(signal, result.x_hat, meas.y, y_hat,
                                   args.m, args.n)
    if signal.k == 0:
        success = sparsity_level(result.x_hat, 1e-8) == 0
    else:
        success = is_success(signal.values, result.x_hat, args.threshold)
    doc = {
        "solver": solver.value, "matrix_kind": MatrixKind(args.kind).value,
        "n": args.n, "m": args.m, "k": args.k, "seed": seed,
        "metrics": report.to_flat_json_dict(),
        "success": success, "converged": result.converged,
        "iterations": result.iterations,
        "residual_norm": json_value(result.residual_norm),
        "sampling_time_s": meas.sampling_time,
        "recovery_time_s": result.recovery_time,
    }
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


_PHASE_KEYS = {"n", "delta_grid", "rho_grid", "grid", "trials", "matrix",
               "solver", "success_threshold", "seed", "budget"}


def _phase_config_from(args) -> PhaseConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("$", "top level must be a JSON object")
        unknown = sorted(set(doc) - _PHASE_KEYS)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
    points = doc.get("grid", args.grid)
    delta_grid = doc.get("delta_grid", default_grid(points))
    rho_grid = doc.get("rho_grid", default_grid(points))
    return PhaseConfig(
        n=doc.get("n", args.n),
        delta_grid=tuple(delta_grid), rho_grid=tuple(rho_grid),
        trials_per_cell=doc.get("trials", args.trials),
        matrix_kind=doc.get("matrix", args.kind),
        solver=doc.get("solver", args.solver),
        success_threshold=doc.get("success_threshold", args.threshold),
        seed=doc.get("seed", args.seed),
        work_budget=doc.get("budget", 10**6))


def _cmd_phase(args) -> int:
    config = _phase_config_from(args)
    threads = args.threads if args.threads is not None else default_threads()
    grid = run_phase_diagram(config, threads=threads)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    grid.to_csv(out / "phase.csv")
    grid.to_svg(out / "phase.svg")
    sys.stdout.write(f"wrote {out / 'phase.csv'} and {out / 'phase.svg'}\n")
    return 0


def _cmd_campaign(args) -> int:
    config = parse_config(Path(args.config).read_text())
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, seed=args.seed)
    threads = args.threads if args.threads is not None else default_threads()
    result = run_campaign(config, threads=threads)
    out_dir = args.out or config.output_dir or "."
    write_outputs(result, out_dir)
    sys.stdout.write(f"wrote {len(result.records)} trials to {out_dir}\n")
    return 0


def _add_common(p, seed_default=0):
    p.add_argument("--seed", type=int, default=seed_default,
                   help="master seed (default %(default)s)")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default CSBENCH_THREADS or 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="csbench",
                     description="compressive-sensing evaluation toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    kinds = [k.value for k in MatrixKind if k is not MatrixKind.CUSTOM]
    solvers = [s.value for s in Solver]
    amplitudes = [a.value for a in Amplitude]

    p = sub.add_parser("gen", help="generate a matrix or signal file")
    p.add_argument("what", choices=["matrix", "signal"])
    p.add_argument("--kind", choices=kinds, default="gaussian")
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--amplitude", choices=amplitudes, default="unit_gaussian")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--no-normalize", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("certify", help="certification report for a matrix")
    p.add_argument("--matrix", help="matrix file (.json or .csv)")
    p.add_argument("--kind", choices=kinds)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--rip-orders", default="1,2")
    p.add_argument("--sparsity", type=int, default=None,
                   help="target sparsity for the measurement bound")
    p.add_argument("--constant", type=float, default=2.0,
                   help="constant c in the measurement bound")
    p.add_argument("--no-normalize", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("recover", help="run one recovery instance end to end")
    p.add_argument("--kind", choices=kinds, default="gaussian")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--solver", choices=solvers, default="omp")
    p.add_argument("--amplitude", choices=amplitudes, default="unit_gaussian")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--no-normalize", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("phase", help="phase-transition diagram (CSV + SVG)")
    p.add_argument("config", nargs="?", help="JSON config file")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--kind", choices=kinds, default="gaussian")
    p.add_argument("--solver", choices=solvers, default="omp")
    p.add_argument("--threshold", type=float, default=0.9)
    _add_common(p)
    p.set_defaults(func=_cmd_phase)

    p = sub.add_parser("campaign", help="run a benchmark campaign")
    p.add_argument("config", help="JSON config file")
    _add_common(p, seed_default=None)
    p.set_defaults(func=_cmd_campaign)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    try:
        return args.func(args)
    except CsBenchError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
