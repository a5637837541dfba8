"""``mcgl`` command line: synth, learn, eval, sweep, ingest, bench.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    build_params,
    load_config,
    preset_names,
    preset_values,
    solver_values,
)
from .fileio import FormatError, read_covariance, write_matrix
from .harness import (
    categorical_covariance,
    load_binary_matrix,
    run_bench,
    run_eval,
    run_learn,
    run_sweep,
    run_synth,
)
from .metrics import DEFAULT_SUPPORT_TOL

log = logging.getLogger("mcgl")

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


SOLVER_FLAGS = [
    ("--lambda1", float), ("--lambda2", float), ("--gamma-inv", float),
    ("--tau", float), ("--sigma", float), ("--rho", float),
    ("--epsilon", float), ("--max-iter", int),
]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcgl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mcgl {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate ground-truth graphs, samples, covariances")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, help="override base_seed")

    p = sub.add_parser("learn", help="learn a Laplacian from a covariance file")
    p.add_argument("covariance")
    p.add_argument("--preset", default="convex-default",
                   help=f"one of {', '.join(preset_names())}")
    p.add_argument("--config", help="take solver settings from a config file")
    for flag, kind in SOLVER_FLAGS:
        p.add_argument(flag, type=kind)
    p.add_argument("--auto-sigma", action="store_true",
                   help="sigma := 0.98 (1/tau - lambda2/2) / (2n)")
    p.add_argument("--init-seed", type=int,
                   help="random initial weights instead of the uniform 1/n start")
    p.add_argument("--support-tol", type=float, default=DEFAULT_SUPPORT_TOL,
                   help="weights at or below this are dropped from the export")
    p.add_argument("--out", default="learned")

    p = sub.add_parser("eval", help="relative error and F-score of an estimate")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.add_argument("--support-tol", type=float, default=DEFAULT_SUPPORT_TOL)
    p.add_argument("--out", default=".", help="directory holding eval_results.csv")

    p = sub.add_parser("sweep", help="trials x m/n x parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--support-tol", type=float)

    p = sub.add_parser("ingest", help="covariance from a binary questions x items matrix")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="covariance file to write")
    p.add_argument("--no-center", dest="center", action="store_false")
    p.add_argument("--normalize", action="store_true", help="convert to correlations")
    p.add_argument("--transpose", action="store_true",
                   help="input is items x questions")

    p = sub.add_parser("bench", help="wall time versus node count")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    return parser


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.base_seed = args.seed
    if getattr(args, "support_tol", None) is not None:
        cfg.support_tol = args.support_tol
    out = Path(args.out) if getattr(args, "out", None) else Path(cfg.output)
    return cfg, out


def cmd_synth(args) -> int:
    cfg, out = _load(args)
    doc = run_synth(cfg, out)
    print(f"wrote {len(doc['runs'])} trial(s) to {out}")
    return 0


def cmd_learn(args) -> int:
    S = read_covariance(args.covariance)
    if args.config:
        section = load_config(args.config).solver
        values = solver_values(section)
        preset = (section or {}).get("preset", "convex-default")
    else:
        values = preset_values(args.preset)
        preset = args.preset
    for flag, _ in SOLVER_FLAGS:
        key = flag[2:].replace("-", "_")
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.auto_sigma:
        values["auto_sigma"] = True
    params = build_params(values, S.shape[0])
    summary = run_learn(S, params, args.out, preset=preset, init_seed=args.init_seed,
                        threshold=args.support_tol)
    print(f"iterations={summary['iterations']} converged={summary['converged']} "
          f"nnz={summary['nnz']} verdict={summary['verdict']}")
    return 0


def cmd_eval(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    row = run_eval(args.estimate, args.truth, args.support_tol, out / "eval_results.csv")
    print(f"RE={row['RE']:.6g} FS={row['FS']:.6g} tp={row['tp']} fp={row['fp']} "
          f"fn={row['fn']} nnz={row['nnz_estimate']}")
    return 0


def cmd_sweep(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    cfg, out = _load(args)
    rows = run_sweep(cfg, out, workers=args.workers)
    failed = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} run(s), {failed} failed; results in {out / 'results.csv'}")
    return 0


def cmd_ingest(args) -> int:
    X = load_binary_matrix(args.input)
    if args.transpose:
        X = X.T
    S = categorical_covariance(X, center=args.center, normalize=args.normalize)
    write_matrix(args.out, S)
    print(f"{S.shape[0]}x{S.shape[1]} covariance written to {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg, out = _load(args)
    for row in run_bench(cfg, out):
        print(f"n={row['n']} mean_time={row['mean_wall_time']:.3f}s "
              f"mean_iter={row['mean_iterations']:.1f}")
    return 0


COMMANDS = {"synth": cmd_synth, "learn": cmd_learn, "eval": cmd_eval,
            "sweep": cmd_sweep, "ingest": cmd_ingest, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"mcgl {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError, RuntimeError, ValueError) as exc:
        print(f"mcgl {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
