"""Run a parameter sweep and print the median/quartile curves.

    python scripts/sweep_curves.py configs/lambda1_sweep.yaml --trials 3 --workers 2
"""
import argparse
from pathlib import Path

from mcgl.config import load_config
from mcgl.harness import aggregate, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--ratios", type=float, nargs="+", help="override m_over_n")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.trials:
        cfg.trials = args.trials
    if args.ratios:
        cfg.m_over_n = args.ratios
    out = Path(args.out or cfg.output)
    rows = run_sweep(cfg, out, workers=args.workers)

    print(f"{'lambda1':>9} {'lambda2':>9} {'g_inv':>6} {'m/n':>7} "
          f"{'RE med [q1, q3]':>28} {'FS med [q1, q3]':>28} {'nnz':>6}")
    for r in sorted(aggregate(rows), key=lambda r: (r["lambda1"], r["gamma_inv"], r["m_over_n"])):
        print(f"{r['lambda1']:9.2g} {r['lambda2']:9.2g} {r['gamma_inv']:6.3g} {r['m_over_n']:7g} "
              f"{r['RE_median']:10.4f} [{r['RE_q1']:.4f}, {r['RE_q3']:.4f}] "
              f"{r['FS_median']:10.4f} [{r['FS_q1']:.4f}, {r['FS_q3']:.4f}] "
              f"{r['nnz_median']:6g}")
    print(f"tables in {out}")


if __name__ == "__main__":
    main()
