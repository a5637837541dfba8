"""Mean solver wall time per node count, plus the empirical growth exponent.

    python scripts/timing.py --sizes 160 240 --trials 2
"""
import argparse
import math
from pathlib import Path

from mcgl.config import load_config
from mcgl.harness import run_bench

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(CONFIGS / "bench.yaml"))
    ap.add_argument("--sizes", type=int, nargs="+")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--ratio", type=float, help="m/n")
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.sizes:
        cfg.bench["n"] = args.sizes
    if args.trials:
        cfg.trials = args.trials
    if args.ratio:
        cfg.bench["m_over_n"] = args.ratio
    rows = run_bench(cfg, Path(args.out or cfg.output))
    print(f"{'n':>5} {'mean time [s]':>14} {'mean iters':>11} {'s/iter':>9}")
    for r in rows:
        per_iter = r["mean_wall_time"] / r["mean_iterations"]
        print(f"{r['n']:5d} {r['mean_wall_time']:14.4f} {r['mean_iterations']:11.1f} "
              f"{per_iter:9.2e}")
    if len(rows) >= 2:
        a, b = rows[0], rows[-1]
        slope = (math.log(b["mean_wall_time"] / b["mean_iterations"])
                 - math.log(a["mean_wall_time"] / a["mean_iterations"])) / math.log(b["n"] / a["n"])
        print(f"per-iteration time grows like n^{slope:.2f}")


if __name__ == "__main__":
    main()
