"""Compare the MC penalty with the l1 baseline on the three graph families.

Each family uses its nonconvex preset; the baseline keeps the same lambda1
and sets gamma_inv = 0.

    python scripts/mc_vs_l1.py --family grid --ratios 100 --trials 15
"""
import argparse
from pathlib import Path

from mcgl.config import load_config
from mcgl.harness import aggregate, run_sweep

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def compare(family, trials, ratios, workers, out_root):
    cfg = load_config(CONFIGS / f"mc_vs_l1_{family}.yaml")
    if trials:
        cfg.trials = trials
    if ratios:
        cfg.m_over_n = ratios
    rows = run_sweep(cfg, Path(out_root) / family, workers=workers)
    by_key = {(r["m_over_n"], r["gamma_inv"]): r for r in aggregate(rows)}
    print(f"\n{family}: median over {cfg.trials} graphs")
    print(f"{'m/n':>7} {'FS mc':>8} {'FS l1':>8} {'RE mc':>8} {'RE l1':>8} "
          f"{'nnz mc':>7} {'nnz l1':>7}")
    for ratio in cfg.m_over_n:
        mc, l1 = by_key[(ratio, 2.25)], by_key[(ratio, 0.0)]
        flag = "" if mc["FS_median"] > l1["FS_median"] else "  (l1 not beaten)"
        print(f"{ratio:7g} {mc['FS_median']:8.4f} {l1['FS_median']:8.4f} "
              f"{mc['RE_median']:8.4f} {l1['RE_median']:8.4f} "
              f"{mc['nnz_median']:7g} {l1['nnz_median']:7g}{flag}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", choices=["grid", "modular", "er", "all"], default="all")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--ratios", type=float, nargs="+")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="runs/mc_vs_l1")
    args = ap.parse_args()
    families = ["grid", "modular", "er"] if args.family == "all" else [args.family]
    for family in families:
        compare(family, args.trials, args.ratios, args.workers, args.out)


if __name__ == "__main__":
    main()
