"""Wall time and mean-risk deviation of the hybrid solver against tabu search.

    python3 scripts/scaling_experiment.py --sizes 50 100 255 500 --hybrid-limit 5 --out runs/scaling
"""

import argparse
from pathlib import Path

from cyberqubo.analysis import bench_csv, bench_timing_csv, scaling_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 255, 500])
    ap.add_argument("--solvers", nargs="+", default=["tabu", "hybrid"])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--hybrid-limit", type=float, default=5.0, help="hybrid wall-clock budget in seconds")
    ap.add_argument("--out", default="runs/scaling")
    args = ap.parse_args()

    scaling_bench([20], args.solvers, solver_params={"hybrid": {"max_rounds": 1}})  # load compiled kernels
    limits = {"hybrid": args.hybrid_limit} if "hybrid" in args.solvers else {}
    recs = scaling_bench(args.sizes, args.solvers, args.seeds, time_limits=limits,
                         progress=lambda r: print(f"{r.n_nodes:>5} {r.solver:>7} seed {r.seed}: "
                                                  f"{r.wall_time:8.3f}s mean {r.mean_final:.3f}"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(bench_csv(recs))
    (out / "bench_timing.csv").write_text(bench_timing_csv(recs))
    for r in recs:
        if r.deviation_pct is not None and r.solver != "tabu":
            print(f"{r.n_nodes:>5} {r.solver}: deviation {r.deviation_pct:+.2f}%")
    print(f"-> {out}")


if __name__ == "__main__":
    main()
