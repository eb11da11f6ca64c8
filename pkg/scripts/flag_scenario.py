"""Effect of marking the exception node as unpatched and internet-exposed.

Compares final scores with the exception's flags cleared and set, on the
same 255-node network and weights.

    python3 scripts/flag_scenario.py --seed 0 --out runs/flags
"""

import argparse
from pathlib import Path

from cyberqubo import Weights, assemble, generate_layered, it255_spec, to_dot
from cyberqubo.analysis import transition_report
from cyberqubo.solvers import SolverRequest, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--solver", default="tabu")
    ap.add_argument("--weights", default=None, help="five comma-separated term weights")
    ap.add_argument("--out", default="runs/flags")
    args = ap.parse_args()

    w = Weights.from_sequence(args.weights.split(",")) if args.weights else Weights()
    g = generate_layered(it255_spec(seed=args.seed))
    ex = g.metadata["exception_node"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    nb = [g.position[j] for j in g.neighbors[ex]]
    variants = {
        "clear": g.with_node(ex, no_update=False, internet=False),
        "no_update": g.with_node(ex, no_update=True, internet=False),
        "internet": g.with_node(ex, no_update=False, internet=True),
        "both": g.with_node(ex, no_update=True, internet=True),
    }
    print(f"exception node {ex}, {len(nb)} neighbours")
    for tag, gg in variants.items():
        sol = solve(args.solver, SolverRequest(assemble(gg, w), seed=args.seed))
        fs = sol.decoded_scores
        (out / f"{tag}_report.json").write_text(transition_report(gg, sol).to_json())
        (out / f"{tag}.dot").write_text(to_dot(gg, fs))
        print(f"{tag:>9}: final mean {fs.mean():.2f} std {fs.std():.2f} | exception FS {fs[g.position[ex]]} | "
              f"neighbour mean {fs[nb].mean():.2f}")
    print(f"-> {out}")


if __name__ == "__main__":
    main()
