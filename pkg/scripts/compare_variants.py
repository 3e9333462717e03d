#!/usr/bin/env python3
"""Compare the pass efficiency of the three decentralized variants on a
synthetic ridge problem and print the rounds/passes each needs to reach a
target suboptimality.

Usage:
    python scripts/compare_variants.py --nodes 10 --d 50 --seed 0
"""

import argparse

from dsba.simulator import RunConfig, SyntheticSpec, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=10)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--samples-per-node", type=int, default=30)
    ap.add_argument("--edge-prob", type=float, default=0.4)
    ap.add_argument("--rounds", type=int, default=60_000)
    ap.add_argument("--extra-rounds", type=int, default=2_000)
    ap.add_argument("--target", type=float, default=1e-6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = SyntheticSpec(kind="ridge", d=args.d,
                         n_samples=args.nodes * args.samples_per_node,
                         seed=args.seed)
    print(f"{'variant':<8} {'rounds':>9} {'passes':>10} {'final subopt':>14}")
    for variant in ("dsba", "dsa", "extra"):
        rounds = args.extra_rounds if variant == "extra" else args.rounds
        cfg = RunConfig(family="ridge", variant=variant, n_nodes=args.nodes,
                        topology="random", edge_prob=args.edge_prob,
                        synthetic=spec, rounds=rounds, seed=args.seed,
                        graph_seed=args.seed, stop_subopt=args.target,
                        compute_score=False)
        result = run(cfg)
        passes = result.metrics.passes_to(args.target)
        final = result.metrics.final
        print(f"{variant:<8} {final.round:>9d} "
              f"{(passes if passes is not None else float('nan')):>10.2f} "
              f"{final.subopt:>14.3e}")


if __name__ == "__main__":
    main()
