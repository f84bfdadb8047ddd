#!/usr/bin/env python3
"""Solver-vs-oracle benchmark over seeded random fleets.

For each seed the gradient solver and the exhaustive oracle plan the same
scenario; the script reports the relative delay gap distribution, constraint
violations, and wall time.
"""

import argparse
import time

from v2vsim.planner import SolverConfig, exhaustive_optimum, optimize, validate_plan
from v2vsim.synth import random_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=100)
    parser.add_argument("--first-seed", type=int, default=0)
    parser.add_argument("--max-nodes", type=int, default=4)
    parser.add_argument("--max-subchannels", type=int, default=4)
    args = parser.parse_args()

    gaps = []
    violations = 0
    t0 = time.perf_counter()
    for seed in range(args.first_seed, args.first_seed + args.instances):
        scenario = random_scenario(seed, args.max_nodes, args.max_subchannels)
        plan = optimize(scenario, SolverConfig(seed=seed))
        oracle = exhaustive_optimum(scenario)
        violations += bool(validate_plan(plan, scenario))
        if oracle.avg_delay_s > 0:
            gaps.append(plan.avg_delay_s / oracle.avg_delay_s - 1.0)
        else:
            gaps.append(0.0 if plan.avg_delay_s == 0 else float("inf"))
    elapsed = time.perf_counter() - t0

    within = sum(g <= 0.05 for g in gaps)
    print(f"instances          : {args.instances}")
    print(f"within 5% of oracle: {within} ({within / args.instances:.1%})")
    print(f"worst relative gap : {max(gaps):.3e}")
    print(f"constraint faults  : {violations}")
    print(f"wall time          : {elapsed:.2f} s")


if __name__ == "__main__":
    main()
