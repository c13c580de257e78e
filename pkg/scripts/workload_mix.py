"""Query class mix and drill-down chain statistics over several seeds."""

import argparse
import statistics
from collections import Counter

from dwbench.params import LowLevelParams, WorkloadParams
from dwbench.query import GroupOperator
from dwbench.rng import SeededRng
from dwbench.schema import generate_warehouse
from dwbench.workload import QueryClass, generate_workload


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--nb-q", type=int, default=1000)
    ap.add_argument("--levels", type=int, default=6)
    args = ap.parse_args()

    n = args.levels
    low = LowLevelParams(NB_FT=1, NB_DIM=(3,), TOT_NB_DIM=3, NB_MEAS=(2,), DENSITY=(0.05,),
                         NB_LEVELS=(n,) * 3, NB_ATT=((4,) * n,) * 3, HHLEVEL_SIZE=(2,) * 3, DIM_SFACTOR=(2,) * 3)
    wh, _ = generate_warehouse(low, 1)
    tags, ops, having = Counter(), Counter(), 0
    by_start: dict[int, list[int]] = {}
    for seed in range(args.seeds):
        wl = generate_workload(wh, WorkloadParams(NB_Q=args.nb_q), SeededRng(seed, "workload"))
        tags.update(wl.class_tags)
        for q, t in zip(wl.queries, wl.class_tags):
            if t is QueryClass.OLAP_INITIAL:
                ops[q.group_by.operator] += 1
                having += q.having is not None
        for c in wl.chains:
            by_start.setdefault(c.start_depth, []).append(c.length)

    initial = tags[QueryClass.OLAP_INITIAL] + tags[QueryClass.EXTRACTION]
    olap = tags[QueryClass.OLAP_INITIAL]
    print(f"queries: {sum(tags.values())} ({dict((k.value, v) for k, v in tags.items())})")
    print(f"OLAP fraction of initial queries: {olap / initial:.4f}")
    print(f"CUBE fraction: {ops[GroupOperator.CUBE] / olap:.4f}, HAVING fraction: {having / olap:.4f}")
    print("chain length by starting depth:")
    for depth in sorted(by_start):
        xs = by_start[depth]
        print(f"  depth {depth}: {len(xs):6d} chains, mean length {statistics.fmean(xs):.3f}")


if __name__ == "__main__":
    main()
