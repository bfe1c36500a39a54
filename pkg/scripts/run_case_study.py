"""Multi-seed comparison of PABO against the baselines on one case analogue.

Prints one row per algorithm with the median hypervolume ratio against the
grid truth and the median number of distinct evaluations, and writes the
per-seed rows to ``--csv`` if given.

    python scripts/run_case_study.py cs1-analogue --seeds 10
"""

import argparse
import csv
import statistics
import time

from pabo.baselines import run_grid, run_nsga2, run_random
from pabo.cases import BASELINES, PABO_MAX_EVALS, generate_case_bundle
from pabo.core import PaboConfig, run_pabo
from pabo.pareto import hypervolume_2d, reference_point


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("case")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--surrogate-seed", type=int, default=0)
    ap.add_argument("--ablation", action="store_true", help="also run PABO without the supervisor")
    ap.add_argument("--csv")
    args = ap.parse_args()

    bundle = generate_case_bundle(args.case, args.surrogate_seed)
    space, obj = bundle.space, bundle.objective
    truth = run_grid(space, obj)
    ref = reference_point([o.objectives for o in truth.history])
    hv_true = hypervolume_2d(truth.front_pairs(), ref)
    print(f"{args.case}: cardinality {space.cardinality}, true front {len(truth.front)} points")

    algos = {"pabo": lambda s: run_pabo(space, obj, PaboConfig(seed=s, max_evals=PABO_MAX_EVALS[args.case]))}
    if args.ablation:
        algos["pabo-nosup"] = lambda s: run_pabo(
            space, obj, PaboConfig(seed=s, max_evals=PABO_MAX_EVALS[args.case], supervisor=False)
        )
    algos["random"] = lambda s: run_random(space, obj, BASELINES[args.case]["random_budget"], s)
    ns = BASELINES[args.case]["nsga2"]
    if ns is not None:
        algos["nsga2"] = lambda s: run_nsga2(
            space, obj, type(ns)(ns.pop_size, ns.max_generations, ns.crossover_prob, ns.mutation_prob, s)
        )

    rows = []
    for name, fn in algos.items():
        t0 = time.perf_counter()
        for s in range(args.seeds):
            res = fn(s)
            rows.append({"algorithm": name, "seed": s, "evals_used": res.evals_used,
                         "hv_ratio": hypervolume_2d(res.front_pairs(), ref) / hv_true,
                         "stop_reason": res.stop_reason})
        sub = [r for r in rows if r["algorithm"] == name]
        print(f"  {name:11s} median ratio {statistics.median(r['hv_ratio'] for r in sub):.4f}"
              f"  median evals {statistics.median(r['evals_used'] for r in sub):6.1f}"
              f"  ({time.perf_counter() - t0:.1f}s)")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
