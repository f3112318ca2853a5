"""Run verification suites on one or more grids and print a per-check table.

Example:
    python3 scripts/run_verify.py --grids 1,0,9 2,0,6 --suite all --out reports/
"""

import argparse
import os
import time
from collections import defaultdict

from besovkit.harness import SuiteConfig, reports_json, run_suite, summarize
from besovkit.lattice import atomic_write_text


def table(reports):
    worst = defaultdict(lambda: [0.0, True, 0])
    for r in reports:
        row = worst[r.check_id]
        row[0] = max(row[0], r.worst_ratio)
        row[1] = row[1] and r.passed
        row[2] += 1
    lines = [f"{'check':34s} {'reports':>7s} {'worst':>12s}  status"]
    for cid in sorted(worst):
        w, ok, n = worst[cid]
        lines.append(f"{cid:34s} {n:7d} {w:12.4g}  {'pass' if ok else 'FAIL'}")
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--grids", nargs="+", default=["1,0,9"], help="d,m,n triples")
    ap.add_argument("--suite", default="all")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-stability", action="store_true")
    ap.add_argument("--out", default=None, help="directory for JSON reports")
    args = ap.parse_args()
    status = 0
    for spec in args.grids:
        d, m, n = (int(x) for x in spec.split(","))
        cfg = SuiteConfig(d=d, m=m, n=n, seed=args.seed)
        t0 = time.time()
        reports = run_suite(args.suite, cfg, stability=not args.no_stability)
        elapsed = time.time() - t0
        summ = summarize(reports)
        print(f"\n== grid d={d} m={m} n={n}  suite={args.suite}  {elapsed:.0f}s  failed {summ['failed']}/{summ['total']}")
        print(table(reports))
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            atomic_write_text(os.path.join(args.out, f"verify_{args.suite}_d{d}m{m}n{n}.json"), reports_json(reports) + "\n")
        status |= bool(summ["failed"])
    raise SystemExit(int(status))


if __name__ == "__main__":
    main()
