"""Regenerate the pinned constants in src/besovkit/data/baseline.json.

Runs the full suite on the default configuration without a baseline and
stores every finite bounded-ratio constant.  Only rerun after a deliberate
change to a check or a family; the verify suite flags any constant that
later moves more than 20% from these values.
"""

import argparse
import json
import time
from pathlib import Path

from besovkit.harness import SuiteConfig, baseline_from, run_suite, summarize
from besovkit.lattice import atomic_write_text

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "besovkit" / "data" / "baseline.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(DEFAULT_OUT))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = SuiteConfig(seed=args.seed)
    t0 = time.time()
    reports = run_suite("all", cfg, baseline=None)
    summary = summarize(reports)
    if summary["failed"]:
        raise SystemExit(f"refusing to pin a baseline from a failing run: {summary['failed_ids']}")
    data = baseline_from(reports, cfg)
    atomic_write_text(args.out, json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"{len(data['constants'])} constants pinned in {time.time() - t0:.0f}s -> {args.out}")


if __name__ == "__main__":
    main()
