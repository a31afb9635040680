"""Run (or resume) the k0 sweep used by the acceptance suite and print bar tables.

    python scripts/run_sweep.py --cache results/batches --workers 4
"""

from __future__ import annotations

import argparse
import logging
import os
import time

from lpisa.code_model import load_builtin
from lpisa.pcw_analysis import fractional_distance
from lpisa.sweep import ACCEPTANCE_SWEEP, cached_batch
from lpisa.experiment import bars_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cache", default="results/batches")
    ap.add_argument("--workers", type=int, default=int(os.environ.get("LPISA_WORKERS", "1")))
    ap.add_argument("--only-k0", type=int, nargs="*", help="restrict to these k0 values")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    code = load_builtin("tanner155")
    t0 = time.perf_counter()
    d_frac = fractional_distance(code, workers=args.workers).value
    logging.info("d_frac = %s (%.4f) in %.0f s", d_frac, float(d_frac), time.perf_counter() - t0)
    for cfg in ACCEPTANCE_SWEEP.batches:
        if args.only_k0 and cfg.k0 not in args.only_k0:
            continue
        report, wall = cached_batch(code, cfg, args.cache, args.workers, d_frac)
        logging.info("k0=%d trials=%d wall=%.0fs tallies=%s", cfg.k0, cfg.trials, wall, report.tallies)
        print(f"# k0={cfg.k0} trials={cfg.trials} seed={cfg.master_seed}")
        print(bars_csv(report), flush=True)


if __name__ == "__main__":
    main()
