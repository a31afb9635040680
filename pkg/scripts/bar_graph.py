"""Print instanton bar graphs (unique and raw counts per size) from report files.

    python scripts/bar_graph.py results/batches/k20_t5000_*.json --prefix 2000
"""

from __future__ import annotations

import argparse

from lpisa.experiment import import_report


def bars(counts: dict[int, int], width: int = 50) -> list[str]:
    top = max(counts.values(), default=0) or 1
    return [f"{size:>3} | {'#' * round(width * c / top):<{width}} {c}" for size, c in sorted(counts.items())]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("reports", nargs="+", help="report JSON files")
    ap.add_argument("--prefix", type=int, help="also show the first N trials of each batch")
    args = ap.parse_args()
    for path in args.reports:
        full = import_report(path)
        views = [full] + ([full.prefix(args.prefix)] if args.prefix and args.prefix < full.trials else [])
        for rep in views:
            print(f"# k0={rep.k0} trials={rep.trials} seed={rep.master_seed} formulation={rep.formulation}")
            print("unique instantons per size")
            print("\n".join(bars(rep.unique_bars)))
            print("trials per final size (0 = no failure)")
            print("\n".join(bars(rep.frequency_bars)))
            print()


if __name__ == "__main__":
    main()
