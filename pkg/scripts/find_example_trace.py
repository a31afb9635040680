"""Search 12-flip initiations for the worked-example trace shape.

Target: weights 17 -> 11 -> 9, medians of sizes 9 -> 6 -> 5, one subset
search with 5 of its 6 reduced medians decoding to all-zero, then a halt at a
size-5 instanton. Prints the first matching (seed, trial).

    python scripts/find_example_trace.py --seed 12 --trials 4000
"""

from __future__ import annotations

import argparse

from lpisa.code_model import load_builtin
from lpisa.experiment import initiation
from lpisa.isa import Branch, InsufficientNoise, IsaResult, isa_run
from lpisa.lp_decoder import LpDecoder
from lpisa.rng import TrialRng


def matches(res: IsaResult) -> bool:
    t = res.trace
    if len(t) != 3 or res.weights != [17, 11, 9] or [len(s.median) for s in t] != [9, 6, 5]:
        return False
    if t[0].branch is not Branch.WEIGHT_DROPPED or t[1].branch is not Branch.SUBSET_SEARCH:
        return False
    clean = sum(not o.is_failure for _, o in t[1].subset_outcomes)
    return clean == 5 and len(t[1].subset_outcomes) == 6 and t[2].halted and len(res.instanton) == 5


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=12)
    ap.add_argument("--trials", type=int, default=4000)
    ap.add_argument("--k0", type=int, default=12)
    args = ap.parse_args()
    code = load_builtin("tanner155")
    dec = LpDecoder(code)
    for t in range(args.trials):
        rng = TrialRng(args.seed, t)
        start = initiation(code.n, args.k0, rng)
        try:
            res = isa_run(code, start, rng, dec)
        except InsufficientNoise:
            continue
        if matches(res):
            print(f"seed={args.seed} trial={t} initial={start.one_based()} instanton={res.instanton.one_based()}",
                  flush=True)
            return
    print("no match", flush=True)


if __name__ == "__main__":
    main()
