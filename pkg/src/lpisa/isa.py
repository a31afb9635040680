"""Instanton search: alternate LP decoding of medians and one-flip-reduced medians.

Every step strictly lowers the BSC weight of the current pseudo-codeword, so a
run started from k0 flips halts within 2*k0 steps. The guarantees are
asserted while running; a violation raises :class:`TheoremViolation`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .code_model import TannerCode
from .lp_decoder import DecodeOutcome, FlipSupport, LpDecoder, OutcomeKind, PseudoCodeword, get_decoder
from .pcw_analysis import WeightReport, bsc_weight, pick_median
from .rng import TrialRng


class InsufficientNoise(Exception):
    """The initiation decodes to the all-zero codeword; no search is possible."""


class TheoremViolation(AssertionError):
    """A proven property of the search failed at runtime (implementation bug)."""


class Branch(enum.Enum):
    WEIGHT_DROPPED = "weight_dropped"
    SUBSET_SEARCH = "subset_search"


@dataclass(frozen=True)
class IsaStep:
    index: int
    input_pcw: PseudoCodeword
    input_weight: WeightReport
    median: FlipSupport
    median_outcome: DecodeOutcome
    median_weight: WeightReport
    branch: Branch
    # (removed position, outcome) in ascending position order; SUBSET_SEARCH only
    subset_outcomes: tuple[tuple[int, DecodeOutcome], ...] = ()
    # removed position whose outcome became the next input; None otherwise
    chosen_removed: int | None = None
    halted: bool = False


@dataclass(frozen=True)
class IsaResult:
    instanton: FlipSupport
    final_pcw: PseudoCodeword  # LP output for the instanton itself
    trace: tuple[IsaStep, ...]
    k0: int
    initial: FlipSupport
    initial_outcome: DecodeOutcome = field(repr=False)

    @property
    def steps_used(self) -> int:
        return len(self.trace)

    @property
    def weights(self) -> list[int]:
        return [s.input_weight.w_bsc for s in self.trace]

    @property
    def final_weight(self) -> int:
        return self.trace[-1].median_weight.w_bsc


def _check(cond: bool, what: str) -> None:
    if not cond:
        raise TheoremViolation(what)


def isa_run(code: TannerCode, initial: FlipSupport, rng: TrialRng,
            decoder: LpDecoder | None = None) -> IsaResult:
    """Run the search from ``initial``; step l draws its randomness from ``rng.step(l)``."""
    dec = decoder or get_decoder(code)
    k0 = len(initial)
    first = dec.decode(initial)
    if not first.is_failure:
        raise InsufficientNoise(f"{k0} flips decode to the all-zero codeword")

    p = first.pcw
    w = bsc_weight(p)
    _check(w.w_bsc <= 2 * k0, f"first pseudo-codeword weight {w.w_bsc} exceeds 2*k0 = {2 * k0}")
    trace: list[IsaStep] = []
    for l in range(1, 2 * k0 + 1):
        _check(w.w_bsc in (2 * w.e - 1, 2 * w.e), "weight not in {2e-1, 2e}")
        gen = rng.step(l)
        median = pick_median(p, gen)
        _check(len(median) == w.e, "median size differs from e")
        d = dec.decode(median)
        # the median costs at most 0 against p, so some nonzero point ties or beats zero
        _check(d.is_failure, "median of a pseudo-codeword decoded to all-zero")
        wm = bsc_weight(d.pcw)
        _check(wm.w_bsc <= w.w_bsc, f"median output weight {wm.w_bsc} above input weight {w.w_bsc}")

        if wm.w_bsc < w.w_bsc:
            trace.append(IsaStep(l, p, w, median, d, wm, Branch.WEIGHT_DROPPED))
            p, w = d.pcw, wm
            continue

        subsets = tuple((i, dec.decode(median.without(i))) for i in median.support)
        failing = [(i, o) for i, o in subsets if o.is_failure]
        if not failing:
            trace.append(IsaStep(l, p, w, median, d, wm, Branch.SUBSET_SEARCH, subsets, None, True))
            return IsaResult(median, d.pcw, tuple(trace), k0, initial, first)
        for _, o in failing:
            _check(o.pcw != p, "a reduced median decoded back to the current pseudo-codeword")
        i, o = failing[int(gen.integers(len(failing)))]
        wn = bsc_weight(o.pcw)
        _check(wn.w_bsc < w.w_bsc, "subset search did not lower the weight")
        trace.append(IsaStep(l, p, w, median, d, wm, Branch.SUBSET_SEARCH, subsets, i))
        p, w = o.pcw, wn
    raise TheoremViolation(f"no instanton after 2*k0 = {2 * k0} steps")


@dataclass(frozen=True)
class InstantonCheck:
    candidate: FlipSupport
    outcome: DecodeOutcome
    subset_outcomes: tuple[tuple[int, DecodeOutcome], ...]

    @property
    def fails(self) -> bool:
        return self.outcome.is_failure

    @property
    def subsets_clean(self) -> bool:
        return all(o.kind is OutcomeKind.ALL_ZERO for _, o in self.subset_outcomes)

    @property
    def ok(self) -> bool:
        return self.fails and self.subsets_clean

    def __bool__(self) -> bool:
        return self.ok


def verify_instanton(code: TannerCode, candidate: FlipSupport, decoder: LpDecoder | None = None) -> InstantonCheck:
    """Re-decode ``candidate`` and each of its one-flip reductions.

    Checking the reductions by one flip suffices: if any smaller subset failed,
    a one-flip reduction containing it would fail too.
    """
    if len(candidate) == 0:
        raise ValueError("an instanton has at least one flip")
    dec = decoder or get_decoder(code)
    main = dec.decode(candidate)
    if not main.is_failure:
        return InstantonCheck(candidate, main, ())
    subs = tuple((i, dec.decode(candidate.without(i))) for i in candidate.support)
    return InstantonCheck(candidate, main, subs)
