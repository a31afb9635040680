"""LP decoding over the BSC under the all-zero-codeword assumption.

Two formulations of the fundamental polytope are available behind the same
``decode`` contract:

``full``
    variables f_i plus one w_{j,T} per check j and even subset T of N(j);
    normalization sum_T w_{j,T} = 1 and coupling f_i = sum_{T contains i} w_{j,T}.
``projected``
    f only, with one parity inequality per check j and odd S of N(j):
    sum_{i in S} f_i - sum_{i in N(j) minus S} f_i <= |S| - 1.

Both describe the same set of f, so outcome kinds and costs agree; the
returned vertex may differ on ties.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .code_model import TannerCode
from .lp_solver import LpError, LpProblem, Status, solve

DEFAULT_MAX_CHECK_DEGREE = 16
FORMULATIONS = ("full", "projected")


@dataclass(frozen=True, order=True)
class FlipSupport:
    """Flipped positions (0-based, sorted, no duplicates) of a length-n word."""

    n: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        s = tuple(sorted(int(i) for i in self.support))
        if len(set(s)) != len(s):
            raise ValueError("duplicate flip position")
        if s and (s[0] < 0 or s[-1] >= self.n):
            raise ValueError(f"flip position out of range for n={self.n}")
        object.__setattr__(self, "support", s)

    @classmethod
    def from_one_based(cls, n: int, positions: Iterable[int]) -> FlipSupport:
        return cls(n, tuple(int(p) - 1 for p in positions))

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.support]

    def without(self, i: int) -> FlipSupport:
        return FlipSupport(self.n, tuple(p for p in self.support if p != i))

    def __len__(self) -> int:
        return len(self.support)

    def __contains__(self, i: object) -> bool:
        return i in self.support


@dataclass(frozen=True)
class PseudoCodeword:
    """f-part of an LP vertex, exact rationals in [0, 1]."""

    f: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        f = tuple(v if type(v) is Fraction else Fraction(v) for v in self.f)
        if any(v.numerator < 0 or v.numerator > v.denominator for v in f):
            raise ValueError("pseudo-codeword coordinates must lie in [0, 1]")
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return len(self.f)

    def is_zero(self) -> bool:
        return not any(self.f)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.f)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.f) if v)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.f])


class OutcomeKind(enum.Enum):
    ALL_ZERO = "all_zero"
    NONZERO_CODEWORD = "nonzero_codeword"
    FRACTIONAL_PCW = "fractional_pcw"
    ZERO_COST_TIE = "zero_cost_tie"


@dataclass(frozen=True)
class DecodeOutcome:
    kind: OutcomeKind
    pcw: PseudoCodeword | None
    cost: Fraction

    @property
    def is_failure(self) -> bool:
        return self.kind is not OutcomeKind.ALL_ZERO


def llr_from_flips(flips: FlipSupport) -> np.ndarray:
    """BSC log-likelihoods scaled to +1 (received 0) and -1 (received 1)."""
    gamma = np.ones(flips.n, dtype=np.int64)
    gamma[list(flips.support)] = -1
    return gamma


def cost(flips: FlipSupport, pcw: PseudoCodeword) -> Fraction:
    """Decoding cost: mass of p off the flips minus mass on the flips."""
    if flips.n != pcw.n:
        raise ValueError("length mismatch between flips and pseudo-codeword")
    total = sum(pcw.f, Fraction(0))
    on = sum((pcw.f[i] for i in flips.support), Fraction(0))
    return total - 2 * on


def _check_degree_cap(code: TannerCode, cap: int) -> None:
    worst = max(code.check_degrees)
    if worst > cap:
        raise ValueError(f"check degree {worst} exceeds the cap of {cap}")


def even_subsets(nbrs: Sequence[int]) -> list[tuple[int, ...]]:
    return [T for k in range(0, len(nbrs) + 1, 2) for T in itertools.combinations(nbrs, k)]


def odd_subsets(nbrs: Sequence[int]) -> list[tuple[int, ...]]:
    return [S for k in range(1, len(nbrs) + 1, 2) for S in itertools.combinations(nbrs, k)]


def _full_structure(code: TannerCode):
    rows, cols, vals, rhs = [], [], [], []
    col = code.n
    w_index = []  # (check, T) per w column, in column order
    r = 0
    for j, nbrs in enumerate(code.check_neighbors):
        Ts = even_subsets(nbrs)
        ids = range(col, col + len(Ts))
        w_index.extend((j, T) for T in Ts)
        col += len(Ts)
        for c in ids:
            rows.append(r), cols.append(c), vals.append(1.0)
        rhs.append(1.0)
        r += 1
        for i in nbrs:
            rows.append(r), cols.append(i), vals.append(-1.0)
            for c, T in zip(ids, Ts):
                if i in T:
                    rows.append(r), cols.append(c), vals.append(1.0)
            rhs.append(0.0)
            r += 1
    A = sparse.csc_matrix((vals, (rows, cols)), shape=(r, col))
    b = np.array(rhs)
    return A, b, b.copy(), w_index


def _projected_structure(code: TannerCode):
    rows, cols, vals, hi = [], [], [], []
    r = 0
    for nbrs in code.check_neighbors:
        for S in odd_subsets(nbrs):
            for i in nbrs:
                rows.append(r), cols.append(i), vals.append(1.0 if i in S else -1.0)
            hi.append(float(len(S) - 1))
            r += 1
    A = sparse.csc_matrix((vals, (rows, cols)), shape=(r, code.n))
    return A, np.full(r, -np.inf), np.array(hi)


def _cone_structure(code: TannerCode):
    """Constraints of the polytope tight at the origin, sliced by sum f = 1."""
    rows, cols, vals = [], [], []
    r = 0
    for nbrs in code.check_neighbors:
        for i in nbrs:
            for k in nbrs:
                rows.append(r), cols.append(k), vals.append(1.0 if k == i else -1.0)
            r += 1
    rows.extend([r] * code.n), cols.extend(range(code.n)), vals.extend([1.0] * code.n)
    A = sparse.csc_matrix((vals, (rows, cols)), shape=(r + 1, code.n))
    lo = np.append(np.full(r, -np.inf), 1.0)
    hi = np.append(np.zeros(r), 1.0)
    return LpProblem(np.zeros(code.n), A, lo, hi, np.zeros(code.n), np.ones(code.n))


class LpDecoder:
    """LP decoder bound to one code; the constraint matrix is built once."""

    def __init__(self, code: TannerCode, formulation: str = "full",
                 max_check_degree: int = DEFAULT_MAX_CHECK_DEGREE, screen: bool = True) -> None:
        if formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        _check_degree_cap(code, max_check_degree)
        self.code = code
        self.formulation = formulation
        self.screen = screen
        if formulation == "full":
            A, lo, hi, self.w_index = _full_structure(code)
        else:
            A, lo, hi = _projected_structure(code)
            self.w_index = []
        nv = A.shape[1]
        self._base = LpProblem(np.zeros(nv), A, lo, hi, np.zeros(nv), np.ones(nv))
        self._cone = _cone_structure(code)
        self._base.max_row_norm, self._cone.max_row_norm  # cache before with_objective copies

    @property
    def num_vars(self) -> int:
        return self._base.num_vars

    def problem(self, gamma: np.ndarray) -> LpProblem:
        c = np.zeros(self.num_vars)
        c[: self.code.n] = gamma
        return self._base.with_objective(c)

    def _pcw(self, vertex: Sequence[Fraction]) -> PseudoCodeword:
        return PseudoCodeword(tuple(vertex[: self.code.n]))

    def decode(self, flips: FlipSupport) -> DecodeOutcome:
        """LP-decode ``flips`` and classify the optimum.

        With ``screen`` on, the cone LP runs first: when it shows that no
        nonzero point costs <= 0, the LCLP optimum is the zero vertex alone and
        the outcome is ALL_ZERO without solving the LCLP itself.
        """
        if flips.n != self.code.n:
            raise ValueError("flip support length does not match the code")
        gamma = llr_from_flips(flips)
        if self.screen and not self._tie_possible(gamma):
            return DecodeOutcome(OutcomeKind.ALL_ZERO, None, Fraction(0))
        sol = solve(self.problem(gamma))
        if sol.status is not Status.OPTIMAL:
            raise LpError("LCLP reported infeasible; the all-zero point is always feasible")
        pcw = self._pcw(sol.vertex)
        c = cost(flips, pcw)
        if c != sol.objective_value:
            raise LpError("LP objective disagrees with the recomputed cost")
        if c > 0:
            raise LpError("optimum above the cost of the all-zero codeword")
        if c < 0:
            kind = OutcomeKind.NONZERO_CODEWORD if pcw.is_integral() else OutcomeKind.FRACTIONAL_PCW
            return DecodeOutcome(kind, pcw, c)
        if not pcw.is_zero():
            return DecodeOutcome(OutcomeKind.ZERO_COST_TIE, pcw, c)
        tie = self._max_sum_vertex(gamma) if self.screen else self.probe_zero_cost(flips)
        if tie is not None:
            return DecodeOutcome(OutcomeKind.ZERO_COST_TIE, tie, Fraction(0))
        return DecodeOutcome(OutcomeKind.ALL_ZERO, None, Fraction(0))

    def _tie_possible(self, gamma: np.ndarray) -> bool:
        """Whether some nonzero polytope point has cost <= 0.

        The polytope agrees with the cone of its origin-tight constraints near
        0, so it suffices to minimize the cost over that cone sliced by
        sum f = 1.
        """
        sol = solve(self._cone.with_objective(gamma))
        if sol.status is not Status.OPTIMAL:
            raise LpError("cone slice LP reported infeasible")
        return sol.objective_value <= 0

    def _max_sum_vertex(self, gamma: np.ndarray) -> PseudoCodeword | None:
        base = self._base
        row = np.zeros(self.num_vars)
        row[: self.code.n] = gamma
        A = sparse.vstack([base.A, sparse.csr_matrix(row)], format="csc")
        obj = np.zeros(self.num_vars)
        obj[: self.code.n] = -1.0
        prob = LpProblem(obj, A, np.append(base.row_lower, -np.inf), np.append(base.row_upper, 0.0),
                         base.lower, base.upper)
        sol = solve(prob)
        if sol.status is not Status.OPTIMAL:
            raise LpError("probe LP reported infeasible; the all-zero point is always feasible")
        return self._pcw(sol.vertex) if sol.objective_value < 0 else None

    def probe_zero_cost(self, flips: FlipSupport) -> PseudoCodeword | None:
        """Nonzero point of cost <= 0 maximizing sum f, or None if only 0 qualifies.

        Existence is settled first by the small cone LP; the max-sum vertex
        LP runs only when a point exists.
        """
        gamma = llr_from_flips(flips)
        if not self._tie_possible(gamma):
            return None
        tie = self._max_sum_vertex(gamma)
        if tie is None:
            raise LpError("cone LP found a zero-cost direction the probe LP did not")
        return tie


@functools.lru_cache(maxsize=32)
def get_decoder(code: TannerCode, formulation: str = "full") -> LpDecoder:
    return LpDecoder(code, formulation)


def build_lclp(code: TannerCode, gamma: np.ndarray, max_check_degree: int = DEFAULT_MAX_CHECK_DEGREE) -> LpProblem:
    """LCLP for the full polytope; f-variables come first (columns 0..n-1)."""
    if len(gamma) != code.n:
        raise ValueError("gamma length does not match the code")
    return LpDecoder(code, "full", max_check_degree).problem(np.asarray(gamma))


def decode(code: TannerCode, flips: FlipSupport, formulation: str = "full") -> DecodeOutcome:
    return get_decoder(code, formulation).decode(flips)


def probe_zero_cost(code: TannerCode, flips: FlipSupport, formulation: str = "full") -> PseudoCodeword | None:
    return get_decoder(code, formulation).probe_zero_cost(flips)
