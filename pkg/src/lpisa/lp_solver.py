"""Deterministic LP solves with an exact rational final vertex.

The numeric phase is HiGHS dual simplex (single thread, presolve off), which
returns an optimal *basic* solution. The basis is then re-solved exactly:
candidate rationals are recovered from the floats and checked against the
basis system in integer arithmetic; when that check fails the basis system is
eliminated in ``Fraction`` arithmetic instead. Downstream code only ever looks
at the rational vertex.

Coefficients, right-hand sides and variable bounds must be integers.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import highspy
import numpy as np
from scipy import sparse

FEAS_TOL = 1e-9
MAX_DENOMINATOR = 10**7
# tolerances tried in order when the rational vertex comes out infeasible
_RETRY_TOLS = (FEAS_TOL, 1e-11, 1e-13)

_inf = highspy.kHighsInf


class LpError(RuntimeError):
    """Solver failure that is not a property of the LP itself."""


class IterationLimit(LpError):
    pass


class SingularBasis(LpError):
    pass


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """min c.x  s.t.  row_lower <= A x <= row_upper,  lower <= x <= upper.

    ``A`` is a CSC matrix with integer entries; infinite row bounds are
    ``-inf``/``inf``. Instances are immutable and may share ``A``.
    """

    objective: np.ndarray
    A: sparse.csc_matrix
    row_lower: np.ndarray
    row_upper: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        nv = self.A.shape[1]
        if len(self.objective) != nv or len(self.lower) != nv or len(self.upper) != nv:
            raise ValueError("objective/bounds length must equal the column count of A")
        if len(self.row_lower) != self.A.shape[0] or len(self.row_upper) != self.A.shape[0]:
            raise ValueError("row bound length must equal the row count of A")
        if np.any(self.lower > self.upper):
            raise ValueError("variable with lower bound above upper bound")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ValueError("variable bounds must be finite")
        for name, arr in (("objective", self.objective), ("coefficients", self.A.data),
                          ("variable bounds", np.concatenate([self.lower, self.upper])),
                          ("row bounds", np.concatenate([self.row_lower, self.row_upper]))):
            fin = arr[np.isfinite(arr)]
            if np.any(fin != np.round(fin)):
                raise ValueError(f"{name} must be integers")

    @functools.cached_property
    def max_row_norm(self) -> int:
        return int(abs(self.A).sum(axis=1).max()) if self.A.nnz else 0

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_constraints(
        cls,
        num_vars: int,
        objective: Sequence[float],
        bounds: Sequence[tuple[int, int]],
        constraints: Iterable[tuple[Mapping[int, int], str, int]],
    ) -> LpProblem:
        """Build from ``(coefficients, relation, rhs)`` triples, relation in ``<=``, ``=``, ``>=``."""
        rows, cols, vals, lo, hi = [], [], [], [], []
        for r, (coefs, rel, rhs) in enumerate(constraints):
            for j, v in coefs.items():
                if not 0 <= j < num_vars:
                    raise ValueError(f"constraint {r}: variable index {j} out of range")
                rows.append(r)
                cols.append(j)
                vals.append(v)
            if rel == "<=":
                lo.append(-np.inf), hi.append(rhs)
            elif rel == ">=":
                lo.append(rhs), hi.append(np.inf)
            elif rel in ("=", "=="):
                lo.append(rhs), hi.append(rhs)
            else:
                raise ValueError(f"unknown relation {rel!r}")
        A = sparse.csc_matrix((np.asarray(vals, float), (rows, cols)), shape=(len(lo), num_vars))
        b = np.asarray(bounds, dtype=float).reshape(num_vars, 2)
        return cls(np.asarray(objective, float), A, np.asarray(lo, float), np.asarray(hi, float), b[:, 0], b[:, 1])

    def with_objective(self, objective) -> LpProblem:
        new = replace(self, objective=np.asarray(objective, dtype=float))
        if "max_row_norm" in self.__dict__:
            new.__dict__["max_row_norm"] = self.max_row_norm
        return new


@dataclass(frozen=True)
class Basis:
    """HiGHS basis: per column / row, 'B' basic, 'L' at lower, 'U' at upper."""

    cols: str
    rows: str


@dataclass(frozen=True)
class LpSolution:
    status: Status
    objective_value: Fraction | None = None
    vertex: tuple[Fraction, ...] | None = None
    basis: Basis | None = None
    # True when the float guess failed and the basis was eliminated exactly
    exact_fallback: bool = False


@dataclass(frozen=True)
class FloatSolution:
    x: np.ndarray
    basis: Basis


# HighsBasisStatus values 0..4 -> L, B, U, Z, N
_STATUS_CHARS = np.frombuffer(b"LBUZN", dtype=np.uint8)


def _status_string(statuses) -> str:
    codes = np.fromiter((int(st) for st in statuses), dtype=np.int64, count=len(statuses))
    return _STATUS_CHARS[codes].tobytes().decode()


def _run_highs(problem: LpProblem, tol: float, iteration_limit: int) -> FloatSolution | None:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    h.setOptionValue("simplex_strategy", 1)  # dual
    h.setOptionValue("presolve", "off")
    h.setOptionValue("threads", 1)
    h.setOptionValue("primal_feasibility_tolerance", tol)
    h.setOptionValue("dual_feasibility_tolerance", tol)
    h.setOptionValue("simplex_iteration_limit", iteration_limit)

    A = problem.A
    lp = highspy.HighsLp()
    lp.num_col_ = A.shape[1]
    lp.num_row_ = A.shape[0]
    lp.col_cost_ = problem.objective
    lp.col_lower_ = problem.lower
    lp.col_upper_ = problem.upper
    lp.row_lower_ = np.where(np.isfinite(problem.row_lower), problem.row_lower, -_inf)
    lp.row_upper_ = np.where(np.isfinite(problem.row_upper), problem.row_upper, _inf)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = A.indptr
    lp.a_matrix_.index_ = A.indices
    lp.a_matrix_.value_ = A.data
    h.passModel(lp)
    h.run()

    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kInfeasible:
        return None
    if status == highspy.HighsModelStatus.kIterationLimit:
        raise IterationLimit(f"simplex iteration limit {iteration_limit} reached")
    if status != highspy.HighsModelStatus.kOptimal:
        raise LpError(f"HiGHS returned {h.modelStatusToString(status)}")
    basis = h.getBasis()
    if not basis.valid:
        raise LpError("HiGHS returned no valid basis")
    return FloatSolution(
        np.array(h.getSolution().col_value),
        Basis(_status_string(basis.col_status), _status_string(basis.row_status)),
    )


_SMALL_INTS = {k: Fraction(k) for k in range(-4, 5)}


def _as_fraction(k: int) -> Fraction:
    q = _SMALL_INTS.get(k)
    return Fraction(k) if q is None else q


@functools.lru_cache(maxsize=1 << 16)
def _nearby_rational(v: float) -> Fraction:
    return Fraction(v).limit_denominator(MAX_DENOMINATOR)


def _guess(x: np.ndarray) -> tuple[list[Fraction], list[int]]:
    """Rational candidates for a float vertex, plus the indices that are non-integral."""
    r = np.rint(x)
    frac_idx = np.flatnonzero(np.abs(x - r) > FEAS_TOL).tolist()
    out = [_as_fraction(int(v)) for v in r.tolist()]
    for j in frac_idx:
        out[j] = _nearby_rational(round(float(x[j]), 12))
    frac_idx = [j for j in frac_idx if out[j].denominator != 1]
    return out, frac_idx


def _nonbasic_value(status: str, lo: float, hi: float) -> int:
    if status == "L":
        return int(lo)
    if status == "U":
        return int(hi)
    raise SingularBasis(f"unexpected nonbasic status {status!r}")


def _within(vals, lo, hi, status: np.ndarray, scale: int) -> bool:
    """Exact check: basic entries inside [lo, hi], nonbasic ones on their bound."""
    if np.any((status != ord("B")) & (status != ord("L")) & (status != ord("U"))):
        return False
    fin_lo, fin_hi = np.isfinite(lo), np.isfinite(hi)
    lo_s = np.where(fin_lo, lo, 0).astype(np.int64).astype(object) * scale
    hi_s = np.where(fin_hi, hi, 0).astype(np.int64).astype(object) * scale
    basic = status == ord("B")
    if np.any(basic & fin_lo & (vals < lo_s)) or np.any(basic & fin_hi & (vals > hi_s)):
        return False
    at_lo, at_hi = status == ord("L"), status == ord("U")
    if np.any(at_lo & (~fin_lo | (vals != lo_s))) or np.any(at_hi & (~fin_hi | (vals != hi_s))):
        return False
    return True


def _check_exact(problem: LpProblem, x: list[Fraction], basis: Basis,
                 frac_idx: list[int] | None = None) -> bool:
    """True iff x satisfies the basis system exactly and is feasible.

    With a nonsingular basis matrix the basis system has exactly one solution,
    so passing this check certifies x as the basic solution. The test runs on
    x scaled by the common denominator, in Python integers. ``frac_idx`` lists
    the entries that may be non-integral (all of them when omitted).
    """
    if frac_idx is None:
        frac_idx = [j for j, q in enumerate(x) if q.denominator != 1]
    denom = math.lcm(*{x[j].denominator for j in frac_idx}) if frac_idx else 1
    ints = np.array([q.numerator for q in x], dtype=object)
    if denom != 1:
        ints = ints * denom
        for j in frac_idx:
            ints[j] = x[j].numerator * (denom // x[j].denominator)
    A = problem.A
    bound = max(abs(int(ints.max())), abs(int(ints.min()))) * problem.max_row_norm
    if bound < 2**52:
        act = (A @ ints.astype(np.float64)).round().astype(np.int64).astype(object)
    else:
        Ar = A.tocsr()
        act = np.array([sum(int(a) * ints[c] for c, a in zip(Ar.indices[Ar.indptr[r]:Ar.indptr[r + 1]],
                                                            Ar.data[Ar.indptr[r]:Ar.indptr[r + 1]]))
                        for r in range(A.shape[0])], dtype=object)
    col_status = np.frombuffer(basis.cols.encode(), dtype=np.uint8)
    row_status = np.frombuffer(basis.rows.encode(), dtype=np.uint8)
    return (_within(ints, problem.lower, problem.upper, col_status, denom)
            and _within(act, problem.row_lower, problem.row_upper, row_status, denom))


def _solve_basis_exact(problem: LpProblem, basis: Basis) -> list[Fraction]:
    """Exact sparse elimination of the basis system B x_B = b - N x_N."""
    nv = problem.num_vars
    x: list[Fraction | None] = [None] * nv
    for j, s in enumerate(basis.cols):
        if s != "B":
            x[j] = Fraction(_nonbasic_value(s, problem.lower[j], problem.upper[j]))
    basic = {j for j, s in enumerate(basis.cols) if s == "B"}
    Ar = problem.A.tocsr()
    eqs: list[tuple[dict[int, Fraction], Fraction]] = []
    for r, s in enumerate(basis.rows):
        if s == "B":
            continue
        rhs = Fraction(_nonbasic_value(s, problem.row_lower[r], problem.row_upper[r]))
        row: dict[int, Fraction] = {}
        for c, v in zip(Ar.indices[Ar.indptr[r] : Ar.indptr[r + 1]], Ar.data[Ar.indptr[r] : Ar.indptr[r + 1]]):
            v = Fraction(int(v))
            if c in basic:
                row[int(c)] = row.get(int(c), 0) + v
            else:
                rhs -= v * x[c]
        row = {c: v for c, v in row.items() if v}
        eqs.append((row, rhs))
    if len(eqs) != len(basic):
        raise SingularBasis(f"{len(basic)} basic columns but {len(eqs)} tight rows")

    # Gaussian elimination, pivoting on the sparsest remaining row / column
    col_rows: dict[int, set[int]] = {c: set() for c in basic}
    for k, (row, _) in enumerate(eqs):
        for c in row:
            col_rows[c].add(k)
    live = set(range(len(eqs)))
    order: list[tuple[int, int]] = []
    while live:
        k = min(live, key=lambda k: (len(eqs[k][0]), k))
        row, rhs = eqs[k]
        if not row:
            raise SingularBasis("basis matrix is singular in exact arithmetic")
        c = min(row, key=lambda c: (len(col_rows[c]), c))
        piv = row[c]
        live.discard(k)
        for c2 in row:
            col_rows[c2].discard(k)
        for k2 in list(col_rows[c]):
            r2, b2 = eqs[k2]
            f = r2[c] / piv
            for c2, v in row.items():
                nv2 = r2.get(c2, 0) - f * v
                if nv2:
                    if c2 not in r2:
                        col_rows[c2].add(k2)
                    r2[c2] = nv2
                elif c2 in r2:
                    del r2[c2]
                    col_rows[c2].discard(k2)
            eqs[k2] = (r2, b2 - f * rhs)
        order.append((k, c))
    for k, c in reversed(order):
        row, rhs = eqs[k]
        acc = rhs - sum(v * x[c2] for c2, v in row.items() if c2 != c)
        x[c] = acc / row[c]
    return x  # type: ignore[return-value]


def rationalize_vertex(float_solution: FloatSolution, problem: LpProblem) -> tuple[list[Fraction], bool]:
    """Exact basic solution for the float basis. Returns ``(vertex, used_elimination)``.

    Raises :class:`SingularBasis` when the basis does not determine a unique
    point, and ``ValueError`` when the exact basic solution is infeasible
    (the float phase was too loose; re-solve tighter).
    """
    x, frac_idx = _guess(float_solution.x)
    if _check_exact(problem, x, float_solution.basis, frac_idx):
        return x, False
    x = _solve_basis_exact(problem, float_solution.basis)
    if not _check_exact(problem, x, float_solution.basis):
        raise ValueError("exact basic solution violates feasibility")
    return x, True


def solve(problem: LpProblem, iteration_limit: int = 1_000_000) -> LpSolution:
    """Optimal basic feasible solution with exact rational vertex and objective."""
    last_err: Exception | None = None
    for tol in _RETRY_TOLS:
        fs = _run_highs(problem, tol, iteration_limit)
        if fs is None:
            return LpSolution(Status.INFEASIBLE)
        try:
            x, fallback = rationalize_vertex(fs, problem)
        except (ValueError, SingularBasis) as exc:
            last_err = exc
            continue
        obj = sum((int(problem.objective[j]) * x[j] for j in np.flatnonzero(problem.objective).tolist()), Fraction(0))
        return LpSolution(Status.OPTIMAL, obj, tuple(x), fs.basis, fallback)
    raise LpError(f"could not recover a feasible rational vertex: {last_err}")
