"""Tanner-graph representation of binary LDPC codes.

Indices are 0-based everywhere inside the package. The alist format and the
CLI use 1-based indices; conversion happens only in :func:`parse_alist`,
:func:`write_alist` and the CLI argument parsers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np


class AlistError(ValueError):
    """Malformed alist input. ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, line: int = 0) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class TannerCode:
    """Bipartite variable/check adjacency of a parity-check matrix H.

    ``check_neighbors[j]`` is N(j), the ordered variable indices of check j;
    ``var_neighbors[i]`` the ordered check indices of variable i. Both are
    derived from each other at construction, so build codes through
    :meth:`from_check_neighbors` or :meth:`from_matrix`.
    """

    n: int
    m: int
    check_neighbors: tuple[tuple[int, ...], ...]
    var_neighbors: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if len(self.check_neighbors) != self.m or len(self.var_neighbors) != self.n:
            raise ValueError("adjacency lists do not match (n, m)")
        edges_c = set()
        for j, nbrs in enumerate(self.check_neighbors):
            if not nbrs:
                raise ValueError(f"check {j} has degree 0")
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"check {j} lists a variable twice")
            for i in nbrs:
                if not 0 <= i < self.n:
                    raise ValueError(f"check {j}: variable index {i} out of range")
                edges_c.add((j, i))
        edges_v = set()
        for i, nbrs in enumerate(self.var_neighbors):
            if len(set(nbrs)) != len(nbrs):
                raise ValueError(f"variable {i} lists a check twice")
            for j in nbrs:
                if not 0 <= j < self.m:
                    raise ValueError(f"variable {i}: check index {j} out of range")
                edges_v.add((j, i))
        if edges_c != edges_v:
            raise ValueError("check and variable adjacency lists disagree")

    @classmethod
    def from_check_neighbors(cls, n: int, check_neighbors: Sequence[Sequence[int]]) -> TannerCode:
        checks = tuple(tuple(int(i) for i in nbrs) for nbrs in check_neighbors)
        var_nbrs: list[list[int]] = [[] for _ in range(n)]
        for j, nbrs in enumerate(checks):
            for i in nbrs:
                if 0 <= i < n:
                    var_nbrs[i].append(j)
        return cls(n, len(checks), checks, tuple(tuple(v) for v in var_nbrs))

    @classmethod
    def from_matrix(cls, H) -> TannerCode:
        H = np.asarray(H)
        if H.ndim != 2:
            raise ValueError("parity-check matrix must be 2-D")
        if not np.isin(H, (0, 1)).all():
            raise ValueError("parity-check matrix entries must be 0 or 1")
        return cls.from_check_neighbors(H.shape[1], [np.flatnonzero(row).tolist() for row in H])

    def to_matrix(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for j, nbrs in enumerate(self.check_neighbors):
            H[j, list(nbrs)] = 1
        return H

    @property
    def check_degrees(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.check_neighbors)

    @property
    def var_degrees(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.var_neighbors)

    def fingerprint(self) -> str:
        """Short stable hash of the adjacency (order-sensitive)."""
        h = hashlib.sha256(f"{self.n} {self.m}\n".encode())
        for nbrs in self.check_neighbors:
            h.update((" ".join(map(str, nbrs)) + "\n").encode())
        return h.hexdigest()[:16]

    def is_codeword(self, bits: Sequence[int]) -> bool:
        """True iff ``bits`` (0/1 per variable) satisfies every check."""
        return all(sum(int(bits[i]) for i in nbrs) % 2 == 0 for nbrs in self.check_neighbors)


@dataclass(frozen=True)
class QcSpec:
    """Exponent matrix of a quasi-cyclic code built from circulant permutations."""

    rows: int
    cols: int
    circulant_size: int
    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.circulant_size < 1:
            raise ValueError("rows, cols and circulant_size must be positive")
        exps = tuple(tuple(int(e) for e in row) for row in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if len(exps) != self.rows or any(len(r) != self.cols for r in exps):
            raise ValueError(f"exponents must be a {self.rows}x{self.cols} matrix")
        for row in exps:
            for e in row:
                if not 0 <= e < self.circulant_size:
                    raise ValueError(f"exponent {e} outside [0, {self.circulant_size})")


def build_qc_code(spec: QcSpec) -> TannerCode:
    """Block matrix whose (a, b) block is the p x p identity with columns
    cyclically shifted by ``exponents[a][b]``: row r of the block has its one
    in column (r + shift) mod p."""
    p = spec.circulant_size
    checks = []
    for a in range(spec.rows):
        for r in range(p):
            checks.append([b * p + (r + spec.exponents[a][b]) % p for b in range(spec.cols)])
    return TannerCode.from_check_neighbors(spec.cols * p, checks)


def tanner_qc_spec() -> QcSpec:
    """Exponents of the [155,64,20] Tanner code: block (a, b) shifted by 5^a * 2^b mod 31."""
    return QcSpec(3, 5, 31, tuple(tuple(pow(5, a, 31) * pow(2, b, 31) % 31 for b in range(5)) for a in range(3)))


def tanner155() -> TannerCode:
    return build_qc_code(tanner_qc_spec())


def load_builtin(name: str) -> TannerCode:
    """Load a code shipped in ``lpisa/data`` (``tanner155`` is the only one)."""
    if name != "tanner155":
        raise KeyError(f"unknown built-in code {name!r}")
    text = resources.files("lpisa.data").joinpath("tanner155.alist").read_text()
    return parse_alist(text)


def gf2_rank(code: TannerCode) -> int:
    """Rank of H over GF(2), by elimination on rows packed into Python ints."""
    rows = [sum(1 << i for i in nbrs) for nbrs in code.check_neighbors]
    rank = 0
    pivots: dict[int, int] = {}  # leading bit -> reduced row
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead not in pivots:
                pivots[lead] = row
                rank += 1
                break
            row ^= pivots[lead]
    return rank


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise AlistError(f"non-integer token in {tokens!r}", lineno) from None


def parse_alist(text: str) -> TannerCode:
    """Parse MacKay's alist format (1-based indices, zero padding allowed)."""
    lines = [(k + 1, ln.split()) for k, ln in enumerate(text.splitlines())]
    eof = len(lines) + 1  # truncation is reported at the line past the end
    lines = [(k, toks) for k, toks in lines if toks]
    if len(lines) < 4:
        raise AlistError("expected at least 4 header lines", eof)

    (l1, t1), (l2, t2), (l3, t3), (l4, t4) = lines[:4]
    head = _ints(t1, l1)
    if len(head) != 2:
        raise AlistError("first line must be 'n m'", l1)
    n, m = head
    if n < 1 or m < 1:
        raise AlistError(f"non-positive dimensions n={n}, m={m}", l1)
    maxd = _ints(t2, l2)
    if len(maxd) != 2:
        raise AlistError("second line must be 'max_var_deg max_chk_deg'", l2)
    vdeg = _ints(t3, l3)
    cdeg = _ints(t4, l4)
    if len(vdeg) != n:
        raise AlistError(f"expected {n} variable degrees, got {len(vdeg)}", l3)
    if len(cdeg) != m:
        raise AlistError(f"expected {m} check degrees, got {len(cdeg)}", l4)
    if max(vdeg) > maxd[0] or max(cdeg) > maxd[1]:
        raise AlistError("a degree exceeds the declared maximum", l2)
    if min(vdeg) < 0 or min(cdeg) < 0:
        raise AlistError("negative degree", l3)

    body = lines[4:]
    if len(body) < n + m:
        raise AlistError(f"expected {n + m} adjacency lines, got {len(body)}", eof)

    def read_block(entries, degrees, bound, what):
        out = []
        for (lineno, toks), deg in zip(entries, degrees):
            vals = _ints(toks, lineno)
            real = [v for v in vals if v != 0]
            if any(v != 0 for v in vals[len(real):]) or vals[: len(real)] != real:
                raise AlistError(f"zero padding must come last on a {what} line", lineno)
            if len(real) != deg:
                raise AlistError(f"{what} line lists {len(real)} entries, degree says {deg}", lineno)
            if len(set(real)) != len(real):
                raise AlistError(f"duplicate index on a {what} line", lineno)
            for v in real:
                if not 1 <= v <= bound:
                    raise AlistError(f"index {v} out of range 1..{bound}", lineno)
            out.append([v - 1 for v in real])
        return out

    var_lists = read_block(body[:n], vdeg, m, "variable")
    chk_lists = read_block(body[n : n + m], cdeg, n, "check")
    for lineno, _ in body[n + m :]:
        raise AlistError("trailing data after the check lines", lineno)

    from_vars = {(j, i) for i, js in enumerate(var_lists) for j in js}
    from_chks = {(j, i) for j, is_ in enumerate(chk_lists) for i in is_}
    if from_vars != from_chks:
        bad = sorted(from_vars ^ from_chks)[0]
        raise AlistError(f"variable and check sections disagree on edge (check {bad[0] + 1}, variable {bad[1] + 1})")
    try:
        return TannerCode(n, m, tuple(map(tuple, chk_lists)), tuple(map(tuple, var_lists)))
    except ValueError as exc:
        raise AlistError(str(exc)) from None


def write_alist(code: TannerCode) -> str:
    """Serialize to alist with 0-padded rows (the canonical form parse accepts)."""
    mv = max(code.var_degrees, default=0)
    mc = max(code.check_degrees)

    def row(vals, width):
        vals = [v + 1 for v in vals] + [0] * (width - len(vals))
        return " ".join(map(str, vals))

    out = [
        f"{code.n} {code.m}",
        f"{mv} {mc}",
        " ".join(map(str, code.var_degrees)),
        " ".join(map(str, code.check_degrees)),
    ]
    out += [row(v, mv) for v in code.var_neighbors]
    out += [row(c, mc) for c in code.check_neighbors]
    return "\n".join(out) + "\n"
