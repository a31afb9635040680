from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpisa.code_model import TannerCode
from lpisa.lp_decoder import (
    FlipSupport,
    LpDecoder,
    OutcomeKind,
    PseudoCodeword,
    build_lclp,
    cost,
    decode,
    even_subsets,
    llr_from_flips,
    probe_zero_cost,
)
from lpisa.pcw_analysis import bsc_weight, pick_median
from oracles import lp_failure, projected_inequalities
from conftest import SMALL_H, small_vertices

# found by an instanton search with seed 7 and re-verified in test_isa
TANNER_INSTANTON = (9, 28, 30, 74, 136)


def test_llr_examples():
    assert llr_from_flips(FlipSupport(4, ())).tolist() == [1, 1, 1, 1]
    assert llr_from_flips(FlipSupport.from_one_based(4, [2])).tolist() == [1, -1, 1, 1]
    assert llr_from_flips(FlipSupport(4, (0, 1, 2, 3))).tolist() == [-1, -1, -1, -1]


def test_flip_support_canonical():
    s = FlipSupport(10, (5, 1, 3))
    assert s.support == (1, 3, 5)
    assert FlipSupport.from_one_based(10, s.one_based()) == s
    assert s.without(3).support == (1, 5)
    with pytest.raises(ValueError):
        FlipSupport(4, (1, 1))
    with pytest.raises(ValueError):
        FlipSupport(4, (4,))


def test_pseudocodeword_range():
    with pytest.raises(ValueError):
        PseudoCodeword((Fraction(3, 2),))
    with pytest.raises(ValueError):
        PseudoCodeword((Fraction(-1, 2),))


def test_cost_examples():
    p = PseudoCodeword((1, 1, Fraction(1, 2)) + (0,) * 7)
    assert cost(FlipSupport(10, (0, 1)), p) == Fraction(-3, 2)
    assert cost(FlipSupport(10, (2, 5)), PseudoCodeword((0,) * 10)) == 0


def test_lclp_shape_single_check():
    code = TannerCode.from_check_neighbors(3, [[0, 1, 2]])
    assert even_subsets([0, 1, 2]) == [(), (0, 1), (0, 2), (1, 2)]
    p = build_lclp(code, np.array([-1, 1, 1]))
    assert p.num_vars == 3 + 4
    assert p.num_rows == 1 + 3
    assert p.objective.tolist() == [-1, 1, 1, 0, 0, 0, 0]


def test_lclp_tanner_size(tanner):
    gamma = llr_from_flips(FlipSupport(155, (0,)))
    p = build_lclp(tanner, gamma)
    assert p.num_vars == 155 + 93 * 16
    assert p.objective[0] == -1 and set(p.objective[1:155]) == {1} and not p.objective[155:].any()


def test_degree_cap():
    code = TannerCode.from_check_neighbors(5, [[0, 1, 2, 3, 4]])
    with pytest.raises(ValueError):
        LpDecoder(code, max_check_degree=4)
    with pytest.raises(ValueError):
        LpDecoder(code, formulation="nope")


def _all_supports(n):
    return [FlipSupport(n, c) for k in range(n + 1) for c in itertools.combinations(range(n), k)]


@pytest.mark.parametrize("name", sorted(SMALL_H))
@pytest.mark.parametrize("formulation, screen", [("full", True), ("full", False), ("projected", True)])
def test_decode_matches_vertex_enumeration(name, formulation, screen):
    H = SMALL_H[name]
    code = TannerCode.from_matrix(H)
    verts = small_vertices(name)
    A, b = projected_inequalities(H)
    dec = LpDecoder(code, formulation, screen=screen)
    for flips in _all_supports(code.n):
        out = dec.decode(flips)
        fails, best = lp_failure(verts, set(flips.support))
        assert out.is_failure == fails, flips
        assert out.cost == best
        if out.pcw is not None:
            f = out.pcw.f
            assert cost(flips, out.pcw) == out.cost
            assert all(sum(int(a) * v for a, v in zip(row, f)) <= bi for row, bi in zip(A, b))
            if formulation == "projected":
                assert f in verts
        if out.kind is OutcomeKind.NONZERO_CODEWORD:
            assert code.is_codeword([int(v) for v in out.pcw.f])
        if out.kind is OutcomeKind.FRACTIONAL_PCW:
            assert not out.pcw.is_integral()
        if out.kind is OutcomeKind.ZERO_COST_TIE:
            assert out.cost == 0 and not out.pcw.is_zero()
        if out.kind is OutcomeKind.ALL_ZERO:
            assert out.pcw is None and out.cost == 0


@pytest.mark.parametrize("name", sorted(SMALL_H))
def test_probe_matches_vertex_enumeration(name):
    code = TannerCode.from_matrix(SMALL_H[name])
    verts = small_vertices(name)
    dec = LpDecoder(code)
    for flips in _all_supports(code.n):
        exists = any(any(v) and sum(-x if i in flips else x for i, x in enumerate(v)) <= 0 for v in verts)
        found = dec.probe_zero_cost(flips)
        assert (found is not None) == exists
        if found is not None:
            assert cost(flips, found) <= 0 and not found.is_zero()


def test_zero_flips_all_zero(tanner):
    out = decode(tanner, FlipSupport(155, ()))
    assert out.kind is OutcomeKind.ALL_ZERO and out.cost == 0
    assert probe_zero_cost(tanner, FlipSupport(155, ())) is None


@settings(max_examples=15)
@given(st.sets(st.integers(0, 154), min_size=1, max_size=4))
def test_four_flips_correct_on_tanner(tanner, support):
    assert decode(tanner, FlipSupport(155, tuple(support))).kind is OutcomeKind.ALL_ZERO


def test_known_instanton_fails_with_weight_nine(tanner):
    out = decode(tanner, FlipSupport.from_one_based(155, TANNER_INSTANTON))
    assert out.is_failure
    assert bsc_weight(out.pcw).w_bsc == 9


@settings(max_examples=12)
@given(st.sets(st.integers(0, 154), min_size=5, max_size=14))
def test_formulations_and_screening_agree(tanner, support):
    flips = FlipSupport(155, tuple(support))
    full = LpDecoder(tanner, "full").decode(flips)
    plain = LpDecoder(tanner, "full", screen=False).decode(flips)
    proj = LpDecoder(tanner, "projected").decode(flips)
    assert full == plain
    assert full.kind == proj.kind and full.cost == proj.cost


@settings(max_examples=10)
@given(st.sets(st.integers(0, 154), min_size=6, max_size=12), st.integers(0, 2**32 - 1))
def test_median_of_output_fails_and_supersets_fail(tanner, support, seed):
    out = decode(tanner, FlipSupport(155, tuple(support)))
    if not out.is_failure:
        return
    m = pick_median(out.pcw, np.random.default_rng(seed))
    assert cost(m, out.pcw) <= 0
    assert decode(tanner, m).is_failure
    extra = np.random.default_rng(seed).choice(155, 3, replace=False)
    bigger = FlipSupport(155, tuple(set(support) | set(int(e) for e in extra)))
    assert decode(tanner, bigger).is_failure


def test_even_weight_median_gives_zero_cost_tie():
    # p = 1 on a weight-4 codeword: its median has cost exactly 0
    code = TannerCode.from_matrix(SMALL_H["hamming7"])
    word = next(w for w in itertools.product((0, 1), repeat=7) if sum(w) == 4 and code.is_codeword(w))
    p = PseudoCodeword(tuple(Fraction(v) for v in word))
    m = pick_median(p, np.random.default_rng(0))
    assert cost(m, p) == 0
    out = LpDecoder(code).decode(m)
    assert out.is_failure and out.cost <= 0
