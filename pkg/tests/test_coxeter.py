"""Unit and property tests for the word-problem engine."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from coxfold.coxeter import (
    INF,
    CoxeterMatrix,
    Indeterminate,
    alternating_word,
    equal_in_group,
    find_almost_relator,
    free_reduce,
    is_identity,
    is_reduced,
    kappa,
    mod2_rank_bound,
    parse_word,
    petersen_thom_bound,
    reduce_word,
    tits_closure,
)

from oracles import DihedralOracle


M_ST7 = CoxeterMatrix(("s", "t"), {("s", "t"): 7})
M_RANK3 = CoxeterMatrix(
    ("a", "b", "c"), {("a", "b"): 3, ("a", "c"): 2, ("b", "c"): INF}
)


class TestMatrix:
    def test_text_round_trip(self):
        text = M_RANK3.to_text()
        again = CoxeterMatrix.from_text(text)
        assert again.generators == M_RANK3.generators
        assert again.entry("b", "c") == INF
        assert again.entry("a", "b") == 3

    def test_json_round_trip(self):
        data = M_RANK3.to_json_dict()
        assert data["upper_triangular"][1] == ["inf"]
        again = CoxeterMatrix.from_json_dict(data)
        assert again.entry("c", "b") == INF

    def test_diagonal_and_symmetry(self):
        assert M_RANK3.entry("a", "a") == 1
        assert M_RANK3.entry("b", "a") == M_RANK3.entry("a", "b")

    def test_rejects_bad_entry(self):
        with pytest.raises(ValueError):
            CoxeterMatrix(("s", "t"), {("s", "t"): 1})

    def test_rejects_missing_pair(self):
        with pytest.raises(ValueError):
            CoxeterMatrix(("s", "t", "u"), {("s", "t"): 3})


class TestWords:
    def test_parse_checks_generators(self):
        with pytest.raises(ValueError):
            parse_word("s x", M_ST7)

    def test_alternating_word(self):
        assert alternating_word("s", "t", 5) == ("s", "t", "s", "t", "s")

    def test_free_reduce(self):
        assert free_reduce(("s", "t", "t", "s")) == ()
        assert free_reduce(("s", "t", "s", "s", "t")) == ("s",)


class TestEngine:
    def test_reduce_example(self):
        assert reduce_word(("s", "s", "t"), M_ST7) == ("t",)

    def test_relator_is_identity(self):
        relator = alternating_word("s", "t", 14)
        assert is_identity(relator, M_ST7)

    def test_homotopy_equality(self):
        assert equal_in_group(
            alternating_word("s", "t", 7), alternating_word("t", "s", 7), M_ST7
        )

    def test_infinite_pair_never_collapses(self):
        assert not is_identity(alternating_word("b", "c", 8), M_RANK3)

    def test_budget_exhaustion_raises(self):
        with pytest.raises(Indeterminate):
            is_identity(alternating_word("s", "t", 14), M_ST7, budget=3)

    def test_closure_flags_truncation(self):
        closure = tits_closure(alternating_word("s", "t", 14), M_ST7, budget=3)
        assert closure.budget_exhausted

    def test_canonical_form_is_stable(self):
        w = ("t", "s", "t", "s", "t", "s", "t")
        out = reduce_word(w, M_ST7)
        assert reduce_word(out, M_ST7) == out


class TestReducedAndKappa:
    def test_is_reduced(self):
        assert is_reduced(alternating_word("s", "t", 6), M_ST7)
        assert not is_reduced(alternating_word("s", "t", 8), M_ST7)

    def test_kappa_single_run(self):
        assert kappa(("s", "t", "s"), M_ST7) == 1

    def test_kappa_rejects_non_geodesic(self):
        with pytest.raises(ValueError):
            kappa(alternating_word("s", "t", 10), M_ST7)

    def test_kappa_two_runs(self):
        # b-c alternation broken by the a-b tail forces two covering runs
        w = ("b", "c", "b", "a", "b")
        assert is_reduced(w, M_RANK3)
        assert kappa(w, M_RANK3) == 2

    def test_kappa_empty_word(self):
        assert kappa((), M_ST7) == 0


class TestAlmostRelator:
    def test_finds_long_run(self):
        w = ("b",) + alternating_word("s", "t", 11)
        m = CoxeterMatrix(
            ("s", "t", "b"), {("s", "t"): 7, ("s", "b"): INF, ("t", "b"): INF}
        )
        hit = find_almost_relator(w, m)
        assert hit == (1, 12, frozenset(("s", "t")))

    def test_ignores_infinite_types(self):
        w = alternating_word("b", "c", 9)
        assert find_almost_relator(w, M_RANK3) is None

    def test_short_word_misses(self):
        assert find_almost_relator(alternating_word("s", "t", 10), M_ST7) is None


class TestBounds:
    def test_mod2_all_even(self):
        m = CoxeterMatrix(
            ("a", "b", "c"), {("a", "b"): 2, ("a", "c"): 4, ("b", "c"): 6}
        )
        assert mod2_rank_bound(m) == 3

    def test_mod2_intro_matrix(self):
        m = CoxeterMatrix(
            ("a", "b", "c"), {("a", "b"): 3, ("a", "c"): 2, ("b", "c"): 2}
        )
        assert mod2_rank_bound(m) == 2

    def test_spectral_bound_large_entries(self):
        m = CoxeterMatrix(
            ("a", "b", "c"), {("a", "b"): 384, ("a", "c"): 384, ("b", "c"): 384}
        )
        assert petersen_thom_bound(m) == 2

    def test_spectral_bound_inapplicable(self):
        m = CoxeterMatrix(
            ("a", "b", "c"), {("a", "b"): 3, ("a", "c"): 2, ("b", "c"): 2}
        )
        assert petersen_thom_bound(m) is None

    def test_spectral_bound_rank2(self):
        assert petersen_thom_bound(M_ST7) == 1


words_st = st.lists(st.sampled_from(["s", "t"]), max_size=9).map(tuple)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(words_st, st.integers(min_value=2, max_value=6))
    def test_matches_dihedral_oracle(self, w, m):
        matrix = CoxeterMatrix(("s", "t"), {("s", "t"): m})
        oracle = DihedralOracle(matrix)
        assert is_identity(w, matrix) == oracle.is_identity(w)

    @settings(max_examples=150, deadline=None)
    @given(words_st, st.integers(min_value=2, max_value=6))
    def test_reduce_hits_geodesic_length(self, w, m):
        matrix = CoxeterMatrix(("s", "t"), {("s", "t"): m})
        oracle = DihedralOracle(matrix)
        out = reduce_word(w, matrix)
        assert len(out) == oracle.geodesic_length(w)
        assert oracle.eval(out) == oracle.eval(w)

    @settings(max_examples=100, deadline=None)
    @given(words_st)
    def test_word_times_reverse_is_identity(self, w):
        assert is_identity(w + tuple(reversed(w)), M_ST7)

    @settings(max_examples=100, deadline=None)
    @given(words_st)
    def test_reduce_never_lengthens(self, w):
        assert len(reduce_word(w, M_ST7)) <= len(w)

    @settings(max_examples=60, deadline=None)
    @given(words_st, words_st)
    def test_kappa_subadditive_on_concatenation(self, u, v):
        w = u + v
        if not (
            is_reduced(u, M_ST7) and is_reduced(v, M_ST7) and is_reduced(w, M_ST7)
        ):
            return
        assert kappa(w, M_ST7) <= kappa(u, M_ST7) + kappa(v, M_ST7)
