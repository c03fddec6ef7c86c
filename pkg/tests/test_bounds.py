import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from divmax.bounds import (
    binary_log_formula,
    bound_dbn,
    bound_independence,
    bound_mixture,
    bound_rbm,
    bound_umpd,
    bound_union_partitions,
    exact_independence,
    exact_partition,
    lower_bound_expfam,
    mpd_exact,
    param_count,
)
from divmax.errors import DomainError
from divmax.partitions import CubicalPartition, CubicalSet, Partition
from divmax.probcore import StateSpace

LN2 = math.log(2)
cards_st = st.lists(st.integers(1, 5), min_size=1, max_size=5)


def subset_bound(cards, k):
    """Independent evaluation: min over subsets A with k >= N of the complement."""
    best = math.inf
    idx = range(len(cards))
    for r in range(len(cards) + 1):
        for A in itertools.combinations(idx, r):
            rest = math.prod(cards[i] for i in idx if i not in A)
            if k >= rest:
                NA = math.prod(cards[i] for i in A)
                best = min(best, math.log(NA / max((cards[i] for i in A), default=1)))
    return best


class TestIndependence:
    def test_examples(self):
        assert bound_independence((2, 2)).value == pytest.approx(LN2)
        assert exact_independence(2, 2).value == pytest.approx(LN2)
        assert bound_independence((2, 3)).value == pytest.approx(LN2)
        assert bound_independence((5,)).value == 0.0

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            bound_independence(())


class TestMixture:
    def test_examples(self):
        assert bound_mixture((2,) * 5, 1).value == pytest.approx(4 * LN2)
        assert bound_mixture((2,) * 4, 3).value == pytest.approx(1.5 * LN2)
        assert bound_mixture((2,) * 3, 4).value == 0.0

    @given(cards_st, st.integers(1, 40))
    def test_general_form_never_worse_than_subset_minimum(self, cards, k):
        rep = bound_mixture(cards, k)
        assert rep.value <= subset_bound(cards, k) + 1e-12
        if not all(c == 2 for c in cards):
            assert rep.value == pytest.approx(subset_bound(cards, k), abs=1e-12)

    @given(cards_st)
    def test_k1_equals_independence(self, cards):
        assert bound_mixture(cards, 1).value == bound_independence(cards).value

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_binary_non_increasing_in_k(self, n):
        values = [bound_mixture((2,) * n, k).value for k in range(1, 2**n + 1)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_rejects_k0(self):
        with pytest.raises(DomainError):
            bound_mixture((2, 2), 0)


class TestRBM:
    def test_examples(self):
        assert bound_rbm((2,) * 4, (2,) * 3).value == pytest.approx(LN2)
        assert bound_rbm((2,) * 3, (2,) * 3).value == 0.0

    @given(cards_st)
    def test_m0_equals_independence(self, cards):
        assert bound_rbm(cards, ()).value == bound_independence(cards).value

    @pytest.mark.parametrize("n", range(1, 7))
    def test_zero_at_universal_width(self, n):
        assert bound_rbm((2,) * n, (2,) * (2 ** (n - 1) - 1)).value == 0.0

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_non_increasing_in_m(self, n):
        values = [bound_rbm((2,) * n, (2,) * m).value for m in range(2**n)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_non_binary_hidden_uses_state_count(self):
        assert bound_rbm((3, 3), (4,)).value == pytest.approx(subset_bound((3, 3), 4))


class TestDBN:
    def test_examples(self):
        assert bound_dbn((2, 2), 3).value == 0.0
        assert bound_dbn((2,) * 4, 2).value == pytest.approx(2 * LN2)
        assert bound_dbn((2,) * 4, 5).value == 0.0

    def test_non_increasing_in_layers(self):
        values = [bound_dbn((2,) * 4, L).value for L in range(1, 8)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_no_valid_pair_reports_trivial(self):
        rep = bound_dbn((2,) * 4, 1)
        assert rep.witness == "none" and rep.value == pytest.approx(4 * LN2)

    def test_witness_satisfies_conditions(self):
        q = (3, 3, 2, 2)
        for L in range(2, 8):
            rep = bound_dbn(q, L)
            if rep.witness == "none" or "m" not in rep.witness:
                continue
            m, S = rep.witness["m"], rep.witness["S"]
            assert math.prod(q[m + 1:]) <= m
            assert L >= 2 + (3**S - 1) / 2
            assert rep.value == pytest.approx(math.log(math.prod(q[: m - S])))


class TestFamilies:
    def test_lower_bound_examples(self):
        assert lower_bound_expfam(4, 1).value == pytest.approx(LN2)
        assert lower_bound_expfam(4, 3).value == 0.0
        assert lower_bound_expfam(8, 1).value == pytest.approx(2 * LN2)

    def test_umpd_examples(self):
        assert bound_umpd(3, 2).value == pytest.approx(LN2)
        for n in range(1, 7):
            assert bound_umpd(n, 2 ** (n - 1)).value == 0.0
        assert bound_union_partitions(3, 4).value == pytest.approx(LN2)

    def test_umpd_range_errors(self):
        with pytest.raises(DomainError, match="2\\^\\(n-1\\)"):
            bound_umpd(3, 5)
        with pytest.raises(DomainError, match="2\\^n"):
            bound_union_partitions(3, 9)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_umpd_matches_binary_mixture_formula(self, n):
        for k in range(1, 2 ** (n - 1) + 1):
            assert bound_umpd(n, k).value == binary_log_formula(n, k)
            assert bound_umpd(n, k).value <= bound_umpd(n, max(k - 1, 1)).value

    def test_mpd_examples(self):
        s = StateSpace.binary(3)
        singles = CubicalPartition(s, tuple(CubicalSet(tuple((b,) for b in st)) for st in itertools.product((0, 1), repeat=3)))
        assert mpd_exact(singles).value == 0.0 and mpd_exact(singles).kind == "exact"
        halves = CubicalPartition(s, (CubicalSet(((0,), (0, 1), (0, 1))), CubicalSet(((1,), (0, 1), (0, 1)))))
        assert mpd_exact(halves).value == pytest.approx(LN2)
        edges = CubicalPartition(StateSpace.binary(2), (CubicalSet(((0,), (0, 1))), CubicalSet(((1,), (0, 1)))))
        assert mpd_exact(edges).value == 0.0

    def test_mpd_inhomogeneous_block_is_upper(self):
        s = StateSpace((3, 3))
        rho = CubicalPartition(s, (CubicalSet(((0, 1, 2), (0, 1))), CubicalSet(((0, 1, 2), (2,)))))
        rep = mpd_exact(rho)
        assert rep.kind == "upper" and rep.value == pytest.approx(math.log(2))

    def test_partition_exact(self):
        rho = Partition(StateSpace((5,)), ((0, 1, 2), (3, 4)))
        assert exact_partition(rho).value == pytest.approx(math.log(3))

    def test_param_counts(self):
        assert param_count("independence", cards=(2, 2, 2)) == 3
        assert param_count("rbm", n=3, m=2) == 11
        assert param_count("mixture", cards=(2, 2, 2), k=2) == 7
        assert param_count("partition", blocks=4) == 3
        assert param_count("dbn", widths=(2, 2, 2)) == 14
        with pytest.raises(DomainError):
            param_count("nonsense")

    def test_binary_formula_exact_zero(self):
        assert binary_log_formula(3, 4) == 0.0
        assert binary_log_formula(4, 8) == 0.0
        assert binary_log_formula(4, 3) == pytest.approx(1.5 * LN2)

    def test_json(self):
        d = bound_mixture((2, 3), 2).to_json()
        assert set(d) == {"value", "kind", "formula", "witness"} and d["formula"] == "mix-thm"
