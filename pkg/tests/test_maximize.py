import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divmax.bounds import BoundReport, bound_umpd, exact_independence, exact_partition
from divmax.combinatorics import independence_maximizers
from divmax.errors import SizeError
from divmax.maximize import (
    AscentConfig,
    GridSpec,
    count_grid,
    grid_oracle,
    grid_oracle_many,
    iter_grid,
    multistart_ascent,
    project_simplex,
    verify_bound,
)
from divmax.modelzoo import (
    FullModel,
    IndependenceModel,
    MixtureModel,
    MultinomialModel,
    PartitionModel,
    UMPDModel,
)
from divmax.modelzoo.mixture import EMConfig
from divmax.partitions import Partition
from divmax.probcore import StateSpace

LN2 = math.log(2)


def compositions_loop(r, N):
    return [c for c in itertools.product(range(r + 1), repeat=N) if sum(c) == r]


class TestGrid:
    @pytest.mark.parametrize("r,N", [(1, 1), (3, 2), (4, 3), (5, 6), (3, 7)])
    def test_enumeration_matches_loop(self, r, N):
        got = [tuple(row) for chunk in iter_grid(r, N, chunk=7) for row in chunk]
        assert got == compositions_loop(r, N)
        assert len(got) == count_grid(r, N)

    def test_independence_example(self):
        res = grid_oracle(IndependenceModel(StateSpace.binary(2)), GridSpec(64))
        assert res.value >= LN2 - 1e-3
        assert sorted(res.argmax.support.tolist()) in ([0, 3], [1, 2])

    def test_partition_example(self):
        rho = Partition(StateSpace((4,)), ((0, 1), (2, 3)))
        res = grid_oracle(PartitionModel(rho), GridSpec(64))
        assert res.value == pytest.approx(LN2, abs=1e-12)
        assert len(res.argmax.support) == 1

    def test_full_model_zero(self):
        assert grid_oracle(FullModel(StateSpace((3,))), GridSpec(8)).value == 0

    def test_tie_break_is_lexicographically_first(self):
        # every vertex of a single-block model on 3 states ties; the first grid point is (0, 0, r)
        rho = Partition.whole(StateSpace((3,)))
        res = grid_oracle(PartitionModel(rho), GridSpec(4))
        np.testing.assert_array_equal(res.argmax.probs, [0, 0, 1])

    def test_budget(self):
        with pytest.raises(SizeError):
            grid_oracle(IndependenceModel(StateSpace.binary(3)), GridSpec(64))
        with pytest.raises(SizeError):
            grid_oracle(IndependenceModel(StateSpace((3, 3))), GridSpec(2))

    def test_non_decreasing_in_resolution(self):
        model = UMPDModel(2, 1)
        values = [grid_oracle(model, GridSpec(r)).value for r in (2, 4, 8, 16)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_many_matches_single(self):
        space = StateSpace.binary(2)
        models = [IndependenceModel(space), UMPDModel(2, 1), PartitionModel(Partition.whole(space))]
        many = grid_oracle_many(models, GridSpec(12))
        for model, res in zip(models, many):
            single = grid_oracle(model, GridSpec(12))
            assert res.value == single.value
            np.testing.assert_array_equal(res.argmax.probs, single.argmax.probs)


class TestAscent:
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=8))
    def test_simplex_projection(self, v):
        v = np.array(v)
        x = project_simplex(v)
        assert np.all(x >= 0) and x.sum() == pytest.approx(1.0)
        # optimality: x is the closest simplex point among random competitors
        rng = np.random.default_rng(0)
        for y in rng.dirichlet(np.ones(len(v)), size=20):
            assert np.sum((x - v) ** 2) <= np.sum((y - v) ** 2) + 1e-9

    def test_examples(self):
        assert multistart_ascent(IndependenceModel(StateSpace.binary(3))).value >= 2 * LN2 - 1e-4
        assert multistart_ascent(MultinomialModel(2, 2)).value >= LN2 - 1e-4
        res = multistart_ascent(PartitionModel(Partition.whole(StateSpace((4,)))))
        assert res.value == pytest.approx(math.log(4), abs=1e-12)
        assert len(res.argmax.support) == 1

    def test_deterministic(self):
        model = IndependenceModel(StateSpace((2, 3)))
        a = multistart_ascent(model, AscentConfig(seed=3))
        b = multistart_ascent(model, AscentConfig(seed=3))
        assert a.value == b.value and np.array_equal(a.argmax.probs, b.argmax.probs)

    def test_not_below_grid(self):
        for model in (IndependenceModel(StateSpace.binary(2)), UMPDModel(2, 1),
                      PartitionModel(Partition(StateSpace((4,)), ((0,), (1, 2, 3))))):
            assert multistart_ascent(model).value >= grid_oracle(model, GridSpec(64)).value - 0.05

    def test_constructed_maximizers_are_global(self):
        model = IndependenceModel(StateSpace((3, 3)))
        ascent = multistart_ascent(model).value
        for p in independence_maximizers(2, 3):
            assert model.divergence(p) >= ascent - 1e-9

    def test_value_matches_argmax(self):
        model = IndependenceModel(StateSpace((2, 2, 2)))
        res = multistart_ascent(model, AscentConfig(restarts=3))
        assert model.divergence(res.argmax) == pytest.approx(res.value, abs=1e-8)


class TestVerify:
    def test_independence_tight(self):
        rep = verify_bound(IndependenceModel(StateSpace.binary(2)), exact_independence(2, 2))
        assert rep.passed and abs(rep.gap) <= 1e-6

    def test_umpd(self):
        rep = verify_bound(UMPDModel(3, 2), bound_umpd(3, 2))
        assert rep.passed

    def test_partition_oracle(self):
        rho = Partition(StateSpace((6,)), ((0, 1, 2), (3, 4), (5,)))
        rep = verify_bound(PartitionModel(rho), exact_partition(rho), strategy="oracle", grid=GridSpec(8))
        assert rep.passed and 0 <= rep.gap <= 1e-9

    def test_violated_bound_fails(self):
        rep = verify_bound(IndependenceModel(StateSpace.binary(2)), BoundReport(0.5, "upper", "test"))
        assert rep.passed is False

    def test_iterative_models_are_advisory(self):
        model = MixtureModel(StateSpace.binary(2), 1, EMConfig(restarts=2))
        rep = verify_bound(model, exact_independence(2, 2), cfg=AscentConfig(restarts=1, include_vertices=False,
                                                                           max_iter=20))
        assert rep.passed is None
        assert set(rep.to_json()) == {"bound", "observed", "gap", "pass", "method"}
