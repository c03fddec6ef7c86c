import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_states, dists, spaces
from divmax.errors import ConditioningError, DomainError, SizeError
from divmax.probcore import (
    Dist,
    StateSpace,
    condition_on,
    dist_from_json,
    dist_to_json,
    entropy,
    index_of,
    kl,
    marginal,
    marginals,
    mix,
    multi_information,
    product,
    state_of,
)


def kl_loop(p, q):
    total = 0.0
    for a, b in zip(p, q):
        if a > 0:
            if b == 0:
                return math.inf
            total += a * (math.log(a) - math.log(b))
    return total


def marginal_loop(p, axes):
    out = {}
    for idx, x in enumerate(all_states(p.space.cards)):
        key = tuple(x[a] for a in axes)
        out[key] = out.get(key, 0.0) + p.probs[idx]
    return np.array([out[k] for k in sorted(out)])


class TestStateSpace:
    def test_index_examples(self):
        assert index_of(StateSpace((2, 2)), (1, 0)) == 2
        assert index_of(StateSpace((2, 3)), (1, 2)) == 5
        assert state_of(StateSpace((2, 2)), 3) == (1, 1)

    def test_states_are_lexicographic(self):
        space = StateSpace((2, 3, 2))
        assert [tuple(s) for s in space.states] == all_states(space.cards)

    @given(spaces(max_vars=4, max_card=4), st.data())
    def test_round_trip(self, space, data):
        i = data.draw(st.integers(0, space.size - 1))
        assert space.index_of(space.state_of(i)) == i

    def test_rejects_bad_cards(self):
        with pytest.raises(DomainError):
            StateSpace((2, 0))
        with pytest.raises(DomainError):
            StateSpace(())

    def test_size_limit(self):
        with pytest.raises(SizeError):
            StateSpace((2,) * 21)

    def test_out_of_range_state(self):
        with pytest.raises(DomainError):
            StateSpace((2, 2)).index_of((0, 2))


class TestDist:
    def test_rejects_unnormalized(self):
        with pytest.raises(DomainError):
            Dist(StateSpace((2,)), [0.5, 0.6])
        with pytest.raises(DomainError):
            Dist(StateSpace((2,)), [1.5, -0.5])

    def test_renormalizes_within_tolerance(self):
        p = Dist(StateSpace((2,)), [0.5, 0.5 + 1e-12])
        assert p.probs.sum() == pytest.approx(1.0, abs=1e-15)

    def test_immutable(self):
        p = Dist.uniform(StateSpace((2,)))
        with pytest.raises(ValueError):
            p.probs[0] = 1.0

    def test_json_round_trip_dense_and_sparse(self):
        p = Dist.uniform_on(StateSpace((2, 2)), [(0, 0), (1, 1)])
        assert dist_from_json(dist_to_json(p)).allclose(p)
        sparse = dist_from_json({"cards": [2, 2], "support": [[[0, 0], 0.5], [3, 0.5]]})
        assert sparse.allclose(p)

    def test_json_missing_field(self):
        with pytest.raises(DomainError, match="cards"):
            dist_from_json({"probs": [1.0]})
        with pytest.raises(DomainError, match="probs"):
            dist_from_json({"cards": [2]})


class TestKL:
    def test_examples(self):
        s = StateSpace((2,))
        assert kl(Dist.uniform(StateSpace((4,))), Dist.uniform(StateSpace((4,)))) == 0.0
        assert kl(Dist(s, [1, 0]), Dist.uniform(s)) == pytest.approx(math.log(2), abs=1e-15)
        assert kl(Dist.uniform(s), Dist(s, [1, 0])) == math.inf

    @given(st.data())
    def test_matches_loop(self, data):
        space = data.draw(spaces())
        p = data.draw(dists(space))
        q = data.draw(dists(space))
        expected = kl_loop(p.probs, q.probs)
        got = kl(p, q)
        if math.isinf(expected):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(expected, abs=1e-12)
            assert got >= 0

    def test_space_mismatch(self):
        with pytest.raises(DomainError):
            kl(Dist.uniform(StateSpace((2,))), Dist.uniform(StateSpace((3,))))


class TestMarginalsAndConditioning:
    def test_entropy_uniform(self):
        assert entropy(Dist.uniform(StateSpace((2, 3)))) == pytest.approx(math.log(6))

    @given(st.data())
    def test_marginal_matches_loop(self, data):
        p = data.draw(dists())
        axes = sorted(data.draw(st.sets(st.integers(0, p.space.n - 1), min_size=1)))
        np.testing.assert_allclose(marginal(p, axes).probs, marginal_loop(p, axes), atol=1e-14)

    def test_marginal_of_product_is_factor(self):
        f = [Dist(StateSpace((2,)), [0.3, 0.7]), Dist(StateSpace((3,)), [0.2, 0.5, 0.3])]
        p = product(f)
        for i in range(2):
            np.testing.assert_allclose(marginals(p)[i], f[i].probs)

    def test_condition_example(self):
        p = Dist(StateSpace((4,)), [0.6, 0, 0.4, 0])
        np.testing.assert_allclose(condition_on(p, [0, 1]).probs, [1, 0])

    def test_condition_on_null_block(self):
        p = Dist(StateSpace((4,)), [0.6, 0, 0.4, 0])
        with pytest.raises(ConditioningError):
            condition_on(p, [1, 3])


class TestProductMix:
    def test_examples(self):
        half = Dist.uniform(StateSpace((2,)))
        assert product([half, half]).allclose(Dist.uniform(StateSpace((2, 2))))
        s = StateSpace((2, 2))
        p = Dist.uniform_on(s, [(0, 1), (1, 0)])
        assert mix([1.0], [p]).allclose(p)
        m = mix([0.5, 0.5], [Dist.point(s, (0, 0)), Dist.point(s, (1, 1))])
        assert m.allclose(Dist.uniform_on(s, [(0, 0), (1, 1)]))

    def test_mix_rejects_bad_weights(self):
        s = StateSpace((2,))
        with pytest.raises(DomainError):
            mix([0.7, 0.7], [Dist.uniform(s), Dist.uniform(s)])


class TestMultiInformation:
    def test_examples(self):
        assert multi_information(Dist.uniform(StateSpace((2, 2)))) == pytest.approx(0, abs=1e-15)
        two = Dist.uniform_on(StateSpace((2, 2)), [(0, 0), (1, 1)])
        three = Dist.uniform_on(StateSpace((2, 2, 2)), [(0, 0, 0), (1, 1, 1)])
        assert multi_information(two) == pytest.approx(math.log(2), abs=1e-12)
        assert multi_information(three) == pytest.approx(2 * math.log(2), abs=1e-12)

    @given(dists())
    def test_equals_divergence_from_marginal_product(self, p):
        # log q summed per axis, so tiny marginals cannot underflow the product
        margs = marginals(p)
        expected = 0.0
        for a, x in zip(p.probs, all_states(p.space.cards)):
            if a > 0:
                expected += a * (math.log(a) - sum(math.log(m[y]) for m, y in zip(margs, x)))
        assert multi_information(p) == pytest.approx(expected, abs=1e-10)
