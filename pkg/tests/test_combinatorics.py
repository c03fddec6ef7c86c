import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divmax.combinatorics import (
    Code,
    diagonal_code,
    enumerate_subcube_partitions,
    hamming,
    independence_maximizers,
    is_cubical,
    is_partition_maximizer,
    min_distance,
    partition_maximizers,
    subcube_partition_masks,
)
from divmax.errors import DomainError, SizeError
from divmax.modelzoo.expfam import project_independence, project_partition
from divmax.partitions import Partition
from divmax.probcore import Dist, StateSpace, multi_information


def set_partitions(items):
    """Every set partition of ``items`` (restricted-growth recursion)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def cubical_by_projection(n, block):
    """A set of bit tuples is a subcube iff it equals the product of its coordinate projections."""
    words = {tuple((x >> (n - 1 - i)) & 1 for i in range(n)) for x in block}
    axes = [sorted({w[i] for w in words}) for i in range(n)]
    return set(itertools.product(*axes)) == words


def brute_force_counts(n):
    counts = {}
    for part in set_partitions(list(range(2**n))):
        if all(cubical_by_projection(n, b) for b in part):
            counts[len(part)] = counts.get(len(part), 0) + 1
    return counts


class TestCodes:
    def test_hamming_examples(self):
        assert hamming((0, 0, 0), (1, 1, 1)) == 3
        assert hamming((1, 0, 1), (1, 0, 1)) == 0
        with pytest.raises(DomainError):
            hamming((0,), (0, 1))

    def test_min_distance_example(self):
        assert min_distance([(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]) == 2

    @pytest.mark.parametrize("n,q", [(1, 2), (3, 2), (2, 3), (4, 2), (3, 4)])
    def test_diagonal_code(self, n, q):
        code = diagonal_code(n, q)
        assert len(code) == q and min_distance(code) == n
        assert multi_information(code.uniform()) == pytest.approx((n - 1) * math.log(q), abs=1e-10)

    def test_code_validation(self):
        with pytest.raises(DomainError):
            Code(2, 2, ((0, 0), (0, 0)))
        with pytest.raises(DomainError):
            Code(2, 2, ((0, 2),))


class TestIndependenceMaximizers:
    def test_n2_q2_exact_set(self):
        got = {tuple(p.probs) for p in independence_maximizers(2, 2)}
        space = StateSpace((2, 2))
        # exhaustive: uniform distributions on 2-point supports reaching log 2
        want = set()
        for pair in itertools.combinations(range(4), 2):
            p = Dist.uniform_on(space, pair)
            if abs(multi_information(p) - math.log(2)) < 1e-10:
                want.add(tuple(p.probs))
        assert got == want and len(got) == 2

    @pytest.mark.parametrize("n,q", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)])
    def test_all_reach_value_and_project_to_uniform(self, n, q):
        ms = independence_maximizers(n, q)
        assert len(ms) == math.factorial(q) ** (n - 1)
        for p in ms:
            res = project_independence(p)
            assert res.divergence == pytest.approx((n - 1) * math.log(q), abs=1e-10)
            assert res.q_star.allclose(Dist.uniform(p.space), atol=1e-12)

    def test_truncation_flag(self):
        ms = independence_maximizers(3, 3, limit=5)
        assert len(ms) == 5 and ms.truncated
        assert not independence_maximizers(2, 2).truncated


class TestPartitionMaximizers:
    def test_examples(self):
        rho = Partition(StateSpace((4,)), ((0, 1), (2, 3)))
        p = Dist(StateSpace((4,)), [0.6, 0, 0.4, 0])
        assert is_partition_maximizer(p, rho)
        assert project_partition(p, rho).divergence == pytest.approx(math.log(2), abs=1e-12)
        lop = Partition(StateSpace((4,)), ((0, 1, 2), (3,)))
        assert not is_partition_maximizer(Dist.point(StateSpace((4,)), 3), lop)

    def test_singletons_everything_qualifies(self):
        space = StateSpace((3,))
        rho = Partition.singletons(space)
        assert is_partition_maximizer(Dist.uniform(space), rho)
        assert project_partition(Dist.uniform(space), rho).divergence == 0

    @given(st.lists(st.integers(0, 3), min_size=2, max_size=7))
    def test_outputs_reach_log_coarseness(self, labels):
        space = StateSpace((len(labels),))
        rho = Partition(space, tuple(tuple(i for i, l in enumerate(labels) if l == v) for v in sorted(set(labels))))
        for p in partition_maximizers(rho, limit=50):
            assert is_partition_maximizer(p, rho)
            assert project_partition(p, rho).divergence == pytest.approx(math.log(rho.coarseness), abs=1e-12)


class TestCubical:
    def test_examples(self):
        s = StateSpace((2, 2))
        assert is_cubical(s, [(0, 0), (0, 1)]).axes == ((0,), (0, 1))
        assert is_cubical(s, [(0, 0), (1, 1)]) is None
        assert is_cubical(s, range(4)).axes == ((0, 1), (0, 1))

    def test_non_binary(self):
        s = StateSpace((3, 2))
        assert is_cubical(s, [(0, 0), (2, 0)]).axes == ((0, 2), (0,))


class TestSubcubePartitions:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_counts_match_brute_force(self, n):
        expected = brute_force_counts(n)
        for k in range(1, 2**n + 1):
            assert len(enumerate_subcube_partitions(n, k)) == expected.get(k, 0)

    def test_n2_counts(self):
        assert [len(enumerate_subcube_partitions(2, k)) for k in range(1, 5)] == [1, 2, 4, 1]

    def test_n4_total(self):
        assert len(subcube_partition_masks(4)) == 89512

    def test_blocks_disjoint_covering_cubical(self):
        space = StateSpace.binary(3)
        seen = set()
        for rho in enumerate_subcube_partitions(3):
            blocks = [tuple(sorted(b.indices(space))) for b in rho.blocks]
            assert sorted(i for b in blocks for i in b) == list(range(8))
            assert all(is_cubical(space, b) is not None for b in blocks)
            key = tuple(sorted(blocks))
            assert key not in seen
            seen.add(key)

    def test_canonical_order(self):
        space = StateSpace.binary(3)
        sigs = [tuple(tuple(sorted(b.indices(space))) for b in rho.blocks)
                for rho in enumerate_subcube_partitions(3, 3)]
        assert sigs == sorted(sigs)
        assert all(list(s) == sorted(s) for s in sigs)

    def test_limits(self):
        with pytest.raises(SizeError):
            enumerate_subcube_partitions(5)
        with pytest.raises(DomainError):
            enumerate_subcube_partitions(2, 5)
