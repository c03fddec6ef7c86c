"""Divergence from unions of exponential families indexed by subcube partitions.

For a subcube ``A`` of the binary cube both block-wise divergences are linear
combinations of ``t log t`` evaluated at masses of subcubes of ``A``:

* product family on ``A``:  ``p(A) * MI(p|A)
  = sum_{x in A} p log p - sum_{free j, y} m log m + (d - 1) p(A) log p(A)``
  where ``m`` runs over the masses of the two halves of ``A`` along axis ``j``;
* uniform on ``A``:  ``p(A) log|A| + sum_{x in A} p log p - p(A) log p(A)``.

Summing block terms over a partition gives its divergence, so a whole batch of
targets is scored against every partition with two matrix products.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from divmax.combinatorics import binary_subcubes, subcube_partition_masks
from divmax.errors import DomainError, SizeError, UnsupportedError
from divmax.modelzoo.expfam import ProjResult, project_mpd, project_partition
from divmax.modelzoo.forms import xlogx
from divmax.partitions import CubicalPartition
from divmax.probcore import Dist, StateSpace, product_vec

MAX_UNION_N = 4
TIE_TOL = 1e-12


class _MassCache:
    """Subcube masses and their ``t log t`` for the most recent batch, shared by both families."""

    def __init__(self, indicator: np.ndarray):
        self.indicator = indicator
        self._last = None

    def masses(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self._last is None or self._last[0] is not P:
            m = P @ self.indicator
            self._last = (P, m, xlogx(m))
        return self._last[1], self._last[2]


class _TermCache:
    """Per-subcube terms of the most recent batch, shared by scorers of every k."""

    def __init__(self, masses: _MassCache, coeff: np.ndarray, linear: np.ndarray):
        self.mass_cache, self.coeff, self.linear = masses, coeff, linear
        self._last = None

    def terms(self, P: np.ndarray) -> np.ndarray:
        if self._last is not None and self._last[0] is P:
            return self._last[1]
        m, mlogm = self.mass_cache.masses(P)
        terms = mlogm @ self.coeff + m * self.linear
        self._last = (P, terms)
        return terms


class SubcubeScorer:
    """Precomputed linear maps scoring targets on ``{0,1}^n`` against k-block partitions."""

    def __init__(self, n: int, k: int, family: str, cache: _TermCache, incidence: np.ndarray,
                 partitions: tuple[tuple[int, ...], ...]):
        self.n, self.k, self.family = n, k, family  # family: "mpd" | "partition"
        self.cache = cache
        self.incidence = incidence  # (S, P) subcube-in-partition
        self.partitions = partitions
        self.columns = {frozenset(blocks): j for j, blocks in enumerate(partitions)}
        self._last = None

    def scores(self, P: np.ndarray) -> np.ndarray:
        """``(B, P)`` divergences of each target row against each partition; the last batch is cached.

        Entries may sit a rounding error below zero; callers clamp after reducing.
        """
        if self._last is not None and self._last[0] is P:
            return self._last[1]
        # stored partition-major so single-partition columns are contiguous
        out = (self.incidence.T @ self.cache.terms(P).T).T
        self._last = (P, out)
        return out

    def cubical(self, j: int) -> CubicalPartition:
        cubes = binary_subcubes(self.n)
        return CubicalPartition(StateSpace.binary(self.n), tuple(cubes[i].cset for i in self.partitions[j]))


@lru_cache(maxsize=8)
def _mass_cache(n: int) -> _MassCache:
    cubes = binary_subcubes(n)
    indicator = np.zeros((2**n, len(cubes)))
    for a, cube in enumerate(cubes):
        indicator[list(cube.states), a] = 1.0
    return _MassCache(indicator)


@lru_cache(maxsize=8)
def _term_cache(n: int, family: str) -> _TermCache:
    cubes = binary_subcubes(n)
    pos = {c.mask: i for i, c in enumerate(cubes)}
    S = len(cubes)
    coeff = np.zeros((S, S))
    linear = np.zeros(S)
    for a, cube in enumerate(cubes):
        for x in cube.states:
            coeff[pos[1 << x], a] += 1.0
        if family == "partition":
            coeff[a, a] -= 1.0
            linear[a] = np.log(len(cube.states))
            continue
        free = [j for j, y in enumerate(cube.cset.axes) if len(y) == 2]
        coeff[a, a] += len(free) - 1
        for j in free:
            for y in (0, 1):
                half = frozenset(x for x in cube.states if (x >> (n - 1 - j)) & 1 == y)
                coeff[pos[sum(1 << x for x in half)], a] -= 1.0
    return _TermCache(_mass_cache(n), coeff, linear)


@lru_cache(maxsize=64)
def subcube_scorer(n: int, k: int, family: str) -> SubcubeScorer:
    if family not in ("mpd", "partition"):
        raise DomainError(f"unknown union family {family!r}")
    if n > MAX_UNION_N:
        raise SizeError(f"union models are enumerated only for n <= {MAX_UNION_N}")
    if not 1 <= k <= 2**n:
        raise DomainError(f"block count k={k} outside [1, {2**n}]")
    S = 3**n
    parts = tuple(subcube_partition_masks(n, k))
    incidence = np.zeros((S, len(parts)))
    for j, blocks in enumerate(parts):
        incidence[list(blocks), j] = 1.0
    return SubcubeScorer(n, k, family, _term_cache(n, family), incidence, parts)


def block_scorer(rho: CubicalPartition, family: str):
    """Batch scorer for one cubical partition of a small binary cube, or ``None``.

    Reads one column of the union scorer for ``len(rho)`` blocks, so every
    partition model scored on the same batch shares a single matrix product.
    """
    space = rho.space
    if not space.is_binary or space.n > MAX_UNION_N:
        return None
    pos = {c.mask: i for i, c in enumerate(binary_subcubes(space.n))}
    scorer = subcube_scorer(space.n, len(rho), family)
    j = scorer.columns[frozenset(pos[sum(1 << int(x) for x in b.indices(space))] for b in rho.blocks)]
    return lambda P: np.maximum(scorer.scores(P)[:, j], 0.0)


def first_minimum(values: np.ndarray) -> int:
    """Index of the first entry within ``TIE_TOL`` of the minimum."""
    return int(np.flatnonzero(values <= values.min() + TIE_TOL)[0])


def _check_binary(p: Dist) -> None:
    if not p.space.is_binary:
        raise UnsupportedError("union models are defined here for binary state spaces only")
    if p.space.n > MAX_UNION_N:
        raise SizeError(f"union models are enumerated only for n <= {MAX_UNION_N}")


def divergence_from_umpd(p: Dist, k: int) -> tuple[ProjResult, CubicalPartition]:
    """Divergence from the union of disjoint-support product mixtures with ``k`` subcube blocks."""
    _check_binary(p)
    scorer = subcube_scorer(p.space.n, k, "mpd")
    j = first_minimum(scorer.scores(p.probs[None, :])[0])
    rho = scorer.cubical(j)
    return project_mpd(p, rho), rho


def divergence_from_union_partitions(p: Dist, k: int) -> tuple[ProjResult, CubicalPartition]:
    """Divergence from the union of partition models with ``k`` subcube blocks."""
    _check_binary(p)
    scorer = subcube_scorer(p.space.n, k, "partition")
    j = first_minimum(scorer.scores(p.probs[None, :])[0])
    rho = scorer.cubical(j)
    return project_partition(p, rho.partition), rho


def random_mpd_member(rho: CubicalPartition, rng: np.random.Generator) -> Dist:
    """Random element of ``MPD_rho``: Dirichlet block weights and Dirichlet product factors."""
    probs = np.zeros(rho.space.size)
    weights = rng.dirichlet(np.ones(len(rho)))
    for w, block in zip(weights, rho.blocks):
        factors = [rng.dirichlet(np.ones(len(y))) for y in block.axes]
        probs[block.indices(rho.space)] = w * product_vec(factors)
    return Dist.normalized(rho.space, probs)
