"""Codes, cubical sets, subcube partitions and closed-form maximizers."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from divmax.errors import DomainError, SizeError
from divmax.partitions import CubicalPartition, CubicalSet, Partition
from divmax.probcore import Dist, StateSpace


def hamming(u: Sequence[int], v: Sequence[int]) -> int:
    if len(u) != len(v):
        raise DomainError(f"words of different lengths {len(u)} and {len(v)}")
    return sum(a != b for a, b in zip(u, v))


@dataclass(frozen=True)
class Code:
    """A set of distinct length-``n`` words over the alphabet ``range(q)``."""

    n: int
    q: int
    codewords: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        words = tuple(tuple(int(c) for c in w) for w in self.codewords)
        if not words:
            raise DomainError("a code needs at least one codeword")
        if len(set(words)) != len(words):
            raise DomainError("codewords must be distinct")
        for w in words:
            if len(w) != self.n or any(not 0 <= c < self.q for c in w):
                raise DomainError(f"codeword {w} is not a word of length {self.n} over {self.q} letters")
        object.__setattr__(self, "codewords", words)

    def __len__(self) -> int:
        return len(self.codewords)

    def uniform(self) -> Dist:
        return Dist.uniform_on(StateSpace((self.q,) * self.n), self.codewords)


def min_distance(code: Code | Iterable[Sequence[int]]) -> int:
    """Minimum Hamming distance over distinct pairs (``n`` for a single word)."""
    words = list(code.codewords if isinstance(code, Code) else code)
    if len(words) < 2:
        return len(words[0]) if words else 0
    return min(hamming(u, v) for u, v in itertools.combinations(words, 2))


def diagonal_code(n: int, q: int) -> Code:
    """The repetition code ``{(j, ..., j) : j < q}``."""
    if n < 1 or q < 2:
        raise DomainError("diagonal_code needs n >= 1 and q >= 2")
    return Code(n, q, tuple((j,) * n for j in range(q)))


class Maximizers(list):
    """A list of distributions plus a ``truncated`` flag set when ``limit`` cut it short."""

    truncated: bool = False


def independence_maximizers(n: int, q: int, limit: int = 1000) -> Maximizers:
    """Uniform distributions on q-ary codes of size ``q`` and minimum distance ``n``.

    Such a code is ``{(j, s_2(j), ..., s_n(j))}`` for permutations ``s_i`` of
    ``range(q)``; there are ``(q!)**(n-1)`` of them.
    """
    if n < 1 or q < 2:
        raise DomainError("need n >= 1 and q >= 2")
    space = StateSpace((q,) * n)
    out = Maximizers()
    perms = list(itertools.permutations(range(q)))
    for choice in itertools.product(perms, repeat=n - 1):
        if len(out) >= limit:
            out.truncated = True
            break
        words = [(j,) + tuple(s[j] for s in choice) for j in range(q)]
        out.append(Dist.uniform_on(space, words))
    return out


def partition_maximizers(rho: Partition, limit: int = 1000) -> Maximizers:
    """Vertex maximizers of the divergence from the partition model of ``rho``.

    Emits the point masses on states of maximal blocks, then uniform
    distributions on transversals that pick one state from every maximal block.
    """
    c = rho.coarseness
    big = [b for b in rho.blocks if len(b) == c]
    out = Maximizers()
    candidates = itertools.chain(
        ((x,) for b in big for x in b),
        (t for t in itertools.product(*big) if len(big) > 1),
    )
    for support in candidates:
        if len(out) >= limit:
            out.truncated = True
            break
        out.append(Dist.uniform_on(rho.space, [int(x) for x in support]))
    return out


def is_partition_maximizer(p: Dist, rho: Partition) -> bool:
    """Whether ``p`` puts mass on at most one state per block, and only in blocks of maximal size."""
    if p.space != rho.space:
        raise DomainError("distribution and partition live on different spaces")
    hits = np.bincount(rho.labels[p.support], minlength=len(rho))
    return bool(np.all(hits <= 1) and np.all(rho.sizes[hits > 0] == rho.coarseness))


def is_cubical(space: StateSpace, states: Iterable) -> CubicalSet | None:
    """Factorization of a state set as ``Y_1 x ... x Y_n``, or ``None``."""
    idx = set()
    for s in states:
        idx.add(int(s) if isinstance(s, (int, np.integer)) else space.index_of(s))
    if not idx:
        raise DomainError("is_cubical needs a nonempty set of states")
    rows = space.states[sorted(idx)]
    cset = CubicalSet(tuple(tuple(np.unique(rows[:, i])) for i in range(space.n)))
    return cset if cset.size == len(idx) else None


# subcube partitions of the binary cube


@dataclass(frozen=True)
class EnumerationConfig:
    max_n: int = 4
    max_partitions: int = 2_000_000
    canonical: bool = True


@dataclass(frozen=True)
class _Subcube:
    cset: CubicalSet
    mask: int
    states: tuple[int, ...] = field(repr=False)


def binary_subcubes(n: int) -> list[_Subcube]:
    """All ``3**n`` subcubes of ``{0,1}^n``, sorted by member states."""
    space = StateSpace.binary(n)
    out = []
    for axes in itertools.product(((0,), (1,), (0, 1)), repeat=n):
        cset = CubicalSet(axes)
        states = tuple(int(i) for i in sorted(cset.indices(space)))
        out.append(_Subcube(cset, sum(1 << s for s in states), states))
    out.sort(key=lambda c: c.states)
    return out


def _subcube_partitions(n: int, k: int | None, cfg: EnumerationConfig) -> Iterator[tuple[_Subcube, ...]]:
    total = 2**n
    full = (1 << total) - 1
    cubes = binary_subcubes(n)
    by_min: dict[int, list[_Subcube]] = {v: [] for v in range(total)}
    for c in cubes:
        by_min[c.states[0]].append(c)
    chosen: list[_Subcube] = []
    count = 0

    def rec(covered: int, uncovered: int):
        nonlocal count
        if covered == full:
            if k is None or len(chosen) == k:
                count += 1
                if count > cfg.max_partitions:
                    raise SizeError(f"more than {cfg.max_partitions} subcube partitions")
                yield tuple(chosen)
            return
        if k is not None and (len(chosen) >= k or uncovered < k - len(chosen)):
            return
        v = (~covered & (covered + 1)).bit_length() - 1
        for c in by_min[v]:
            if c.mask & covered:
                continue
            chosen.append(c)
            yield from rec(covered | c.mask, uncovered - len(c.states))
            chosen.pop()

    yield from rec(0, total)


def enumerate_subcube_partitions(n: int, k: int | None = None,
                                 cfg: EnumerationConfig = EnumerationConfig()) -> list[CubicalPartition]:
    """All partitions of ``{0,1}^n`` into ``k`` subcubes (any number if ``k`` is None).

    Blocks are ordered by their smallest state index and partitions sorted
    lexicographically by their tuple of block state lists.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if n > cfg.max_n:
        raise SizeError(f"subcube enumeration limited to n <= {cfg.max_n}, got {n}")
    if k is not None and not 1 <= k <= 2**n:
        raise DomainError(f"block count k={k} outside [1, {2**n}]")
    raw = list(_subcube_partitions(n, k, cfg))
    if cfg.canonical:
        raw.sort(key=lambda blocks: tuple(b.states for b in blocks))
    space = StateSpace.binary(n)
    return [CubicalPartition(space, tuple(b.cset for b in blocks)) for blocks in raw]


def subcube_partition_masks(n: int, k: int | None = None,
                            cfg: EnumerationConfig = EnumerationConfig()) -> list[tuple[int, ...]]:
    """Like :func:`enumerate_subcube_partitions` but returns positions in :func:`binary_subcubes`."""
    if n > cfg.max_n:
        raise SizeError(f"subcube enumeration limited to n <= {cfg.max_n}, got {n}")
    position = {c.mask: i for i, c in enumerate(binary_subcubes(n))}
    raw = sorted(_subcube_partitions(n, k, cfg), key=lambda blocks: tuple(b.states for b in blocks))
    return [tuple(position[b.mask] for b in blocks) for blocks in raw]


def count_compositions(r: int, parts: int) -> int:
    return math.comb(r + parts - 1, parts - 1)
