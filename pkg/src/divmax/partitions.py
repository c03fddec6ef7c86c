"""Partitions of a state space, cubical sets and cubical partitions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from divmax.errors import DomainError
from divmax.probcore import StateSpace


@dataclass(frozen=True)
class Partition:
    """A partition of ``range(space.size)`` into nonempty blocks of state indices."""

    space: StateSpace
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(x) for x in b)) for b in self.blocks)
        seen = np.zeros(self.space.size, dtype=int)
        for b in blocks:
            if not b:
                raise DomainError("partition blocks must be nonempty")
            for x in b:
                if not 0 <= x < self.space.size:
                    raise DomainError(f"state index {x} out of range")
                seen[x] += 1
        if np.any(seen != 1):
            raise DomainError("blocks must be disjoint and cover the state space")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def singletons(cls, space: StateSpace) -> Partition:
        return cls(space, tuple((i,) for i in range(space.size)))

    @classmethod
    def whole(cls, space: StateSpace) -> Partition:
        return cls(space, (tuple(range(space.size)),))

    @property
    def coarseness(self) -> int:
        return max(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def labels(self) -> np.ndarray:
        """Block number of every state."""
        lab = np.empty(self.space.size, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            lab[list(b)] = i
        lab.flags.writeable = False
        return lab

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.blocks], dtype=float)


@dataclass(frozen=True)
class CubicalSet:
    """The product ``Y_1 x ... x Y_n`` of nonempty per-axis value sets."""

    axes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        axes = tuple(tuple(sorted(set(int(v) for v in y))) for y in self.axes)
        if not axes or any(not y for y in axes):
            raise DomainError("every axis of a cubical set needs a nonempty value set")
        object.__setattr__(self, "axes", axes)

    @property
    def size(self) -> int:
        out = 1
        for y in self.axes:
            out *= len(y)
        return out

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(y) for y in self.axes)

    def __contains__(self, state) -> bool:
        return all(x in y for x, y in zip(state, self.axes))

    def indices(self, space: StateSpace) -> np.ndarray:
        """State indices of the members, in lexicographic order of the block."""
        self.check_fits(space)
        grids = np.ix_(*[np.asarray(y) for y in self.axes])
        idx = np.zeros(self.shape, dtype=np.int64)
        for g, stride in zip(grids, space._strides):
            idx = idx + g * stride
        return idx.reshape(-1)

    def check_fits(self, space: StateSpace) -> None:
        if len(self.axes) != space.n:
            raise DomainError(f"cubical set has {len(self.axes)} axes, space has {space.n}")
        for y, c in zip(self.axes, space.cards):
            if y[-1] >= c:
                raise DomainError(f"value {y[-1]} out of range [0, {c})")


@dataclass(frozen=True)
class CubicalPartition:
    """A partition of the state space into cubical blocks."""

    space: StateSpace
    blocks: tuple[CubicalSet, ...]

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, CubicalSet) else CubicalSet(tuple(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        # validates disjointness and cover
        _ = self.partition

    @cached_property
    def partition(self) -> Partition:
        return Partition(self.space, tuple(tuple(b.indices(self.space)) for b in self.blocks))

    def __len__(self) -> int:
        return len(self.blocks)


def cubical_from_json(obj: dict) -> CubicalPartition:
    if "cards" not in obj or "blocks" not in obj:
        raise DomainError("cubical partition JSON needs fields 'cards' and 'blocks'")
    space = StateSpace(tuple(obj["cards"]))
    return CubicalPartition(space, tuple(CubicalSet(tuple(tuple(y) for y in b)) for b in obj["blocks"]))


def cubical_to_json(rho: CubicalPartition) -> dict:
    return {"cards": list(rho.space.cards), "blocks": [[list(y) for y in b.axes] for b in rho.blocks]}


def partition_from_json(obj: dict) -> Partition:
    if "cards" not in obj or "blocks" not in obj:
        raise DomainError("partition JSON needs fields 'cards' and 'blocks'")
    return Partition(StateSpace(tuple(obj["cards"])), tuple(tuple(b) for b in obj["blocks"]))


def coordinate_partition(space: StateSpace, axis: int) -> Partition:
    """Blocks ``{x : x_axis = y}`` for each value ``y``."""
    labels = space.states[:, axis]
    return Partition(space, tuple(tuple(np.flatnonzero(labels == y)) for y in range(space.cards[axis])))


def blocks_from_labels(space: StateSpace, labels: Sequence[int]) -> Partition:
    labels = np.asarray(labels)
    return Partition(space, tuple(tuple(np.flatnonzero(labels == v)) for v in np.unique(labels)))
