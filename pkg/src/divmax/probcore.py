"""Exact probability distributions on finite product state spaces.

States of ``X = X_1 x ... x X_n`` are indexed in mixed radix with the first
coordinate most significant, so index order is lexicographic order.  All
logarithms are natural; divergences are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.special import xlogy

from divmax.errors import ConditioningError, DomainError, SizeError

MAX_STATES = 2**20
NORM_TOL = 1e-9


@dataclass(frozen=True)
class StateSpace:
    """Cardinalities ``(N_1, ..., N_n)`` of the visible variables."""

    cards: tuple[int, ...]

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if not cards:
            raise DomainError("a state space needs at least one variable")
        if any(c < 1 for c in cards):
            raise DomainError(f"cardinalities must be positive, got {cards}")
        if math.prod(cards) > MAX_STATES:
            raise SizeError(f"{math.prod(cards)} states exceed the dense limit {MAX_STATES}")
        object.__setattr__(self, "cards", cards)

    @classmethod
    def binary(cls, n: int) -> StateSpace:
        return cls((2,) * n)

    @property
    def n(self) -> int:
        return len(self.cards)

    @property
    def size(self) -> int:
        return math.prod(self.cards)

    def sub_card(self, axes: Iterable[int]) -> int:
        """``N_A``, the number of joint states of the variables in ``axes``."""
        return math.prod(self.cards[i] for i in axes)

    @property
    def is_binary(self) -> bool:
        return all(c == 2 for c in self.cards)

    @cached_property
    def _strides(self) -> np.ndarray:
        strides = np.ones(self.n, dtype=np.int64)
        for i in range(self.n - 2, -1, -1):
            strides[i] = strides[i + 1] * self.cards[i + 1]
        return strides

    @cached_property
    def states(self) -> np.ndarray:
        """``(N, n)`` integer array; row ``i`` is ``state_of(i)``."""
        grids = np.indices(self.cards).reshape(self.n, -1).T
        grids.flags.writeable = False
        return grids

    def index_of(self, state: Sequence[int]) -> int:
        if len(state) != self.n:
            raise DomainError(f"state {tuple(state)} has length {len(state)}, expected {self.n}")
        for x, c in zip(state, self.cards):
            if not 0 <= x < c:
                raise DomainError(f"coordinate {x} out of range [0, {c}) in state {tuple(state)}")
        return int(np.dot(self._strides, state))

    def state_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise DomainError(f"index {index} out of range [0, {self.size})")
        return tuple(int(v) for v in self.states[index])


def index_of(space: StateSpace, state: Sequence[int]) -> int:
    return space.index_of(state)


def state_of(space: StateSpace, index: int) -> tuple[int, ...]:
    return space.state_of(index)


@dataclass(frozen=True, eq=False)
class Dist:
    """A dense probability vector over a :class:`StateSpace`.

    Inputs whose total is within ``1e-9`` of one are renormalized exactly;
    anything else is rejected.
    """

    space: StateSpace
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.shape != (self.space.size,):
            raise DomainError(f"expected {self.space.size} probabilities, got {probs.size}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise DomainError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        probs /= total
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def normalized(cls, space: StateSpace, weights) -> Dist:
        """Build a distribution proportional to nonnegative ``weights``."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0:
            raise DomainError("weights must have positive total mass")
        return cls(space, w / total)

    @classmethod
    def uniform(cls, space: StateSpace) -> Dist:
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point(cls, space: StateSpace, state) -> Dist:
        idx = state if isinstance(state, (int, np.integer)) else space.index_of(state)
        probs = np.zeros(space.size)
        probs[idx] = 1.0
        return cls(space, probs)

    @classmethod
    def uniform_on(cls, space: StateSpace, states: Iterable) -> Dist:
        """Uniform distribution on a set of states (tuples or indices)."""
        probs = np.zeros(space.size)
        for s in states:
            probs[s if isinstance(s, (int, np.integer)) else space.index_of(s)] = 1.0
        return cls.normalized(space, probs)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def __getitem__(self, state) -> float:
        if isinstance(state, (int, np.integer)):
            return float(self.probs[state])
        return float(self.probs[self.space.index_of(state)])

    def tensor(self) -> np.ndarray:
        """Probabilities reshaped to one array axis per variable."""
        return self.probs.reshape(self.space.cards)

    def allclose(self, other: Dist, atol: float = 1e-12) -> bool:
        return self.space == other.space and bool(np.max(np.abs(self.probs - other.probs)) <= atol)


def _same_space(p: Dist, q: Dist) -> None:
    if p.space != q.space:
        raise DomainError(f"state spaces differ: {p.space.cards} vs {q.space.cards}")


def kl(p: Dist, q: Dist) -> float:
    """``D(p||q)`` in nats; ``math.inf`` iff ``supp(p)`` is not inside ``supp(q)``."""
    _same_space(p, q)
    return kl_vec(p.probs, q.probs)


def kl_vec(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    pm = p[mask]
    return max(float(np.sum(pm * (np.log(pm) - np.log(q[mask])))), 0.0)


def entropy(p: Dist) -> float:
    return entropy_vec(p.probs)


def entropy_vec(probs: np.ndarray) -> float:
    return float(-np.sum(xlogy(probs, probs)))


def marginal(p: Dist, axes: Iterable[int]) -> Dist:
    """Marginal on ``axes`` (kept in increasing order)."""
    axes = sorted(set(axes))
    if not axes:
        raise DomainError("marginal needs at least one axis")
    for a in axes:
        if not 0 <= a < p.space.n:
            raise DomainError(f"axis {a} out of range for {p.space.n} variables")
    drop = tuple(i for i in range(p.space.n) if i not in axes)
    m = p.tensor().sum(axis=drop) if drop else p.tensor()
    return Dist(StateSpace(tuple(p.space.cards[i] for i in axes)), m.reshape(-1))


def marginals(p: Dist) -> list[np.ndarray]:
    """The n one-dimensional marginal vectors of ``p``."""
    t = p.tensor()
    n = p.space.n
    return [t.sum(axis=tuple(j for j in range(n) if j != i)) for i in range(n)]


def condition_on(p: Dist, block: Sequence[int]) -> Dist:
    """``p(. | block)`` as a distribution on the states of ``block``, in the given order."""
    block = [int(b) for b in block]
    mass = float(p.probs[block].sum()) if block else 0.0
    if not mass > 0:
        raise ConditioningError("cannot condition on a block of probability zero")
    return Dist(StateSpace((len(block),)), p.probs[block] / mass)


def product(factors: Sequence[Dist]) -> Dist:
    """Product distribution ``prod_i f_i(x_i)``; each factor is one variable."""
    if not factors:
        raise DomainError("product needs at least one factor")
    cards = []
    out = np.ones(1)
    for f in factors:
        if f.space.n != 1:
            raise DomainError("product factors must be single-variable distributions")
        cards.append(f.space.size)
        out = np.outer(out, f.probs).reshape(-1)
    return Dist(StateSpace(tuple(cards)), out)


def product_vec(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1)
    for f in factors:
        out = np.outer(out, f).reshape(-1)
    return out


def mix(weights: Sequence[float], comps: Sequence[Dist]) -> Dist:
    """Convex combination ``sum_i weights[i] * comps[i]``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) != len(comps) or not comps:
        raise DomainError("need one weight per component")
    if np.any(w < 0) or abs(w.sum() - 1.0) > NORM_TOL:
        raise DomainError("mixture weights must lie on the simplex")
    space = comps[0].space
    for c in comps[1:]:
        _same_space(comps[0], c)
    return Dist(space, sum(wi * c.probs for wi, c in zip(w, comps)))


def multi_information(p: Dist) -> float:
    """``sum_i H(X_i) - H(X)``, the divergence from the independence model."""
    value = sum(entropy_vec(m) for m in marginals(p)) - entropy(p)
    return max(value, 0.0)


# JSON


def dist_to_json(p: Dist) -> dict:
    return {"cards": list(p.space.cards), "probs": [float(v) for v in p.probs]}


def dist_from_json(obj: dict) -> Dist:
    """Parse the dense ``probs`` form or the sparse ``support`` form."""
    if "cards" not in obj:
        raise DomainError("distribution JSON is missing field 'cards'")
    space = StateSpace(tuple(obj["cards"]))
    if "probs" in obj:
        return Dist(space, obj["probs"])
    if "support" in obj:
        probs = np.zeros(space.size)
        for entry in obj["support"]:
            state, prob = entry
            idx = state if isinstance(state, int) else space.index_of(tuple(state))
            probs[idx] += float(prob)
        return Dist(space, probs)
    raise DomainError("distribution JSON needs field 'probs' or 'support'")
