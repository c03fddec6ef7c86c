"""Closed-form rI-projections onto exponential families.

For an exponential family the projection matches the expected sufficient
statistics of the target, so every routine here is a single pass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.special import gammaln

from divmax.errors import DomainError
from divmax.partitions import CubicalPartition, Partition
from divmax.probcore import Dist, StateSpace, kl, marginals, product_vec


@dataclass(frozen=True, eq=False)
class ProjResult:
    """Outcome of projecting a target onto a model."""

    q_star: Dist
    divergence: float
    iterations: int = 0
    converged: bool = True
    restarts: int = 0
    params: Any = field(default=None, repr=False)
    history: tuple[float, ...] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        from divmax.probcore import dist_to_json

        return {
            "q_star": dist_to_json(self.q_star),
            "divergence": _ext(self.divergence),
            "iterations": self.iterations,
            "converged": self.converged,
            "restarts": self.restarts,
        }


def _ext(x: float):
    return "inf" if math.isinf(x) else x


def _closed(p: Dist, q_probs: np.ndarray) -> ProjResult:
    q = Dist(p.space, q_probs)
    return ProjResult(q, kl(p, q))


def project_independence(p: Dist) -> ProjResult:
    """Product of the one-dimensional marginals of ``p``."""
    return _closed(p, product_vec(marginals(p)))


def project_partition(p: Dist, rho: Partition) -> ProjResult:
    """Spread each block's mass uniformly over the block."""
    if rho.space != p.space:
        raise DomainError("partition and distribution live on different spaces")
    mass = np.bincount(rho.labels, weights=p.probs, minlength=len(rho))
    return _closed(p, (mass / rho.sizes)[rho.labels])


def project_mpd(p: Dist, rho: CubicalPartition) -> ProjResult:
    """Blockwise product-of-marginals projection onto the disjoint-support mixture."""
    if rho.space != p.space:
        raise DomainError("cubical partition and distribution live on different spaces")
    q = np.zeros(p.space.size)
    for block in rho.blocks:
        idx = block.indices(p.space)
        sub = p.probs[idx]
        mass = sub.sum()
        if mass <= 0:
            continue
        cond = Dist(StateSpace(block.shape), sub / mass)
        q[idx] = mass * product_vec(marginals(cond))
    return _closed(p, q)


# multinomial model on count vectors


@lru_cache(maxsize=64)
def count_vectors(n: int, q: int) -> tuple[tuple[int, ...], ...]:
    """Count vectors ``(c_1..c_q)`` with ``sum c = n``, in lexicographic order."""
    if n < 1 or q < 1:
        raise DomainError("count space needs n >= 1 and q >= 1")
    out = [c for c in itertools.product(range(n + 1), repeat=q) if sum(c) == n]
    return tuple(out)


def count_space(n: int, q: int) -> StateSpace:
    return StateSpace((len(count_vectors(n, q)),))


def multinomial_probs(n: int, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    counts = np.array(count_vectors(n, len(theta)), dtype=float)
    log_coef = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_theta = np.log(theta)
        terms = np.where(counts > 0, counts * log_theta, 0.0)
    return np.exp(log_coef + terms.sum(axis=1))


def multinomial(n: int, theta) -> Dist:
    theta = np.asarray(theta, dtype=float)
    return Dist(count_space(n, len(theta)), multinomial_probs(n, theta))


def project_multinomial(p_counts: Dist, n: int, q: int) -> ProjResult:
    """Match the mean count vector: ``theta_i = E_p[c_i] / n``."""
    expected = math.comb(n + q - 1, q - 1) if n >= 1 and q >= 1 else -1
    if p_counts.space.cards != (expected,):
        raise DomainError(f"target must live on the {expected} count vectors of n={n}, q={q}")
    counts = np.array(count_vectors(n, q), dtype=float)
    theta = p_counts.probs @ counts / n
    res = _closed(p_counts, multinomial_probs(n, theta))
    return ProjResult(res.q_star, res.divergence, params=theta)
