"""Executable form of the sub-model transfer arguments.

If the projection of ``p`` onto a model ``M`` lies in a sub-model ``M'``, a
maximizer for ``M`` also maximizes the divergence from ``M'`` among targets
whose projections land in ``M'``.  These helpers test the premise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from divmax.modelzoo.expfam import ProjResult
from divmax.partitions import Partition
from divmax.probcore import Dist, marginals


@dataclass(frozen=True)
class SubmodelReport:
    in_submodel: bool
    projection: ProjResult

    def to_json(self) -> dict:
        return {"in_submodel": self.in_submodel, "projection": self.projection.to_json()}


def check_projection_in_submodel(p: Dist, project: Callable[[Dist], ProjResult],
                                 member: Callable[[Dist], bool]) -> SubmodelReport:
    res = project(p)
    return SubmodelReport(bool(member(res.q_star)), res)


def is_iid(tol: float = 1e-10) -> Callable[[Dist], bool]:
    """Membership in the i.i.d. model: a product distribution with equal marginals."""

    def member(q: Dist) -> bool:
        if len(set(q.space.cards)) != 1:
            return False
        ms = marginals(q)
        prod = ms[0]
        for m in ms[1:]:
            prod = np.outer(prod, m).reshape(-1)
        same = all(np.max(np.abs(m - ms[0])) <= tol for m in ms)
        return same and np.max(np.abs(prod - q.probs)) <= tol

    return member


def is_uniform(tol: float = 1e-10) -> Callable[[Dist], bool]:
    def member(q: Dist) -> bool:
        return bool(np.max(np.abs(q.probs - 1.0 / q.space.size)) <= tol)

    return member


def in_partition_model(rho: Partition, tol: float = 1e-10) -> Callable[[Dist], bool]:
    """Membership in the partition model: constant on every block."""

    def member(q: Dist) -> bool:
        return all(np.ptp(q.probs[list(b)]) <= tol for b in rho.blocks)

    return member


def is_exchangeable(p: Dist, tol: float = 1e-12) -> bool:
    """Invariance of ``p`` under every permutation of its (identical) variables."""
    if len(set(p.space.cards)) != 1:
        return False
    t = p.tensor()
    return all(np.max(np.abs(np.transpose(t, perm) - t)) <= tol
               for perm in itertools.permutations(range(p.space.n)))
