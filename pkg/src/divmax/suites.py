"""Self-checks run by ``divmax verify``.

Each suite returns a list of :class:`Check` records; a suite passes when
every check does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from divmax.bounds import (
    bound_independence,
    bound_mixture,
    bound_rbm,
    bound_umpd,
    bound_union_partitions,
    exact_partition,
    lower_bound_expfam,
    mpd_exact,
)
from divmax.combinatorics import enumerate_subcube_partitions, independence_maximizers, partition_maximizers
from divmax.errors import DomainError
from divmax.maximize import GridSpec, grid_oracle_many
from divmax.modelzoo.expfam import project_independence, project_partition
from divmax.modelzoo.mixture import EMConfig
from divmax.modelzoo.models import (
    IndependenceModel,
    MPDModel,
    PartitionModel,
    UMPDModel,
    UnionPartitionModel,
)
from divmax.modelzoo.networks import NetConfig, project_dbn, project_rbm
from divmax.modelzoo.unions import random_mpd_member
from divmax.partitions import Partition, blocks_from_labels, coordinate_partition
from divmax.probcore import Dist, StateSpace, kl, product_vec

SANDWICH_TOL = 1e-9
FIT_TOL = 1e-2
PYTHAGORAS_TOL = 1e-8
MAXIMIZER_TOL = 1e-10


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    observed: float | None = None
    expected: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.passed, "observed": _num(self.observed),
                "expected": _num(self.expected), **self.detail}


def _num(x):
    if x is None:
        return None
    return "inf" if math.isinf(x) else x


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    resolution: int = 16
    targets: int = 5
    net: NetConfig = NetConfig()
    em: EMConfig = EMConfig()


def random_partition(space: StateSpace, rng: np.random.Generator) -> Partition:
    """Partition from uniformly random block labels (empty labels dropped)."""
    labels = rng.integers(0, rng.integers(1, space.size + 1), size=space.size)
    return blocks_from_labels(space, labels)


# bounds


def degeneration_checks(rng: np.random.Generator, cases: int = 50) -> list[Check]:
    out = []
    for i in range(cases):
        cards = tuple(int(c) for c in rng.integers(2, 5, size=rng.integers(1, 5)))
        ind = bound_independence(cards).value
        mix = bound_mixture(cards, 1).value
        rbm = bound_rbm(cards, ()).value
        out.append(Check(f"mixture k=1 == independence {cards}", mix == ind, mix, ind))
        out.append(Check(f"rbm m=0 == independence {cards}", rbm == ind, rbm, ind))
    for n in range(1, 7):
        m = 2 ** (n - 1) - 1
        value = bound_rbm((2,) * n, (2,) * m).value
        out.append(Check(f"binary rbm bound n={n} m={m} is zero", value == 0.0, value, 0.0))
    return out


def sandwich_models(n: int) -> list[tuple[object, object, object]]:
    """``(model, upper bound, lower bound or None)`` for the closed-form families on ``n`` bits."""
    space = StateSpace.binary(n)
    N = space.size
    rows = []

    def add(model, upper):
        dim = model.dimension
        lower = lower_bound_expfam(N, dim) if dim is not None else None
        rows.append((model, upper, lower))

    add(IndependenceModel(space), bound_independence(space.cards))
    parts = [Partition.whole(space), Partition.singletons(space), coordinate_partition(space, 0)]
    for rho in parts:
        add(PartitionModel(rho), exact_partition(rho))
    for rho in enumerate_subcube_partitions(n):
        add(MPDModel(rho), mpd_exact(rho))
    for k in range(1, 2 ** (n - 1) + 1):
        rows.append((UMPDModel(n, k), bound_umpd(n, k), None))
    for k in range(1, 2**n + 1):
        rows.append((UnionPartitionModel(n, k), bound_union_partitions(n, k), None))
    return rows


def sandwich_checks(n: int, resolution: int, max_points: int = 10**7) -> list[Check]:
    """Grid maximum below every upper bound and above every exponential-family lower bound."""
    rows = sandwich_models(n)
    results = grid_oracle_many([m for m, _, _ in rows], GridSpec(resolution, max_points=max_points))
    out = []
    for (model, upper, lower), res in zip(rows, results):
        label = f"{model.kind} {model.to_json()}"
        out.append(Check(f"grid max <= {upper.formula} bound: {label}",
                         res.value <= upper.value + SANDWICH_TOL, res.value, upper.value))
        if lower is not None:
            out.append(Check(f"expfam lower bound <= grid max: {label}",
                             lower.value <= res.value + SANDWICH_TOL, res.value, lower.value))
    return out


def suite_bounds(cfg: SuiteConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    out = degeneration_checks(rng)
    for n in (2, 3):
        out += sandwich_checks(n, cfg.resolution)
    return out


# containment


def suite_containment_rbm(cfg: SuiteConfig) -> list[Check]:
    """Random members of the 2-block subcube mixture union on 3 bits, fit by 1 hidden unit."""
    rng = np.random.default_rng(cfg.seed)
    rhos = enumerate_subcube_partitions(3, 2)
    out = []
    for t in range(cfg.targets):
        rho = rhos[rng.integers(len(rhos))]
        p = random_mpd_member(rho, rng)
        res = project_rbm(p, 1, cfg.net)
        out.append(Check(f"rbm(3,1) fits mpd target {t}", res.divergence <= FIT_TOL, res.divergence, FIT_TOL,
                         {"converged": res.converged}))
    return out


def suite_containment_dbn(cfg: SuiteConfig) -> list[Check]:
    """Random distributions on 2 bits fit by a three-layer DBN of width 2."""
    rng = np.random.default_rng(cfg.seed)
    space = StateSpace.binary(2)
    out = []
    for t in range(cfg.targets):
        p = Dist.normalized(space, rng.dirichlet(np.ones(space.size)))
        res = project_dbn(p, (2, 2, 2), cfg.net)
        out.append(Check(f"dbn(2,2,2) fits random target {t}", res.divergence <= FIT_TOL, res.divergence,
                         FIT_TOL, {"converged": res.converged}))
    return out


# maximizers


def suite_maximizers(cfg: SuiteConfig) -> list[Check]:
    out = []
    for n, q in ((2, 2), (3, 2), (2, 3), (3, 3)):
        target = (n - 1) * math.log(q)
        for i, p in enumerate(independence_maximizers(n, q, limit=50)):
            d = project_independence(p).divergence
            out.append(Check(f"independence maximizer n={n} q={q} #{i}", abs(d - target) <= MAXIMIZER_TOL,
                             d, target))
    rng = np.random.default_rng(cfg.seed)
    for t in range(10):
        space = StateSpace((int(rng.integers(2, 9)),))
        rho = random_partition(space, rng)
        target = math.log(rho.coarseness)
        for i, p in enumerate(partition_maximizers(rho, limit=20)):
            d = project_partition(p, rho).divergence
            out.append(Check(f"partition maximizer {[list(b) for b in rho.blocks]} #{i}",
                             abs(d - target) <= MAXIMIZER_TOL, d, target))
    return out


# pythagoras


def suite_pythagoras(cfg: SuiteConfig, triples: int = 100) -> list[Check]:
    """``D(p||q) = D(p||p*) + D(p*||q)`` for ``q`` in the model and ``p*`` the projection of ``p``."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    for t in range(triples):
        cards = tuple(int(c) for c in rng.integers(2, 4, size=rng.integers(1, 4)))
        space = StateSpace(cards)
        p = Dist.normalized(space, rng.dirichlet(np.ones(space.size)))
        if t % 2 == 0:
            kind = "independence"
            q = Dist.normalized(space, product_vec([rng.dirichlet(np.ones(c)) for c in cards]))
            p_star = project_independence(p).q_star
        else:
            kind = "partition"
            rho = random_partition(space, rng)
            mass = rng.dirichlet(np.ones(len(rho)))
            q = Dist.normalized(space, (mass / rho.sizes)[rho.labels])
            p_star = project_partition(p, rho).q_star
        lhs = kl(p, q)
        rhs = kl(p, p_star) + kl(p_star, q)
        out.append(Check(f"{kind} triple {t}", abs(lhs - rhs) <= PYTHAGORAS_TOL, rhs, lhs))
    return out


SUITES = {
    "bounds": suite_bounds,
    "containment-rbm": suite_containment_rbm,
    "containment-dbn": suite_containment_dbn,
    "maximizers": suite_maximizers,
    "pythagoras": suite_pythagoras,
}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig()) -> list[Check]:
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](cfg)
