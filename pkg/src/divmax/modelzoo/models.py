"""Model objects: a state space plus an rI-projection routine.

Closed-form models also score whole batches of targets at once
(``divergence_batch``), which the grid oracle relies on.  Iterative models
(mixture, RBM, DBN) cache projections by the bytes of the target vector.
"""

from __future__ import annotations

import math
from dataclasses import asdict

import numpy as np
from scipy.special import gammaln, xlogy

from divmax.errors import DomainError
from divmax.modelzoo.expfam import (
    ProjResult,
    count_space,
    count_vectors,
    project_independence,
    project_mpd,
    project_multinomial,
    project_partition,
)
from divmax.modelzoo.forms import independence_form, mpd_form, partition_form
from divmax.modelzoo.mixture import EMConfig, project_mixture_em
from divmax.modelzoo.networks import NetConfig, project_dbn, project_rbm
from divmax.modelzoo.unions import (
    block_scorer,
    divergence_from_umpd,
    divergence_from_union_partitions,
    subcube_scorer,
)
from divmax.partitions import (
    CubicalPartition,
    Partition,
    cubical_from_json,
    cubical_to_json,
    partition_from_json,
)
from divmax.probcore import Dist, StateSpace


def _negentropy_rows(P: np.ndarray) -> np.ndarray:
    return xlogy(P, P).sum(axis=1)


class Model:
    """Base class.  Subclasses set ``kind`` and ``space`` and implement ``project``."""

    kind = "model"
    closed_form = True
    space: StateSpace

    @property
    def dimension(self) -> int | None:
        """Dimension when the model is an exponential family, else ``None``."""
        return None

    def project(self, p: Dist) -> ProjResult:
        raise NotImplementedError

    def divergence(self, p: Dist) -> float:
        return self.project(p).divergence

    def divergence_batch(self, P: np.ndarray) -> np.ndarray:
        return np.array([self.divergence(Dist(self.space, row)) for row in P])

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


class FullModel(Model):
    """The whole simplex; every target is its own projection."""

    kind = "full"

    def __init__(self, space: StateSpace):
        self.space = space

    @property
    def dimension(self) -> int:
        return self.space.size - 1

    def project(self, p):
        return ProjResult(p, 0.0)

    def divergence_batch(self, P):
        return np.zeros(len(P))

    def to_json(self):
        return {"model": self.kind, "cards": list(self.space.cards)}


class IndependenceModel(Model):
    kind = "independence"

    def __init__(self, space: StateSpace):
        self.space = space
        self._form = independence_form(space.states, space.cards)

    @property
    def dimension(self) -> int:
        return sum(c - 1 for c in self.space.cards)

    def project(self, p):
        return project_independence(p)

    def divergence_batch(self, P):
        return self._form(P)

    def to_json(self):
        return {"model": self.kind, "cards": list(self.space.cards)}


class PartitionModel(Model):
    kind = "partition"

    def __init__(self, partition: Partition):
        self.partition = partition
        self.space = partition.space
        self._form = partition_form(partition.labels, partition.sizes)

    @property
    def dimension(self) -> int:
        return len(self.partition) - 1

    def project(self, p):
        return project_partition(p, self.partition)

    def divergence_batch(self, P):
        return self._form(P)

    def to_json(self):
        return {"model": self.kind, "cards": list(self.space.cards),
                "blocks": [list(b) for b in self.partition.blocks]}


class MPDModel(Model):
    """Mixture of product families supported on the blocks of a cubical partition."""

    kind = "mpd"

    def __init__(self, rho: CubicalPartition):
        self.rho = rho
        self.space = rho.space
        self._form = block_scorer(rho, "mpd") or mpd_form(self.space.states, [b.axes for b in rho.blocks])

    @property
    def dimension(self) -> int:
        return sum(sum(s - 1 for s in b.shape) for b in self.rho.blocks) + len(self.rho) - 1

    def project(self, p):
        return project_mpd(p, self.rho)

    def divergence_batch(self, P):
        return self._form(P)

    def to_json(self):
        return {"model": self.kind, **cubical_to_json(self.rho)}


class MultinomialModel(Model):
    """Multinomial distributions of ``n`` draws from ``q`` categories, on count vectors."""

    kind = "multinomial"

    def __init__(self, n: int, q: int):
        if n < 1 or q < 1:
            raise DomainError("multinomial model needs n >= 1 and q >= 1")
        self.n, self.q = n, q
        self.space = count_space(n, q)
        self._counts = np.array(count_vectors(n, q), dtype=float)
        self._log_coef = gammaln(n + 1) - gammaln(self._counts + 1).sum(axis=1)

    @property
    def dimension(self) -> int:
        return self.q - 1

    def project(self, p):
        return project_multinomial(p, self.n, self.q)

    def divergence_batch(self, P):
        theta = P @ self._counts / self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            log_theta = np.log(theta)
            cross = np.where(self._counts[None, :, :] > 0, self._counts[None, :, :] * log_theta[:, None, :], 0.0)
            log_q = self._log_coef[None, :] + cross.sum(axis=2)
            # p vanishes wherever q does: theta is the mean count under p
            out = _negentropy_rows(P) - np.where(P > 0, P * log_q, 0.0).sum(axis=1)
        return np.maximum(out, 0.0)

    def to_json(self):
        return {"model": self.kind, "n": self.n, "q": self.q}


class _UnionModel(Model):
    family = ""

    def __init__(self, n: int, k: int):
        self.n, self.k = n, k
        self.space = StateSpace.binary(n)
        self._scorer = subcube_scorer(n, k, self.family)

    def divergence_batch(self, P):
        return np.maximum(self._scorer.scores(P).min(axis=1), 0.0)

    def to_json(self):
        return {"model": self.kind, "n": self.n, "k": self.k}


class UMPDModel(_UnionModel):
    kind = "umpd"
    family = "mpd"

    def project(self, p):
        return divergence_from_umpd(p, self.k)[0]


class UnionPartitionModel(_UnionModel):
    kind = "union-partitions"
    family = "partition"

    def project(self, p):
        return divergence_from_union_partitions(p, self.k)[0]


class _CachedModel(Model):
    closed_form = False

    def __init__(self):
        self._cache: dict[bytes, ProjResult] = {}

    def project(self, p):
        key = p.probs.tobytes()
        if key not in self._cache:
            self._cache[key] = self._project(p)
        return self._cache[key]

    def _project(self, p):
        raise NotImplementedError


class MixtureModel(_CachedModel):
    kind = "mixture"

    def __init__(self, space: StateSpace, k: int, cfg: EMConfig = EMConfig()):
        super().__init__()
        self.space, self.k, self.cfg = space, k, cfg

    def _project(self, p):
        return project_mixture_em(p, self.k, self.cfg)

    def to_json(self):
        return {"model": self.kind, "cards": list(self.space.cards), "k": self.k}


class RBMModel(_CachedModel):
    kind = "rbm"

    def __init__(self, n: int, m: int, cfg: NetConfig = NetConfig()):
        super().__init__()
        self.space = StateSpace.binary(n)
        self.n, self.m, self.cfg = n, m, cfg

    def _project(self, p):
        return project_rbm(p, self.m, self.cfg)

    def to_json(self):
        return {"model": self.kind, "n": self.n, "m": self.m}


class DBNModel(_CachedModel):
    kind = "dbn"

    def __init__(self, widths, cfg: NetConfig = NetConfig()):
        super().__init__()
        self.widths = tuple(int(w) for w in widths)
        self.space = StateSpace.binary(self.widths[0])
        self.cfg = cfg

    def _project(self, p):
        return project_dbn(p, self.widths, self.cfg)

    def to_json(self):
        return {"model": self.kind, "widths": list(self.widths)}


def _require(obj: dict, *fields: str) -> None:
    for f in fields:
        if f not in obj:
            raise DomainError(f"model JSON for {obj.get('model')!r} is missing field {f!r}")


def model_from_json(obj: dict, em: EMConfig = EMConfig(), net: NetConfig = NetConfig()) -> Model:
    """Build a model from its JSON description (see the README for the schema)."""
    if not isinstance(obj, dict) or "model" not in obj:
        raise DomainError("model JSON needs a 'model' field")
    kind = obj["model"]
    if kind in ("full", "independence"):
        _require(obj, "cards")
        space = StateSpace(tuple(obj["cards"]))
        return FullModel(space) if kind == "full" else IndependenceModel(space)
    if kind == "partition":
        return PartitionModel(partition_from_json(obj))
    if kind == "mpd":
        return MPDModel(cubical_from_json(obj))
    if kind == "mixture":
        _require(obj, "cards", "k")
        return MixtureModel(StateSpace(tuple(obj["cards"])), int(obj["k"]), em)
    if kind == "multinomial":
        _require(obj, "n", "q")
        return MultinomialModel(int(obj["n"]), int(obj["q"]))
    if kind == "rbm":
        _require(obj, "n", "m")
        return RBMModel(int(obj["n"]), int(obj["m"]), net)
    if kind == "dbn":
        _require(obj, "widths")
        return DBNModel(obj["widths"], net)
    if kind in ("umpd", "union-partitions"):
        _require(obj, "n", "k")
        cls = UMPDModel if kind == "umpd" else UnionPartitionModel
        return cls(int(obj["n"]), int(obj["k"]))
    raise DomainError(f"unknown model kind {kind!r}")


def config_json(cfg) -> dict:
    return asdict(cfg)


def exact_maximum(model: Model) -> float | None:
    """Known maximal divergence for models where it is available in closed form."""
    if isinstance(model, FullModel):
        return 0.0
    if isinstance(model, IndependenceModel) and len(set(model.space.cards)) == 1:
        return (model.space.n - 1) * math.log(model.space.cards[0])
    if isinstance(model, PartitionModel):
        return math.log(model.partition.coarseness)
    if isinstance(model, MultinomialModel):
        return (model.n - 1) * math.log(model.q)
    if isinstance(model, MPDModel):
        from divmax.bounds import mpd_exact

        rep = mpd_exact(model.rho)
        return rep.value if rep.kind == "exact" else None
    return None
