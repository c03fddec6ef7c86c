"""rI-projection onto mixtures of k product distributions (naive Bayes) by EM.

EM on the exact target distribution never increases ``D(p || q)``, so each
run descends to a local minimizer; the best of several seeded runs is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from divmax.errors import DomainError
from divmax.modelzoo.expfam import ProjResult
from divmax.probcore import Dist, kl_vec, marginals


@dataclass(frozen=True)
class EMConfig:
    restarts: int = 20
    max_iter: int = 500
    tol: float = 1e-10
    noise: float = 0.05
    seed: int = 0


@dataclass
class MixtureParams:
    weights: np.ndarray
    factors: list[np.ndarray]  # factors[j][i] is component i's distribution of X_j

    def component_probs(self, states: np.ndarray) -> np.ndarray:
        """``(k, N)`` array of component probabilities."""
        out = np.ones((len(self.weights), states.shape[0]))
        for j, f in enumerate(self.factors):
            out *= f[:, states[:, j]]
        return out

    def probs(self, states: np.ndarray) -> np.ndarray:
        return self.weights @ self.component_probs(states)


def init_params(p: Dist, k: int, rng: np.random.Generator, noise: float = 0.05) -> MixtureParams:
    """Target marginals plus uniform noise in ``[-noise, noise]``, renormalized."""
    factors = []
    for m in marginals(p):
        f = m[None, :] + rng.uniform(-noise, noise, size=(k, m.size))
        f = np.maximum(f, 0.5 * m[None, :])
        factors.append(f / f.sum(axis=1, keepdims=True))
    return MixtureParams(np.full(k, 1.0 / k), factors)


def em_step(p: Dist, params: MixtureParams) -> MixtureParams:
    states = p.space.states
    comp = params.weights[:, None] * params.component_probs(states)
    q = comp.sum(axis=0)
    resp = np.divide(comp, q, out=np.zeros_like(comp), where=q > 0)
    w = resp * p.probs[None, :]
    weights = w.sum(axis=1)
    factors = []
    for j, old in enumerate(params.factors):
        f = np.zeros_like(old)
        for y in range(old.shape[1]):
            f[:, y] = w[:, states[:, j] == y].sum(axis=1)
        alive = weights > 0
        f[alive] /= weights[alive, None]
        f[~alive] = old[~alive]
        factors.append(f)
    return MixtureParams(weights / weights.sum(), factors)


def em_run(p: Dist, params: MixtureParams, max_iter: int = 500,
           tol: float = 1e-10) -> tuple[MixtureParams, list[float], bool]:
    """Iterate EM from ``params``; returns final params, divergence trace, converged flag."""
    states = p.space.states
    trace = [kl_vec(p.probs, params.probs(states))]
    for _ in range(max_iter):
        params = em_step(p, params)
        trace.append(kl_vec(p.probs, params.probs(states)))
        if trace[-2] - trace[-1] < tol:
            return params, trace, True
    return params, trace, False


def project_mixture_em(p: Dist, k: int, cfg: EMConfig = EMConfig()) -> ProjResult:
    """Best local rI-projection of ``p`` onto the mixture of ``k`` product distributions."""
    if k < 1:
        raise DomainError(f"component count must be >= 1, got {k}")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    for idx, ss in enumerate(seeds):
        params = init_params(p, k, np.random.default_rng(ss), cfg.noise)
        params, trace, converged = em_run(p, params, cfg.max_iter, cfg.tol)
        key = (trace[-1], idx)
        if best is None or key < best[0]:
            best = (key, params, trace, converged)
    (_, _), params, trace, converged = best
    q = Dist.normalized(p.space, params.probs(p.space.states))
    return ProjResult(q, kl_vec(p.probs, q.probs), iterations=len(trace) - 1, converged=converged,
                      restarts=cfg.restarts, params=params, history=tuple(trace))
