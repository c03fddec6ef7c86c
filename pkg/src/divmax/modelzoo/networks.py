"""Binary restricted Boltzmann machines and deep belief networks.

Visible distributions are computed exactly by summing over every hidden
configuration, so the models are limited to 20 units in total.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from divmax.errors import DomainError, SizeError, UnsupportedError
from divmax.modelzoo.expfam import ProjResult
from divmax.probcore import Dist, StateSpace, kl_vec

MAX_UNITS = 20


@dataclass(frozen=True, eq=False)
class RbmParams:
    """Energy ``v.W.h + b.v + c.h`` on ``n`` visible and ``m`` hidden binary units."""

    W: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float).reshape(len(self.b), len(self.c))
        for arr in (W, self.b, self.c):
            if not np.all(np.isfinite(arr)):
                raise DomainError("RBM parameters must be finite")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.W.shape[1]

    @classmethod
    def zeros(cls, n: int, m: int) -> RbmParams:
        return cls(np.zeros((n, m)), np.zeros(n), np.zeros(m))

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator, scale: float = 0.1) -> RbmParams:
        return cls(rng.normal(0, scale, (n, m)), rng.normal(0, scale, n), rng.normal(0, scale, m))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W.ravel(), self.b, self.c])

    @classmethod
    def from_flat(cls, theta: np.ndarray, n: int, m: int) -> RbmParams:
        return cls(theta[: n * m].reshape(n, m), theta[n * m: n * m + n], theta[n * m + n:])


def _check_units(total: int) -> None:
    if total > MAX_UNITS:
        raise SizeError(f"{total} units exceed the exact-enumeration limit of {MAX_UNITS}")


@lru_cache(maxsize=None)
def binary_states(n: int) -> np.ndarray:
    states = StateSpace.binary(n).states.astype(float)
    states.flags.writeable = False
    return states


def _rbm_log_unnorm(params: RbmParams) -> tuple[np.ndarray, np.ndarray]:
    v = binary_states(params.n)
    act = v @ params.W + params.c
    return v, v @ params.b + np.logaddexp(0.0, act).sum(axis=1)


def rbm_visible(params: RbmParams) -> Dist:
    """Exact visible marginal; each hidden unit is summed out in closed form."""
    _check_units(params.n + params.m)
    _, logits = _rbm_log_unnorm(params)
    return Dist(StateSpace.binary(params.n), np.exp(logits - logsumexp(logits)))


def rbm_kl_and_grad(p: Dist, params: RbmParams) -> tuple[float, np.ndarray]:
    """``D(p || q_theta)`` and its gradient ``E_q[stats] - E_{p(v)p(h|v)}[stats]``."""
    v, logits = _rbm_log_unnorm(params)
    q = np.exp(logits - logsumexp(logits))
    h = expit(v @ params.W + params.c)

    def stats(weights):
        return np.concatenate([(v * weights[:, None]).T @ h, weights @ v, weights @ h], axis=None)

    return kl_vec(p.probs, q), stats(q) - stats(p.probs)


@dataclass(frozen=True, eq=False)
class DbnParams:
    """Layer widths ``(n_1, ..., n_L)`` with layer 1 visible.

    ``top`` is the RBM on layers ``L-1`` (its visible side) and ``L``;
    ``directed[l]`` holds ``(W, b)`` with ``W`` of shape ``(n_{l+1}, n_{l+2})``
    so that ``p(h^l | h^{l+1})`` has unit probabilities ``sigmoid(W h^{l+1} + b)``.
    """

    widths: tuple[int, ...]
    top: RbmParams
    directed: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise DomainError("a DBN needs at least two layers of positive width")
        _check_units(sum(widths))
        if (self.top.n, self.top.m) != widths[-2:]:
            raise DomainError("top RBM does not match the two deepest layer widths")
        if len(self.directed) != len(widths) - 2:
            raise DomainError("need one directed layer per pair below the top RBM")
        directed = []
        for l, (W, b) in enumerate(self.directed):
            W = np.asarray(W, dtype=float).reshape(widths[l], widths[l + 1])
            directed.append((W, np.asarray(b, dtype=float).reshape(widths[l])))
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "directed", tuple(directed))

    @classmethod
    def random(cls, widths, rng: np.random.Generator, scale: float = 0.1) -> DbnParams:
        widths = tuple(widths)
        top = RbmParams.random(widths[-2], widths[-1], rng, scale)
        directed = tuple((rng.normal(0, scale, (widths[l], widths[l + 1])), rng.normal(0, scale, widths[l]))
                         for l in range(len(widths) - 2))
        return cls(widths, top, directed)

    def flat(self) -> np.ndarray:
        parts = [self.top.flat()]
        for W, b in self.directed:
            parts += [W.ravel(), b]
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, theta: np.ndarray, widths) -> DbnParams:
        widths = tuple(widths)
        nt, mt = widths[-2:]
        k = nt * mt + nt + mt
        top = RbmParams.from_flat(theta[:k], nt, mt)
        directed = []
        for l in range(len(widths) - 2):
            a, b = widths[l], widths[l + 1]
            directed.append((theta[k: k + a * b].reshape(a, b), theta[k + a * b: k + a * b + a]))
            k += a * b + a
        return cls(widths, top, tuple(directed))


def sigmoid_layer_matrix(W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``T[h_above, h_below] = p(h_below | h_above)`` for a directed sigmoid layer."""
    above = binary_states(W.shape[1])
    below = binary_states(W.shape[0])
    act = above @ W.T + b
    logt = log_expit(act) @ below.T + log_expit(-act) @ (1.0 - below).T
    return np.exp(logt)


def _dbn_probs(params: DbnParams) -> np.ndarray:
    _, logits = _rbm_log_unnorm(params.top)
    probs = np.exp(logits - logsumexp(logits))
    for W, b in reversed(params.directed):
        probs = probs @ sigmoid_layer_matrix(W, b)
    return probs / probs.sum()


def dbn_visible(params: DbnParams) -> Dist:
    """Exact distribution of layer 1, propagating the top RBM marginal downwards."""
    return Dist(StateSpace.binary(params.widths[0]), _dbn_probs(params))


# fitting


@dataclass(frozen=True)
class NetConfig:
    step: float = 0.1
    decay: float = 0.5
    growth: float = 1.2
    max_iter: int = 5000
    restarts: int = 10
    init_scale: float = 0.1
    gtol: float = 1e-6
    ftol: float = 1e-12
    fd_step: float = 1e-5
    seed: int = 0


def central_difference(f: Callable[[np.ndarray], float], theta: np.ndarray, h: float) -> np.ndarray:
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def gradient_descent(fg: Callable[[np.ndarray], tuple[float, np.ndarray]], theta: np.ndarray,
                     cfg: NetConfig) -> tuple[np.ndarray, float, int, bool]:
    """Gradient descent with a bold-driver step: grown after every accepted move,
    shrunk (and the move rejected) whenever the objective fails to decrease."""
    f, g = fg(theta)
    step = cfg.step
    for it in range(cfg.max_iter):
        if np.max(np.abs(g)) <= cfg.gtol:
            return theta, f, it, True
        cand = theta - step * g
        f_new, g_new = fg(cand)
        if f_new < f:
            improvement = f - f_new
            theta, f, g = cand, f_new, g_new
            step *= cfg.growth
            if improvement < cfg.ftol:
                return theta, f, it + 1, True
        else:
            step *= cfg.decay
            if step < 1e-14:
                return theta, f, it + 1, True
    return theta, f, cfg.max_iter, False


def _require_binary(p: Dist) -> None:
    if not p.space.is_binary:
        raise UnsupportedError("RBM/DBN projections are implemented for binary state spaces only")


def _best_of(p: Dist, fg, init, to_dist, cfg: NetConfig) -> ProjResult:
    best = None
    for idx, ss in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)):
        theta, f, iters, converged = gradient_descent(fg, init(np.random.default_rng(ss)), cfg)
        if best is None or (f, idx) < best[0]:
            best = ((f, idx), theta, iters, converged)
    _, theta, iters, converged = best
    params, q = to_dist(theta)
    return ProjResult(q, kl_vec(p.probs, q.probs), iterations=iters, converged=converged,
                      restarts=cfg.restarts, params=params)


def project_rbm(p: Dist, m: int, cfg: NetConfig = NetConfig()) -> ProjResult:
    """Best local rI-projection onto ``RBM_{n,m}`` using the exact gradient."""
    _require_binary(p)
    n = p.space.n
    if m < 0:
        raise DomainError("hidden unit count must be nonnegative")
    _check_units(n + m)

    def fg(theta):
        return rbm_kl_and_grad(p, RbmParams.from_flat(theta, n, m))

    def init(rng):
        return RbmParams.random(n, m, rng, cfg.init_scale).flat()

    def to_dist(theta):
        params = RbmParams.from_flat(theta, n, m)
        return params, rbm_visible(params)

    return _best_of(p, fg, init, to_dist, cfg)


def _dbn_probs_flat(theta: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    """Same as ``_dbn_probs(DbnParams.from_flat(theta, widths))`` without validation."""
    nt, mt = widths[-2:]
    v = binary_states(nt)
    W = theta[: nt * mt].reshape(nt, mt)
    logits = v @ theta[nt * mt: nt * mt + nt] + np.logaddexp(0.0, v @ W + theta[nt * mt + nt: nt * mt + nt + mt]).sum(axis=1)
    probs = np.exp(logits - logits.max())
    k = nt * mt + nt + mt
    layers = []
    for l in range(len(widths) - 2):
        a, b = widths[l], widths[l + 1]
        layers.append((theta[k: k + a * b].reshape(a, b), theta[k + a * b: k + a * b + a]))
        k += a * b + a
    for W, b in reversed(layers):
        probs = probs @ sigmoid_layer_matrix(W, b)
    return probs / probs.sum()


def _dbn_probs_batch(thetas: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    """Visible distributions for a ``(B, P)`` stack of flat parameter vectors."""
    B = len(thetas)
    nt, mt = widths[-2:]
    v = binary_states(nt)
    W = thetas[:, : nt * mt].reshape(B, nt, mt)
    b = thetas[:, nt * mt: nt * mt + nt]
    c = thetas[:, nt * mt + nt: nt * mt + nt + mt]
    act = np.einsum("vi,kij->kvj", v, W) + c[:, None, :]
    logits = b @ v.T + np.logaddexp(0.0, act).sum(axis=2)
    probs = np.exp(logits - logits.max(axis=1, keepdims=True))
    k = nt * mt + nt + mt
    layers = []
    for l in range(len(widths) - 2):
        a, w = widths[l], widths[l + 1]
        layers.append((thetas[:, k: k + a * w].reshape(B, a, w), thetas[:, k + a * w: k + a * w + a]))
        k += a * w + a
    for Wl, bl in reversed(layers):
        above = binary_states(Wl.shape[2])
        below = binary_states(Wl.shape[1])
        act = np.einsum("uj,kij->kui", above, Wl) + bl[:, None, :]
        logt = log_expit(act) @ below.T + log_expit(-act) @ (1.0 - below).T
        probs = np.einsum("ku,kuw->kw", probs, np.exp(logt))
    return probs / probs.sum(axis=1, keepdims=True)


def _kl_rows(p: np.ndarray, Q: np.ndarray) -> np.ndarray:
    mask = p > 0
    Qm = Q[:, mask]
    out = (p[mask] * (np.log(p[mask]) - np.log(np.where(Qm > 0, Qm, 1.0)))).sum(axis=1)
    out[np.any(Qm <= 0, axis=1)] = np.inf
    return np.maximum(out, 0.0)


def dbn_kl(p: Dist, theta: np.ndarray, widths) -> float:
    return kl_vec(p.probs, _dbn_probs_flat(theta, tuple(widths)))


def dbn_kl_and_fd_grad(p: Dist, theta: np.ndarray, widths, h: float) -> tuple[float, np.ndarray]:
    """Divergence and its central-difference gradient, all ``2P + 1`` evaluations in one batch."""
    P = theta.size
    step = h * np.eye(P)
    thetas = np.vstack([theta[None, :], theta + step, theta - step])
    f = _kl_rows(p.probs, _dbn_probs_batch(thetas, tuple(widths)))
    return float(f[0]), (f[1: P + 1] - f[P + 1:]) / (2 * h)


def project_dbn(p: Dist, widths, cfg: NetConfig = NetConfig()) -> ProjResult:
    """Best local rI-projection onto a DBN; gradients by central differences."""
    _require_binary(p)
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2 or widths[0] != p.space.n:
        raise DomainError(f"DBN widths {widths} do not start with the {p.space.n} visible units")
    _check_units(sum(widths))

    def fg(theta):
        return dbn_kl_and_fd_grad(p, theta, widths, cfg.fd_step)

    def init(rng):
        return DbnParams.random(widths, rng, cfg.init_scale).flat()

    def to_dist(theta):
        params = DbnParams.from_flat(theta, widths)
        return params, dbn_visible(params)

    return _best_of(p, fg, init, to_dist, cfg)
