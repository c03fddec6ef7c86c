"""Batch evaluation of divergences that are linear in ``t log t`` of masses.

Independence, partition and disjoint-support product mixtures all satisfy

    D(p || M) = sum_x p log p + sum_l coef_l * t_l log t_l + sum_l lin_l * t_l

with ``t = p @ A`` for a 0/1 matrix ``A`` of mass functionals.
"""

from __future__ import annotations

import numpy as np


def xlogx(M: np.ndarray) -> np.ndarray:
    """Elementwise ``x log x`` with ``0 log 0 = 0``."""
    out = np.log(M, out=np.zeros_like(M), where=M > 0)
    out *= M
    return out


class EntropyForm:
    def __init__(self, A: np.ndarray, coef: np.ndarray, lin: np.ndarray | None = None):
        self.A = np.asarray(A, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        self.lin = None if lin is None or not np.any(lin) else np.asarray(lin, dtype=float)

    def __call__(self, P: np.ndarray) -> np.ndarray:
        t = P @ self.A
        out = xlogx(P).sum(axis=1) + xlogx(t) @ self.coef
        if self.lin is not None:
            out += t @ self.lin
        return np.maximum(out, 0.0)


def marginal_columns(states: np.ndarray, cards, mask=None) -> list[np.ndarray]:
    """Indicator columns ``{x : x_i = y}`` (restricted to ``mask``) for every axis and value."""
    cols = []
    for i, c in enumerate(cards):
        for y in range(c):
            col = states[:, i] == y
            cols.append(col & mask if mask is not None else col)
    return cols


def independence_form(states: np.ndarray, cards) -> EntropyForm:
    cols = marginal_columns(states, cards)
    return EntropyForm(np.stack(cols, axis=1), -np.ones(len(cols)))


def partition_form(labels: np.ndarray, sizes: np.ndarray) -> EntropyForm:
    A = np.zeros((len(labels), len(sizes)))
    A[np.arange(len(labels)), labels] = 1.0
    return EntropyForm(A, -np.ones(len(sizes)), np.log(sizes))


def mpd_form(states: np.ndarray, blocks) -> EntropyForm:
    """``blocks`` is a sequence of per-axis value sets."""
    n = states.shape[1]
    cols, coef = [], []
    for axes in blocks:
        inside = np.all([np.isin(states[:, i], y) for i, y in enumerate(axes)], axis=0)
        cols.append(inside)
        coef.append(n - 1)
        for i, y in enumerate(axes):
            for v in y:
                cols.append(inside & (states[:, i] == v))
                coef.append(-1)
    return EntropyForm(np.stack(cols, axis=1), np.array(coef))
