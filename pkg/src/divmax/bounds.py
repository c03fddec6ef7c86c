"""Closed-form bounds and exact values for the maximal divergence from a model.

Values are in nats.  Expressions of the form ``c * log(2)`` are evaluated
with ``c`` as an exact rational, so degenerate cases come out as exact zeros.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from divmax.errors import DomainError
from divmax.partitions import CubicalPartition, Partition

LN2 = math.log(2)


@dataclass(frozen=True)
class BoundReport:
    value: float
    kind: str  # "upper" | "lower" | "exact"
    formula: str
    witness: Any = field(default=None)

    def __post_init__(self):
        if self.kind not in ("upper", "lower", "exact"):
            raise DomainError(f"unknown bound kind {self.kind!r}")
        if self.value < 0:
            raise DomainError("bound values are nonnegative")

    def to_json(self) -> dict:
        return {"value": self.value, "kind": self.kind, "formula": self.formula,
                "witness": _jsonable(self.witness)}


def _jsonable(w):
    if isinstance(w, (tuple, list)):
        return [_jsonable(x) for x in w]
    if isinstance(w, dict):
        return {k: _jsonable(v) for k, v in w.items()}
    return w


def binary_log_formula(n: int, k: int, offset: int = 0) -> float:
    """``(n + offset - floor(log2 k) - k / 2**floor(log2 k)) * log 2``."""
    fl = k.bit_length() - 1
    c = Fraction(n + offset - fl) - Fraction(k, 2**fl)
    return float(c) * LN2 if c != 0 else 0.0


def _check_cards(cards: Sequence[int]) -> tuple[int, ...]:
    cards = tuple(int(c) for c in cards)
    if not cards or any(c < 1 for c in cards):
        raise DomainError(f"cardinalities must be a nonempty list of positive integers, got {cards}")
    return cards


def bound_independence(cards: Sequence[int]) -> BoundReport:
    """``log(N / max_i N_i)``."""
    cards = _check_cards(cards)
    return BoundReport(math.log(math.prod(cards) / max(cards)), "upper", "ind-lemma")


def exact_independence(n: int, q: int) -> BoundReport:
    """``(n - 1) log q`` for ``n`` homogeneous q-ary variables."""
    if n < 1 or q < 1:
        raise DomainError("need n >= 1 and q >= 1")
    return BoundReport((n - 1) * math.log(q), "exact", "ind-lemma")


def _best_subset(cards: tuple[int, ...], k: int) -> tuple[float, tuple[int, ...]]:
    """Minimize ``log(N_A / max_{j in A} N_j)`` over ``A`` with ``k >= N_{[n] minus A}``."""
    n = len(cards)
    best = None
    for r in range(n, -1, -1):
        for A in itertools.combinations(range(n), r):
            rest = math.prod(cards[i] for i in range(n) if i not in A)
            if k < rest:
                continue
            value = math.log(math.prod(cards[i] for i in A) / max(cards[i] for i in A)) if A else 0.0
            if best is None or value < best[0]:
                best = (value, A)
    return best


def bound_mixture(cards: Sequence[int], k: int) -> BoundReport:
    """Upper bound for the naive Bayes model with a ``k``-state hidden variable."""
    cards = _check_cards(cards)
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    value, A = _best_subset(cards, k)
    witness = {"A": list(A)}
    n = len(cards)
    if all(c == 2 for c in cards) and k <= 2 ** (n - 1):
        tight = binary_log_formula(n, k)
        if tight < value - 1e-12:
            value, witness = tight, {"binary": True, "k": k}
    return BoundReport(value, "upper", "mix-thm", witness)


def bound_rbm(cards: Sequence[int], hidden_cards: Sequence[int]) -> BoundReport:
    """Upper bound for an RBM with hidden state-space sizes ``hidden_cards``."""
    cards = _check_cards(cards)
    hidden = tuple(int(h) for h in hidden_cards)
    if any(h < 1 for h in hidden):
        raise DomainError("hidden cardinalities must be positive")
    k = 1 + sum(h - 1 for h in hidden)
    value, A = _best_subset(cards, k)
    witness = {"A": list(A)}
    n, m = len(cards), len(hidden)
    if all(c == 2 for c in cards) and all(h == 2 for h in hidden) and m <= 2 ** (n - 1) - 1:
        tight = binary_log_formula(n, m + 1)
        if tight < value - 1e-12:
            value, witness = tight, {"binary": True, "m": m}
    return BoundReport(value, "upper", "rbm-thm", witness)


def bound_dbn(layer_cards: Sequence[int], L: int) -> BoundReport:
    """Upper bound for a DBN with ``L`` layers, each of units with cardinalities ``layer_cards``.

    Units are relabelled so that cardinalities are non-increasing, then
    ``log N_{[m-S]}`` is minimized over all admissible ``(m, S)``.
    """
    q = sorted(_check_cards(layer_cards), reverse=True)
    n = len(q)
    if L < 1:
        raise DomainError("need at least one layer")
    best = None
    for m in range(1, n + 1):
        if math.prod(q[m + 1:]) > m:
            continue
        for S in range(m + 1):
            reach = S if q[0] == 1 else Fraction(q[0] ** S - 1, q[0] - 1)
            if L < 2 + reach:
                continue
            value = math.log(math.prod(q[: m - S]))
            if best is None or value < best[0]:
                best = (value, {"m": m, "S": S})
    if best is None:
        return BoundReport(math.log(math.prod(q)), "upper", "dbn-thm", "none")
    value, witness = best
    k = _binary_width_k(n)
    if all(c == 2 for c in q) and k is not None:
        S = max(S for S in range(2 ** (k - 1) + 1) if L >= 1 + 2**S) if L >= 2 else None
        if S is not None:
            tight = float(2 ** (k - 1) - S) * LN2
            if tight < value - 1e-12:
                value, witness = tight, {"k": k, "S": S}
    return BoundReport(value, "upper", "dbn-thm", witness)


def _binary_width_k(n: int) -> int | None:
    for k in range(1, n + 1):
        if 2 ** (k - 1) + k == n:
            return k
    return None


def exact_partition(rho: Partition) -> BoundReport:
    """``log c(rho)``, the log of the largest block size."""
    return BoundReport(math.log(rho.coarseness), "exact", "partition-lemma", {"coarseness": rho.coarseness})


def exact_multinomial(n: int, q: int) -> BoundReport:
    """``(n - 1) log q`` for ``n`` draws from ``q`` categories."""
    if n < 1 or q < 1:
        raise DomainError("need n >= 1 and q >= 1")
    return BoundReport((n - 1) * math.log(q), "exact", "multinomial-thm")


def lower_bound_expfam(N: int, dim: int) -> BoundReport:
    """Any ``dim``-dimensional exponential family on ``N`` states has maximal divergence at least this."""
    if N < 1 or dim < 0:
        raise DomainError("need N >= 1 and dim >= 0")
    return BoundReport(max(math.log(N) - math.log(dim + 1), 0.0), "lower", "optifam")


def bound_umpd(n: int, k: int) -> BoundReport:
    if n < 1 or not 1 <= k <= 2 ** (n - 1):
        raise DomainError(f"bound_umpd requires 1 <= k <= 2^(n-1) = {2 ** (n - 1) if n >= 1 else 0}, got k={k}")
    return BoundReport(binary_log_formula(n, k), "upper", "umpd-thm", {"n": n, "k": k})


def bound_union_partitions(n: int, k: int) -> BoundReport:
    if n < 1 or not 1 <= k <= 2**n:
        raise DomainError(f"bound_union_partitions requires 1 <= k <= 2^n = {2**n if n >= 1 else 0}, got k={k}")
    return BoundReport(binary_log_formula(n, k, offset=1), "upper", "umpd-thm", {"n": n, "k": k})


def mpd_exact(rho: CubicalPartition) -> BoundReport:
    """``max_i log(|A_i| / q_i)`` when every block has per-axis sizes in ``{1, q_i}``.

    Otherwise returns the upper bound with ``q_i`` replaced by the largest
    per-axis size of the block.
    """
    exact = True
    best = None
    for i, block in enumerate(rho.blocks):
        sizes = block.shape
        qi = max(sizes)
        if any(s not in (1, qi) for s in sizes):
            exact = False
        value = math.log(block.size / qi)
        if best is None or value > best[0]:
            best = (value, i)
    return BoundReport(best[0], "exact" if exact else "upper", "mpd-cor", {"block": best[1]})


def param_count(kind: str, **sizes) -> int:
    """Number of free parameters of a model family."""
    if kind == "independence":
        return sum(c - 1 for c in sizes["cards"])
    if kind == "mixture":
        k = sizes["k"]
        return k * sum(c - 1 for c in sizes["cards"]) + (k - 1)
    if kind == "partition":
        return sizes["blocks"] - 1
    if kind == "rbm":
        n, m = sizes["n"], sizes["m"]
        return n * m + n + m
    if kind == "dbn":
        w = list(sizes["widths"])
        return sum(a * b for a, b in zip(w, w[1:])) + sum(w)
    raise DomainError(f"unknown model kind {kind!r}")
