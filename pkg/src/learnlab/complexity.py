"""Rademacher and sequential Rademacher complexities of finite classes.

The supremum over trees is computed by backward induction on the vector of
accumulated signed sums. Values on a finite grid are scaled to integers so the
memoized states are exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .classes import FiniteFunctionClass, Loss, loss_class

EXACT_MAX_DEPTH = 20
DEFAULT_STATE_BUDGET = 3_000_000


class ResourceBudgetError(RuntimeError):
    """A computation would exceed its configured resource budget."""

    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} exceeds budget of {budget}")
        self.budget = budget


def _sign_char(e: int) -> str:
    return "+" if e > 0 else "-"


@dataclass
class SignTree:
    """Complete binary tree; ``labels[path]`` is the node reached by ``path``.

    Paths are tuples of +/-1 of length 0..depth-1 (+1 goes right).
    """

    depth: int
    labels: dict

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("tree depth must be >= 1")
        for t in range(self.depth):
            for path in itertools.product((-1, 1), repeat=t):
                if path not in self.labels:
                    raise ValueError(f"missing node at path {path}")

    def __getitem__(self, path) -> Any:
        return self.labels[tuple(path)]

    @classmethod
    def from_function(cls, depth: int, fn: Callable[[tuple], Any]) -> "SignTree":
        return cls(depth, {p: fn(p) for t in range(depth)
                           for p in itertools.product((-1, 1), repeat=t)})

    @classmethod
    def constant_levels(cls, seq) -> "SignTree":
        """Tree whose level ``t`` carries ``seq[t]`` on every node."""
        return cls.from_function(len(seq), lambda p: seq[len(p)])

    def to_json(self) -> dict:
        return {"".join(_sign_char(e) for e in p): v for p, v in self.labels.items()}

    @classmethod
    def from_json(cls, doc: dict) -> "SignTree":
        labels = {}
        for k, v in doc.items():
            labels[tuple(1 if c == "+" else -1 for c in k)] = tuple(v) if isinstance(v, list) else v
        depth = max(len(p) for p in labels) + 1
        return cls(depth, labels)


@dataclass(frozen=True)
class ComplexityValue:
    value: float
    mode: str
    n: int
    stderr: float = 0.0
    flags: tuple = ()

    def __post_init__(self):
        if self.mode == "exact" and self.stderr != 0:
            raise ValueError("exact values carry no stderr")

    def to_dict(self) -> dict:
        return {"value": self.value, "mode": self.mode, "stderr": self.stderr,
                "n": self.n, "flags": list(self.flags)}


def _all_signs(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


# ---------------------------------------------------------------- iid

def _exact_mode(mode: str, n: int) -> bool:
    if mode not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and n > EXACT_MAX_DEPTH:
        raise ValueError(f"exact enumeration limited to n <= {EXACT_MAX_DEPTH}")
    return mode == "exact" or (mode == "auto" and n <= EXACT_MAX_DEPTH)


def rademacher_fixed_sample(cls: FiniteFunctionClass, sample, reps: int = 20000,
                            seed: int = 0, mode: str = "auto") -> ComplexityValue:
    """``E_eps sup_f (1/n) sum_t eps_t f(x_t)`` for a fixed sample; exact up to
    ``2**20`` sign vectors under ``mode="auto"``, Monte Carlo beyond."""
    n = len(sample)
    if n < 1:
        raise ValueError("sample must be nonempty")
    M = np.stack([cls.column(x) for x in sample], axis=1)  # (|F|, n)
    if _exact_mode(mode, n):
        total = 0.0
        for chunk in _sign_chunks(n):
            total += (chunk @ M.T).max(axis=1).sum()
        return ComplexityValue(total / (2 ** n * n), "exact", n)
    rng = np.random.default_rng(seed)
    eps = rng.choice((-1.0, 1.0), size=(reps, n))
    vals = (eps @ M.T).max(axis=1) / n
    return ComplexityValue(float(vals.mean()), "monte-carlo", n, float(vals.std(ddof=1) / math.sqrt(reps)))


def _sign_chunks(n: int, chunk_bits: int = 14):
    if n <= chunk_bits:
        yield _all_signs(n)
        return
    tail = _all_signs(chunk_bits)
    for head in itertools.product((-1.0, 1.0), repeat=n - chunk_bits):
        yield np.hstack([np.broadcast_to(np.array(head), (len(tail), n - chunk_bits)), tail])


def rademacher_worst_case(cls: FiniteFunctionClass, n: int, budget: int = 1_000_000,
                          seed: int = 0, restarts: int = 20) -> ComplexityValue:
    """Max of the fixed-sample Rademacher average over samples in ``X^n``.

    The value is order-invariant, so exact mode walks multisets. Beyond the
    budget a random-restart hill climb returns a flagged lower estimate.
    """
    pts = cls.domain.points
    if len(pts) ** n <= budget:
        best = max(rademacher_fixed_sample(cls, s).value
                   for s in itertools.combinations_with_replacement(pts, n))
        return ComplexityValue(best, "exact", n)
    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(restarts):
        s = [pts[i] for i in rng.integers(len(pts), size=n)]
        cur = rademacher_fixed_sample(cls, s).value
        improved = True
        while improved:
            improved = False
            for t in range(n):
                for x in pts:
                    cand = s[:t] + [x] + s[t + 1:]
                    v = rademacher_fixed_sample(cls, cand).value
                    if v > cur + 1e-12:
                        s, cur, improved = cand, v, True
        best = max(best, cur)
    return ComplexityValue(best, "exact", n, flags=("lower-estimate",))


# ---------------------------------------------------------------- sequential

def seq_rademacher_fixed_tree(cls: FiniteFunctionClass, tree: SignTree, reps: int = 20000,
                              seed: int = 0, mode: str = "auto") -> ComplexityValue:
    n = tree.depth
    cols = {p: cls.column(x) for p, x in tree.labels.items()}

    def path_value(eps) -> float:
        acc = np.zeros(len(cls))
        for t in range(n):
            acc = acc + eps[t] * cols[tuple(eps[:t])]
        return float(acc.max()) / n

    if _exact_mode(mode, n):
        total = math.fsum(path_value(e) for e in itertools.product((-1, 1), repeat=n))
        return ComplexityValue(total / 2 ** n, "exact", n)
    rng = np.random.default_rng(seed)
    vals = np.array([path_value(tuple(int(v) for v in rng.choice((-1, 1), size=n))) for _ in range(reps)])
    return ComplexityValue(float(vals.mean()), "monte-carlo", n, float(vals.std(ddof=1) / math.sqrt(reps)))


def _integer_scale(values: np.ndarray, max_den: int = 10 ** 6) -> int | None:
    den = 1
    for v in np.unique(values):
        fr = Fraction(float(v)).limit_denominator(max_den)
        if abs(float(fr) - v) > 1e-12:
            return None
        den = math.lcm(den, fr.denominator)
    return den


def _canonical_columns(M: np.ndarray, reduce: bool) -> list[tuple[int, ...]]:
    """Distinct integer columns of ``M``; with ``reduce`` also identify columns
    that differ by a constant vector or by a global sign (the induction value
    is invariant under both)."""
    seen = {}
    for c in M.T:
        c = [int(v) for v in c]
        if reduce:
            c = [v - c[0] for v in c]
            nz = next((v for v in c if v), 0)
            if nz < 0:
                c = [-v for v in c]
        seen.setdefault(tuple(c), None)
    return list(seen)


class _SeqRadDP:
    def __init__(self, cols, budget: int, reduce: bool):
        self.cols = cols
        self.budget = budget
        self.reduce = reduce
        self.memo: dict = {}

    def value(self, r: int, s: tuple) -> float:
        if self.reduce:
            m = min(s)
            if m:
                s = tuple(v - m for v in s)
            return m + self._value(r, s)
        return self._value(r, s)

    def _value(self, r: int, s: tuple) -> float:
        if r == 0:
            return float(max(s))
        key = (r, s)
        got = self.memo.get(key)
        if got is not None:
            return got
        best = -math.inf
        for c in self.cols:
            up = tuple(a + b for a, b in zip(s, c))
            down = tuple(a - b for a, b in zip(s, c))
            v = 0.5 * (self.value(r - 1, up) + self.value(r - 1, down))
            if v > best:
                best = v
        if len(self.memo) >= self.budget:
            raise ResourceBudgetError("sequential Rademacher DP state count", self.budget)
        self.memo[key] = best
        return best


def seq_rademacher_sup(cls: FiniteFunctionClass, n: int, budget: int = DEFAULT_STATE_BUDGET,
                       reduce: bool = True) -> ComplexityValue:
    """``sup_x E_eps sup_f (1/n) sum_t eps_t f(x_t(eps_{1:t-1}))`` over all trees.

    Backward induction: ``V_n(s) = max_f s(f)`` and
    ``V_t(s) = max_x (V_{t+1}(s + col(x)) + V_{t+1}(s - col(x))) / 2``,
    result ``V_0(0) / n``. The sign-path dependent argmax choices form the
    optimal tree.
    """
    if n < 1:
        raise ValueError("depth n must be >= 1")
    scale = _integer_scale(cls.values)
    if scale is None:
        raise ValueError("class values are not on a rational grid; exact DP unavailable")
    M = np.rint(cls.values * scale).astype(np.int64)
    dp = _SeqRadDP(_canonical_columns(M, reduce), budget, reduce)
    v = dp.value(n, tuple([0] * len(cls)))
    return ComplexityValue(v / (n * scale), "exact", n)


def seq_rademacher_loss_class(cls: FiniteFunctionClass, loss: Loss, n: int,
                              budget: int = DEFAULT_STATE_BUDGET, reduce: bool = True) -> ComplexityValue:
    """Sequential Rademacher complexity of the loss class over outcome-labelled trees."""
    return seq_rademacher_sup(loss_class(cls, loss), n, budget, reduce)


def sign_bijection_check(witness: SignTree) -> bool:
    """Whether ``eps -> (eps_t * s_t(eps_{1:t-1}))_t`` permutes ``{+-1}^n``."""
    n = witness.depth
    if n > EXACT_MAX_DEPTH:
        raise ValueError("depth too large for exhaustive check")
    image = set()
    for eps in itertools.product((-1, 1), repeat=n):
        image.add(tuple(eps[t] * witness[eps[:t]] for t in range(n)))
    return len(image) == 2 ** n
