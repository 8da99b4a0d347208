"""Exact combinatorial dimensions of finite classes.

Subclasses are handled as Python-int bitmasks over row indices, which doubles
as the canonical memo key for the Littlestone and sequential fat-shattering
recursions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any

import numpy as np

from .classes import TOL, FiniteFunctionClass
from .complexity import SignTree


@dataclass(frozen=True)
class DimensionReport:
    kind: str
    value: int
    scale: float | None = None
    witness: Any = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "gamma": self.scale, "value": self.value}
        if self.witness is not None:
            d["witness"] = _witness_json(self.witness)
        return d


def _witness_json(w):
    if isinstance(w, SignTree):
        return w.to_json()
    if isinstance(w, dict):
        return {k: _witness_json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_witness_json(v) for v in w]
    return w


def _require_binary(cls: FiniteFunctionClass) -> None:
    if not cls.labels.is_binary:
        raise ValueError("dimension needs a binary class")


def _require_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError("scale gamma must be positive")


def _mask(rows) -> int:
    m = 0
    for r in rows:
        m |= 1 << int(r)
    return m


def _rows(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _bit_length_floor_log2(k: int) -> int:
    return k.bit_length() - 1


# ------------------------------------------------------------------ VC

def vc_dimension(cls: FiniteFunctionClass, witness: bool = False) -> DimensionReport:
    _require_binary(cls)
    vals = cls.values
    best, best_set = 0, ()
    for m in range(1, cls.domain.size + 1):
        if 2 ** m > len(cls):
            break
        found = None
        for S in itertools.combinations(range(cls.domain.size), m):
            if len({r.tobytes() for r in vals[:, S]}) == 2 ** m:
                found = S
                break
        if found is None:
            break
        best, best_set = m, found
    w = [cls.domain.points[i] for i in best_set] if witness else None
    return DimensionReport("vc", best, witness=w)


# ------------------------------------------------------------- Littlestone

class _BinarySplits:
    def __init__(self, cls: FiniteFunctionClass):
        self.points = cls.domain.points
        self.pos = [_mask(np.flatnonzero(cls.values[:, i] > 0)) for i in range(cls.domain.size)]
        self.neg = [_mask(np.flatnonzero(cls.values[:, i] < 0)) for i in range(cls.domain.size)]
        self.full = (1 << len(cls)) - 1
        self.memo: dict[int, int] = {}

    def ldim(self, mask: int) -> int:
        got = self.memo.get(mask)
        if got is not None:
            return got
        cap = _bit_length_floor_log2(bin(mask).count("1"))
        best = 0
        if cap > 0:
            for p, n in zip(self.pos, self.neg):
                a, b = mask & p, mask & n
                if a and b:
                    best = max(best, 1 + min(self.ldim(a), self.ldim(b)))
                    if best == cap:
                        break
        self.memo[mask] = best
        return best

    def tree(self, mask: int, depth: int, path=(), out=None) -> dict:
        out = {} if out is None else out
        if depth == 0:
            return out
        for i, (p, n) in enumerate(zip(self.pos, self.neg)):
            a, b = mask & p, mask & n
            if a and b and self.ldim(a) >= depth - 1 and self.ldim(b) >= depth - 1:
                out[path] = self.points[i]
                self.tree(a, depth - 1, path + (1,), out)
                self.tree(b, depth - 1, path + (-1,), out)
                return out
        raise AssertionError("no splitting point at a node claimed shatterable")


def littlestone_dimension(cls: FiniteFunctionClass, witness: bool = False) -> DimensionReport:
    """Ldim by the split recursion, memoized on the surviving row set."""
    _require_binary(cls)
    sp = _BinarySplits(cls)
    value = sp.ldim(sp.full)
    w = SignTree(value, sp.tree(sp.full, value)) if witness and value > 0 else None
    return DimensionReport("littlestone", value, witness=w)


# ------------------------------------------------------------ scale-sensitive

def _candidate_splits(column: np.ndarray, gamma: float) -> list[tuple[float, int, int]]:
    """Pareto-maximal ``(s, above, below)`` splits of one column at scale gamma.

    The predicate only sees the above/below partition, and a feasible pair of
    achieved values ``v_lo <= s - gamma``, ``v_hi >= s + gamma`` is always
    served by the midpoint ``(v_lo + v_hi) / 2``; so pairwise midpoints of
    achieved values are a complete candidate set.
    """
    vals = np.unique(column)
    out = []
    for i, lo in enumerate(vals):
        for hi in vals[i:]:
            if hi - lo < 2 * gamma - TOL:
                continue
            s = (lo + hi) / 2
            above = _mask(np.flatnonzero(column - s >= gamma - TOL))
            below = _mask(np.flatnonzero(s - column >= gamma - TOL))
            out.append((float(s), above, below))
    keep = []
    for s, a, b in out:
        dominated = any((a | a2) == a2 and (b | b2) == b2 and (a, b) != (a2, b2) for _, a2, b2 in out)
        if not dominated and all((a, b) != (a2, b2) for _, a2, b2 in keep):
            keep.append((s, a, b))
    return keep


def fat_shattering(cls: FiniteFunctionClass, gamma: float, witness: bool = False) -> DimensionReport:
    _require_gamma(gamma)
    splits = [_candidate_splits(cls.values[:, i], gamma) for i in range(cls.domain.size)]
    usable = [i for i in range(cls.domain.size) if splits[i]]
    best, best_w = 0, None
    for m in range(1, len(usable) + 1):
        if 2 ** m > len(cls):
            break
        found = None
        for S in itertools.combinations(usable, m):
            for choice in itertools.product(*(splits[i] for i in S)):
                if _shatters(choice):
                    found = (S, choice)
                    break
            if found:
                break
        if found is None:
            break
        best, best_w = m, found
    w = None
    if witness and best_w is not None:
        S, choice = best_w
        w = {"points": [cls.domain.points[i] for i in S], "witnesses": [c[0] for c in choice]}
    return DimensionReport("fat", best, gamma, w)


def _shatters(choice) -> bool:
    for eps in itertools.product((0, 1), repeat=len(choice)):
        m = -1
        for e, (_, above, below) in zip(eps, choice):
            m &= above if e else below
            if not m:
                return False
    return True


class _ScaleSplits:
    def __init__(self, cls: FiniteFunctionClass, gamma: float):
        self.points = cls.domain.points
        self.splits = [(i, s, a, b) for i in range(cls.domain.size)
                       for s, a, b in _candidate_splits(cls.values[:, i], gamma)]
        self.full = (1 << len(cls)) - 1
        self.memo: dict[int, int] = {}

    def sfat(self, mask: int) -> int:
        got = self.memo.get(mask)
        if got is not None:
            return got
        cap = _bit_length_floor_log2(bin(mask).count("1"))
        best = 0
        if cap > 0:
            for _, _, a, b in self.splits:
                a, b = mask & a, mask & b
                if a and b:
                    best = max(best, 1 + min(self.sfat(a), self.sfat(b)))
                    if best == cap:
                        break
        self.memo[mask] = best
        return best

    def trees(self, mask, depth, path=(), xs=None, ss=None):
        xs = {} if xs is None else xs
        ss = {} if ss is None else ss
        if depth == 0:
            return xs, ss
        for i, s, a, b in self.splits:
            a, b = mask & a, mask & b
            if a and b and self.sfat(a) >= depth - 1 and self.sfat(b) >= depth - 1:
                xs[path], ss[path] = self.points[i], s
                self.trees(a, depth - 1, path + (1,), xs, ss)
                self.trees(b, depth - 1, path + (-1,), xs, ss)
                return xs, ss
        raise AssertionError("no split at a node claimed shatterable")


def seq_fat_shattering(cls: FiniteFunctionClass, gamma: float, witness: bool = False) -> DimensionReport:
    _require_gamma(gamma)
    sp = _ScaleSplits(cls, gamma)
    value = sp.sfat(sp.full)
    w = None
    if witness and value > 0:
        xs, ss = sp.trees(sp.full, value)
        w = {"tree": SignTree(value, xs), "witness": SignTree(value, ss)}
    return DimensionReport("sfat", value, gamma, w)


# ------------------------------------------------------------ witness checks

def shatters_sequence(cls: FiniteFunctionClass, points, witnesses=None, gamma: float | None = None) -> bool:
    """Direct check of the (gamma-)shattering predicate on a point sequence."""
    cols = np.stack([cls.column(x) for x in points], axis=1)
    for eps in itertools.product((-1.0, 1.0), repeat=len(points)):
        e = np.array(eps)
        if gamma is None:
            ok = np.all(cols == e, axis=1)
        else:
            ok = np.all(e * (cols - np.array(witnesses)) >= gamma - TOL, axis=1)
        if not ok.any():
            return False
    return True


def shatters_tree(cls: FiniteFunctionClass, tree: SignTree, witness: SignTree | None = None,
                  gamma: float | None = None) -> bool:
    """Direct check of the (gamma-)shattering predicate on a complete tree."""
    for eps in itertools.product((-1, 1), repeat=tree.depth):
        ok = np.ones(len(cls), dtype=bool)
        for t in range(tree.depth):
            col = cls.column(tree[eps[:t]])
            if gamma is None:
                ok &= col == eps[t]
            else:
                ok &= eps[t] * (col - witness[eps[:t]]) >= gamma - TOL
        if not ok.any():
            return False
    return True


def dimension(cls: FiniteFunctionClass, kind: str, gamma: float | None = None,
              witness: bool = False) -> DimensionReport:
    if kind == "vc":
        return vc_dimension(cls, witness)
    if kind in ("ldim", "littlestone"):
        return littlestone_dimension(cls, witness)
    if kind in ("fat", "sfat"):
        if gamma is None:
            raise ValueError(f"{kind} needs --gamma")
        fn = fat_shattering if kind == "fat" else seq_fat_shattering
        return fn(cls, gamma, witness)
    raise ValueError(f"unknown dimension kind {kind!r}")
