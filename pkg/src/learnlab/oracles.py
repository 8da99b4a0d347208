"""Brute-force reference computations.

These enumerate trees explicitly and evaluate the defining predicates or
expectations path by path. They share no code with the recursions and
dynamic programs they are used to check.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .classes import FiniteFunctionClass
from .complexity import SignTree


def tree_nodes(depth: int) -> list[tuple]:
    """All sign paths of length < depth in level order."""
    return [p for t in range(depth) for p in itertools.product((-1, 1), repeat=t)]


def all_trees(points, depth: int):
    nodes = tree_nodes(depth)
    for labels in itertools.product(points, repeat=len(nodes)):
        yield SignTree(depth, dict(zip(nodes, labels)))


def tree_average(cls: FiniteFunctionClass, tree: SignTree) -> Fraction:
    """Exact ``E_eps max_f sum_t eps_t f(x_t)`` (unnormalized) as a fraction."""
    vals = [[Fraction(v).limit_denominator(10 ** 6) for v in row] for row in cls.values]
    idx = {p: cls.domain.index(x) for p, x in tree.labels.items()}
    total = Fraction(0)
    for eps in itertools.product((-1, 1), repeat=tree.depth):
        best = None
        for row in vals:
            acc = sum(eps[t] * row[idx[eps[:t]]] for t in range(tree.depth))
            best = acc if best is None or acc > best else best
        total += best
    return total / 2 ** tree.depth


def brute_force_seq_rademacher(cls: FiniteFunctionClass, n: int) -> float:
    """``sup`` over every ``X``-valued depth-``n`` tree, enumerated one by one."""
    best = max(tree_average(cls, t) for t in all_trees(cls.domain.points, n))
    return float(best / n)


def brute_force_shattered_tree(cls: FiniteFunctionClass, depth: int) -> SignTree | None:
    """Search for a shattered depth-``depth`` tree by assigning nodes in level order.

    A partial assignment is abandoned as soon as some sign path through the
    assigned nodes has no consistent function, which the shattering predicate
    forbids; completed trees are re-checked against the predicate in full.
    """
    if depth == 0:
        return None
    nodes = tree_nodes(depth)
    vals = cls.values
    pts = cls.domain.points
    labels: dict = {}

    def consistent(path) -> np.ndarray:
        ok = np.ones(len(vals), dtype=bool)
        for t, e in enumerate(path):
            ok &= vals[:, cls.domain.index(labels[path[:t]])] == e
        return ok

    def extend(k: int) -> bool:
        if k == len(nodes):
            return all(consistent(e).any() for e in itertools.product((-1, 1), repeat=depth))
        node = nodes[k]
        for x in pts:
            labels[node] = x
            if consistent(node + (1,)).any() and consistent(node + (-1,)).any():
                if extend(k + 1):
                    return True
        del labels[node]
        return False

    return SignTree(depth, dict(labels)) if extend(0) else None


def brute_force_ldim(cls: FiniteFunctionClass, max_depth: int | None = None) -> int:
    limit = max_depth if max_depth is not None else len(cls).bit_length()
    d = 0
    while d < limit and brute_force_shattered_tree(cls, d + 1) is not None:
        d += 1
    return d


def brute_force_vc(cls: FiniteFunctionClass) -> int:
    """Largest shattered subset, testing every subset of every size."""
    best = 0
    m = cls.domain.size
    for size in range(1, m + 1):
        for S in itertools.combinations(range(m), size):
            patterns = {tuple(row[list(S)]) for row in cls.values}
            if len(patterns) == 2 ** size:
                best = size
    return best
