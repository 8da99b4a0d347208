"""Randomized invariants over small classes and distributions."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from learnlab.classes import (Domain, FiniteFunctionClass, LabelSpace, Loss, LossTable, expected_loss,
                              loss_class, restrict)
from learnlab.complexity import rademacher_worst_case, seq_rademacher_sup
from learnlab.dims import fat_shattering, littlestone_dimension, seq_fat_shattering, vc_dimension
from learnlab.learners import Hedge, erm
from learnlab.regret import RegretEstimate

GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)


@st.composite
def binary_classes(draw, max_points=4, max_functions=6):
    m = draw(st.integers(1, max_points))
    rows = draw(st.lists(st.tuples(*[st.sampled_from((-1.0, 1.0))] * m), min_size=1,
                         max_size=min(max_functions, 2 ** m), unique=True))
    return FiniteFunctionClass(Domain(tuple(range(m))), LabelSpace.binary(), rows)


@st.composite
def grid_classes(draw, max_points=3, max_functions=5):
    m = draw(st.integers(1, max_points))
    rows = draw(st.lists(st.tuples(*[st.sampled_from(GRID)] * m), min_size=1, max_size=max_functions, unique=True))
    return FiniteFunctionClass(Domain(tuple(range(m))), LabelSpace.grid(GRID), rows)


@st.composite
def distributions(draw, cls):
    outs = [(x, y) for x in cls.domain.points for y in cls.labels.values]
    w = draw(st.lists(st.integers(0, 5), min_size=len(outs), max_size=len(outs)).filter(lambda v: sum(v) > 0))
    tot = sum(w)
    return {z: k / tot for z, k in zip(outs, w) if k}


LOSSES = st.sampled_from(["absolute", "squared"])


@settings(max_examples=60, deadline=None)
@given(grid_classes(), LOSSES)
def test_loss_class_bounded(cls, kind):
    L = Loss(kind)
    lc = loss_class(cls, L)
    assert lc.values.min() >= 0 and lc.values.max() <= L.bound(cls.labels) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.data(), LOSSES, st.floats(0, 1))
def test_expected_loss_linear(data, kind, a):
    cls = data.draw(grid_classes())
    P, Q = data.draw(distributions(cls)), data.draw(distributions(cls))
    mix = {z: a * P.get(z, 0) + (1 - a) * Q.get(z, 0) for z in set(P) | set(Q)}
    L = Loss(kind)
    for f in range(len(cls)):
        lhs = expected_loss(L, mix, cls, f)
        rhs = a * expected_loss(L, P, cls, f) + (1 - a) * expected_loss(L, Q, cls, f)
        assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(binary_classes(), st.data())
def test_restrict_partitions(cls, data):
    x = data.draw(st.sampled_from(cls.domain.points))
    parts = [restrict(cls, x, y) for y in (1.0, -1.0)]
    rows = sorted(tuple(r) for p in parts if p for r in p.values)
    assert rows == sorted(tuple(r) for r in cls.values)


@settings(max_examples=80, deadline=None)
@given(binary_classes())
def test_vc_at_most_ldim(cls):
    assert vc_dimension(cls).value <= littlestone_dimension(cls).value


@settings(max_examples=50, deadline=None)
@given(grid_classes())
def test_fat_orders(cls):
    prev_fat, prev_sfat = None, None
    for g in (0.25, 0.5, 1.0):
        fat, sfat = fat_shattering(cls, g).value, seq_fat_shattering(cls, g).value
        assert fat <= sfat
        if prev_fat is not None:
            assert fat <= prev_fat and sfat <= prev_sfat
        prev_fat, prev_sfat = fat, sfat


@settings(max_examples=50, deadline=None)
@given(binary_classes(), st.data())
def test_subclass_monotone(cls, data):
    rows = data.draw(st.lists(st.integers(0, len(cls) - 1), min_size=1, unique=True))
    sub = cls.subclass(rows)
    assert vc_dimension(sub).value <= vc_dimension(cls).value
    assert littlestone_dimension(sub).value <= littlestone_dimension(cls).value


@settings(max_examples=40, deadline=None)
@given(grid_classes(), st.integers(1, 3))
def test_seqrad_reduction_and_permutation(cls, n):
    v = seq_rademacher_sup(cls, n).value
    assert v == pytest.approx(seq_rademacher_sup(cls, n, reduce=False).value, abs=1e-12)
    perm = FiniteFunctionClass(Domain(cls.domain.points[::-1]), cls.labels, cls.values[::-1, ::-1])
    assert seq_rademacher_sup(perm, n).value == pytest.approx(v, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(binary_classes(max_points=3, max_functions=5), st.integers(1, 3))
def test_seqrad_dominates_iid_and_halves(cls, n):
    v = seq_rademacher_sup(cls, n).value
    assert v >= rademacher_worst_case(cls, n).value - 1e-12
    from learnlab.complexity import seq_rademacher_loss_class
    half = seq_rademacher_loss_class(cls, Loss("zero-one"), n, reduce=False).value
    assert abs(half - v / 2) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(binary_classes(), st.data())
def test_erm_is_minimizer_and_hedge_is_distribution(cls, data):
    L = Loss("zero-one")
    sample = data.draw(st.lists(st.tuples(st.sampled_from(cls.domain.points), st.sampled_from((-1.0, 1.0))),
                                max_size=8))
    tab = LossTable(cls, L)
    emp = sum((tab.vector(z) for z in sample), np.zeros(len(cls)))
    assert emp[erm(cls, L, sample)] == emp.min()
    h = Hedge(cls, L)
    for z in sample:
        h.update(z)
        p = h.predict()
        assert abs(p.sum() - 1) <= 1e-12 and (p >= 0).all()


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=50))
def test_regret_estimate_stderr(values):
    est = RegretEstimate.from_values(values)
    assert est.stderr == pytest.approx(np.std(values, ddof=1) / np.sqrt(len(values)), abs=1e-12)
