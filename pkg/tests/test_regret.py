import numpy as np
import pytest

from learnlab.classes import IntegerThresholdClass, Loss, LossTable, make_bit_threshold_class, make_full_binary_class, make_threshold_class
from learnlab.learners import BatchRule, Hedge
from learnlab.processes import (adversarial_threshold, drifting_process, mixture_iid, point_mass_process,
                                product_iid)
from learnlab.regret import (RegretEstimate, decomposition_report, erm_risk_estimate, gen_value_estimate,
                             iid_value_estimate, map_replicates, martingale_deviation, p_regret,
                             preq_value_estimate, process_argmin, process_regret, sequence_regret,
                             stationary_gap, ulln_deviation)

THR = make_threshold_class(3)
P = {(1, 1.0): 0.3, (2, -1.0): 0.3, (3, 1.0): 0.4}
SEQ = [(1, 1.0), (2, -1.0), (3, 1.0), (1, -1.0), (2, 1.0)]


def test_regret_estimate_stderr():
    est = RegretEstimate.from_values([1.0, 2.0, 3.0])
    assert est.mean == 2.0 and est.stderr == pytest.approx(1 / np.sqrt(3))
    assert RegretEstimate.from_values([4.0]).stderr == 0.0
    with pytest.raises(ValueError):
        RegretEstimate(0.0, 0.0, 0)


def test_p_regret_examples(zero_one):
    risk = LossTable(THR, zero_one).risk(P)
    assert p_regret(P, int(risk.argmin()), THR, zero_one) == 0
    z = (2, -1.0)
    vec = LossTable(THR, zero_one).vector(z)
    assert p_regret({z: 1.0}, 0, THR, zero_one) == vec[0] - vec.min()
    U = {(1, 1.0): 0.5, (1, -1.0): 0.5}
    assert all(p_regret(U, f, THR, zero_one) == 0 for f in range(4))


def test_process_regret_product_equals_p_regret(zero_one):
    k = product_iid(P, 6)
    for s in range(5):
        path = k.sample(s)
        for f in range(4):
            assert process_regret(k, path, f, THR, zero_one) == pytest.approx(p_regret(P, f, THR, zero_one),
                                                                              abs=1e-15)


def test_process_regret_adversarial_truth_zero(zero_one):
    k = adversarial_threshold(2)
    cls = make_bit_threshold_class(2)
    for s in range(10):
        path = k.sample(s)
        truth = path.hidden()["truth"]
        member = cls.names.index(f"c={truth}")
        assert process_regret(k, path, member, cls, zero_one) == 0


def test_process_regret_point_mass_direct(zero_one):
    k = point_mass_process(SEQ)
    path = k.sample(0)
    rows = np.array([LossTable(THR, zero_one).vector(z) for z in SEQ])
    for f in range(4):
        want = rows[:, f].mean() - rows.min(axis=1).mean()
        assert process_regret(k, path, f, THR, zero_one) == pytest.approx(want, abs=1e-15)


def test_gen_equals_iid_on_product(zero_one):
    for tb in ("lowest-index", "seeded-random"):
        rule = BatchRule(THR, zero_one, tb)
        g = gen_value_estimate(rule, product_iid(P, 5), 300, 11)
        i = iid_value_estimate(rule, P, 5, 300, 11)
        assert np.array_equal(g.values, i.values)


def test_gen_on_realizable_adversarial_equals_risk(zero_one):
    k = adversarial_threshold(3)
    rule = BatchRule(IntegerThresholdClass(k.x_len), zero_one)
    g = gen_value_estimate(rule, k, 200, 2)
    r = erm_risk_estimate(rule, k, 200, 2)
    assert np.array_equal(g.values, r.values)


def test_implicit_and_explicit_classes_agree(zero_one):
    k = adversarial_threshold(2)
    exp_cls = make_bit_threshold_class(2, truths_only=False)
    imp = IntegerThresholdClass(k.x_len)
    a = erm_risk_estimate(BatchRule(exp_cls, zero_one), k, 100, 3)
    b = erm_risk_estimate(BatchRule(imp, zero_one), k, 100, 3)
    assert np.allclose(a.values, b.values, atol=1e-12)


def test_preq_point_mass_equals_sequence_regret(zero_one):
    h = Hedge(THR, zero_one)
    est = preq_value_estimate(h, point_mass_process(SEQ), 5, 0)
    assert np.all(est.values == sequence_regret(h, SEQ))


def test_preq_singleton_zero(zero_one):
    cls = THR.subclass([1])
    assert preq_value_estimate(Hedge(cls, zero_one), product_iid(P, 5), 20, 0).mean == 0


def test_preq_product_hedge_bound(zero_one):
    from learnlab.complexity import seq_rademacher_loss_class
    n = 16
    est = preq_value_estimate(Hedge(THR, zero_one), product_iid(P, n), 500, 0)
    hedge_bound = 2 * np.sqrt(np.log(4) / (2 * n))
    rad = seq_rademacher_loss_class(THR, zero_one, n).value
    assert est.mean <= hedge_bound + 2 * rad + 3 * est.stderr


def test_decomposition_point_mass_terms_vanish(zero_one):
    rep = decomposition_report(Hedge(THR, zero_one), point_mass_process(SEQ), 4, 0)
    assert rep.term_I.mean == 0 and rep.term_III.mean == 0
    assert rep.max_sum_error <= 1e-12


def test_decomposition_sums(zero_one):
    rep = decomposition_report(Hedge(THR, zero_one), mixture_iid(0.4, {(1, 1.0): 1.0}, {(2, -1.0): 1.0}, 6), 200, 1)
    assert rep.max_sum_error <= 1e-9
    total = rep.term_I.mean + rep.term_II.mean + rep.term_III.mean
    assert total == pytest.approx(rep.total.mean, abs=1e-9)


def test_martingale_point_mass_zero():
    cls = make_full_binary_class(2)
    est = martingale_deviation(point_mass_process([(1, 1.0), (2, -1.0), (1, 1.0)]), cls, 10, 0)
    assert est.mean == 0


def test_martingale_equals_ulln_on_product():
    cls = make_full_binary_class(2)
    Q = {(1, 1.0): 0.4, (2, -1.0): 0.6}
    m = martingale_deviation(product_iid(Q, 7), cls, 200, 5)
    u = ulln_deviation(Q, 7, cls, 200, 5)
    assert np.max(np.abs(m.values - u.values)) <= 1e-12


def test_martingale_decreasing():
    cls = make_full_binary_class(2)
    Q = {(1, 1.0): 0.5, (2, 1.0): 0.5}
    means = [martingale_deviation(product_iid(Q, n), cls, 2000, 1).mean for n in (4, 16, 64)]
    assert means[0] > means[1] > means[2]


def test_stationary_gap(zero_one):
    k = product_iid(P, 5)
    assert stationary_gap(k, k.sample(0), THR, zero_one, P) == (0.0, 0.0) or \
        stationary_gap(k, k.sample(0), THR, zero_one, P)[0] <= 1e-15
    Q = {(1, -1.0): 0.5, (3, -1.0): 0.5}
    gaps = []
    for n in (4, 16, 64):
        d = drifting_process(P, Q, n, 1.0)
        gap, tv = stationary_gap(d, d.sample(0), THR, zero_one, Q)
        assert gap <= 2 * tv + 1e-12
        gaps.append(gap)
    assert gaps[0] > gaps[1] > gaps[2]


def test_mixture_argmin_follows_component(zero_one):
    Pm = {(1, 1.0): 0.5, (2, 1.0): 0.5}
    Qm = {(2, -1.0): 0.5, (3, -1.0): 0.5}
    k = mixture_iid(0.3, Pm, Qm, 8)
    for s in range(20):
        path = k.sample(s)
        want = 0 if path.hidden()["component"] == "P" else 3
        assert process_argmin(path, THR, zero_one) == want


def _square(seed, rep):
    return seed * 100 + rep


def test_map_replicates_order_independent_of_threads(monkeypatch):
    serial = map_replicates(_square, 7, 3)
    monkeypatch.setenv("LEARNLAB_THREADS", "3")
    assert map_replicates(_square, 7, 3) == serial == [300 + r for r in range(7)]


def test_parallel_estimate_identical(monkeypatch, zero_one):
    rule = BatchRule(THR, zero_one, "seeded-random")
    a = gen_value_estimate(rule, product_iid(P, 5), 40, 9)
    monkeypatch.setenv("LEARNLAB_THREADS", "2")
    b = gen_value_estimate(rule, product_iid(P, 5), 40, 9)
    assert np.array_equal(a.values, b.values)
