import math

import numpy as np
import pytest

from learnlab.classes import (Domain, FiniteFunctionClass, LabelSpace, Loss, LossTable, expected_loss,
                              make_threshold_class)
from learnlab.processes import (AdversarialThresholdKernel, adversarial_threshold, conditional_average,
                                draw, drifting_process, mixture_iid, point_mass_process, process_from_spec,
                                product_iid, random_level, random_level_conditional_risk,
                                regression_transform, replicate_rngs, total_variation)

P = {(1, 1.0): 0.5, (2, -1.0): 0.25, (3, 1.0): 0.25}
Q = {(1, -1.0): 0.6, (3, -1.0): 0.4}


def test_product_same_P_every_prefix():
    k = product_iid(P, 4)
    assert k.conditional(()) == P
    assert k.conditional(((1, 1.0), (2, -1.0))) == P


def test_product_expected_loss_constant(zero_one):
    path = product_iid(P, 5).sample(3)
    cls = make_threshold_class(3)
    vals = {expected_loss(zero_one, Pt, cls, 1) for Pt in path.conditionals()}
    assert len(vals) == 1


def test_same_seed_identical_path():
    k = product_iid(P, 3)
    assert k.sample(7).to_csv() == k.sample(7).to_csv()
    assert k.sample(7).outcomes != k.sample(8).outcomes or True


def test_mixture_extremes_match_products():
    one = mixture_iid(1.0, P, Q, 5)
    zero = mixture_iid(0.0, P, Q, 5)
    assert one.sample(4).outcomes == product_iid(P, 5).sample(4).outcomes
    assert zero.sample(4).outcomes == product_iid(Q, 5).sample(4).outcomes


def test_mixture_second_step_is_component():
    k = mixture_iid(0.3, P, Q, 4)
    assert k.conditional(((2, -1.0),)) is k.P
    assert k.conditional(((3, -1.0),)) is k.Q
    first = k.conditional(())
    assert first[(1, 1.0)] == pytest.approx(0.15)
    assert first[(1, -1.0)] == pytest.approx(0.42)


def test_mixture_rejects_overlap():
    with pytest.raises(ValueError):
        mixture_iid(0.5, P, P, 3)


def test_mixture_later_conditionals_identical():
    k = mixture_iid(0.3, P, Q, 6)
    for s in range(20):
        conds = k.sample(s).conditionals()
        assert all(c is conds[1] for c in conds[1:])


def test_mixture_conditional_average():
    lam, n = 0.3, 5
    k = mixture_iid(lam, P, Q, n)
    for s in range(30):
        path = k.sample(s)
        if path.hidden()["component"] == "P":
            break
    avg = conditional_average(k, path)
    for z in set(P) | set(Q):
        want = (lam * P.get(z, 0) + (1 - lam) * Q.get(z, 0) + (n - 1) * P.get(z, 0)) / n
        assert avg.get(z, 0.0) == pytest.approx(want, abs=1e-15)


def test_adversarial_worked_example():
    k = AdversarialThresholdKernel(2, bits=0b1011)
    b = 0b1011
    P1 = k.conditional((), None)
    hi = k.encode(b, 2)
    assert k.bitstring(hi) == "10100"
    assert P1[(hi, 1.0)] == 0.5
    P2 = k.conditional(((hi, 1.0),))
    lo = k.encode(b, 2)
    assert (lo, 1.0) in P2 and k.level_of(lo) == 2


def test_adversarial_all_plus_reaches_top():
    for n in (1, 3, 6):
        k = AdversarialThresholdKernel(n, bits=0)
        prefix, level = (), 0
        for t in range(1, n + 1):
            Pt = k.conditional(prefix)
            x = max((x for x, _ in Pt), key=k.level_of)
            prefix += ((x, k.label(0, x)),)
            level = k.level_of(x)
        assert level == 2 ** n - 1


def test_adversarial_labels_and_parity():
    k = adversarial_threshold(5)
    rng = np.random.default_rng(0)
    for _ in range(50):
        path = k.sample(rng)
        truth = path.hidden()["truth"]
        assert truth % 2 == 1
        for x, y in path.outcomes:
            assert x % 2 == 0
            assert y == (1.0 if x <= truth else -1.0)


def test_adversarial_realizable():
    k = adversarial_threshold(4)
    for s in range(20):
        path = k.sample(s)
        truth = path.hidden()["truth"]
        for Pt in path.conditionals():
            assert all((1.0 if x <= truth else -1.0) == y for x, y in Pt)


def test_adversarial_label_is_next_bit():
    k = AdversarialThresholdKernel(3, bits=0b10110010)
    b = k.bits
    for level in range(8):
        x = k.encode(b, level)
        assert k.label(b, x) == (1.0 if k.bit(b, level + 1) else -1.0)


def test_adversarial_range():
    with pytest.raises(ValueError):
        AdversarialThresholdKernel(0)
    with pytest.raises(ValueError):
        AdversarialThresholdKernel(25)


def test_adversarial_seed_fixes_bits():
    a, b = adversarial_threshold(3, seed=5), adversarial_threshold(3, seed=5)
    assert a.bits == b.bits is not None


@pytest.mark.parametrize("kernel", [
    product_iid(P, 4), mixture_iid(0.3, P, Q, 4), drifting_process(P, Q, 4, 1.0),
    point_mass_process([(1, 1.0), (2, -1.0)]), AdversarialThresholdKernel(3, bits=77),
    adversarial_threshold(10),
])
def test_conditionals_normalized(kernel):
    kernel.check_normalized()


def test_drifting_infinite_rate_is_product():
    k = drifting_process(P, Q, 5, math.inf)
    assert all(k.conditional(((1, 1.0),) * t) == Q for t in range(5))


def test_drifting_tv_decreasing():
    tvs = []
    for n in (4, 16, 64, 256):
        k = drifting_process(P, Q, n, 1.0)
        tvs.append(total_variation(conditional_average(k, k.sample(0)), Q))
    assert all(a > b for a, b in zip(tvs, tvs[1:]))


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_drifting_linear_closed_form(n):
    k = drifting_process(P, Q, n, "linear")
    avg = conditional_average(k, k.sample(0))
    # mean weight on P_end is (n+1)/(2n), so the gap to P_end is (n-1)/(2n) TV(P, Q)
    assert total_variation(avg, Q) == pytest.approx((n - 1) / (2 * n) * total_variation(P, Q), abs=1e-12)


def test_point_mass_deterministic(zero_one):
    seq = [(1, 1.0), (2, -1.0), (1, -1.0)]
    k = point_mass_process(seq)
    assert k.sample(0).outcomes == k.sample(99).outcomes == tuple(seq)
    cls = make_threshold_class(2)
    path = k.sample(1)
    for z, Pt in zip(seq, path.conditionals()):
        assert expected_loss(zero_one, Pt, cls, 1) == zero_one(z[1], cls.evaluate(1, z[0]))
    avg = conditional_average(k, path)
    assert avg == {(1, 1.0): 1 / 3, (2, -1.0): 1 / 3, (1, -1.0): 1 / 3}


def test_product_conditional_average_is_P():
    k = product_iid(P, 6)
    avg = conditional_average(k, k.sample(2))
    assert all(avg[z] == pytest.approx(P[z], abs=1e-15) for z in P)


def test_regression_transform():
    inner = AdversarialThresholdKernel(2, bits=0b1011)
    k = regression_transform(inner, 1.0, 0.0, 0.5)
    P1 = k.conditional(())
    assert {y for _, y in P1} <= {0.0, 1.0}
    assert (inner.encode(0b1011, 2), 1.0) in P1
    path = k.sample(3)
    assert path.hidden()["u"] == 1.0 and path.hidden()["gamma"] == 0.5
    regression_transform(inner, 0.1, 0.0, 0.5)
    with pytest.raises(ValueError):
        regression_transform(inner, 0.05, 0.0, 0.5)


def test_regression_absolute_loss_is_scaled_zero_one():
    from learnlab.classes import IntegerThresholdClass
    inner = adversarial_threshold(3, seed=1)
    u, ul = 0.3, 0.1
    k = regression_transform(inner, u, ul, 0.5)
    reg = IntegerThresholdClass(inner.x_len, u, ul)
    binc = IntegerThresholdClass(inner.x_len)
    path, bpath = k.sample(2), inner.sample(2)
    for c in (0, 5, 100, inner.bits * 2 + 1):
        for (x, y), (_, yb) in zip(path.outcomes, bpath.outcomes):
            assert abs(y - reg.evaluate(c, x)) == pytest.approx((u - ul) * (yb != binc.evaluate(c, x)))


def test_random_level_noiseless():
    base = FiniteFunctionClass(Domain((1, 2)), LabelSpace.grid((-1, 0, 1)), [[0, 1], [1, -1]])
    proc = random_level(base, 1, {1: 0.5, 2: 0.5}, 10, noise=False)
    path = proc.sample(0)
    assert all(y == base.evaluate(1, x) for x, y in path.outcomes)
    assert np.all(proc.running_levels(path) == 0)


def test_random_level_conditional_risk_examples():
    base = FiniteFunctionClass(Domain((1, 2)), LabelSpace.grid((-1, 0, 1)), [[0, 1], [1, -1]])
    PX = {1: 0.5, 2: 0.5}
    assert random_level_conditional_risk(base, 0, 0.0, 4, 0.0, PX, 0) == 1.25
    assert random_level_conditional_risk(base, 0, 0.7, 3, 0.7, PX, 0) == pytest.approx(1 + 1 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        random_level_conditional_risk(base, 0, 0.0, 0, 0.0, PX, 0)


def test_random_level_running_level_converges():
    base = FiniteFunctionClass(Domain((1, 2)), LabelSpace.grid((-1, 0, 1)), [[0, 1], [1, -1]])
    errs = []
    for n in (10, 100, 1000):
        proc = random_level(base, 0, {1: 0.5, 2: 0.5}, n)
        e = []
        for s in range(200):
            path = proc.sample(s)
            U = proc.running_levels(path)
            resid = sum(y - proc.f_star(x) for x, y in path.outcomes)
            e.append((resid / (n + 1) - path.hidden()["xi0"]) ** 2)
        errs.append(np.mean(e))
    # mean-square error of the posterior mean is 1/(n+1)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] == pytest.approx(1 / 1001, rel=0.3)


def test_conditional_average_rejects_continuous():
    base = FiniteFunctionClass(Domain((1,)), LabelSpace.grid((-1, 0, 1)), [[0]])
    proc = random_level(base, 0, {1: 1.0}, 3)
    with pytest.raises(TypeError):
        conditional_average(proc, proc.sample(0))


def test_replicate_rngs_match_spawn():
    a, _ = replicate_rngs(5, 3)
    b = np.random.default_rng(np.random.SeedSequence(5).spawn(4)[3].spawn(2)[0])
    assert a.random() == b.random()


def test_draw_frequencies():
    rng = np.random.default_rng(0)
    counts = {}
    for _ in range(20000):
        z = draw(rng, P)
        counts[z] = counts.get(z, 0) + 1
    assert counts[(1, 1.0)] / 20000 == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("spec", [
    {"process": "product", "n": 3, "P": [[1, 1, 0.5], [2, -1, 0.5]]},
    {"process": "mixture", "n": 3, "lambda": 0.3, "P": [[1, 1, 1.0]], "Q": [[2, -1, 1.0]]},
    {"process": "drifting", "n": 3, "rate": "linear", "P_start": [[1, 1, 1.0]], "P_end": [[2, -1, 1.0]]},
    {"process": "point-mass", "sequence": [[1, 1], [2, -1]]},
    {"process": "adversarial-threshold", "n": 3, "seed": 1},
    {"process": "regression-transform", "u": 0.2, "u_low": 0.0, "gamma": 0.5,
     "inner": {"process": "adversarial-threshold", "n": 2}},
])
def test_process_from_spec(spec):
    k = process_from_spec(spec)
    path = k.sample(0)
    assert len(path) == k.horizon
    assert path.to_csv().startswith("t,x,y,P_t")
