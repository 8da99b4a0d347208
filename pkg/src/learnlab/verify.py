"""Numerical checks of the identities and bounds, one suite per acceptance criterion."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .classes import (FiniteFunctionClass, IntegerThresholdClass, LabelSpace, Loss, make_bit_threshold_class,
                      make_full_binary_class, make_threshold_class, random_binary_class,
                      random_grid_class)
from .complexity import SignTree, seq_rademacher_loss_class, seq_rademacher_sup, sign_bijection_check
from .dims import fat_shattering, littlestone_dimension, seq_fat_shattering, vc_dimension
from .learners import TIE_BREAKS, BatchRule, Hedge
from .oracles import brute_force_ldim, brute_force_seq_rademacher
from .processes import (adversarial_threshold, drifting_process, mixture_iid, point_mass_process,
                        product_iid, random_level, regression_transform)
from .regret import (decomposition_report, erm_risk_estimate, gen_value_estimate, iid_value_estimate,
                     martingale_deviation, mixture_selection_frequency, preq_value_estimate,
                     random_level_estimates, sequence_regret, ulln_deviation)


@dataclass
class Check:
    name: str
    anchor: str
    measured: dict
    threshold: str
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "anchor": self.anchor, "measured": self.measured,
                "threshold": self.threshold, "pass": bool(self.passed)}


@dataclass
class VerifyReport:
    suite: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "pass": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


ZERO_ONE = Loss("zero-one")


def _elapsed(t0: float) -> float:
    return round(time.perf_counter() - t0, 3)


# ------------------------------------------------------------ suites

def suite_halving(seed: int, classes: int = 50) -> Check:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(classes):
        cls = random_binary_class(rng, 5, 3)
        for n in range(1, 5):
            a = seq_rademacher_loss_class(cls, ZERO_ONE, n, reduce=False).value
            b = seq_rademacher_sup(cls, n).value
            worst = max(worst, abs(a - 0.5 * b))
    el = _elapsed(t0)
    return Check("halving-identity", "zero-one loss class of a binary class has half its sequential complexity",
                 {"classes": classes, "max_abs_discrepancy": worst, "seconds": el},
                 "max discrepancy <= 1e-9 and runtime < 60 s", worst <= 1e-9 and el < 60)


def suite_dp_bruteforce(seed: int, classes: int = 20) -> Check:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(classes):
        cls = random_binary_class(rng, 4, 3) if i % 2 == 0 else random_grid_class(rng, 4, 3)
        for n in range(1, 4):
            worst = max(worst, abs(seq_rademacher_sup(cls, n).value - brute_force_seq_rademacher(cls, n)))
    el = _elapsed(t0)
    return Check("dp-equals-bruteforce", "supremum over trees by dynamic programming vs exhaustive trees",
                 {"classes": classes, "max_abs_discrepancy": worst, "seconds": el},
                 "max discrepancy <= 1e-12 and runtime < 60 s", worst <= 1e-12 and el < 60)


def suite_lower(seed: int, reps: int = 20000, n: int = 8) -> Check:
    t0 = time.perf_counter()
    kernel = adversarial_threshold(n)
    cls = IntegerThresholdClass(kernel.x_len)
    measured, ok = {}, True
    for tb in TIE_BREAKS:
        est = erm_risk_estimate(BatchRule(cls, ZERO_ONE, tb), kernel, reps, seed, keep=False)
        good = est.mean >= 0.125 - 3 * est.stderr
        measured[tb] = {"mean": est.mean, "stderr": est.stderr, "pass": good}
        ok &= good
    el = _elapsed(t0)
    measured.update(n=n, reps=reps, seconds=el)
    return Check("lower-bound-one-eighth", "ERM on the adversarial threshold process has per-step risk >= 1/8",
                 measured, "mean >= 0.125 - 3 stderr for every tie break, runtime < 120 s", ok and el < 120)


def erm_upper_kernels():
    """(name, class, kernel) triples with |F| <= 5 and n <= 8."""
    thr = make_threshold_class(4)
    P = {(1, -1.0): 0.2, (2, 1.0): 0.2, (3, -1.0): 0.2, (4, 1.0): 0.4}
    Pm = {(1, 1.0): 0.5, (2, 1.0): 0.5}
    Qm = {(3, -1.0): 0.5, (4, -1.0): 0.5}
    Ps = {(1, -1.0): 0.5, (3, 1.0): 0.5}
    Pe = {(2, 1.0): 0.5, (4, -1.0): 0.5}
    seq = [(1, 1.0), (2, -1.0), (3, 1.0), (4, -1.0), (1, -1.0), (2, 1.0), (3, -1.0), (4, 1.0)]
    adv = adversarial_threshold(1)
    return [("product", thr, product_iid(P, 8)),
            ("mixture", thr, mixture_iid(0.3, Pm, Qm, 8)),
            ("drifting", thr, drifting_process(Ps, Pe, 8, 1.0)),
            ("point-mass", thr, point_mass_process(seq)),
            ("adversarial", make_bit_threshold_class(1), adv)]


def suite_erm_upper(seed: int, reps: int = 5000) -> Check:
    measured, ok = {}, True
    for name, cls, kernel in erm_upper_kernels():
        est = gen_value_estimate(BatchRule(cls, ZERO_ONE), kernel, reps, seed, keep=False)
        rad = seq_rademacher_loss_class(cls, ZERO_ONE, kernel.horizon).value
        good = est.mean <= 4 * rad + 3 * est.stderr
        measured[name] = {"mean": est.mean, "stderr": est.stderr, "seq_rad_loss": rad,
                          "n": kernel.horizon, "size": len(cls), "pass": good}
        ok &= good
    return Check("erm-upper-bound", "ERM process regret is at most 4 x sequential complexity of the loss class",
                 measured, "mean <= 4 SeqRad(loss o F) + 3 stderr on every kernel", ok)


def suite_reductions(seed: int, reps: int = 2000) -> Check:
    thr = make_threshold_class(3)
    P = {(1, 1.0): 0.3, (2, -1.0): 0.3, (3, 1.0): 0.4}
    rule = BatchRule(thr, ZERO_ONE, "seeded-random")
    g = gen_value_estimate(rule, product_iid(P, 6), reps, seed)
    i = iid_value_estimate(rule, P, 6, reps, seed)
    product_ok = bool(np.array_equal(g.values, i.values))

    seq = [(1, 1.0), (2, -1.0), (3, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)]
    pm = point_mass_process(seq)
    h = Hedge(thr, ZERO_ONE)
    pre = preq_value_estimate(h, pm, 50, seed)
    direct = sequence_regret(h, seq)
    pm_ok = bool(np.all(pre.values == direct))

    return Check("estimator-reductions", "process regret reduces to the iid and individual-sequence regrets",
                 {"product_replicates_identical": product_ok, "product_reps": reps,
                  "point_mass_preq_equals_sequence_regret": pm_ok},
                 "replicate-wise equality, zero tolerance", product_ok and pm_ok)


def decomposition_kernels():
    thr = make_threshold_class(2)
    P = {(1, -1.0): 0.3, (2, 1.0): 0.3, (1, 1.0): 0.2, (2, -1.0): 0.2}
    Pm = {(1, 1.0): 0.6, (2, -1.0): 0.4}
    Qm = {(1, -1.0): 0.5, (2, 1.0): 0.5}
    return thr, [("product", product_iid(P, 32)), ("mixture", mixture_iid(0.3, Pm, Qm, 32))]


def suite_preq_decomp(seed: int, reps: int = 5000) -> Check:
    thr, kernels = decomposition_kernels()
    measured, ok = {}, True
    for name, kernel in kernels:
        rep = decomposition_report(Hedge(thr, ZERO_ONE), kernel, reps, seed)
        rad = seq_rademacher_loss_class(thr, ZERO_ONE, kernel.horizon).value
        t1, t3 = rep.term_I, rep.term_III
        c1 = abs(t1.mean) <= 3 * t1.stderr
        c3 = t3.mean <= 2 * rad + 3 * t3.stderr
        cs = rep.max_sum_error <= 1e-9
        measured[name] = {**rep.to_dict(), "seq_rad_loss": rad,
                          "term_I_ok": c1, "term_III_ok": c3, "sum_ok": cs}
        ok &= c1 and c3 and cs
    return Check("prequential-decomposition", "prequential regret splits into martingale, sequence and comparator terms",
                 measured, "|I| <= 3 se; III <= 2 SeqRad + 3 se; terms sum within 1e-9 per replicate", ok)


def suite_bijection(seed: int, trees: int = 100, n: int = 10) -> Check:
    rng = np.random.default_rng(seed)
    good = 0
    for _ in range(trees):
        signs = rng.choice((-1, 1), size=2 ** n - 1)
        tree = SignTree.from_function(n, lambda p, s=signs: int(s[_heap_index(p)]))
        good += sign_bijection_check(tree)
    return Check("sign-bijection", "sign flips along a witness tree permute the sign sequences",
                 {"trees": trees, "bijective": good, "n": n}, "all trees bijective", good == trees)


def _heap_index(path) -> int:
    i = 0
    for e in path:
        i = 2 * i + (2 if e > 0 else 1)
    return i


def suite_dims_order(seed: int) -> Check:
    rng = np.random.default_rng(seed)
    vc_ok = all(vc_dimension(c).value <= littlestone_dimension(c).value
                for c in (random_binary_class(rng, 6, 4) for _ in range(200)))
    fat_ok = True
    for _ in range(100):
        c = random_grid_class(rng, 6, 4)
        for g in (0.25, 0.5, 1.0):
            fat_ok &= fat_shattering(c, g).value <= seq_fat_shattering(c, g).value
    ldims = {k: littlestone_dimension(make_threshold_class(k)).value for k in range(1, 8)}
    brute = {k: brute_force_ldim(make_threshold_class(k)) for k in range(1, 8)}
    formula = {k: int(np.floor(np.log2(k + 1))) for k in range(1, 8)}
    ldim_ok = ldims == formula == brute
    vcs = {k: vc_dimension(make_threshold_class(k)).value for k in range(1, 11)}
    vc1 = all(v == 1 for v in vcs.values())
    return Check("dimension-order", "vc <= ldim, fat <= sfat, and the threshold-class formulas",
                 {"vc_le_ldim": vc_ok, "fat_le_sfat": bool(fat_ok), "threshold_ldim": ldims,
                  "threshold_ldim_bruteforce": brute, "threshold_vc": vcs},
                 "all orderings hold; ldim = floor(log2(k+1)); vc = 1", vc_ok and bool(fat_ok) and ldim_ok and vc1)


def random_level_setup(n: int):
    base = make_threshold_class(3)
    grid = LabelSpace.grid((-1.0, 1.0))
    base = FiniteFunctionClass(base.domain, grid, base.values)
    P_X = {1: 0.25, 2: 0.25, 3: 0.5}
    return random_level(base, 1, P_X, n)


def suite_random_level(seed: int, reps: int = 1000, ns=(50, 200)) -> Check:
    measured, ok = {}, True
    risks, errs = [], []
    for n in ns:
        est = random_level_estimates(random_level_setup(n), reps, seed)
        r, u = est["risk"], est["level_error"]
        inside = 1.0 <= r.mean <= 1.0 + 10.0 / n
        measured[f"n={n}"] = {"risk_mean": r.mean, "risk_stderr": r.stderr, "upper": 1 + 10 / n,
                              "level_error_mean": u.mean, "level_error_stderr": u.stderr,
                              "within_band": inside}
        ok &= inside
        risks.append(r.mean)
        errs.append(u.mean)
    dec = all(a > b for a, b in zip(risks, risks[1:]))
    dec_u = all(a > b for a, b in zip(errs, errs[1:]))
    measured.update(risk_decreasing=dec, level_error_decreasing=dec_u)
    return Check("random-level", "offset ERM risk approaches the floor 1 as the level is learned",
                 measured, "mean risk in [1, 1 + 10/n], decreasing in n; |U_n - xi_0| decreasing",
                 ok and dec and dec_u)


def mixture_setup(n: int = 8, lam: float = 0.3):
    thr = make_threshold_class(3)
    P = {(1, 1.0): 0.5, (2, 1.0): 0.5}
    Q = {(2, -1.0): 0.5, (3, -1.0): 0.5}
    return thr, mixture_iid(lam, P, Q, n)


def suite_mixture(seed: int, reps: int = 10000, lam: float = 0.3) -> Check:
    thr, kernel = mixture_setup(lam=lam)
    est, fp, fq = mixture_selection_frequency(kernel, thr, ZERO_ONE, reps, seed)
    ok = abs(est.mean - lam) <= 3 * est.stderr
    return Check("mixture-component", "the process-regret minimizer follows the mixture component",
                 {"fraction_f_star_P": est.mean, "stderr": est.stderr, "lambda": lam, "reps": reps,
                  "f_star_P": fp, "f_star_Q": fq},
                 "fraction within lambda +- 3 stderr", ok)


def suite_regression_lower(seed: int, reps: int = 20000, n: int = 8, gamma: float = 0.5) -> Check:
    u, u_low = 0.05, 0.05 - gamma / 5
    inner = adversarial_threshold(n)
    kernel = regression_transform(inner, u, u_low, gamma)
    cls = IntegerThresholdClass(inner.x_len, high=u, low=u_low)
    est = erm_risk_estimate(BatchRule(cls, Loss("absolute")), kernel, reps, seed, keep=False)
    ok = est.mean >= gamma / 80 - 3 * est.stderr
    return Check("regression-lower-bound", "ERM on the relabelled adversarial process keeps absolute risk >= gamma/80",
                 {"mean": est.mean, "stderr": est.stderr, "gamma": gamma, "u": u, "u_low": u_low,
                  "n": n, "reps": reps},
                 "mean >= gamma/80 - 3 stderr", ok)


def suite_umlln(seed: int, reps: int = 10000, ns=(8, 16, 32)) -> Check:
    cls = make_full_binary_class(2)
    P = {(1, 1.0): 0.25, (1, -1.0): 0.25, (2, 1.0): 0.25, (2, -1.0): 0.25}
    means, gap = [], 0.0
    for n in ns:
        m = martingale_deviation(product_iid(P, n), cls, reps, seed)
        u = ulln_deviation(P, n, cls, reps, seed)
        means.append(m.mean)
        gap = max(gap, float(np.abs(m.values - u.values).max()))
    dec = all(a > b for a, b in zip(means, means[1:]))
    return Check("umlln-decay", "martingale deviation decays and equals the iid deviation on product kernels",
                 {"means": dict(zip(map(str, ns), means)), "max_replicate_gap_to_ulln": gap, "reps": reps},
                 "strictly decreasing; replicate gap <= 1e-12", dec and gap <= 1e-12)


SUITES = {
    "halving": suite_halving,
    "dp-bruteforce": suite_dp_bruteforce,
    "lower-1/8": suite_lower,
    "erm-upper": suite_erm_upper,
    "reductions": suite_reductions,
    "preq-decomp": suite_preq_decomp,
    "bijection": suite_bijection,
    "dims-order": suite_dims_order,
    "random-level": suite_random_level,
    "mixture": suite_mixture,
    "regression-lower": suite_regression_lower,
    "umlln": suite_umlln,
}


def verify(suite: str, seed: int = 0, **kwargs) -> VerifyReport:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    return VerifyReport(suite, seed, [SUITES[suite](seed, **kwargs)])
