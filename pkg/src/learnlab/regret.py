"""Regret functionals and Monte-Carlo estimators of the minimax values.

Every estimator runs replicate ``r`` on the generators from
``replicate_rngs(seed, r)``; two estimators called with the same seed
therefore see the same paths.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .classes import (TOL, Distribution, FiniteFunctionClass, FunctionClass, Loss, LossTable,
                      OffsetClass, OutcomeSpace, expected_loss)
from .complexity import ResourceBudgetError
from .learners import BatchRule, OnlineRule, erm_offset, run_prequential
from .processes import (Path, ProcessKernel, RandomLevelProcess, conditional_average, draw,
                        replicate_rngs, total_variation)


@dataclass
class RegretEstimate:
    mean: float
    stderr: float
    reps: int
    seed: int | None = None
    values: np.ndarray | None = field(default=None, repr=False)
    flags: tuple = ()

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")

    @classmethod
    def from_values(cls, values, seed=None, keep: bool = True, flags=()) -> "RegretEstimate":
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        return cls(float(v.mean()), se, len(v), seed, v if keep else None, tuple(flags))

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "reps": self.reps, "seed": self.seed,
                "flags": list(self.flags)}


@dataclass
class DecompositionReport:
    term_I: RegretEstimate
    term_II: RegretEstimate
    term_III: RegretEstimate
    total: RegretEstimate
    max_sum_error: float

    def to_dict(self) -> dict:
        return {"term_I": self.term_I.to_dict(), "term_II": self.term_II.to_dict(),
                "term_III": self.term_III.to_dict(), "total": self.total.to_dict(),
                "max_sum_error": self.max_sum_error}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("LEARNLAB_THREADS", "1")))
    except ValueError:
        return 1


def map_replicates(fn, reps: int, seed: int) -> list:
    """``[fn(seed, r) for r in range(reps)]``, optionally across processes.

    Replicate streams depend only on ``(seed, r)`` and results come back in
    replicate order, so the output does not depend on the worker count.
    """
    workers = min(threads(), reps)
    if workers <= 1:
        return [fn(seed, r) for r in range(reps)]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, itertools.repeat(seed, reps), range(reps),
                           chunksize=max(1, reps // (4 * workers))))


# ------------------------------------------------------------ functionals

def p_regret(P: Distribution, member: int, cls: FiniteFunctionClass, loss: Loss) -> float:
    risk = LossTable(cls, loss).risk(P)
    return float(risk[member] - risk.min())


def _time_average_risk(conds, table: LossTable) -> np.ndarray:
    """``(1/n) sum_t l(P_t, .)`` over all members; identical conditionals are
    evaluated once and weighted by their multiplicity."""
    groups: dict[int, list] = {}
    for P in conds:
        g = groups.setdefault(id(P), [P, 0])
        g[1] += 1
    n = len(conds)
    out = np.zeros(len(table.cls))
    for P, k in groups.values():
        out = out + (k / n) * table.risk(P)
    return out


def _implicit_risks(cls: FunctionClass, loss: Loss, conds, members) -> np.ndarray:
    n = len(conds)
    out = np.zeros(len(members))
    for P in conds:
        out += np.array([sum(p * loss(y, cls.evaluate(m, x)) for (x, y), p in P.items())
                         for m in members]) / n
    return out


def _risk_and_best(cls: FunctionClass, loss: Loss, conds, member: int,
                   table: LossTable | None = None) -> tuple[float, float]:
    """``((1/n) sum_t l(P_t, member), min_f (1/n) sum_t l(P_t, f))``."""
    if isinstance(cls, FiniteFunctionClass):
        R = _time_average_risk(conds, table or LossTable(cls, loss))
        return float(R[member]), float(R.min())
    points = [x for P in conds for x, _ in P]
    reps = [lo for lo, _ in cls.cells(points)]
    R = _implicit_risks(cls, loss, conds, reps + [member])
    return float(R[-1]), float(R[:-1].min())


def process_regret(kernel: ProcessKernel, path: Path, member: int, cls: FiniteFunctionClass,
                   loss: Loss) -> float:
    """``R_n(Z, f) = (1/n) sum_t p_regret(P_t, f)`` along the realized path."""
    if not getattr(kernel, "finite", True):
        raise TypeError("process regret needs a finite kernel; use the closed-form risk")
    table = LossTable(cls, loss)
    conds = path.conditionals()
    R = _time_average_risk(conds, table)
    best = sum(table.risk(P).min() for P in conds) / len(conds)
    return float(R[member] - best)


def process_argmin(path: Path, cls: FiniteFunctionClass, loss: Loss) -> int:
    R = _time_average_risk(path.conditionals(), LossTable(cls, loss))
    return int(np.flatnonzero(R <= R.min() + TOL)[0])


def _preq_regret(preds: np.ndarray, rows: np.ndarray) -> float:
    return float((preds * rows).sum(axis=1).mean() - rows.mean(axis=0).min())


def sequence_regret(rule: OnlineRule, seq) -> float:
    """Expected normalized regret of ``rule`` on the individual sequence ``seq``."""
    rule.reset()
    preds, rows = [], []
    for z in seq:
        preds.append(rule.predict())
        rows.append(rule.table.vector(z))
        rule.update(z)
    return _preq_regret(np.array(preds), np.array(rows))


# ------------------------------------------------------------ estimators

def _gen_replicate(rule: BatchRule, kernel: ProcessKernel, seed: int, rep: int) -> tuple[float, float]:
    rng_p, rng_r = replicate_rngs(seed, rep)
    path = kernel.sample(rng_p, seed=(seed, rep))
    fhat = rule(path.outcomes, rng_r)
    return _risk_and_best(rule.cls, rule.loss, path.conditionals(), fhat)


def gen_value_estimate(rule: BatchRule, kernel: ProcessKernel, reps: int, seed: int,
                       keep: bool = True) -> RegretEstimate:
    """Mean of ``R_n(Z, f_hat) - min_f R_n(Z, f)`` over sampled paths."""
    out = map_replicates(partial(_gen_replicate, rule, kernel), reps, seed)
    return RegretEstimate.from_values([a - b for a, b in out], seed, keep)


def erm_risk_estimate(rule: BatchRule, kernel: ProcessKernel, reps: int, seed: int,
                      keep: bool = True) -> RegretEstimate:
    """Mean of ``(1/n) sum_t l(P_t, f_hat)`` (no comparator term)."""
    out = map_replicates(partial(_gen_replicate, rule, kernel), reps, seed)
    return RegretEstimate.from_values([a for a, _ in out], seed, keep)


def _iid_replicate(rule: BatchRule, P: Distribution, n: int, seed: int, rep: int) -> float:
    rng_p, rng_r = replicate_rngs(seed, rep)
    sample = [draw(rng_p, P) for _ in range(n)]
    fhat = rule(sample, rng_r)
    risk = LossTable(rule.cls, rule.loss).risk(P)
    return float(risk[fhat] - risk.min())


def iid_value_estimate(rule: BatchRule, P: Distribution, n: int, reps: int, seed: int,
                       keep: bool = True) -> RegretEstimate:
    """Mean of ``p_regret(P, f_hat)`` under iid sampling from ``P``."""
    return RegretEstimate.from_values(
        map_replicates(partial(_iid_replicate, rule, P, n), reps, seed), seed, keep)


def _preq_replicate(rule: OnlineRule, kernel: ProcessKernel, seed: int, rep: int) -> float:
    rng_p, _ = replicate_rngs(seed, rep)
    traj = run_prequential(rule, kernel, rng=rng_p)
    return _preq_regret(traj.predictions, traj.risks)


def preq_value_estimate(rule: OnlineRule, kernel: ProcessKernel, reps: int, seed: int,
                        keep: bool = True) -> RegretEstimate:
    """Mean of ``(1/n) sum_t E_{f~p_t} l(P_t, f) - min_f (1/n) sum_t l(P_t, f)``."""
    return RegretEstimate.from_values(
        map_replicates(partial(_preq_replicate, rule, kernel), reps, seed), seed, keep)


def _decomp_replicate(rule: OnlineRule, kernel: ProcessKernel, seed: int, rep: int):
    rng_p, _ = replicate_rngs(seed, rep)
    tr = run_prequential(rule, kernel, rng=rng_p)
    emp_best = tr.losses.mean(axis=0).min()
    cond_best = tr.risks.mean(axis=0).min()
    t1 = float((tr.conditional_risk - tr.incurred).mean())
    t2 = float(tr.incurred.mean() - emp_best)
    t3 = float(emp_best - cond_best)
    total = _preq_regret(tr.predictions, tr.risks)
    return t1, t2, t3, total


def decomposition_report(rule: OnlineRule, kernel: ProcessKernel, reps: int, seed: int) -> DecompositionReport:
    """Split the prequential regret into the martingale term (I), the
    individual-sequence regret (II) and the empirical-vs-conditional
    comparator gap (III)."""
    out = np.array(map_replicates(partial(_decomp_replicate, rule, kernel), reps, seed))
    err = float(np.abs(out[:, :3].sum(axis=1) - out[:, 3]).max())
    ests = [RegretEstimate.from_values(out[:, i], seed) for i in range(4)]
    return DecompositionReport(*ests, max_sum_error=err)


def online_worst_case(rule: OnlineRule, cls: FiniteFunctionClass, loss: Loss, n: int,
                      mode: str = "exact", seed: int = 0, budget: int = 1_000_000,
                      restarts: int = 20) -> RegretEstimate:
    """Worst expected normalized regret over sequences in ``Z^n``.

    ``exact`` enumerates every sequence (depth-first, sharing prefixes);
    ``search`` runs a randomized coordinate-ascent adversary and the result
    is flagged as a lower estimate.
    """
    outcomes = OutcomeSpace.of(cls.domain, cls.labels).pairs
    table = LossTable(cls, loss)
    if mode == "exact":
        if len(outcomes) ** n > budget:
            raise ResourceBudgetError(f"|Z|^n = {len(outcomes)}^{n} sequences", budget)
        rule.reset()
        best = [-math.inf, None]
        seq: list = []

        def dfs(expected: float, cum: np.ndarray):
            if len(seq) == n:
                v = (expected - cum.min()) / n
                if v > best[0]:
                    best[0], best[1] = v, tuple(seq)
                return
            p = rule.predict()
            state = rule.snapshot()
            for z in outcomes:
                vec = table.vector(z)
                rule.update(z)
                seq.append(z)
                dfs(expected + float(p @ vec), cum + vec)
                seq.pop()
                rule.restore(state)

        dfs(0.0, np.zeros(len(cls)))
        est = RegretEstimate(best[0], 0.0, len(outcomes) ** n, seed, flags=("exact",))
        est.argmax = best[1]
        return est
    if mode != "search":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    best_v, best_seq = -math.inf, None
    for _ in range(restarts):
        s = [outcomes[i] for i in rng.integers(len(outcomes), size=n)]
        cur = sequence_regret(rule, s)
        improved = True
        while improved:
            improved = False
            for t in rng.permutation(n):
                for z in outcomes:
                    cand = s[:t] + [z] + s[t + 1:]
                    v = sequence_regret(rule, cand)
                    if v > cur + 1e-12:
                        s, cur, improved = cand, v, True
        if cur > best_v:
            best_v, best_seq = cur, tuple(s)
    est = RegretEstimate(best_v, 0.0, restarts, seed, flags=("lower-estimate",))
    est.argmax = best_seq
    return est


def _x_matrix(cls: FiniteFunctionClass, P: Distribution) -> np.ndarray:
    m = np.zeros(len(cls))
    for (x, _), p in P.items():
        m = m + p * cls.column(x)
    return m


def _umlln_replicate(kernel: ProcessKernel, cls: FiniteFunctionClass, seed: int, rep: int) -> float:
    rng_p, _ = replicate_rngs(seed, rep)
    path = kernel.sample(rng_p, seed=(seed, rep))
    acc = np.zeros(len(cls))
    for (x, _), P in zip(path.outcomes, path.conditionals()):
        acc = acc + (cls.column(x) - _x_matrix(cls, P))
    return float(np.abs(acc / len(path)).max())


def martingale_deviation(kernel: ProcessKernel, cls: FiniteFunctionClass, reps: int, seed: int,
                         keep: bool = True) -> RegretEstimate:
    """Mean of ``sup_f |(1/n) sum_t (f(X_t) - E[f(X_t) | Z_{1:t-1}])|`` under the
    natural filtration, with exact conditional means from the kernel."""
    return RegretEstimate.from_values(
        map_replicates(partial(_umlln_replicate, kernel, cls), reps, seed), seed, keep)


def _ulln_replicate(P: Distribution, n: int, cls: FiniteFunctionClass, seed: int, rep: int) -> float:
    rng_p, _ = replicate_rngs(seed, rep)
    xs = [draw(rng_p, P)[0] for _ in range(n)]
    emp = np.mean([cls.column(x) for x in xs], axis=0)
    return float(np.abs(emp - _x_matrix(cls, P)).max())


def ulln_deviation(P: Distribution, n: int, cls: FiniteFunctionClass, reps: int, seed: int,
                   keep: bool = True) -> RegretEstimate:
    """Mean of ``sup_f |(1/n) sum_t f(X_t) - P f|`` for iid draws from ``P``."""
    return RegretEstimate.from_values(
        map_replicates(partial(_ulln_replicate, P, n, cls), reps, seed), seed, keep)


def stationary_gap(kernel: ProcessKernel, path: Path, cls: FiniteFunctionClass, loss: Loss,
                   P_star: Distribution) -> tuple[float, float]:
    """``(sup_f |l(P*, f) - l(P_bar, f)|, TV(P*, P_bar))``; the first never
    exceeds the loss bound times the second."""
    P_bar = conditional_average(kernel, path)
    table = LossTable(cls, loss)
    gap = float(np.abs(table.risk(P_star) - table.risk(P_bar)).max())
    tv = total_variation(P_star, P_bar)
    if gap > loss.bound(cls.labels) * tv + 1e-9:
        raise AssertionError(f"risk gap {gap} exceeds B * TV = {loss.bound(cls.labels) * tv}")
    return gap, tv


# ------------------------------------------------------------ example-specific

def _mixture_replicate(kernel, cls, loss, target, seed, rep) -> float:
    rng_p, _ = replicate_rngs(seed, rep)
    path = kernel.sample(rng_p, seed=(seed, rep))
    return float(process_argmin(path, cls, loss) == target)


def mixture_selection_frequency(kernel, cls: FiniteFunctionClass, loss: Loss, reps: int,
                                seed: int) -> tuple[RegretEstimate, int, int]:
    """Fraction of paths whose exact ``argmin_f R_n`` is ``f*_P``.

    Returns the estimate together with ``f*_P`` and ``f*_Q``.
    """
    table = LossTable(cls, loss)
    rp, rq = table.risk(kernel.P), table.risk(kernel.Q)
    fp, fq = int(rp.argmin()), int(rq.argmin())
    if np.sum(rp <= rp.min() + TOL) > 1 or np.sum(rq <= rq.min() + TOL) > 1 or fp == fq:
        raise ValueError("need unique and distinct minimizers under P and Q")
    est = RegretEstimate.from_values(
        map_replicates(partial(_mixture_replicate, kernel, cls, loss, fp), reps, seed), seed)
    return est, fp, fq


def _random_level_replicate(proc: RandomLevelProcess, seed: int, rep: int) -> tuple[float, float, float]:
    rng_p, _ = replicate_rngs(seed, rep)
    path = proc.sample(rng_p, seed=(seed, rep))
    theta, c = erm_offset(OffsetClass(proc.base), path.outcomes)
    U = proc.running_levels(path)
    n = len(path)
    risk = np.mean([proc.conditional_risk(theta, c, t, U[t - 1]) for t in range(1, n + 1)])
    resid = sum(y - proc.f_star(x) for x, y in zip(path.xs, path.ys))
    U_n = resid / (n + 1)
    xi0 = path.hidden()["xi0"]
    return float(risk), abs(U_n - xi0), abs(c - xi0)


def random_level_estimates(proc: RandomLevelProcess, reps: int, seed: int) -> dict[str, RegretEstimate]:
    """Offset-ERM conditional risk ``(1/n) sum_t l(P_t, f_hat)``, ``|U_n - xi_0|``
    and ``|c_hat - xi_0|`` averaged over paths."""
    out = np.array(map_replicates(partial(_random_level_replicate, proc), reps, seed))
    return {"risk": RegretEstimate.from_values(out[:, 0], seed),
            "level_error": RegretEstimate.from_values(out[:, 1], seed),
            "offset_error": RegretEstimate.from_values(out[:, 2], seed)}
