"""Batch and online learning rules and the prequential runner."""
from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .classes import (TOL, FiniteFunctionClass, FunctionClass, Loss, LossTable, OffsetClass)
from .processes import ProcessKernel, dist_to_json, _json_value

TIE_BREAKS = ("lowest-index", "highest-index", "seeded-random")


def _python_rng(rng: np.random.Generator) -> random.Random:
    return random.Random(int(rng.integers(0, 2 ** 63)))


def erm(cls: FunctionClass, loss: Loss, sample, tie_break: str = "lowest-index",
        rng: np.random.Generator | None = None) -> int:
    """Index of an empirical risk minimizer; ties resolved by ``tie_break``.

    For implicit classes the search runs over cells of members that agree on
    the sample, so ``seeded-random`` is uniform over *all* tied members.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    loss.check_labels(cls.labels)
    if isinstance(cls, FiniteFunctionClass):
        table = LossTable(cls, loss)
        emp = np.zeros(len(cls))
        for z in sample:
            emp = emp + table.vector(z)
        ties = np.flatnonzero(emp <= emp.min() + TOL)
        if tie_break == "lowest-index":
            return int(ties[0])
        if tie_break == "highest-index":
            return int(ties[-1])
        if rng is None:
            raise ValueError("seeded-random tie break needs an rng")
        return int(ties[rng.integers(len(ties))])

    cells = cls.cells([x for x, _ in sample])
    emp = [sum(loss(y, cls.evaluate(lo, x)) for x, y in sample) for lo, _ in cells]
    best = min(emp)
    tied = [c for c, e in zip(cells, emp) if e <= best + TOL]
    if tie_break == "lowest-index":
        return tied[0][0]
    if tie_break == "highest-index":
        return tied[-1][1]
    if rng is None:
        raise ValueError("seeded-random tie break needs an rng")
    pr = _python_rng(rng)
    k = pr.randrange(sum(hi - lo + 1 for lo, hi in tied))
    for lo, hi in tied:
        if k <= hi - lo:
            return lo + k
        k -= hi - lo + 1
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class BatchRule:
    cls: FunctionClass
    loss: Loss
    tie_break: str = "lowest-index"

    def __call__(self, sample, rng: np.random.Generator | None = None) -> int:
        return erm(self.cls, self.loss, sample, self.tie_break, rng)


def erm_offset(offset_class: OffsetClass, sample) -> tuple[int, float]:
    """Squared-loss ERM over ``f_theta + c``: per theta the best offset is the
    mean residual, then the smallest residual sum of squares wins (lowest theta on ties)."""
    if not sample:
        raise ValueError("offset ERM needs a nonempty sample")
    base = offset_class.base
    idx = [base.domain.index(x) for x, _ in sample]
    ys = np.array([y for _, y in sample], dtype=float)
    F = base.values[:, idx]  # (|F|, m)
    resid = ys[None, :] - F
    c = resid.mean(axis=1)
    rss = ((resid - c[:, None]) ** 2).sum(axis=1)
    theta = int(np.flatnonzero(rss <= rss.min() + TOL * max(1.0, rss.min()))[0])
    return theta, float(c[theta])


# ---------------------------------------------------------------- online

class OnlineRule:
    """Prediction is a distribution over class members; ``predict`` may only
    depend on outcomes passed to ``update`` so far."""

    def reset(self) -> None:
        raise NotImplementedError

    def predict(self) -> np.ndarray:
        raise NotImplementedError

    def update(self, z) -> None:
        raise NotImplementedError

    def snapshot(self):
        raise NotImplementedError

    def restore(self, state) -> None:
        raise NotImplementedError


class Hedge(OnlineRule):
    """Exponential weights over a finite class.

    ``schedule="anytime"`` uses ``eta_t = sqrt(8 ln|F| / t) / B`` at round t;
    ``schedule="fixed"`` uses ``sqrt(8 ln|F| / horizon) / B`` throughout.
    """

    def __init__(self, cls: FiniteFunctionClass, loss: Loss, schedule: str = "anytime",
                 horizon: int | None = None, eta: float | None = None):
        self.cls, self.loss = cls, loss
        self.table = LossTable(cls, loss)
        self.bound = loss.bound(cls.labels)
        if schedule not in ("anytime", "fixed", "constant"):
            raise ValueError(f"unknown schedule {schedule!r}")
        if schedule == "fixed" and not horizon:
            raise ValueError("fixed schedule needs the horizon")
        if schedule == "constant" and eta is None:
            raise ValueError("constant schedule needs eta")
        self.schedule, self.horizon, self.eta_const = schedule, horizon, eta
        self.reset()

    def reset(self) -> None:
        self.cum = np.zeros(len(self.cls))
        self.t = 0

    def eta(self, t: int) -> float:
        k = len(self.cls)
        if self.schedule == "constant":
            return self.eta_const
        denom = t if self.schedule == "anytime" else self.horizon
        return math.sqrt(8 * math.log(k) / denom) / self.bound if k > 1 else 0.0

    def predict(self) -> np.ndarray:
        eta = self.eta(self.t + 1)
        w = np.exp(-eta * (self.cum - self.cum.min()))
        return w / w.sum()

    def update(self, z) -> None:
        self.cum = self.cum + self.table.vector(z)
        self.t += 1

    def snapshot(self):
        return self.cum.copy(), self.t

    def restore(self, state) -> None:
        self.cum, self.t = state[0].copy(), state[1]


def hedge(cls: FiniteFunctionClass, loss: Loss, learning_rate_schedule: str = "anytime",
          horizon: int | None = None) -> Hedge:
    return Hedge(cls, loss, learning_rate_schedule, horizon)


class FollowTheLeader(OnlineRule):
    """Deterministic: plays the lowest-index empirical minimizer so far."""

    def __init__(self, cls: FiniteFunctionClass, loss: Loss):
        self.cls, self.loss = cls, loss
        self.table = LossTable(cls, loss)
        self.reset()

    def reset(self) -> None:
        self.cum = np.zeros(len(self.cls))

    def predict(self) -> np.ndarray:
        p = np.zeros(len(self.cls))
        p[int(np.flatnonzero(self.cum <= self.cum.min() + TOL)[0])] = 1.0
        return p

    def update(self, z) -> None:
        self.cum = self.cum + self.table.vector(z)

    def snapshot(self):
        return self.cum.copy()

    def restore(self, state) -> None:
        self.cum = state.copy()


# ------------------------------------------------------------ prequential

@dataclass
class Trajectory:
    predictions: np.ndarray  # (n, |F|), row t is the law of f_hat_{t-1}
    outcomes: list
    losses: np.ndarray  # (n, |F|), l(z_t, f)
    risks: np.ndarray  # (n, |F|), l(P_t, f)
    conditionals: list = field(default_factory=list, repr=False)

    @property
    def incurred(self) -> np.ndarray:
        return (self.predictions * self.losses).sum(axis=1)

    @property
    def conditional_risk(self) -> np.ndarray:
        return (self.predictions * self.risks).sum(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "prediction", "x", "y", "loss", "conditional_risk"])
        for t in range(len(self.outcomes)):
            x, y = self.outcomes[t]
            w.writerow([t + 1, json.dumps([round(float(p), 15) for p in self.predictions[t]]),
                        json.dumps(_json_value(x)), repr(float(y)),
                        repr(float(self.incurred[t])), repr(float(self.conditional_risk[t]))])
        return buf.getvalue()


def run_prequential(rule: OnlineRule, kernel: ProcessKernel, seed=None,
                    rng: np.random.Generator | None = None) -> Trajectory:
    """Play ``rule`` against ``kernel``: predict from the prefix, then reveal ``P_t`` and ``z_t``."""
    if rng is None:
        rng = np.random.default_rng(seed)
    rule.reset()
    table = rule.table
    hidden = kernel.draw_hidden(rng)
    steps = kernel.stream(rng, hidden)
    preds, outs, losses, risks, conds = [], [], [], [], []
    for _ in range(kernel.horizon):
        preds.append(rule.predict())
        P, z = next(steps)
        risks.append(table.risk(P))
        losses.append(table.vector(z))
        outs.append(z)
        conds.append(P)
        rule.update(z)
    return Trajectory(np.array(preds), outs, np.array(losses), np.array(risks), conds)


def rule_from_spec(spec: dict, cls: FunctionClass, loss: Loss, horizon: int | None = None):
    kind = spec.get("rule", "erm")
    if kind == "erm":
        return BatchRule(cls, loss, spec.get("tie_break", "lowest-index"))
    if kind == "hedge":
        schedule = spec.get("schedule", "anytime")
        return Hedge(cls, loss, schedule, horizon if schedule == "fixed" else None)
    if kind == "ftl":
        return FollowTheLeader(cls, loss)
    raise ValueError(f"unknown rule {kind!r}")
