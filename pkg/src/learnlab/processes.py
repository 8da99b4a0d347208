"""Stochastic-process kernels with explicit conditional distributions.

A kernel maps a realized prefix ``z_{1:t-1}`` (plus an optional hidden record
drawn once per path) to the conditional law ``P_t`` of the next outcome.
Learners only ever see ``Path.outcomes``; the cached conditionals and the
hidden record are read through ``Path.conditionals()`` / ``Path.hidden()``,
which only evaluators call.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from .classes import PROB_TOL, Distribution, FiniteFunctionClass, Outcome, check_distribution

MAX_ADVERSARIAL_N = 24


def replicate_seed_sequence(seed: int, rep: int) -> np.random.SeedSequence:
    """Seed sequence for replicate ``rep`` of a run seeded with ``seed``.

    Equals ``SeedSequence(seed).spawn(R)[rep]`` for any ``R > rep``, so
    serial and parallel runs consume identical streams.
    """
    return np.random.SeedSequence(seed, spawn_key=(rep,))


def replicate_rngs(seed: int, rep: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (process, rule) generators for one replicate."""
    a, b = replicate_seed_sequence(seed, rep).spawn(2)
    return np.random.default_rng(a), np.random.default_rng(b)


def draw(rng: np.random.Generator, P: Distribution) -> Outcome:
    keys = list(P)
    if len(keys) == 1:
        return keys[0]
    cum = np.cumsum([P[k] for k in keys])
    i = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return keys[min(i, len(keys) - 1)]


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def dist_to_json(P: Distribution) -> list:
    return [[_json_value(x), _json_value(y), p] for (x, y), p in P.items()]


def dist_from_json(rows) -> Distribution:
    P: Distribution = {}
    for x, y, p in rows:
        x = tuple(x) if isinstance(x, list) else x
        P[(x, float(y))] = P.get((x, float(y)), 0.0) + float(p)
    return P


@dataclass
class Path:
    outcomes: tuple
    seed: Any = None
    _conditionals: tuple = field(default=(), repr=False)
    _hidden: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.outcomes)

    def conditionals(self) -> tuple:
        """Evaluator-side access to ``P_1..P_n`` along the realized prefix."""
        return self._conditionals

    def hidden(self) -> dict:
        """Evaluator-side access to the latent record."""
        return self._hidden

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "P_t"])
        for t, ((x, y), P) in enumerate(zip(self.outcomes, self._conditionals), start=1):
            w.writerow([t, json.dumps(_json_value(x)), repr(float(y)), json.dumps(dist_to_json(P))])
        return buf.getvalue()


class ProcessKernel:
    """Base kernel. Subclasses implement ``conditional`` and optionally
    ``draw_hidden`` / ``finish_hidden``."""

    horizon: int
    finite = True

    def draw_hidden(self, rng: np.random.Generator) -> dict:
        return {}

    def conditional(self, prefix: tuple, hidden: dict | None = None) -> Distribution:
        raise NotImplementedError

    def finish_hidden(self, outcomes: tuple, hidden: dict) -> dict:
        return hidden

    def stream(self, rng: np.random.Generator, hidden: dict) -> Iterator[tuple[Distribution, Outcome]]:
        """Yield ``(P_t, z_t)`` lazily; a consumer that stops early never
        causes later conditionals to be computed."""
        prefix: list = []
        for _ in range(self.horizon):
            P = self.conditional(tuple(prefix), hidden)
            z = draw(rng, P)
            prefix.append(z)
            yield P, z

    def sample(self, rng: np.random.Generator | int, seed: Any = None) -> Path:
        if not isinstance(rng, np.random.Generator):
            seed = rng if seed is None else seed
            rng = np.random.default_rng(rng)
        hidden = self.draw_hidden(rng)
        conds, outs = [], []
        for P, z in self.stream(rng, hidden):
            conds.append(P)
            outs.append(z)
        return Path(tuple(outs), seed, tuple(conds), self.finish_hidden(tuple(outs), hidden))

    def check_normalized(self, max_paths: int = 100_000, rng=None, samples: int = 200) -> None:
        """Assert every reachable conditional is a distribution: exhaustively
        when the reachable tree is small, else along sampled paths."""
        rng = np.random.default_rng(0) if rng is None else rng
        count = [0]

        def walk(prefix, hidden):
            if len(prefix) == self.horizon:
                return
            P = self.conditional(prefix, hidden)
            check_distribution(P, PROB_TOL)
            count[0] += 1
            if count[0] > max_paths:
                raise OverflowError
            for z in P:
                walk(prefix + (z,), hidden)

        try:
            walk((), self.draw_hidden(rng))
        except OverflowError:
            for _ in range(samples):
                for P, _z in self.stream(rng, self.draw_hidden(rng)):
                    check_distribution(P, PROB_TOL)


class ProductKernel(ProcessKernel):
    def __init__(self, P: Distribution, n: int):
        check_distribution(P)
        self.P, self.horizon = dict(P), n

    def conditional(self, prefix, hidden=None):
        return self.P


def product_iid(P: Distribution, n: int) -> ProductKernel:
    return ProductKernel(P, n)


class MixtureKernel(ProcessKernel):
    """``lam * P^n + (1 - lam) * Q^n`` with disjoint supports."""

    def __init__(self, lam: float, P: Distribution, Q: Distribution, n: int):
        if not 0.0 <= lam <= 1.0:
            raise ValueError("mixture weight must lie in [0, 1]")
        check_distribution(P)
        check_distribution(Q)
        sp = {z for z, p in P.items() if p > 0}
        sq = {z for z, p in Q.items() if p > 0}
        if sp & sq:
            raise ValueError("mixture components must have disjoint supports")
        self.lam, self.P, self.Q, self.horizon = lam, dict(P), dict(Q), n
        self._support_P = sp
        first: Distribution = {}
        for z, p in P.items():
            first[z] = first.get(z, 0.0) + lam * p
        for z, p in Q.items():
            first[z] = first.get(z, 0.0) + (1 - lam) * p
        self.first = {z: p for z, p in first.items() if p > 0}

    def conditional(self, prefix, hidden=None):
        if not prefix:
            return self.first
        return self.P if prefix[0] in self._support_P else self.Q

    def finish_hidden(self, outcomes, hidden):
        return {"component": "P" if outcomes[0] in self._support_P else "Q"}


def mixture_iid(lam: float, P: Distribution, Q: Distribution, n: int) -> MixtureKernel:
    return MixtureKernel(lam, P, Q, n)


class DriftingKernel(ProcessKernel):
    """``P_t = (1 - w_t) P_start + w_t P_end`` independent of the past."""

    def __init__(self, P_start: Distribution, P_end: Distribution, n: int, rate):
        check_distribution(P_start)
        check_distribution(P_end)
        self.P_start, self.P_end, self.horizon, self.rate = dict(P_start), dict(P_end), n, rate
        self._steps = [self._mix(self.weight(t)) for t in range(1, n + 1)]

    def weight(self, t: int) -> float:
        """``w_t = t/n`` for ``rate="linear"``, else ``1 - t**(-rate)``
        (``rate=inf`` gives ``w_t = 1``)."""
        if self.rate == "linear":
            return t / self.horizon
        r = float(self.rate)
        return 1.0 if math.isinf(r) else 1.0 - t ** (-r)

    def _mix(self, w: float) -> Distribution:
        out: Distribution = {}
        for z, p in self.P_start.items():
            out[z] = out.get(z, 0.0) + (1 - w) * p
        for z, p in self.P_end.items():
            out[z] = out.get(z, 0.0) + w * p
        return {z: p for z, p in out.items() if p > 0}

    def conditional(self, prefix, hidden=None):
        return self._steps[len(prefix)]


def drifting_process(P_start: Distribution, P_end: Distribution, n: int, rate) -> DriftingKernel:
    return DriftingKernel(P_start, P_end, n, rate)


class PointMassKernel(ProcessKernel):
    def __init__(self, sequence):
        self.sequence = tuple((x, float(y)) for x, y in sequence)
        self.horizon = len(self.sequence)

    def conditional(self, prefix, hidden=None):
        return {self.sequence[len(prefix)]: 1.0}


def point_mass_process(sequence) -> PointMassKernel:
    return PointMassKernel(sequence)


class AdversarialThresholdKernel(ProcessKernel):
    """The bit-vector threshold process indexed by a hidden ``2**n``-bit vector b.

    Inputs are ``(2**n + 1)``-bit vectors held as integers (most significant
    bit first). At step t the input copies the first ``l_t`` bits of b, then a
    1, then zeros; ``l_t`` grows by ``2**(n-t)`` when the step's sign is +1.
    The label is +1 iff ``X_t <= b1`` (b with a 1 appended), i.e. bit
    ``l_t + 1`` of b.

    With ``bits`` fixed the kernel is ``P_b``; otherwise b is drawn uniformly
    per path, so Monte-Carlo averages are over b as well.
    """

    def __init__(self, n: int, bits: int | None = None):
        if not 1 <= n <= MAX_ADVERSARIAL_N:
            raise ValueError(f"n must lie in [1, {MAX_ADVERSARIAL_N}]")
        self.horizon = n
        self.n = n
        self.b_len = 1 << n
        self.x_len = self.b_len + 1
        if bits is not None and not 0 <= bits < (1 << self.b_len):
            raise ValueError("bit vector out of range")
        self.bits = bits

    def draw_hidden(self, rng):
        if self.bits is not None:
            b = self.bits
        else:
            b = int.from_bytes(rng.bytes((self.b_len + 7) // 8), "big") >> ((-self.b_len) % 8)
        return {"b": b, "truth": (b << 1) | 1}

    def bit(self, b: int, i: int) -> int:
        """``b[i]`` with 1-based, most-significant-first indexing."""
        return (b >> (self.b_len - i)) & 1

    def encode(self, b: int, level: int) -> int:
        """Input vector with prefix ``b[1:level]``, then 1, then zeros."""
        prefix = b >> (self.b_len - level) if level else 0
        return (prefix << (self.x_len - level)) | (1 << (self.x_len - level - 1))

    def level_of(self, x: int) -> int:
        tz = (x & -x).bit_length() - 1
        return self.x_len - 1 - tz

    def label(self, b: int, x: int) -> float:
        return 1.0 if x <= ((b << 1) | 1) else -1.0

    def step(self, b: int, prev_level: int, t: int) -> Distribution:
        hi = prev_level + (1 << (self.n - t))
        x_hi, x_lo = self.encode(b, hi), self.encode(b, prev_level)
        return {(x_hi, self.label(b, x_hi)): 0.5, (x_lo, self.label(b, x_lo)): 0.5}

    def conditional(self, prefix, hidden=None):
        if hidden is None:
            if self.bits is None:
                raise ValueError("conditional needs the hidden bit vector")
            hidden = {"b": self.bits}
        prev = self.level_of(prefix[-1][0]) if prefix else 0
        return self.step(hidden["b"], prev, len(prefix) + 1)

    def finish_hidden(self, outcomes, hidden):
        levels = [self.level_of(x) for x, _ in outcomes]
        return dict(hidden, levels=levels)

    def bitstring(self, x: int, width: int | None = None) -> str:
        return format(x, f"0{width or self.x_len}b")


def adversarial_threshold(n: int, seed: int | None = None, bits: int | None = None) -> AdversarialThresholdKernel:
    """``seed`` fixes b once (the kernel is then a single ``P_b``); with
    neither ``seed`` nor ``bits`` b is redrawn for every path."""
    if seed is not None and bits is None:
        k = AdversarialThresholdKernel(n)
        bits = k.draw_hidden(np.random.default_rng(seed))["b"]
    return AdversarialThresholdKernel(n, bits)


class RegressionTransformKernel(ProcessKernel):
    """Relabels a binary kernel: +1 -> u, -1 -> u_low."""

    def __init__(self, inner: ProcessKernel, u: float, u_low: float, gamma: float):
        if not u > u_low:
            raise ValueError("need u > u'")
        if u - u_low < gamma / 5 - 1e-12:
            raise ValueError("levels must be separated by at least gamma/5")
        self.inner, self.u, self.u_low, self.gamma = inner, float(u), float(u_low), gamma
        self.horizon = inner.horizon

    def up(self, y: float) -> float:
        return self.u if y > 0 else self.u_low

    def down(self, y: float) -> float:
        return 1.0 if y == self.u else -1.0

    def draw_hidden(self, rng):
        return self.inner.draw_hidden(rng)

    def conditional(self, prefix, hidden=None):
        inner_prefix = tuple((x, self.down(y)) for x, y in prefix)
        P = self.inner.conditional(inner_prefix, hidden)
        return {(x, self.up(y)): p for (x, y), p in P.items()}

    def finish_hidden(self, outcomes, hidden):
        inner = self.inner.finish_hidden(tuple((x, self.down(y)) for x, y in outcomes), hidden)
        return dict(inner, u=self.u, u_low=self.u_low, gamma=self.gamma)


def regression_transform(inner: ProcessKernel, u: float, u_low: float, gamma: float) -> RegressionTransformKernel:
    return RegressionTransformKernel(inner, u, u_low, gamma)


def conditional_average(kernel: ProcessKernel, path: Path) -> Distribution:
    """``(1/n) sum_t P_t`` along the realized path."""
    if not getattr(kernel, "finite", True):
        raise TypeError("conditional average needs a finite-outcome kernel")
    n = len(path)
    out: Distribution = {}
    for P in path.conditionals():
        for z, p in P.items():
            out[z] = out.get(z, 0.0) + p / n
    return out


def total_variation(P: Distribution, Q: Distribution) -> float:
    keys = set(P) | set(Q)
    return 0.5 * sum(abs(P.get(z, 0.0) - Q.get(z, 0.0)) for z in keys)


# ------------------------------------------------------------ random level

@dataclass
class RandomLevelPath:
    xs: tuple
    ys: np.ndarray
    seed: Any = None
    _xi0: float = field(default=0.0, repr=False)
    _xi: np.ndarray = field(default=None, repr=False)

    @property
    def outcomes(self) -> tuple:
        return tuple(zip(self.xs, (float(y) for y in self.ys)))

    def __len__(self) -> int:
        return len(self.xs)

    def hidden(self) -> dict:
        return {"xi0": self._xi0, "xi": self._xi}


class RandomLevelProcess:
    """``Y_t = f*(X_t) + xi_t + xi_0`` with ``X_t ~ P_X`` iid and a shared level ``xi_0``.

    Labels are continuous, so there are no finite conditionals; the squared-loss
    conditional risk is available in closed form instead.
    """

    finite = False

    def __init__(self, base: FiniteFunctionClass, theta_star: int, P_X: dict, n: int,
                 noise: bool = True):
        if base.labels.is_binary:
            raise ValueError("random level needs a real-valued base class")
        total = sum(P_X.values())
        if abs(total - 1.0) > PROB_TOL or any(p < 0 for p in P_X.values()):
            raise ValueError("P_X must be a distribution over the domain")
        self.base, self.theta_star, self.P_X, self.horizon = base, theta_star, dict(P_X), n
        self.noise = noise
        self._xs = list(self.P_X)
        self._px = np.array([self.P_X[x] for x in self._xs])
        self._fstar = np.array([base.evaluate(theta_star, x) for x in self._xs])

    def f_star(self, x) -> float:
        return self.base.evaluate(self.theta_star, x)

    def sample(self, rng: np.random.Generator | int, seed: Any = None) -> RandomLevelPath:
        if not isinstance(rng, np.random.Generator):
            seed = rng if seed is None else seed
            rng = np.random.default_rng(rng)
        n = self.horizon
        xi0 = float(rng.standard_normal()) if self.noise else 0.0
        xi = rng.standard_normal(n) if self.noise else np.zeros(n)
        idx = rng.choice(len(self._xs), size=n, p=self._px)
        xs = tuple(self._xs[i] for i in idx)
        ys = self._fstar[idx] + xi + xi0
        return RandomLevelPath(xs, ys, seed, xi0, xi)

    def running_levels(self, path: RandomLevelPath) -> np.ndarray:
        """``U_{t-1} = sum_{i<t} (Y_i - f*(X_i)) / t`` for ``t = 1..n``."""
        resid = np.array([y - self.f_star(x) for x, y in zip(path.xs, path.ys)])
        prev = np.concatenate([[0.0], np.cumsum(resid)[:-1]])
        return prev / np.arange(1, len(resid) + 1)

    def conditional_risk(self, theta: int, offset: float, t: int, U_prev: float) -> float:
        return random_level_conditional_risk(self.base, theta, offset, t, U_prev, self.P_X, self.theta_star)


def random_level(base, theta_star, P_X, n, seed=None, noise: bool = True) -> RandomLevelProcess:
    return RandomLevelProcess(base, theta_star, P_X, n, noise)


def random_level_conditional_risk(base: FiniteFunctionClass, theta: int, offset: float, t: int,
                                  U_prev: float, P_X: dict, theta_star: int) -> float:
    """Squared-loss risk ``1 + 1/t + ||f* - f + U_{t-1}||^2_{L2(P_X)}`` of ``f = f_theta + offset``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    acc = 0.0
    for x, p in P_X.items():
        d = base.evaluate(theta_star, x) - (base.evaluate(theta, x) + offset) + U_prev
        acc += p * d * d
    return 1.0 + 1.0 / t + acc


# ------------------------------------------------------------ JSON specs

def process_from_spec(spec: dict, cls: FiniteFunctionClass | None = None):
    kind = spec["process"]
    n = int(spec.get("n", 0))
    if kind == "product":
        return product_iid(dist_from_json(spec["P"]), n)
    if kind == "mixture":
        return mixture_iid(float(spec["lambda"]), dist_from_json(spec["P"]), dist_from_json(spec["Q"]), n)
    if kind == "drifting":
        rate = spec.get("rate", 1.0)
        return drifting_process(dist_from_json(spec["P_start"]), dist_from_json(spec["P_end"]), n,
                                rate if rate == "linear" else float(rate))
    if kind == "point-mass":
        return point_mass_process([(tuple(x) if isinstance(x, list) else x, y) for x, y in spec["sequence"]])
    if kind == "adversarial-threshold":
        return adversarial_threshold(n, spec.get("seed"), spec.get("bits"))
    if kind == "regression-transform":
        inner = process_from_spec(spec["inner"], cls)
        return regression_transform(inner, float(spec["u"]), float(spec["u_low"]), float(spec["gamma"]))
    if kind == "random-level":
        if cls is None:
            raise ValueError("random-level needs the base class")
        P_X = {tuple(x) if isinstance(x, list) else x: float(p) for x, p in spec["P_X"]}
        return random_level(cls, int(spec["theta_star"]), P_X, n)
    raise ValueError(f"unknown process {kind!r}")
