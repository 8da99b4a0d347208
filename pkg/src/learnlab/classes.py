"""Finite function classes, label spaces, losses and loss classes.

A class member is addressed by an integer index. ``FiniteFunctionClass`` keeps
an explicit value matrix; ``IntegerThresholdClass`` represents the (huge)
class of thresholds over a bit-vector domain without materializing it.
Both expose ``evaluate(member, x)`` and ``cells(points)``, which is all the
learners and estimators need.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

TOL = 1e-9
PROB_TOL = 1e-12

Outcome = tuple  # (x, y)
Distribution = dict  # Outcome -> probability


class EmptyClass:
    """Marker for a restriction with no surviving functions."""

    def __len__(self) -> int:
        return 0

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = EmptyClass()


@dataclass(frozen=True)
class Domain:
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("domain must be nonempty")
        if len(set(self.points)) != len(self.points):
            raise ValueError("domain points must be distinct")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    @property
    def size(self) -> int:
        return len(self.points)

    def index(self, x: Hashable) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise KeyError(f"point {x!r} not in domain") from None

    def __contains__(self, x) -> bool:
        return x in self._index

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class LabelSpace:
    """Either the binary labels {-1, +1} or a finite increasing real grid.

    ``bounded=False`` lifts the [-1, 1] range check; it is used only for
    derived loss classes whose values can reach the loss bound.
    """

    kind: str
    values: tuple
    bounded: bool = True

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if self.kind == "binary":
            if vals != (-1.0, 1.0):
                raise ValueError("binary labels must be exactly (-1, +1)")
        elif self.kind == "real-grid":
            if not vals:
                raise ValueError("empty label grid")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError("grid values must be strictly increasing")
            if self.bounded and (vals[0] < -1 - TOL or vals[-1] > 1 + TOL):
                raise ValueError("grid values must lie in [-1, 1]")
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")

    @classmethod
    def binary(cls) -> "LabelSpace":
        return cls("binary", (-1.0, 1.0))

    @classmethod
    def grid(cls, values: Iterable[float], bounded: bool = True) -> "LabelSpace":
        return cls("real-grid", tuple(sorted(set(float(v) for v in values))), bounded)

    @property
    def is_binary(self) -> bool:
        return self.kind == "binary"

    def __contains__(self, y) -> bool:
        return any(abs(float(y) - v) <= TOL for v in self.values)

    @property
    def spread(self) -> float:
        return self.values[-1] - self.values[0]


@dataclass(frozen=True)
class Loss:
    kind: str

    def __post_init__(self):
        if self.kind not in ("zero-one", "absolute", "squared"):
            raise ValueError(f"unknown loss {self.kind!r}")

    def __call__(self, y: float, fx: float) -> float:
        if self.kind == "zero-one":
            return 0.0 if y == fx else 1.0
        d = y - fx
        return abs(d) if self.kind == "absolute" else d * d

    def check_labels(self, labels: LabelSpace) -> None:
        if self.kind == "zero-one" and not labels.is_binary:
            raise ValueError("zero-one loss requires binary labels")

    def bound(self, labels: LabelSpace) -> float:
        """Largest loss value achievable with labels and predictions in ``labels``."""
        self.check_labels(labels)
        if self.kind == "zero-one":
            return 1.0
        return labels.spread if self.kind == "absolute" else labels.spread ** 2


class FunctionClass:
    """Common surface of explicit and implicit classes."""

    labels: LabelSpace

    def evaluate(self, member: int, x) -> float:
        raise NotImplementedError

    def cells(self, points: Sequence) -> list[tuple[int, int]]:
        """Ranges ``(lo, hi)`` of member indices, in index order, whose members
        agree on every point in ``points``. Together they cover the class."""
        raise NotImplementedError


class FiniteFunctionClass(FunctionClass):
    """Value matrix of shape ``(|F|, |X|)``; entry ``(j, i)`` is ``f_j(x_i)``."""

    def __init__(self, domain: Domain | Sequence, labels: LabelSpace, values,
                 names: Sequence[str] | None = None, derived: bool = False):
        self.domain = domain if isinstance(domain, Domain) else Domain(tuple(domain))
        self.labels = labels
        vals = np.array(values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] != self.domain.size:
            raise ValueError(f"values must have shape (|F|>=1, {self.domain.size}), got {vals.shape}")
        grid = np.array(labels.values)
        dist = np.abs(vals[..., None] - grid).min(axis=-1)
        if np.any(dist > TOL):
            raise ValueError("class values must be members of the label space")
        # snap onto the grid so equality tests downstream are exact
        vals = grid[np.abs(vals[..., None] - grid).argmin(axis=-1)]
        vals.setflags(write=False)
        self.values = vals
        self.derived = derived
        if not derived and len({r.tobytes() for r in vals}) != len(vals):
            raise ValueError("duplicate function rows")
        if names is not None and len(names) != len(vals):
            raise ValueError("names must match number of functions")
        self.names = tuple(names) if names is not None else None

    def __len__(self) -> int:
        return self.values.shape[0]

    def __repr__(self) -> str:
        return f"FiniteFunctionClass(|F|={len(self)}, |X|={self.domain.size}, {self.labels.kind})"

    def column(self, x) -> np.ndarray:
        return self.values[:, self.domain.index(x)]

    def evaluate(self, member: int, x) -> float:
        return float(self.values[member, self.domain.index(x)])

    def cells(self, points):
        return [(j, j) for j in range(len(self))]

    def subclass(self, rows: Sequence[int]) -> "FiniteFunctionClass":
        rows = list(rows)
        names = [self.names[j] for j in rows] if self.names else None
        return FiniteFunctionClass(self.domain, self.labels, self.values[rows], names, self.derived)

    def to_dict(self) -> dict:
        d = {"domain": list(self.domain.points),
             "labels": {"kind": self.labels.kind, "values": list(self.labels.values)},
             "values": self.values.tolist()}
        if self.names:
            d["names"] = list(self.names)
        return d


class IntegerThresholdClass(FunctionClass):
    """Thresholds ``x -> high if x <= c else low`` for ``c`` in ``[0, 2**bits)``.

    Members are the integers ``c`` themselves. Domain points are the integers
    ``[0, 2**bits)``, read as big-endian bit vectors of length ``bits``.
    """

    def __init__(self, bits: int, high: float = 1.0, low: float = -1.0):
        if bits < 1:
            raise ValueError("bits must be positive")
        if not high > low:
            raise ValueError("high level must exceed low level")
        self.bits = bits
        self.size = 1 << bits
        self.high, self.low = float(high), float(low)
        if (self.high, self.low) == (1.0, -1.0):
            self.labels = LabelSpace.binary()
        else:
            self.labels = LabelSpace.grid((low, high))

    def __repr__(self) -> str:
        return f"IntegerThresholdClass(bits={self.bits}, high={self.high}, low={self.low})"

    def __len__(self) -> int:
        return self.size

    def evaluate(self, member: int, x: int) -> float:
        return self.high if x <= member else self.low

    def cells(self, points):
        pts = sorted(set(int(p) for p in points))
        top = self.size - 1
        if pts and (pts[0] < 0 or pts[-1] > top):
            raise ValueError("point outside the bit-vector domain")
        out = []
        if not pts or pts[0] > 0:
            out.append((0, (pts[0] - 1) if pts else top))
        for a, b in zip(pts, pts[1:] + [top + 1]):
            out.append((a, b - 1))
        return out


@dataclass(frozen=True)
class OutcomeSpace:
    pairs: tuple

    @classmethod
    def of(cls, domain: Domain, labels: LabelSpace) -> "OutcomeSpace":
        return cls(tuple(itertools.product(domain.points, labels.values)))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class OffsetClass:
    """``{f_theta + c}`` over a real-grid base class and a free real offset ``c``."""

    base: FiniteFunctionClass

    def __post_init__(self):
        if self.base.labels.is_binary:
            raise ValueError("offset class needs a real-grid base")

    def evaluate(self, theta: int, c: float, x) -> float:
        return self.base.evaluate(theta, x) + c


# ---------------------------------------------------------------- builders

def make_threshold_class(k: int) -> FiniteFunctionClass:
    """Thresholds ``f_theta(x) = +1 iff x > theta`` on ``{1..k}``, ``theta = 0..k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    xs = np.arange(1, k + 1)
    vals = [np.where(xs > theta, 1.0, -1.0) for theta in range(k + 1)]
    return FiniteFunctionClass(Domain(tuple(range(1, k + 1))), LabelSpace.binary(), vals,
                               names=[f"theta={t}" for t in range(k + 1)])


def make_full_binary_class(m: int) -> FiniteFunctionClass:
    rows = list(itertools.product((-1.0, 1.0), repeat=m))
    return FiniteFunctionClass(Domain(tuple(range(1, m + 1))), LabelSpace.binary(), rows)


def make_bounded_variation_class(grid_size: int, V: float, value_grid: LabelSpace) -> FiniteFunctionClass:
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    if V < 0:
        raise ValueError("variation budget must be nonnegative")
    if value_grid.is_binary:
        raise ValueError("value grid must be a real grid")
    rows = [r for r in itertools.product(value_grid.values, repeat=grid_size)
            if sum(abs(b - a) for a, b in zip(r, r[1:])) <= V + TOL]
    return FiniteFunctionClass(Domain(tuple(range(1, grid_size + 1))), value_grid, rows)


def make_bit_threshold_class(n: int, truths_only: bool = True) -> FiniteFunctionClass:
    """Explicit thresholds ``x -> +1 iff x <= c`` over the ``(2**n + 1)``-bit domain.

    With ``truths_only`` the members are the odd thresholds ``c = b1`` for every
    ``2**n``-bit vector ``b``, i.e. exactly the truths of the adversarial process.
    """
    bits = (1 << n) + 1
    if bits > 12:
        raise ValueError("explicit bit-threshold class too large; use IntegerThresholdClass")
    xs = np.arange(1 << bits)
    cs = range(1, 1 << bits, 2) if truths_only else range(1 << bits)
    rows = [np.where(xs <= c, 1.0, -1.0) for c in cs]
    return FiniteFunctionClass(Domain(tuple(int(x) for x in xs)), LabelSpace.binary(), rows,
                               names=[f"c={c}" for c in cs])


def random_binary_class(rng: np.random.Generator, max_functions: int, max_points: int,
                        min_functions: int = 1) -> FiniteFunctionClass:
    m = int(rng.integers(1, max_points + 1))
    k = int(rng.integers(min_functions, min(max_functions, 2 ** m) + 1))
    rows = rng.choice(2 ** m, size=k, replace=False)
    vals = [[1.0 if (r >> i) & 1 else -1.0 for i in range(m)] for r in rows]
    return FiniteFunctionClass(Domain(tuple(range(m))), LabelSpace.binary(), vals)


def random_grid_class(rng: np.random.Generator, max_functions: int, max_points: int,
                      grid=(-1.0, -0.5, 0.0, 0.5, 1.0)) -> FiniteFunctionClass:
    m = int(rng.integers(1, max_points + 1))
    total = len(grid) ** m
    k = int(rng.integers(1, min(max_functions, total) + 1))
    codes = rng.choice(total, size=k, replace=False)
    vals = []
    for c in codes:
        row = []
        for _ in range(m):
            row.append(grid[c % len(grid)])
            c //= len(grid)
        vals.append(row)
    return FiniteFunctionClass(Domain(tuple(range(m))), LabelSpace.grid(grid), vals)


# ---------------------------------------------------------------- losses

def loss_eval(loss: Loss, z: Outcome, cls: FunctionClass, member: int) -> float:
    loss.check_labels(cls.labels)
    x, y = z
    return loss(y, cls.evaluate(member, x))


def check_distribution(P: Distribution, tol: float = PROB_TOL) -> None:
    if not P:
        raise ValueError("empty distribution")
    if any(p < 0 for p in P.values()):
        raise ValueError("negative probability mass")
    total = sum(P.values())
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution sums to {total!r}, not 1")


def expected_loss(loss: Loss, P: Distribution, cls: FunctionClass, member: int) -> float:
    """``l(P, f) = sum_z P(z) l(z, f)``."""
    check_distribution(P)
    return sum(p * loss_eval(loss, z, cls, member) for z, p in P.items())


class LossTable:
    """Cached per-outcome loss vectors over all members of a finite class."""

    def __init__(self, cls: FiniteFunctionClass, loss: Loss):
        loss.check_labels(cls.labels)
        self.cls, self.loss = cls, loss
        self._cache: dict = {}

    def vector(self, z: Outcome) -> np.ndarray:
        v = self._cache.get(z)
        if v is None:
            x, y = z
            col = self.cls.column(x)
            if self.loss.kind == "zero-one":
                v = (col != y).astype(float)
            elif self.loss.kind == "absolute":
                v = np.abs(y - col)
            else:
                v = (y - col) ** 2
            v.setflags(write=False)
            self._cache[z] = v
        return v

    def risk(self, P: Distribution) -> np.ndarray:
        out = np.zeros(len(self.cls))
        for z, p in P.items():
            out = out + p * self.vector(z)
        return out


def loss_class(cls: FiniteFunctionClass, loss: Loss) -> FiniteFunctionClass:
    """Class over the outcome space whose row ``j`` is ``z -> l(z, f_j)``.

    Duplicate rows are retained (``derived=True``) so the class keeps one row
    per original function.
    """
    loss.check_labels(cls.labels)
    outcomes = OutcomeSpace.of(cls.domain, cls.labels)
    table = LossTable(cls, loss)
    vals = np.stack([table.vector(z) for z in outcomes.pairs], axis=1)
    grid = LabelSpace.grid(np.unique(vals), bounded=False)
    return FiniteFunctionClass(Domain(outcomes.pairs), grid, vals, cls.names, derived=True)


def restrict(cls: FiniteFunctionClass, x, y) -> FiniteFunctionClass | EmptyClass:
    if y not in cls.labels:
        raise ValueError(f"label {y!r} not in label space")
    rows = np.flatnonzero(np.abs(cls.column(x) - float(y)) <= TOL)
    if rows.size == 0:
        return EMPTY
    return cls.subclass(rows)


# ---------------------------------------------------------------- JSON

def class_from_spec(spec: dict[str, Any]) -> FunctionClass:
    """Build a class from its JSON document or a ``{"builder": ...}`` recipe."""
    builder = spec.get("builder")
    if builder is None:
        lab = spec["labels"]
        labels = LabelSpace.binary() if lab["kind"] == "binary" else LabelSpace.grid(lab["values"])
        domain = tuple(tuple(p) if isinstance(p, list) else p for p in spec["domain"])
        return FiniteFunctionClass(Domain(domain), labels, spec["values"], spec.get("names"))
    if builder == "threshold":
        return make_threshold_class(int(spec["k"]))
    if builder == "full-binary":
        return make_full_binary_class(int(spec["m"]))
    if builder == "bounded-variation":
        return make_bounded_variation_class(int(spec["grid_size"]), float(spec["V"]),
                                            LabelSpace.grid(spec["values"]))
    if builder == "bit-thresholds":
        return make_bit_threshold_class(int(spec["n"]), spec.get("truths_only", True))
    if builder == "integer-thresholds":
        return IntegerThresholdClass(int(spec["bits"]), spec.get("high", 1.0), spec.get("low", -1.0))
    raise ValueError(f"unknown class builder {builder!r}")


def load_class(path) -> FunctionClass:
    with open(path) as fh:
        return class_from_spec(json.load(fh))
