"""Command-line runner: ``learnlab <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from .classes import FiniteFunctionClass, Loss, class_from_spec
from .complexity import (ResourceBudgetError, SignTree, rademacher_worst_case, seq_rademacher_fixed_tree,
                         seq_rademacher_loss_class, seq_rademacher_sup)
from .dims import dimension
from .learners import BatchRule, TIE_BREAKS, run_prequential, rule_from_spec
from .processes import point_mass_process, process_from_spec
from .regret import (decomposition_report, gen_value_estimate, martingale_deviation, online_worst_case,
                     preq_value_estimate)
from .verify import SUITES, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"


def _default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def load_json(arg: str) -> dict:
    """A JSON document given inline (starting with ``{`` or ``[``) or as a file path."""
    if arg.lstrip()[:1] in ("{", "["):
        return json.loads(arg)
    with open(arg) as fh:
        return json.load(fh)


def emit(text: str, out: str | None) -> None:
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


@dataclass
class ExperimentConfig:
    command: str
    seed: int
    class_spec: dict | None = None
    process: dict | None = None
    rule: dict = field(default_factory=lambda: {"rule": "erm"})
    loss: str = "zero-one"
    n: int | None = None
    reps: int = 1000
    tolerance: float = 1e-9
    out: str | None = None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if "seed" not in doc:
            raise UsageError("config needs a seed")
        if "command" not in doc:
            raise UsageError("config needs a command")
        known = {"command", "seed", "class", "process", "rule", "loss", "n", "reps", "tolerance", "out"}
        return cls(command=doc["command"], seed=int(doc["seed"]), class_spec=doc.get("class"),
                   process=doc.get("process"), rule=doc.get("rule", {"rule": "erm"}),
                   loss=doc.get("loss", "zero-one"), n=doc.get("n"), reps=int(doc.get("reps", 1000)),
                   tolerance=float(doc.get("tolerance", 1e-9)), out=doc.get("out"),
                   options={k: v for k, v in doc.items() if k not in known})

    def echo(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("class_spec")
        d.pop("out")
        return d


# ------------------------------------------------------------ computations

def _finite(cls) -> FiniteFunctionClass:
    if not isinstance(cls, FiniteFunctionClass):
        raise UsageError("this command needs an explicit finite class")
    return cls


def do_dims(cls, kind: str, gamma: float | None, witness: bool) -> dict:
    return dimension(_finite(cls), kind, gamma, witness).to_dict()


def do_complexity(cls, kind: str, n: int, loss: str | None = None, tree: dict | None = None,
                  mode: str = "exact", reps: int = 20000, seed: int = 0) -> dict:
    cls = _finite(cls)
    if kind == "rad":
        res = rademacher_worst_case(cls, n, seed=seed)
        out = res.to_dict()
        out["surrogate"] = "max over deterministic samples"
        return out
    if kind == "seqrad":
        if tree is not None:
            st = SignTree.from_json(tree)
            if st.depth != n:
                raise UsageError(f"tree depth {st.depth} does not match n={n}")
            return seq_rademacher_fixed_tree(cls, st, reps, seed, "mc" if mode == "mc" else "auto").to_dict()
        return seq_rademacher_sup(cls, n).to_dict()
    if kind == "seqrad-loss":
        if loss is None:
            raise UsageError("seqrad-loss needs --loss")
        return seq_rademacher_loss_class(cls, Loss(loss), n).to_dict()
    raise UsageError(f"unknown complexity kind {kind!r}")


def _kernel(process: dict, cls, n: int | None):
    spec = dict(process)
    if n is not None:
        spec["n"] = n
    return process_from_spec(spec, cls)


def do_simulate(cls, process: dict, seed: int, n: int | None = None) -> str:
    kernel = _kernel(process, cls, n)
    if not getattr(kernel, "finite", True):
        path = kernel.sample(seed)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y"])
        for t, (x, y) in enumerate(path.outcomes, start=1):
            w.writerow([t, json.dumps(x), repr(y)])
        return buf.getvalue()
    return kernel.sample(seed).to_csv()


def _sample_from_doc(doc) -> list:
    rows = doc["sample"] if isinstance(doc, dict) else doc
    return [(tuple(x) if isinstance(x, list) else x, float(y)) for x, y in rows]


def do_learn(cls, rule: str, loss: str, sample: list, tie_break: str, seed: int) -> tuple[str, str]:
    """Returns ``(text, kind)`` with kind ``json`` or ``csv``."""
    L = Loss(loss)
    if rule == "erm":
        rng = np.random.default_rng(seed)
        member = BatchRule(cls, L, tie_break)(sample, rng)
        out = {"rule": "erm", "member": member, "tie_break": tie_break, "seed": seed}
        names = getattr(cls, "names", None)
        if names:
            out["name"] = names[member]
        return dumps(out), "json"
    if rule in ("hedge", "ftl"):
        r = rule_from_spec({"rule": rule}, _finite(cls), L, len(sample))
        return run_prequential(r, point_mass_process(sample), seed=seed).to_csv(), "csv"
    raise UsageError(f"unknown rule {rule!r}")


def do_regret(estimator: str, cls, process: dict | None, rule: dict, loss: str, reps: int, seed: int,
              n: int | None = None, mode: str = "exact") -> dict:
    L = Loss(loss)
    if estimator == "online":
        if rule.get("rule", "erm") == "erm":
            raise UsageError("online estimator needs an online rule (hedge or ftl)")
        if n is None:
            if process is None or "n" not in process:
                raise UsageError("online estimator needs --n")
            n = int(process["n"])
        r = rule_from_spec(rule, _finite(cls), L, n)
        est = online_worst_case(r, cls, L, n, mode, seed)
        return est.to_dict()
    if process is None:
        raise UsageError(f"{estimator} estimator needs --process")
    kernel = _kernel(process, cls, n)
    if estimator == "gen":
        r = rule_from_spec(rule, cls, L, kernel.horizon)
        if not isinstance(r, BatchRule):
            raise UsageError("gen estimator needs a batch rule")
        return gen_value_estimate(r, kernel, reps, seed, keep=False).to_dict()
    if estimator in ("preq", "decomp"):
        if rule.get("rule", "erm") == "erm":
            raise UsageError(f"{estimator} estimator needs an online rule (hedge or ftl)")
        r = rule_from_spec(rule, _finite(cls), L, kernel.horizon)
        if estimator == "preq":
            return preq_value_estimate(r, kernel, reps, seed, keep=False).to_dict()
        rep = decomposition_report(r, kernel, reps, seed)
        out = rep.total.to_dict()
        out["terms"] = rep.to_dict()
        return out
    if estimator == "umlln":
        return martingale_deviation(kernel, _finite(cls), reps, seed, keep=False).to_dict()
    raise UsageError(f"unknown estimator {estimator!r}")


def do_verify(suite: str, seed: int) -> dict:
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    return verify(suite, seed).to_dict()


def x_value(doc: dict, key: str):
    cfg = doc.get("config", {})
    for src in (doc, cfg, cfg.get("process") or {}, cfg.get("options") or {}):
        if key in src and src[key] is not None:
            return src[key]
    return None


def series_name(doc: dict) -> str:
    cfg = doc.get("config", {})
    if "series" in (cfg.get("options") or {}):
        return str(cfg["options"]["series"])
    if cfg.get("process"):
        return str(cfg["process"].get("process"))
    return str(cfg.get("command", "result"))


def plot_data(docs: list[dict], key: str | None = None) -> str:
    """Tidy CSV ``x, series, mean, stderr`` from result documents sharing an x key."""
    if not docs:
        raise UsageError("plot-data needs at least one result file")
    if key is None:
        for k in ("n", "gamma"):
            if all(x_value(d, k) is not None for d in docs):
                key = k
                break
        else:
            raise UsageError("result files do not share an x-axis key (n or gamma)")
    rows = []
    for d in docs:
        x = x_value(d, key)
        if x is None:
            raise UsageError(f"result file without x key {key!r}")
        mean = d.get("mean", d.get("value"))
        rows.append((x, series_name(d), mean, d.get("stderr", 0.0)))
    rows.sort(key=lambda r: (r[1], r[0]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "series", "mean", "stderr"])
    for r in rows:
        w.writerow([r[0], r[1], repr(float(r[2])), repr(float(r[3]))])
    return buf.getvalue()


def run_config(cfg: ExperimentConfig) -> tuple[dict, int]:
    cls = class_from_spec(cfg.class_spec) if cfg.class_spec is not None else None
    opts = cfg.options
    c = cfg.command
    if c == "dims":
        res = do_dims(cls, opts.get("kind", "vc"), opts.get("gamma"), bool(opts.get("witness", False)))
    elif c == "complexity":
        res = do_complexity(cls, opts.get("kind", "seqrad"), int(cfg.n or 1), cfg.loss, opts.get("tree"),
                            opts.get("mode", "exact"), cfg.reps, cfg.seed)
    elif c == "regret":
        res = do_regret(opts.get("estimator", "gen"), cls, cfg.process, cfg.rule, cfg.loss, cfg.reps,
                        cfg.seed, cfg.n, opts.get("mode", "exact"))
    elif c == "verify":
        res = do_verify(opts.get("suite", ""), cfg.seed)
        return dict(res, config=cfg.echo()), (EXIT_OK if res["pass"] else EXIT_FAIL)
    else:
        raise UsageError(f"unknown command {c!r} in config")
    return dict(res, config=cfg.echo(), seed=cfg.seed), EXIT_OK


# ------------------------------------------------------------ argparse

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="learnlab", description="Learning-theory quantities for finite classes and processes.")
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("dims", help="combinatorial dimensions")
    d.add_argument("--class", dest="cls", required=True)
    d.add_argument("--kind", choices=("vc", "ldim", "fat", "sfat"), required=True)
    d.add_argument("--gamma", type=float)
    d.add_argument("--witness", action="store_true")
    d.add_argument("--out")

    c = sub.add_parser("complexity", help="(sequential) Rademacher complexity")
    c.add_argument("--class", dest="cls", required=True)
    c.add_argument("--kind", choices=("rad", "seqrad", "seqrad-loss"), required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--loss", choices=("zero-one", "absolute", "squared"))
    c.add_argument("--tree")
    c.add_argument("--mode", choices=("exact", "mc"), default="exact")
    c.add_argument("--reps", type=int, default=20000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")

    s = sub.add_parser("simulate", help="sample one path as CSV")
    s.add_argument("--process", required=True)
    s.add_argument("--class", dest="cls")
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")

    l = sub.add_parser("learn", help="run a rule on a sample")
    l.add_argument("--rule", choices=("erm", "hedge", "ftl"), required=True)
    l.add_argument("--class", dest="cls", required=True)
    l.add_argument("--loss", default="zero-one", choices=("zero-one", "absolute", "squared"))
    l.add_argument("--sample", required=True)
    l.add_argument("--tie-break", choices=TIE_BREAKS, default="lowest-index")
    l.add_argument("--seed", type=int, default=0)
    l.add_argument("--out")

    r = sub.add_parser("regret", help="regret estimators")
    r.add_argument("--estimator", choices=("gen", "preq", "online", "umlln", "decomp"), required=True)
    r.add_argument("--class", dest="cls", required=True)
    r.add_argument("--process")
    r.add_argument("--rule", default='{"rule": "erm"}')
    r.add_argument("--loss", default="zero-one", choices=("zero-one", "absolute", "squared"))
    r.add_argument("--n", type=int)
    r.add_argument("--mode", choices=("exact", "search"), default="exact")
    r.add_argument("--reps", type=int, default=1000)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")

    pd = sub.add_parser("plot-data", help="tidy CSV from result files")
    pd.add_argument("results", nargs="*")
    pd.add_argument("--key", choices=("n", "gamma"))
    pd.add_argument("--out")

    rc = sub.add_parser("run", help="run an experiment config")
    rc.add_argument("--config", required=True)
    rc.add_argument("--out")
    return p


def _dispatch(args) -> int:
    if args.cmd == "dims":
        emit(dumps(do_dims(class_from_spec(load_json(args.cls)), args.kind, args.gamma, args.witness)), args.out)
    elif args.cmd == "complexity":
        tree = load_json(args.tree) if args.tree else None
        res = do_complexity(class_from_spec(load_json(args.cls)), args.kind, args.n, args.loss, tree,
                            args.mode, args.reps, args.seed)
        emit(dumps(res), args.out)
    elif args.cmd == "simulate":
        cls = class_from_spec(load_json(args.cls)) if args.cls else None
        emit(do_simulate(cls, load_json(args.process), args.seed, args.n), args.out)
    elif args.cmd == "learn":
        text, _ = do_learn(class_from_spec(load_json(args.cls)), args.rule, args.loss,
                           _sample_from_doc(load_json(args.sample)),
                           args.tie_break, args.seed)
        emit(text, args.out)
    elif args.cmd == "regret":
        cls_doc = load_json(args.cls)
        proc = load_json(args.process) if args.process else None
        rule = load_json(args.rule)
        res = do_regret(args.estimator, class_from_spec(cls_doc), proc, rule, args.loss, args.reps, args.seed,
                        args.n, args.mode)
        cfg = {"command": "regret", "estimator": args.estimator, "class": cls_doc, "process": proc,
               "rule": rule, "loss": args.loss, "n": args.n, "reps": args.reps, "seed": args.seed,
               "mode": args.mode}
        emit(dumps(dict(res, config=cfg)), args.out)
    elif args.cmd == "verify":
        res = do_verify(args.suite, args.seed)
        emit(dumps(res), args.out)
        return EXIT_OK if res["pass"] else EXIT_FAIL
    elif args.cmd == "plot-data":
        docs = []
        for f in args.results:
            docs.append(load_json(f))
        emit(plot_data(docs, args.key), args.out)
    elif args.cmd == "run":
        cfg = ExperimentConfig.from_dict(load_json(args.config))
        res, code = run_config(cfg)
        emit(dumps(res), args.out or cfg.out)
        return code
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return _dispatch(args)
    except ResourceBudgetError as e:
        print(f"learnlab: resource budget: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as e:
        print(f"learnlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
