"""ERM process regret and Hedge prequential regret against n for three kernels."""
import argparse

from _common import result, write_results
from learnlab.classes import Loss, make_threshold_class
from learnlab.learners import BatchRule, Hedge
from learnlab.processes import drifting_process, mixture_iid, product_iid
from learnlab.regret import gen_value_estimate, preq_value_estimate

p = argparse.ArgumentParser()
p.add_argument("--ns", type=int, nargs="+", default=[4, 8, 16, 32])
p.add_argument("--reps", type=int, default=2000)
p.add_argument("--seed", type=int, default=0)
p.add_argument("--out", default="results/regret")
a = p.parse_args()

L = Loss("zero-one")
cls = make_threshold_class(4)
P = {(1, -1.0): 0.2, (2, 1.0): 0.2, (3, -1.0): 0.2, (4, 1.0): 0.4}
Pm, Qm = {(1, 1.0): 0.5, (2, 1.0): 0.5}, {(3, -1.0): 0.5, (4, -1.0): 0.5}
Ps, Pe = {(1, -1.0): 0.5, (3, 1.0): 0.5}, {(2, 1.0): 0.5, (4, -1.0): 0.5}
docs = []
for n in a.ns:
    kernels = {"product": product_iid(P, n), "mixture": mixture_iid(0.3, Pm, Qm, n),
               "drifting": drifting_process(Ps, Pe, n, 1.0)}
    for name, k in kernels.items():
        docs.append(result(gen_value_estimate(BatchRule(cls, L), k, a.reps, a.seed, keep=False), n, f"gen-{name}"))
        docs.append(result(preq_value_estimate(Hedge(cls, L), k, a.reps, a.seed, keep=False), n, f"preq-{name}"))
write_results(docs, a.out, "regret")
