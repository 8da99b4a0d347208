"""Martingale deviation of the full binary class under product and drifting kernels."""
import argparse

from _common import result, write_results
from learnlab.classes import make_full_binary_class
from learnlab.processes import drifting_process, product_iid
from learnlab.regret import martingale_deviation

p = argparse.ArgumentParser()
p.add_argument("--ns", type=int, nargs="+", default=[8, 16, 32, 64])
p.add_argument("--reps", type=int, default=2000)
p.add_argument("--seed", type=int, default=0)
p.add_argument("--out", default="results/umlln")
a = p.parse_args()

cls = make_full_binary_class(2)
P = {(1, 1.0): 0.25, (1, -1.0): 0.25, (2, 1.0): 0.25, (2, -1.0): 0.25}
Q = {(1, 1.0): 0.9, (2, -1.0): 0.1}
docs = []
for n in a.ns:
    for name, k in (("product", product_iid(P, n)), ("drifting", drifting_process(P, Q, n, 0.5))):
        docs.append(result(martingale_deviation(k, cls, a.reps, a.seed, keep=False), n, name))
write_results(docs, a.out, "umlln")
