"""Per-step risk of ERM on the adversarial threshold process against n."""
import argparse

from _common import result, write_results
from learnlab.classes import IntegerThresholdClass, Loss
from learnlab.learners import TIE_BREAKS, BatchRule
from learnlab.processes import adversarial_threshold
from learnlab.regret import erm_risk_estimate

p = argparse.ArgumentParser()
p.add_argument("--ns", type=int, nargs="+", default=[1, 2, 4, 8, 12])
p.add_argument("--reps", type=int, default=5000)
p.add_argument("--seed", type=int, default=0)
p.add_argument("--out", default="results/lower-bound")
a = p.parse_args()

docs = []
for tb in TIE_BREAKS:
    for n in a.ns:
        k = adversarial_threshold(n)
        est = erm_risk_estimate(BatchRule(IntegerThresholdClass(k.x_len), Loss("zero-one"), tb), k, a.reps, a.seed,
                                keep=False)
        docs.append(result(est, n, tb))
write_results(docs, a.out, "lower-bound")
