"""The two probability estimators, side by side on one simulated question.

Multiple sampling draws a fixed budget of answers; the stopping rule draws
a minimum batch and keeps going only while everything is wrong. Both
estimate the per-draw success probability as correct/total.

    python demos/02_estimation_schemes.py
"""

import numpy as np

from consis.backends import GroundTruthModel, SideTruth, simulated_outcome
from consis.estimation import (
    CONTINUE,
    EarlyStopConfig,
    early_stop_decision,
    mle_early_stopping,
    mle_multiple,
)

TRUE_P = 0.35
model = GroundTruthModel(seed=7)
model.add("q", "easy", SideTruth(TRUE_P, "right", "wrong"))

print(f"true per-draw success probability: {TRUE_P}")

# Fixed-budget estimation: draw m = 20 answers no matter what.
draws = [simulated_outcome(model, "q", "easy", j) for j in range(20)]
print(f"\nfixed budget, m=20: outcomes {''.join('T' if d else 'f' for d in draws)}")
print(f"  estimate = {sum(draws)}/20 = {mle_multiple(draws):.3f}")

# Sequential estimation: 3 draws up front, then one at a time until the
# first success (or 20 total).
cfg = EarlyStopConfig(k_min=3, k_max=20)
seq = []
while True:
    seq.append(simulated_outcome(model, "q", "easy", len(seq)))
    if early_stop_decision(seq, cfg) != CONTINUE:
        break
k, k_c = len(seq), sum(seq)
print(f"\nstopping rule (k_min=3, k_max=20): outcomes "
      f"{''.join('T' if d else 'f' for d in seq)}")
print(f"  stopped after {k} draws with {k_c} correct -> estimate {mle_early_stopping(k, k_c, cfg):.3f}")

# Where the saved draws matter: average draws per question at various true
# probabilities. High-accuracy models stop almost immediately.
print("\nmean draws per question under the stopping rule (1000 questions each):")
rng = np.random.default_rng(0)
for p in (0.1, 0.3, 0.6, 0.9):
    total = 0
    for q in range(1000):
        seq = []
        while True:
            seq.append(bool(rng.random() < p))
            if early_stop_decision(seq, cfg) != CONTINUE:
                break
        total += len(seq)
    print(f"  p = {p:.1f}: {total / 1000:5.2f} draws (fixed budget would use 20)")
