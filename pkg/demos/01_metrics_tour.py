"""Tour of the closed-form metrics on a hand-sized probability vector.

Every metric takes a list of (p_easy, p_hard) pairs: the per-question
probabilities that one sampled answer is correct. Run me directly:

    python demos/01_metrics_tour.py
"""

from consis.metrics import (
    accuracy,
    compute_cs,
    compute_heuristic_bounds,
    compute_math_bounds,
    compute_rcs,
    consistent_rate,
    difficulty_gap_stats,
    leakage_adjusted_cs,
)

# Five question pairs for an imaginary model. Easy sides are mostly more
# solvable than hard sides, as curated pairwise data guarantees.
vector = [
    (0.90, 0.55),
    (0.75, 0.40),
    (0.60, 0.50),
    (0.95, 0.80),
    (0.40, 0.15),
]

print("per-pair probabilities (easy, hard):")
for p_easy, p_hard in vector:
    print(f"  {p_easy:.2f}  {p_hard:.2f}")

# The consistency score is the probability of solving an easy question
# given its paired hard question was solved: hard-weighted easy accuracy.
cs = compute_cs(vector)
print(f"\neasy accuracy    {accuracy(vector, 'easy'):.4f}")
print(f"hard accuracy    {accuracy(vector, 'hard'):.4f}")
print(f"consistency      {cs:.4f}")
print(f"consistent rate  {consistent_rate(vector):.4f}  (pairs with p_easy >= p_hard)")

# Two bound families. The heuristic pair is tighter and drives the
# relative score; the mathematical pair always brackets the score.
heuristic = compute_heuristic_bounds(vector)
mathematical = compute_math_bounds(vector)
mu, sigma = difficulty_gap_stats(vector)
print(f"\nheuristic bounds   [{heuristic.low:.4f}, {heuristic.upp:.4f}]"
      f"   (mean gap {mu:.3f}, gap sd {sigma:.3f})")
print(f"mathematical bounds[{mathematical.low:.4f}, {mathematical.upp:.4f}]")
assert mathematical.low <= cs <= mathematical.upp

rcs = compute_rcs(cs, heuristic)
print(f"relative score     {rcs:.4f}   (0 = worst plausible, 1 = best plausible)")

# Contamination modeled as a probability increment on one question.
# Easy-side leakage always inflates the score; hard-side leakage moves it
# toward the leaked pair's easy probability.
print("\nleakage experiments (increment 0.05 on pair #2):")
print(f"  easy side -> {leakage_adjusted_cs(vector, 2, 'easy', 0.05):.4f} (base {cs:.4f})")
print(f"  hard side -> {leakage_adjusted_cs(vector, 2, 'hard', 0.05):.4f}"
      f" (pair p_easy {vector[2][0]:.2f} vs cs {cs:.4f})")
