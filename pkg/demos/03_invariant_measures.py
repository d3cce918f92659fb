"""Invariant Markov families and conditional entropy given the base.

A fibered Markov measure is one row-stochastic matrix per base point plus one
start vector per base point; the start of the next fiber must be the push of
the current one ("orbit consistency"), which is exactly invariance under the
skew product.  Conditional entropy given the base averages fiber Shannon
entropies with the base weights; for covers it is an infimum over refining
partitions, computed exactly as a minimum-entropy assignment.
"""

import numpy as np

from rdelab import (
    cover_conditional_entropy,
    h_minus_report,
    h_plus_value,
    invariance_residual,
    markov_to_word,
    partition_conditional_entropy,
    partition_entropy_report,
    presets,
    product_cover,
    pushforward,
    stationary_starts,
    zero_cylinders,
)

bundle = presets.alternating_golden_mean()
zero = zero_cylinders(bundle)

q0 = np.array([[0.5, 0.5], [0.5, 0.5]])
q1 = np.array([[0.5, 0.5], [1.0, 0.0]])  # b -> b is forbidden in fiber w1
mu = stationary_starts(bundle, [q0, q1])
print("stationary starts:", [np.round(p, 4).tolist() for p in mu.starts])
print("invariance residual:", invariance_residual(mu))

nu = markov_to_word(mu, 3)
print("\nthree-letter weights in fiber w1:")
for word, weight in nu.weights[1].items():
    print("  ", "".join(bundle.alphabet[s] for s in word), f"{weight:.4f}")
pushed = pushforward(nu)
print("pushforward drops a coordinate; fiber w0 now sees:",
      {("".join(bundle.alphabet[s] for s in w)): round(x, 4)
       for w, x in pushed.weights[0].items()})

print("\nconditional entropy of the coordinate partition:",
      f"{partition_conditional_entropy(mu, zero):.6f}")

rep = partition_entropy_report(mu, zero, 8)
print("step-averaged partition entropies:")
for n, value in rep.sequence:
    print(f"  n={n:<2d} {value:.6f}")
print(f"chain-rule exact rate {rep.exact_rate:.6f}")

overlap = product_cover(bundle, [[(0,), (1,)], [(1,)]])
print("\ncover {a,b},{b}: the infimum over refinements collapses to zero")
print("  inner (fiber-dependent refinements):",
      cover_conditional_entropy(mu, overlap, "general"))
print("  inner rate report certified:",
      h_minus_report(mu, overlap, 4).certified_upper)
print("  outer (refine first, then rate):",
      h_plus_value(mu, overlap, 4).value)
