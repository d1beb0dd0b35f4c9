"""
Transforming systems and predicting bounds
==========================================

Each transform comes with predicted constants. The optimizer gives the
true ones, so the prediction can be checked directly.
"""

import numpy as np

from bigframe import classify, optimal_bounds, example_3_4, example_3_6
from bigframe.transforms import (combined_operator_bounds, positive_perturb, restrict_range,
                                 right_compose, surjectivity_equivalence, swap)

sys = example_3_4()
base = optimal_bounds(sys).bounds

# swapping the roles of the two families keeps the constants
print("swap:", classify(swap(sys)).verdict.value, optimal_bounds(swap(sys)).a_opt)

# K1 + K2 with K1 = K2: the corrected constant is 1/4, the true optimum
pred = combined_operator_bounds([base, base], [1, 1])
true = optimal_bounds(sys.with_k(2 * sys.k_op)).a_opt
print(f"combination: predicted {pred.lower}, uncorrected {pred.paper_constant}, true {true:.12g}")

# replace K by a T with R(T) inside R(K)
new, pred = restrict_range(sys, 0.5 * sys.k_op)
print("restrict-range: predicted", pred.lower, " true", optimal_bounds(new).a_opt)

# right composition with an operator commuting with K
new, pred = right_compose(sys, 2 * np.eye(4))
print("right-compose: predicted", (pred.lower, pred.upper),
      " true", (optimal_bounds(new).a_opt, optimal_bounds(new).b_opt))

# a positive perturbation with invertible S keeps the frame property
out = positive_perturb(example_3_6(), np.diag([1.0, 0.5, 0.0, 0.0]), 2)
print("positive-perturb on invertible S:", classify(out).verdict.value)

# with singular S it can fail: couple e2 with the null vector e4
t = np.zeros((4, 4))
t[np.ix_([1, 3], [1, 3])] = 1.0
print("positive-perturb on singular S:", classify(positive_perturb(sys, t)).verdict.value)

# a tight frame stays a K-frame under M exactly when M K^* is onto
tight = example_3_6()
for m in (2 * np.eye(4), np.diag([1.0, 1.0, 1.0, 0.0])):
    print("surjectivity:", surjectivity_equivalence(tight, 1.0, m))
