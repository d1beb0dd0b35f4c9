"""
Classifying a pair of operator families
=======================================

Two fixed 4-dimensional fixtures ship with the package. The first has a
singular biframe operator, so it only frames the range of a rank-one K.
The second is Parseval for K = I.
"""

import numpy as np

from bigframe import classify, biframe_operator, example_3_4, example_3_6, optimal_bounds

sys34 = example_3_4()

# S = sum_i Psi_i^* Phi_i is diagonal here
S = biframe_operator(sys34)
print("S =\n", S.real)

rep = classify(sys34)
print("verdict:", rep.verdict.value)
print("A_opt, B_opt:", rep.a_opt, rep.b_opt)

# S is singular, yet the lower bound holds against ||K^* x||^2 since
# K^* only sees the e2 coordinate, which S does not annihilate
print("min eigenvalue of S:", rep.min_eigenvalue)
print("rank of K:", rep.k_rank)

# distance from the tight case S = A K K^*
print("tight residual:", rep.tight_residual)

sys36 = example_3_6()
rep = classify(sys36)
print()
print("verdict:", rep.verdict.value)
print("||S - K K^*||_F =", np.linalg.norm(biframe_operator(sys36) - np.eye(4)))
for note in rep.remarks:
    print("note:", note)

# swapping K for 2K quarters the lower bound and leaves B alone
res = optimal_bounds(sys34.with_k(2 * sys34.k_op))
print()
print("bounds against 2K:", res.a_opt, res.b_opt)
