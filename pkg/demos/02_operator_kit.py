"""
Operator-kit primitives
=======================

Pseudo-inverse, PSD square root, range inclusion via Douglas
factorization, and the Neumann-type bounds for a perturbed identity.
"""

import numpy as np

from bigframe.errors import RangeNotIncluded
from bigframe.opkit import (adjoint, douglas_factor, injectivity_margin, neumann_bounds,
                            numerical_rank, pseudo_inverse, psd_sqrt)

rng = np.random.default_rng(0)

# a 5x4 matrix of rank 2
T = (rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))) @ \
    (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
P = pseudo_inverse(T)
print("rank:", numerical_rank(T))
print("||T P T - T|| =", np.linalg.norm(T @ P @ T - T))
print("P T Hermitian:", np.allclose(P @ T, adjoint(P @ T)))

# square root of a PSD matrix with a zero eigenvalue
S = np.diag([2.0, 1.0, 1.0, 0.0])
print("sqrt(S) diagonal:", np.diag(psd_sqrt(S)).real)

# R(T1) inside R(T2): T1 = T2 U, and lambda is the smallest majorization constant
T2 = np.diag([2.0, 3.0, 0.0])
T1 = T2 @ rng.standard_normal((3, 3))
U, lam = douglas_factor(T1, T2)
print("factor residual:", np.linalg.norm(T2 @ U - T1), " lambda:", lam)

try:
    douglas_factor(np.eye(3), T2)
except RangeNotIncluded as exc:
    print("rejected:", exc)

# injectivity: c = min ||T x||^2 over unit x
print("injectivity of diag(1, 2):", injectivity_margin(np.diag([1.0, 2.0])))

# ||T x - x|| <= alpha ||x|| + beta ||T x|| confines T's singular values
res = neumann_bounds(1.5 * np.eye(3), 0.5, 0.0)
print("forward:", res.forward_bounds, " inverse:", res.inverse_bounds)
print("observed sigma range:", res.sigma_range, " consistent:", res.consistent)
