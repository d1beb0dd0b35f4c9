"""Transformations of K-bi-g-frames and the bounds they are predicted to keep.

Each function either builds a transformed system, or turns known bounds into
predicted bounds for a derived operator, or both. Predicted bounds are
always sound; where the uncorrected constant can be too optimistic it is
kept alongside in ``PredictedBounds.paper_constant``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (BiGFrameSystem, Verdict, classify, optimal_bounds)
from .errors import (CommutatorTooLarge, DimensionMismatch, EmptyInput,
                     KStarNotSurjective, NonPositiveBound, NormBelowOne,
                     NotHermitian, NotKBiGFrame, NotPSD, NotPositive, NotTight,
                     ZeroTailNorm)
from .opkit import (DEFAULT_TOL, adjoint, as_operator, douglas_factor,
                    numerical_rank, opnorm, pseudo_inverse, psd_sqrt)


@dataclass(frozen=True)
class PredictedBounds:
    lower: float
    upper: float
    source: str
    paper_constant: Optional[float] = None

    def __post_init__(self):
        if self.lower < 0 or not self.upper > 0:
            raise ValueError(f"invalid predicted bounds ({self.lower}, {self.upper})")

    def sandwiches(self, a_opt, b_opt, slack=0.0):
        """True when ``lower <= a_opt`` and ``b_opt <= upper`` up to ``slack``."""
        return self.lower <= a_opt + slack and b_opt <= self.upper + slack


def _require_frame(sys, tol):
    res = optimal_bounds(sys, tol)
    if res.bounds is None:
        raise NotKBiGFrame("input system is not a K-bi-g-frame with nonzero K")
    return res


def swap(sys):
    """Exchange the two families; K is kept."""
    return BiGFrameSystem(sys.psi, sys.phi, sys.k_op)


def combined_operator_bounds(sys_bounds, coeffs):
    """Lower/upper constants for ``K = sum_j alpha_j K_j``.

    ``sys_bounds[j]`` are valid ``K_j`` bounds of one fixed pair of families.
    Cauchy-Schwarz gives ``||sum_j alpha_j K_j^* x||^2 <= n sum_j |alpha_j|^2
    ||K_j^* x||^2``, hence lower ``1 / (n sum_j |alpha_j|^2 / A_j)`` and upper
    ``min_j B_j``. The constant without the factor ``n`` is recorded as
    ``paper_constant``; it can exceed the true optimum.
    """
    sys_bounds = list(sys_bounds)
    coeffs = list(coeffs)
    if not sys_bounds:
        raise EmptyInput("at least one bound pair is required")
    if len(sys_bounds) != len(coeffs):
        raise DimensionMismatch(f"{len(sys_bounds)} bound pairs but {len(coeffs)} coefficients")
    for b in sys_bounds:
        if not (b.lower > 0 and b.upper > 0):
            raise NonPositiveBound(f"bounds must be positive, got {b}")
    n = len(sys_bounds)
    weight = sum(abs(a) ** 2 / b.lower for a, b in zip(coeffs, sys_bounds))
    upper = min(b.upper for b in sys_bounds)
    if weight == 0:
        return PredictedBounds(np.inf, upper, "combination", np.inf)
    return PredictedBounds(1.0 / (n * weight), upper, "combination", 1.0 / weight)


def product_operator_bounds(a1, k_tail):
    """Bounds for ``K_1 K_2 ... K_n`` from ``K_1`` bounds ``a1``.

    ``||(K_1...K_n)^* x|| <= ||K_n^* ... K_2^*|| ||K_1^* x||`` so the lower
    bound becomes ``A_1 / ||K_2 ... K_n||^2``.
    """
    k_tail = [as_operator(k) for k in k_tail]
    if not k_tail:
        raise EmptyInput("k_tail must contain at least one operator")
    prod = k_tail[0]
    for k in k_tail[1:]:
        prod = prod @ k
    nrm = opnorm(prod)
    if nrm == 0.0:
        raise ZeroTailNorm("K_2 ... K_n is the zero operator")
    return PredictedBounds(a1.lower / nrm ** 2, a1.upper, "product")


def lift_ordinary(bi_bounds, k):
    """Bounds of an ordinary bi-g-frame viewed as a K-bi-g-frame, ``||K|| >= 1``."""
    nrm = opnorm(as_operator(k))
    if nrm < 1.0 - 1e-12:
        raise NormBelowOne(f"||K|| = {nrm:.6g} < 1")
    return PredictedBounds(bi_bounds.lower / nrm ** 2, bi_bounds.upper, "lift")


def restrict_range(sys, t, tol=DEFAULT_TOL):
    """Replace K by ``T`` with ``R(T)`` inside ``R(K)``.

    With the least ``alpha`` such that ``TT^* <= alpha^2 KK^*`` the new lower
    bound is ``A / alpha^2``.

    Raises
    ------
    RangeNotIncluded, NotKBiGFrame
    """
    t = as_operator(t, "T")
    if t.shape != sys.k_op.shape:
        raise DimensionMismatch(f"T must be {sys.k_op.shape}, got {t.shape}")
    res = _require_frame(sys, tol)
    _, alpha = douglas_factor(t, sys.k_op, tol)
    lower = np.inf if alpha == 0 else res.bounds.lower / alpha ** 2
    return sys.with_k(t), PredictedBounds(lower, res.bounds.upper, "restrict_range")


def positive_perturb(sys, t, n=1, tol=DEFAULT_TOL):
    """Families ``{Phi_i (I + T^n)}``, ``{Psi_i (I + T^n)}`` for positive ``T``.

    The new biframe operator is ``(I + T^n)^* S (I + T^n)``.

    Raises
    ------
    NotPositive
    """
    t = as_operator(t, "T")
    if t.shape != sys.k_op.shape:
        raise DimensionMismatch(f"T must be {sys.k_op.shape}, got {t.shape}")
    if n < 1:
        raise ValueError("n must be a positive integer")
    try:
        psd_sqrt(t, tol)
    except (NotHermitian, NotPSD) as exc:
        raise NotPositive(f"T is not a positive operator: {exc}") from None
    factor = np.eye(t.shape[0]) + np.linalg.matrix_power(t, n)
    return BiGFrameSystem(sys.phi.compose_right(factor), sys.psi.compose_right(factor), sys.k_op)


def commutator_residual(m, k):
    """``||MK - KM||_F / (||M||_F ||K||_F)``."""
    scale = np.linalg.norm(m) * np.linalg.norm(k)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(m @ k - k @ m) / scale)


def _check_commute(m, k, tol):
    res = commutator_residual(m, k)
    if res > tol.rel_range_tol:
        raise CommutatorTooLarge(f"relative commutator {res:.3e} exceeds {tol.rel_range_tol:.1e}",
                                 residual=res)


def right_compose(sys, m, tol=DEFAULT_TOL):
    """Families ``{Phi_i M^*}``, ``{Psi_i M^*}`` for ``M`` commuting with K and
    ``R(K^*)`` inside ``R(M)``.

    Predicted bounds ``(A ||M^+||^{-2}, B ||M||^2)``.

    Raises
    ------
    CommutatorTooLarge, RangeNotIncluded, NotKBiGFrame
    """
    m = as_operator(m, "M")
    k = sys.k_op
    if m.shape != k.shape:
        raise DimensionMismatch(f"M must be {k.shape}, got {m.shape}")
    _check_commute(m, k, tol)
    douglas_factor(adjoint(k), m, tol)
    res = _require_frame(sys, tol)
    mstar = adjoint(m)
    out = BiGFrameSystem(sys.phi.compose_right(mstar), sys.psi.compose_right(mstar), k)
    pinv_norm = opnorm(pseudo_inverse(m, tol))
    lower = res.bounds.lower / pinv_norm ** 2
    upper = res.bounds.upper * opnorm(m) ** 2
    return out, PredictedBounds(lower, upper, "right_compose")


def surjectivity_equivalence(sys_tight, delta, m, tol=DEFAULT_TOL):
    """For a delta-tight system with invertible K and ``MK = KM``: whether the
    right-composed system is a K-bi-g-frame, and whether M is surjective.

    The two booleans are computed independently; they should agree.

    Raises
    ------
    NotTight, KStarNotSurjective, CommutatorTooLarge
    """
    m = as_operator(m, "M")
    k = sys_tight.k_op
    if m.shape != k.shape:
        raise DimensionMismatch(f"M must be {k.shape}, got {m.shape}")
    rep = classify(sys_tight, tol)
    if rep.verdict < Verdict.TIGHT or abs(rep.a_opt - delta) > tol.rel_range_tol * abs(delta):
        raise NotTight(f"system is not {delta}-tight (verdict {rep.verdict}, A_opt={rep.a_opt})")
    n = k.shape[0]
    if numerical_rank(k, tol) < n:
        raise KStarNotSurjective("R(K^*) is a proper subspace")
    _check_commute(m, k, tol)
    mstar = adjoint(m)
    out = BiGFrameSystem(sys_tight.phi.compose_right(mstar), sys_tight.psi.compose_right(mstar), k)
    is_k = classify(out, tol).verdict >= Verdict.K_BI_G_FRAME
    surjective = numerical_rank(m, tol) == n
    return is_k, surjective
