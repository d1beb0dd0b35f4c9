"""Perturbation stability of K-bi-g-frames.

A base system ``(Phi, Psi)_K`` is compared with a candidate pair
``(Lambda, Gamma)`` through the partial-sum operators
``S_J = sum_{i in J} Psi_i^* Phi_i`` and ``M_J = sum_{i in J} Gamma_i^* Lambda_i``.
The perturbation hypothesis

    ||(S_J - M_J) x|| <= alpha ||S_J x|| + beta ||M_J x|| + c_x ||x|| + c_K ||K^* x||

(with ``c_x``, ``c_K`` fixed by the variant) cannot be decided by finitely
many norms, so it is checked on subsets ``J`` and test vectors ``x`` and the
worst slack is reported. The resulting certificate is a sampled one.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from .core import (BiGFrameSystem, FrameBounds, Verdict, classify,
                   g_frame_operator_and_bessel, optimal_bounds, partial_sum)
from .errors import NotKBiGFrame, ParamsInvalid, ShapeMismatch
from .opkit import DEFAULT_TOL, adjoint, opnorm
from .transforms import PredictedBounds

VARIANTS = ("thm_5_1", "cor_5_2", "thm_5_3", "thm_5_4")


@dataclass(frozen=True)
class StabilityParams:
    """Perturbation constants.

    ``variant`` selects which right-hand side and bound formulas apply:

    ``thm_5_1``  ``alpha||S_J x|| + beta||M_J x|| + gamma||x||``
    ``thm_5_3``  ``alpha||S_J x|| + beta||M_J x|| + gamma||K^* x||``
    ``thm_5_4``  ``alpha||S_J x|| + beta||M_J x|| + sigma||x|| + gamma||K^* x||``
    ``cor_5_2``  ``D ||K^* x||``
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    sigma: float = 0.0
    d_const: Optional[float] = None
    variant: str = "thm_5_1"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParamsInvalid(f"unknown variant {self.variant!r}")
        for name in ("alpha", "beta", "gamma", "sigma"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ParamsInvalid(f"{name} must lie in [0, 1), got {v}")
        if self.variant == "cor_5_2" and (self.d_const is None or not self.d_const > 0):
            raise ParamsInvalid("cor_5_2 needs a positive d_const")

    def coefficients(self):
        """``(alpha, beta, c_x, c_K)`` of the hypothesis right-hand side."""
        if self.variant == "thm_5_1":
            return self.alpha, self.beta, self.gamma, 0.0
        if self.variant == "thm_5_3":
            return self.alpha, self.beta, 0.0, self.gamma
        if self.variant == "thm_5_4":
            return self.alpha, self.beta, self.sigma, self.gamma
        return 0.0, 0.0, 0.0, self.d_const

    def check(self, base_bounds):
        """Raise :class:`ParamsInvalid` unless the variant's smallness condition holds."""
        a, b = base_bounds.lower, base_bounds.upper
        r = np.sqrt(b / a)
        if self.variant == "thm_5_1":
            worst = max(self.alpha + self.gamma, self.beta)
        elif self.variant == "thm_5_3":
            worst = max(self.alpha + self.gamma * r, self.beta)
        elif self.variant == "thm_5_4":
            worst = max(self.alpha + self.sigma + self.gamma * r, self.beta)
        else:
            if not self.d_const < a:
                raise ParamsInvalid(f"need 0 < D < A, got D={self.d_const}, A={a}")
            worst = self.d_const * r
        if not worst < 1.0:
            raise ParamsInvalid(f"{self.variant}: smallness condition fails ({worst:.6g} >= 1)")


@dataclass(frozen=True)
class SubsetPolicy:
    mode: str = "exhaustive"
    max_exhaustive: int = 12

    def __post_init__(self):
        if self.mode not in ("exhaustive", "structured"):
            raise ValueError(f"unknown subset policy {self.mode!r}")
        if self.max_exhaustive < 1:
            raise ValueError("max_exhaustive must be positive")

    def resolve(self, family_size):
        """The policy actually usable for a family of this size."""
        if self.mode == "exhaustive" and family_size > self.max_exhaustive:
            return SubsetPolicy("structured", self.max_exhaustive)
        return self

    def masks(self, m):
        """Boolean membership matrix, one row per tested subset."""
        if self.resolve(m).mode == "exhaustive":
            return np.array(list(product((False, True), repeat=m)), dtype=bool)[:, ::-1]
        rows = []
        eye = np.eye(m, dtype=bool)
        rows.extend(eye)
        rows.extend(np.tri(m, dtype=bool))
        rows.extend(~eye)
        rows.append(np.ones(m, dtype=bool))
        uniq = {tuple(r): None for r in rows}
        return np.array(list(uniq), dtype=bool)


@dataclass
class StabilityCertificate:
    hypothesis_margin: float
    policy_used: SubsetPolicy
    predicted: PredictedBounds
    achieved: Optional[FrameBounds]
    verdict: bool
    paper_lower_note: str
    worst_case: tuple = field(default=(), repr=False)
    candidate_verdict: Optional[Verdict] = None
    lower_holds: Optional[bool] = None

    def __post_init__(self):
        if self.verdict:
            assert self.achieved is not None


def partial_sum_operator(phi, psi, j):
    """``sum_{i in J} Psi_i^* Phi_i`` for 0-based indices ``J``, ascending order."""
    return partial_sum(phi, psi, j)


def _terms(phi, psi):
    return np.stack([adjoint(q) @ p for p, q in zip(phi, psi)])


def hypothesis_margin(base, cand_phi, cand_psi, params, policy=SubsetPolicy(),
                      sample_count=32, seed=0, chunk=256):
    """Worst slack of the perturbation hypothesis over tested ``(J, x)``.

    Test vectors are ``sample_count`` seeded unit vectors shared by all
    subsets plus, for each ``J``, the eigenvectors of ``D_J^* D_J`` where
    ``D_J = S_J - M_J``. Returns ``(margin, (J, x))`` with ``J`` a tuple of
    0-based indices.
    """
    if not (base.phi.same_shape(cand_phi) and base.phi.same_shape(cand_psi)):
        raise ShapeMismatch("candidate families must match the base system's shapes")
    alpha, beta, cx, ck = params.coefficients()
    n, m = base.dim, len(base)
    t_base = _terms(base.phi, base.psi)
    t_cand = _terms(cand_phi, cand_psi)
    kstar = adjoint(base.k_op)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, sample_count)) + 1j * rng.standard_normal((n, sample_count))
    x /= np.linalg.norm(x, axis=0)
    kx = np.linalg.norm(kstar @ x, axis=0)

    masks = policy.masks(m)
    best = np.inf
    worst_case = ((), np.zeros(n, dtype=np.complex128))
    for start in range(0, len(masks), chunk):
        blk = masks[start:start + chunk].astype(float)
        s_j = np.einsum("cm,mij->cij", blk, t_base)
        m_j = np.einsum("cm,mij->cij", blk, t_cand)
        d_j = s_j - m_j
        _, ev = np.linalg.eigh(adjoint_batch(d_j) @ d_j)
        vecs = np.concatenate([np.broadcast_to(x, (len(blk), n, x.shape[1])), ev], axis=2)
        kxs = np.concatenate([np.broadcast_to(kx, (len(blk), x.shape[1])),
                              np.linalg.norm(kstar @ ev, axis=1)], axis=1)
        rhs = (alpha * np.linalg.norm(s_j @ vecs, axis=1)
               + beta * np.linalg.norm(m_j @ vecs, axis=1)
               + cx * np.linalg.norm(vecs, axis=1) + ck * kxs)
        slack = rhs - np.linalg.norm(d_j @ vecs, axis=1)
        c, v = np.unravel_index(np.argmin(slack), slack.shape)
        if slack[c, v] < best:
            best = float(slack[c, v])
            subset = tuple(int(i) for i in np.flatnonzero(masks[start + c]))
            worst_case = (subset, vecs[c, :, v].copy())
    return best, worst_case


def adjoint_batch(a):
    return np.conj(np.swapaxes(a, -1, -2))


def predicted_stability_bounds(params, base_bounds, bessel_phi, bessel_psi):
    """Candidate bounds promised by the selected variant.

    With ``r = sqrt(B/A)`` and ``R = sqrt(B_Phi B_Psi)``:

    ========  ==========================================  =====================================
    variant   lower                                       upper
    ========  ==========================================  =====================================
    thm_5_1   ``A (1 - (alpha + gamma)) / (1 + beta)``     ``((1+alpha) R + gamma) / (1 - beta)``
    thm_5_3   ``A (1 - (alpha + gamma r)) / (1 + beta)``   ``((1+alpha) R + gamma r) / (1 - beta)``
    thm_5_4   ``A (1 - (alpha+sigma+gamma r)) / (1+beta)`` ``((1+alpha) R + sigma + gamma r)/(1-beta)``
    cor_5_2   ``A (1 - D r)``                              ``R + D r``
    ========  ==========================================  =====================================
    """
    params.check(base_bounds)
    a, b = base_bounds.lower, base_bounds.upper
    r = np.sqrt(b / a)
    root = np.sqrt(bessel_phi * bessel_psi)
    al, be, ga, si = params.alpha, params.beta, params.gamma, params.sigma
    v = params.variant
    if v == "thm_5_1":
        lower = a * (1 - (al + ga)) / (1 + be)
        upper = ((1 + al) * root + ga) / (1 - be)
    elif v == "thm_5_3":
        lower = a * (1 - (al + ga * r)) / (1 + be)
        upper = ((1 + al) * root + ga * r) / (1 - be)
    elif v == "thm_5_4":
        lower = a * (1 - (al + si + ga * r)) / (1 + be)
        upper = ((1 + al) * root + si + ga * r) / (1 - be)
    else:
        d = params.d_const
        lower = a * (1 - d * r)
        upper = root + d * r
    return PredictedBounds(float(lower), float(upper), v)


def certify_stability(base, cand_phi, cand_psi, params, policy=SubsetPolicy(),
                      tol=DEFAULT_TOL, seed=0, sample_count=32):
    """End-to-end stability check of a candidate pair against a base system.

    The verdict requires a nonnegative sampled margin, a candidate that is a
    K-bi-g-frame, and a candidate upper bound within the predicted one. The
    predicted lower bound is compared but does not gate the verdict.
    """
    base_res = optimal_bounds(base, tol)
    if base_res.bounds is None:
        raise NotKBiGFrame("base system must be a K-bi-g-frame with nonzero K")
    params.check(base_res.bounds)
    used = policy.resolve(len(base))
    margin, worst = hypothesis_margin(base, cand_phi, cand_psi, params, used,
                                      sample_count=sample_count, seed=seed)
    _, b_phi = g_frame_operator_and_bessel(base.phi)
    _, b_psi = g_frame_operator_and_bessel(base.psi)
    predicted = predicted_stability_bounds(params, base_res.bounds, b_phi, b_psi)

    cand = BiGFrameSystem(cand_phi, cand_psi, base.k_op)
    rep = classify(cand, tol)
    scale = max(1.0, base_res.max_eigenvalue)
    margin_ok = margin >= -1e-12 * scale
    achieved = rep.optimal_bounds
    verdict = bool(margin_ok and achieved is not None
                   and rep.verdict >= Verdict.K_BI_G_FRAME
                   and rep.b_opt <= predicted.upper + 1e-8 * scale)
    lower_holds = None
    if achieved is not None:
        lower_holds = bool(predicted.lower <= achieved.lower + 1e-8 * scale)
    kk = opnorm(base.k_op) ** 2
    note = (f"predicted lower {predicted.lower:.12g} is diagnostic only; "
            f"scaling by the extra factor ||KK*|| = {kk:.12g} gives "
            f"{predicted.lower * kk:.12g}")
    return StabilityCertificate(margin, used, predicted, achieved, verdict, note, worst,
                                rep.verdict, lower_holds)
