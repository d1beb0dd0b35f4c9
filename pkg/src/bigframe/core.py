"""Operator families, K-bi-g-frame systems, optimal bounds and classification.

A system is a pair of finite families ``Phi_i, Psi_i : C^n -> C^{d_i}``
together with an operator ``K`` on ``C^n``. Its biframe operator is
``S = sum_i Psi_i^* Phi_i`` and its mixed energy is
``<S x, x> = sum_i <Phi_i x, Psi_i x>``. The system is a K-bi-g-frame when
``A ||K^* x||^2 <= <S x, x> <= B ||x||^2`` for some ``0 < A <= B``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotHermitian
from .opkit import (DEFAULT_TOL, adjoint, as_operator, douglas_factor,
                    hermitian_residual, opnorm, psd_sqrt, symmetrize)


def _frozen(a):
    a = as_operator(a).copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GOperatorFamily:
    """Finite family of operators ``C^ambient_dim -> C^{subspace_dims[i]}``."""

    ambient_dim: int
    subspace_dims: tuple
    operators: tuple

    def __post_init__(self):
        ops = tuple(_frozen(op) for op in self.operators)
        dims = tuple(int(d) for d in self.subspace_dims)
        if self.ambient_dim < 1:
            raise DimensionMismatch("ambient_dim must be positive")
        if len(ops) != len(dims):
            raise DimensionMismatch(f"{len(ops)} operators but {len(dims)} subspace dims")
        if len(ops) == 0:
            raise DimensionMismatch("a family needs at least one member")
        for i, (op, d) in enumerate(zip(ops, dims)):
            if d < 1:
                raise DimensionMismatch(f"operator {i}: subspace dim must be positive")
            if op.shape != (d, self.ambient_dim):
                raise DimensionMismatch(
                    f"operator {i}: expected shape {(d, self.ambient_dim)}, got {op.shape}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "subspace_dims", dims)

    @classmethod
    def from_operators(cls, operators):
        ops = [as_operator(op) for op in operators]
        if not ops:
            raise DimensionMismatch("a family needs at least one member")
        return cls(ops[0].shape[1], tuple(op.shape[0] for op in ops), tuple(ops))

    def __len__(self):
        return len(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    def __iter__(self):
        return iter(self.operators)

    def __eq__(self, other):
        if not isinstance(other, GOperatorFamily):
            return NotImplemented
        return (self.ambient_dim == other.ambient_dim
                and self.subspace_dims == other.subspace_dims
                and all(np.array_equal(a, b) for a, b in zip(self.operators, other.operators)))

    def map(self, fn):
        """Family with ``fn`` applied to every member."""
        return GOperatorFamily.from_operators([fn(op) for op in self.operators])

    def scaled(self, c):
        return self.map(lambda op: c * op)

    def compose_right(self, m):
        """``{Phi_i M}``: precompose every member with ``M``."""
        m = as_operator(m)
        return self.map(lambda op: op @ m)

    def same_shape(self, other):
        return (self.ambient_dim == other.ambient_dim
                and self.subspace_dims == other.subspace_dims)


@dataclass(frozen=True)
class DirectSumVector:
    """Element of the finite direct sum ``C^{d_1} + ... + C^{d_m}``."""

    blocks: tuple

    def inner(self, other):
        """Block-wise inner product, linear in the first argument."""
        if len(self.blocks) != len(other.blocks):
            raise DimensionMismatch("direct sums have different lengths")
        return sum(complex(np.vdot(b, a)) for a, b in zip(self.blocks, other.blocks))

    def norm_squared(self):
        return float(sum(np.vdot(a, a).real for a in self.blocks))


def analysis(fam, x):
    """``x -> (Phi_i x)_i`` as a :class:`DirectSumVector`."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (fam.ambient_dim,):
        raise DimensionMismatch(f"vector of length {fam.ambient_dim} required, got {x.shape}")
    return DirectSumVector(tuple(op @ x for op in fam.operators))


@dataclass(frozen=True, eq=False)
class BiGFrameSystem:
    phi: GOperatorFamily
    psi: GOperatorFamily
    k_op: np.ndarray

    def __post_init__(self):
        if not self.phi.same_shape(self.psi):
            raise DimensionMismatch("phi and psi must share ambient and subspace dimensions")
        k = _frozen(self.k_op)
        n = self.phi.ambient_dim
        if k.shape != (n, n):
            raise DimensionMismatch(f"K must be {n}x{n}, got {k.shape}")
        object.__setattr__(self, "k_op", k)

    @property
    def dim(self):
        return self.phi.ambient_dim

    def __len__(self):
        return len(self.phi)

    def __eq__(self, other):
        if not isinstance(other, BiGFrameSystem):
            return NotImplemented
        return (self.phi == other.phi and self.psi == other.psi
                and np.array_equal(self.k_op, other.k_op))

    def with_k(self, k):
        return BiGFrameSystem(self.phi, self.psi, k)


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper < np.inf):
            raise ValueError(f"need 0 < lower <= upper < inf, got ({self.lower}, {self.upper})")


class Verdict(Enum):
    INVALID_NON_REAL_FORM = "invalid_non_real_form"
    INVALID_INDEFINITE = "invalid_indefinite"
    BESSEL_ONLY = "bessel_only"
    BI_G_FRAME = "bi_g_frame"
    K_BI_G_FRAME = "k_bi_g_frame"
    TIGHT = "tight_k_bi_g_frame"
    PARSEVAL = "parseval_k_bi_g_frame"

    @property
    def rank(self):
        return _VERDICT_RANK[self]

    def __ge__(self, other):
        if not isinstance(other, Verdict):
            return NotImplemented
        return self.rank >= other.rank

    def __gt__(self, other):
        if not isinstance(other, Verdict):
            return NotImplemented
        return self.rank > other.rank

    def __le__(self, other):
        if not isinstance(other, Verdict):
            return NotImplemented
        return self.rank <= other.rank

    def __lt__(self, other):
        if not isinstance(other, Verdict):
            return NotImplemented
        return self.rank < other.rank

    def __str__(self):
        return self.value


_VERDICT_RANK = {
    Verdict.INVALID_NON_REAL_FORM: 0,
    Verdict.INVALID_INDEFINITE: 0,
    Verdict.BESSEL_ONLY: 1,
    Verdict.BI_G_FRAME: 2,
    Verdict.K_BI_G_FRAME: 3,
    Verdict.TIGHT: 4,
    Verdict.PARSEVAL: 5,
}


def _accumulate(phi, psi, indices):
    """``sum_{i in J} Psi_i^* Phi_i`` in ascending index order.

    Built from real outer products of the rows, summed in a fixed order, so
    swapping the families yields the exact adjoint (BLAS and SIMD complex
    products do not guarantee that).
    """
    n = phi.ambient_dim
    re = np.zeros((n, n))
    im = np.zeros((n, n))
    for i in sorted(indices):
        p, q = phi[i], psi[i]
        for pr, pi, qr, qi in zip(p.real, p.imag, q.real, q.imag):
            re += np.multiply.outer(qr, pr) + np.multiply.outer(qi, pi)
            im += np.multiply.outer(qr, pi) - np.multiply.outer(qi, pr)
    return re + 1j * im


def partial_sum(phi, psi, indices):
    """``sum_{i in J} Psi_i^* Phi_i`` over a subset ``J`` of 0-based indices."""
    m = len(phi)
    idx = set(indices)
    bad = [i for i in idx if not (0 <= i < m)]
    if bad:
        raise IndexOutOfRange(f"indices {sorted(bad)} outside 0..{m - 1}")
    return _accumulate(phi, psi, idx)


def biframe_operator(sys):
    """``S = sum_i Psi_i^* Phi_i``."""
    return _accumulate(sys.phi, sys.psi, range(len(sys.phi)))


def quadratic_form(sys, x):
    """``sum_i <Phi_i x, Psi_i x>``, evaluated in the direct sum."""
    return analysis(sys.phi, x).inner(analysis(sys.psi, x))


def g_frame_operator_and_bessel(fam):
    """Frame operator ``sum_i Phi_i^* Phi_i`` and its optimal g-Bessel bound."""
    n = fam.ambient_dim
    s = np.zeros((n, n), dtype=np.complex128)
    for op in fam:
        s += adjoint(op) @ op
    s = symmetrize(s)
    return s, float(max(np.linalg.eigvalsh(s)[-1], 0.0))


@dataclass
class BoundsResult:
    """Outcome of :func:`optimal_bounds`.

    ``bounds`` is set only for a K-bi-g-frame with nonzero K. ``a_opt`` is the
    best lower constant (``inf`` when K = 0, ``nan`` when the form is
    invalid); ``lower_vector``/``upper_vector`` attain the two inequalities.
    """

    bounds: Optional[FrameBounds]
    failure: Optional[Verdict]
    a_opt: float
    b_opt: float
    hermiticity_residual: float
    min_eigenvalue: float
    max_eigenvalue: float
    k_rank: int
    degenerate_k: bool
    is_k_frame: bool
    is_bi_g_frame: bool
    s: np.ndarray = field(repr=False)
    lower_vector: Optional[np.ndarray] = field(default=None, repr=False)
    upper_vector: Optional[np.ndarray] = field(default=None, repr=False)


def _optimal_lower(s_sym, k, tol):
    """Infimum of ``<Sx,x> / ||K^*x||^2`` for PSD ``S``, with a minimizer.

    Works in the left singular basis of K. With ``S = F^2`` (F the PSD root)
    and ``G = F U``, the null-space component of x is eliminated in closed
    form: the Schur complement of the range block equals
    ``G_r^* (I - P) G_r`` with ``P`` the projector onto ``R(G_n)``.
    """
    n = k.shape[0]
    u, sig, _ = np.linalg.svd(k)
    if sig[0] == 0.0:
        return np.inf, 0, None
    r = int(np.count_nonzero(sig > tol.rank_tol(k.shape) * sig[0]))
    f = psd_sqrt(s_sym, tol)
    g = f @ u
    g_r, g_n = g[:, :r], g[:, r:]
    h = g_r
    q = None
    if r < n:
        qn, sn, _ = np.linalg.svd(g_n, full_matrices=False)
        fmax = np.sqrt(max(np.linalg.eigvalsh(s_sym)[-1], 0.0))
        q = qn[:, sn > tol.rank_tol((n, n)) * fmax] if fmax > 0 else qn[:, :0]
        h = g_r - q @ (adjoint(q) @ g_r)
    w = h / sig[:r]
    _, sw, wvh = np.linalg.svd(w, full_matrices=False)
    a_opt = float(sw[-1] ** 2)
    z = adjoint(wvh)[:, -1] / sig[:r]
    x = u[:, :r] @ z
    if r < n:
        # best null component: y_n = -G_n^+ P G_r z
        y_n = -np.linalg.lstsq(g_n, q @ (adjoint(q) @ (g_r @ z)), rcond=None)[0]
        x = x + u[:, r:] @ y_n
    return a_opt, r, x / np.linalg.norm(x)


def optimal_bounds(sys, tol=DEFAULT_TOL):
    """Optimal lower/upper constants of a system.

    1. Reject non-Hermitian ``S`` (``invalid_non_real_form``), then symmetrize.
    2. Reject ``lambda_min(S) < -rel_psd_tol * |lambda|_max`` (``invalid_indefinite``).
    3. ``B_opt = lambda_max(S)``.
    4. ``A_opt`` is the least generalized eigenvalue of ``S`` against ``KK^*``
       on ``R(K)``, after eliminating the null-space block (Schur complement).
    5. K-bi-g-frame iff ``A_opt ||K||^2 > rel_psd_tol * lambda_max(S)``.

    Never raises on well-formed systems; failures are carried in ``failure``.
    """
    s = biframe_operator(sys)
    hr = hermitian_residual(s)
    nan = float("nan")
    if hr > tol.rel_sym_tol:
        return BoundsResult(None, Verdict.INVALID_NON_REAL_FORM, nan, nan, hr, nan, nan,
                            0, False, False, False, s)
    s = symmetrize(s)
    w, v = np.linalg.eigh(s)
    lmin, lmax = float(w[0]), float(w[-1])
    scale = max(abs(lmin), abs(lmax))
    k = sys.k_op
    knorm = opnorm(k)
    if lmin < -tol.rel_psd_tol * scale:
        return BoundsResult(None, Verdict.INVALID_INDEFINITE, nan, lmax, hr, lmin, lmax,
                            0, knorm == 0.0, False, False, s, upper_vector=v[:, -1])
    a_opt, k_rank, xlow = _optimal_lower(s, k, tol)
    degenerate = k_rank == 0
    thresh = tol.rel_psd_tol * lmax
    is_k = bool(degenerate or (lmax > 0 and a_opt * knorm ** 2 > thresh))
    is_bi = bool(lmax > 0 and lmin > thresh)
    bounds = None
    if is_k and not degenerate:
        bounds = FrameBounds(a_opt, max(lmax, a_opt))
    return BoundsResult(bounds, None, a_opt, lmax, hr, lmin, lmax, k_rank, degenerate,
                        is_k, is_bi, s, lower_vector=xlow, upper_vector=v[:, -1])


@dataclass(frozen=True)
class ClassificationReport:
    verdict: Verdict
    optimal_bounds: Optional[FrameBounds]
    a_opt: float
    b_opt: float
    hermiticity_residual: float
    min_eigenvalue: float
    tight_residual: float
    k_rank: int
    degenerate_k: bool
    is_bi_g_frame: bool = False
    remarks: tuple = ()

    def __post_init__(self):
        # structural monotonicity: parseval => tight => k-bi-g-frame
        if self.verdict >= Verdict.TIGHT:
            assert self.verdict >= Verdict.K_BI_G_FRAME
            assert np.isfinite(self.tight_residual)

    def at_least(self, verdict):
        return self.verdict >= verdict


def _controlled_by(phi, psi, tol):
    """Return C with ``Psi_i = Phi_i C`` for all i, or None."""
    a = np.vstack(phi.operators)
    b = np.vstack(psi.operators)
    c = np.linalg.lstsq(a, b, rcond=None)[0]
    nb = np.linalg.norm(b)
    if nb == 0 or np.linalg.norm(a @ c - b) > tol.rel_range_tol * nb:
        return None
    sv = np.linalg.svd(c, compute_uv=False)
    if sv[-1] <= tol.rank_tol(c.shape) * sv[0]:
        return None
    return c


def classify(sys, tol=DEFAULT_TOL):
    """Place a system in the verdict lattice and collect diagnostics.

    Tight iff ``||S - A_opt KK^*||_F <= rel_sym_tol * ||S||_F``; Parseval iff
    additionally ``|A_opt - 1| <= rel_sym_tol``.
    """
    res = optimal_bounds(sys, tol)
    remarks = []
    if sys.phi == sys.psi:
        remarks.append("phi == psi: the verdict is a K-g-frame statement for phi")
    elif _controlled_by(sys.phi, sys.psi, tol) is not None:
        remarks.append("psi_i = phi_i C for an invertible C: controlled K-g-frame structure")

    if res.failure is not None:
        return ClassificationReport(res.failure, None, res.a_opt, res.b_opt,
                                    res.hermiticity_residual, res.min_eigenvalue,
                                    float("nan"), res.k_rank, res.degenerate_k,
                                    False, tuple(remarks))
    s = res.s
    kk = sys.k_op @ adjoint(sys.k_op)
    tight_res = float("inf")
    if not res.degenerate_k:
        tight_res = float(np.linalg.norm(s - res.a_opt * kk))

    if res.is_k_frame:
        verdict = Verdict.K_BI_G_FRAME
        if tight_res <= tol.rel_sym_tol * np.linalg.norm(s):
            verdict = Verdict.TIGHT
            if abs(res.a_opt - 1.0) <= tol.rel_sym_tol:
                verdict = Verdict.PARSEVAL
    elif res.is_bi_g_frame:
        verdict = Verdict.BI_G_FRAME
    else:
        verdict = Verdict.BESSEL_ONLY
    if res.degenerate_k:
        remarks.append("K = 0: lower inequality is vacuous, A_opt reported as +inf")
    if res.is_bi_g_frame:
        remarks.append("S is positive definite: ordinary bi-g-frame")
    return ClassificationReport(verdict, res.bounds, res.a_opt, res.b_opt,
                                res.hermiticity_residual, res.min_eigenvalue, tight_res,
                                res.k_rank, res.degenerate_k, res.is_bi_g_frame,
                                tuple(remarks))


def psd_gap(sys, a, tol=DEFAULT_TOL):
    """``lambda_min(S - a KK^*)``: nonnegative iff ``a`` is a valid lower bound."""
    s = biframe_operator(sys)
    hr = hermitian_residual(s)
    if hr > tol.rel_sym_tol:
        raise NotHermitian(f"hermiticity residual {hr:.3e} exceeds {tol.rel_sym_tol:.1e}")
    kk = sys.k_op @ adjoint(sys.k_op)
    return float(np.linalg.eigvalsh(symmetrize(symmetrize(s) - a * kk))[0])


def sqrt_factor(sys, tol=DEFAULT_TOL):
    """Solve ``K = S^{1/2} U``.

    Succeeds exactly when the system is a K-bi-g-frame. The rank of
    ``S^{1/2}`` is cut at ``sqrt(rel_psd_tol)``, which matches the threshold
    ``classify`` applies to the eigenvalues of S.

    Raises
    ------
    RangeNotIncluded
        ``R(K)`` escapes ``R(S^{1/2})``: not a K-bi-g-frame.
    NotHermitian, NotPSD
    """
    s = biframe_operator(sys)
    root = psd_sqrt(s, tol)
    rtol = tol.with_rank_tol(max(tol.rank_tol(s.shape), np.sqrt(tol.rel_psd_tol)))
    u, _ = douglas_factor(sys.k_op, root, rtol)
    return u
