"""Dense complex operator toolkit.

Spectral primitives plus the operator-theoretic tools the frame machinery
leans on: Moore-Penrose pseudo-inverse, PSD square root, Douglas
factorization (range inclusion / majorization / factorization), the
injectivity margin of a closed-range operator, and Neumann-type bounds for
operators close to the identity.

Operators are plain ``numpy`` arrays of dtype ``complex128``; every function
here is pure.
"""

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import (DimensionMismatch, NotHermitian, NotPSD, NotSquare,
                     RangeNotIncluded)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectralTolerance:
    """Relative cutoffs used for every numerical rank/sign decision.

    Parameters
    ----------
    rel_rank_tol : float or None
        Singular values ``<= rel_rank_tol * sigma_max`` count as zero. ``None``
        means ``max(rows, cols) * eps * 64`` for the matrix at hand.
    rel_sym_tol : float
        Allowed ``||S - S*||_F / ||S||_F`` for an operator to count as
        Hermitian. Also the relative tolerance of tightness tests.
    rel_psd_tol : float
        Allowed negative eigenvalue, relative to the spectral radius.
    rel_range_tol : float
        Allowed relative residual ``||P T1 - T1||_F / ||T1||_F`` in range
        inclusion tests.
    """

    rel_rank_tol: Optional[float] = None
    rel_sym_tol: float = 1e-10
    rel_psd_tol: float = 1e-10
    rel_range_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rel_rank_tol", "rel_sym_tol", "rel_psd_tol", "rel_range_tol"):
            v = getattr(self, name)
            if v is None:
                continue
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {v!r}")

    def rank_tol(self, shape):
        if self.rel_rank_tol is not None:
            return self.rel_rank_tol
        return max(shape) * _EPS * 64

    def with_rank_tol(self, rel_rank_tol):
        return replace(self, rel_rank_tol=rel_rank_tol)


DEFAULT_TOL = SpectralTolerance()


def as_operator(a, name="operator"):
    """Return ``a`` as a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"{name} has an empty dimension: {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def adjoint(a):
    return a.conj().T


def opnorm(a):
    """Spectral norm (largest singular value)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_residual(s):
    """``||S - S*||_F / ||S||_F`` (0 for the zero operator)."""
    nrm = np.linalg.norm(s)
    if nrm == 0:
        return 0.0
    return float(np.linalg.norm(s - adjoint(s)) / nrm)


def symmetrize(s):
    return 0.5 * (s + adjoint(s))


def pseudo_inverse(t, tol=DEFAULT_TOL):
    """Moore-Penrose pseudo-inverse through the SVD.

    The numerical rank counts singular values above
    ``tol.rank_tol(shape) * sigma_max``. The zero matrix maps to the zero
    matrix of transposed shape.
    """
    t = as_operator(t)
    u, s, vh = np.linalg.svd(t, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(t.shape[::-1], dtype=np.complex128)
    keep = s > tol.rank_tol(t.shape) * s[0]
    r = int(np.count_nonzero(keep))
    return (adjoint(vh[:r]) / s[:r]) @ adjoint(u[:, :r])


def numerical_rank(t, tol=DEFAULT_TOL):
    t = as_operator(t)
    s = np.linalg.svd(t, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol(t.shape) * s[0]))


def range_basis(t, tol=DEFAULT_TOL):
    """Orthonormal basis of R(t) and the matching singular values."""
    t = as_operator(t)
    u, s, _ = np.linalg.svd(t, full_matrices=False)
    if s[0] == 0.0:
        return u[:, :0], s[:0]
    keep = s > tol.rank_tol(t.shape) * s[0]
    return u[:, keep], s[keep]


def psd_sqrt(s, tol=DEFAULT_TOL):
    """Hermitian PSD square root of a numerically PSD matrix.

    Eigenvalues in ``[-rel_psd_tol * lambda_max, 0)`` are clamped to zero, and
    so are positive ones at rounding level (``<= rank_tol * lambda_max``):
    their square roots would otherwise turn ``1e-16`` noise into ``1e-8``.

    Raises
    ------
    NotSquare, NotHermitian, NotPSD
    """
    s = as_operator(s)
    if s.shape[0] != s.shape[1]:
        raise NotSquare(f"square matrix required, got {s.shape}")
    res = hermitian_residual(s)
    if res > tol.rel_sym_tol:
        raise NotHermitian(f"hermiticity residual {res:.3e} exceeds {tol.rel_sym_tol:.1e}")
    w, v = np.linalg.eigh(symmetrize(s))
    scale = max(abs(w[0]), abs(w[-1]))
    if w[0] < -tol.rel_psd_tol * scale:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below allowance {-tol.rel_psd_tol * scale:.3e}")
    root = np.sqrt(np.where(w > tol.rank_tol(s.shape) * scale, w, 0.0))
    r = (v * root) @ adjoint(v)
    return symmetrize(r)


def douglas_factor(t1, t2, tol=DEFAULT_TOL):
    """Factor ``T1 = T2 U`` when ``R(T1)`` lies in ``R(T2)``.

    Returns ``(U, lam)`` with ``U = T2^+ T1`` and ``lam`` the least constant
    with ``T1 T1* <= lam^2 T2 T2*``. ``lam`` is the square root of the top
    generalized eigenvalue of the pencil ``(T1 T1*, T2 T2*)`` restricted to
    ``R(T2)``.

    Raises
    ------
    DimensionMismatch
        Row counts differ.
    RangeNotIncluded
        ``||T2 T2^+ T1 - T1||_F > rel_range_tol * ||T1||_F``.
    """
    t1 = as_operator(t1, "T1")
    t2 = as_operator(t2, "T2")
    if t1.shape[0] != t2.shape[0]:
        raise DimensionMismatch(f"row counts differ: {t1.shape} vs {t2.shape}")
    q, sv = range_basis(t2, tol)
    n1 = np.linalg.norm(t1)
    resid = np.linalg.norm(q @ (adjoint(q) @ t1) - t1)
    if resid > tol.rel_range_tol * n1:
        raise RangeNotIncluded(
            f"range inclusion residual {resid / n1:.3e} exceeds {tol.rel_range_tol:.1e}",
            residual=float(resid / n1))
    u = pseudo_inverse(t2, tol) @ t1
    if sv.size == 0:
        return u, 0.0
    c = adjoint(q) @ t1
    c = c / sv[:, None]
    pencil = c @ adjoint(c)
    lam2 = float(np.linalg.eigvalsh(symmetrize(pencil))[-1])
    return u, float(np.sqrt(max(lam2, 0.0)))


def injectivity_margin(t, tol=DEFAULT_TOL):
    """Largest ``c`` with ``c ||x||^2 <= ||T x||^2``, and whether T is
    injective with closed range at tolerance.

    Returns
    -------
    (c, injective_closed_range) : (float, bool)
    """
    t = as_operator(t)
    s = np.linalg.svd(t, compute_uv=False)
    smin = s[-1] if t.shape[0] >= t.shape[1] else 0.0
    c = float(smin ** 2)
    smax = s[0]
    return c, bool(smax > 0 and c > tol.rank_tol(t.shape) * smax ** 2)


class NeumannBounds(NamedTuple):
    hypothesis_margin: float
    forward_bounds: tuple
    inverse_bounds: tuple
    sigma_range: tuple
    inverse_sigma_range: Optional[tuple]
    consistent: bool


def neumann_bounds(t, alpha, beta, sample_count=64, seed=0, tol=DEFAULT_TOL):
    """Sampled check of ``||Tx - x|| <= alpha||x|| + beta||Tx||`` and the
    norm intervals it implies for ``T`` and ``T^{-1}``.

    The hypothesis is tested on ``sample_count`` seeded unit vectors plus
    the eigenvectors of ``(T - I)*(T - I)``; ``hypothesis_margin`` is the
    worst slack. ``consistent`` is False only when the sampled margin is
    nonnegative yet the singular values of ``T`` or ``T^{-1}`` escape the
    predicted intervals, i.e. when the sampled certificate was misleading.

    Raises
    ------
    NotSquare
    ValueError
        ``alpha`` or ``beta`` outside ``[0, 1)``.
    """
    t = as_operator(t)
    n = t.shape[0]
    if n != t.shape[1]:
        raise NotSquare(f"square matrix required, got {t.shape}")
    if not (0 <= alpha < 1 and 0 <= beta < 1):
        raise ValueError("alpha and beta must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, sample_count)) + 1j * rng.standard_normal((n, sample_count))
    x /= np.linalg.norm(x, axis=0)
    d = t - np.eye(n)
    _, ev = np.linalg.eigh(symmetrize(adjoint(d) @ d))
    x = np.hstack([x, ev])
    tx = t @ x
    slack = alpha + beta * np.linalg.norm(tx, axis=0) - np.linalg.norm(tx - x, axis=0)
    margin = float(slack.min())

    fwd = ((1 - alpha) / (1 + beta), (1 + alpha) / (1 - beta))
    inv = ((1 - beta) / (1 + alpha), (1 + beta) / (1 - alpha))
    s = np.linalg.svd(t, compute_uv=False)
    sig = (float(s[-1]), float(s[0]))
    inv_sig = None
    if s[-1] > tol.rank_tol(t.shape) * s[0]:
        inv_sig = (float(1 / s[0]), float(1 / s[-1]))

    consistent = True
    slop = 1e-12
    if margin >= -slop:
        ok_f = fwd[0] - slop <= sig[0] and sig[1] <= fwd[1] + slop
        ok_i = inv_sig is not None and inv[0] - slop <= inv_sig[0] and inv_sig[1] <= inv[1] + slop
        consistent = bool(ok_f and ok_i)
    return NeumannBounds(margin, fwd, inv, sig, inv_sig, consistent)
