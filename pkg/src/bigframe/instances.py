"""Worked fixtures, seeded random generators and the ``bigframe v1`` format.

File format (UTF-8, LF, ``#`` comment lines and blank lines ignored)::

    bigframe v1
    dim <n>
    count <m>
    subdim <d_1>
    phi
    <d_1 lines of n entries>
    psi
    <d_1 lines of n entries>
    ...                      # repeated for members 2..m
    K
    <n lines of n entries>

Each entry is ``re im`` written with 17 significant digits, so a round trip
reproduces every float bit for bit.
"""

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BiGFrameSystem, GOperatorFamily, biframe_operator
from .errors import ParseError, SpecInvalid
from .opkit import adjoint, as_operator, psd_sqrt, symmetrize

MAX_DIM = 64
KINDS = ("generic", "diagonal", "parseval", "rank_deficient_k", "tight")


def _unit(n, k):
    e = np.zeros(n, dtype=np.complex128)
    e[k] = 1.0
    return e


def _rank_one(d, n, row, col, coef):
    """Matrix of ``x -> coef <x, e_col> e_row`` from C^n into C^d."""
    m = np.zeros((d, n), dtype=np.complex128)
    m[row, col] = coef
    return m


def example_3_4():
    """Four-member system on C^4 with ``Kx = <x, e1> e2``.

    Subspaces ``K_i = span{e1..e_i}``; ``Phi = (e1<-e1, e1<-e1, 3 e3<-e2,
    4 e4<-e3)`` and ``Psi`` the same with coefficients ``1, 1, 1/3, 1/4``.
    Its biframe operator is ``diag(2, 1, 1, 0)`` and its optimal bounds are
    ``(1, 2)``.
    """
    n = 4
    dims = (1, 2, 3, 4)
    # (target row, source column) of each rank-one member
    pos = [(0, 0), (0, 0), (2, 1), (3, 2)]
    phi = [_rank_one(d, n, r, c, a) for d, (r, c), a in zip(dims, pos, (1, 1, 3, 4))]
    psi = [_rank_one(d, n, r, c, a) for d, (r, c), a in zip(dims, pos, (1, 1, 1 / 3, 1 / 4))]
    k = np.outer(_unit(n, 1), _unit(n, 0).conj())
    return BiGFrameSystem(GOperatorFamily(n, dims, tuple(phi)),
                          GOperatorFamily(n, dims, tuple(psi)), k)


def example_3_6():
    """Parseval system on C^4 with ``K = I``, ``Phi_i = i e_i e_i^*`` and
    ``Psi_i = (1/i) e_i e_i^*`` mapping into one-dimensional subspaces."""
    n = 4
    phi = [_rank_one(1, n, 0, i, i + 1) for i in range(n)]
    psi = [_rank_one(1, n, 0, i, 1 / (i + 1)) for i in range(n)]
    dims = (1,) * n
    return BiGFrameSystem(GOperatorFamily(n, dims, tuple(phi)),
                          GOperatorFamily(n, dims, tuple(psi)),
                          np.eye(n, dtype=np.complex128))


# ---------------------------------------------------------------- generators

@dataclass(frozen=True)
class GeneratorSpec:
    ambient_dim: int
    family_size: int
    kind: str = "generic"
    seed: int = 0
    k_rank: Optional[int] = None

    def __post_init__(self):
        if not (1 <= self.ambient_dim <= MAX_DIM):
            raise SpecInvalid(f"ambient_dim must be in 1..{MAX_DIM}, got {self.ambient_dim}")
        if self.family_size < 1:
            raise SpecInvalid("family_size must be at least 1")
        if self.kind not in KINDS:
            raise SpecInvalid(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.k_rank is not None and not (0 <= self.k_rank <= self.ambient_dim):
            raise SpecInvalid("k_rank must lie in 0..ambient_dim")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(n, rng):
    q, r = np.linalg.qr(_cgauss(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_operator(dim, kind, seed=0, rank=None):
    """Random square operator of a given flavour.

    ``kind`` is ``"positive"`` (Gram matrix), ``"invertible"`` (singular
    values in ``[0.1, 2]``) or ``"rank"`` (exactly ``rank`` nonzero singular
    values in ``[0.1, 2]``).
    """
    rng = _rng(seed)
    if dim < 1 or dim > MAX_DIM:
        raise SpecInvalid(f"dim must be in 1..{MAX_DIM}")
    if kind == "positive":
        x = _cgauss(rng, dim, dim)
        return symmetrize(x @ adjoint(x))
    if kind == "invertible":
        rank = dim
    elif kind == "rank":
        if rank is None or not (0 <= rank <= dim):
            raise SpecInvalid("rank must lie in 0..dim")
    else:
        raise SpecInvalid(f"unknown operator kind {kind!r}")
    u = random_unitary(dim, rng)
    v = random_unitary(dim, rng)
    s = np.zeros(dim)
    s[:rank] = rng.uniform(0.1, 2.0, rank)
    return (u * s) @ adjoint(v)


def _codomain_pair(theta, rng):
    """``(W Theta, W^{-*} Theta)`` for a random well-conditioned invertible W.

    ``(W^{-*} Theta)^* (W Theta) = Theta^* Theta``, so the pair reproduces the
    single-family frame operator while ``Phi != Psi``.
    """
    d = theta.shape[0]
    w = np.eye(d) + 0.3 * _cgauss(rng, d, d) / np.sqrt(d)
    sv = np.linalg.svd(w, compute_uv=False)
    w = w / np.sqrt(sv[0] * sv[-1])
    return w @ theta, np.linalg.solve(adjoint(w), theta)


def random_families(n, m, rng, dims=None, right=None):
    """Random ``(Phi, Psi)`` with Hermitian PSD biframe operator.

    ``Phi_i = W_i Theta_i R`` and ``Psi_i = W_i^{-*} Theta_i R``, giving
    ``S = R^* (sum_i Theta_i^* Theta_i) R``.
    """
    if dims is None:
        dims = tuple(int(d) for d in rng.integers(1, n + 1, size=m))
    if right is None:
        right = np.eye(n) + 0.5 * _cgauss(rng, n, n) / np.sqrt(n)
    phi, psi = [], []
    for d in dims:
        theta = _cgauss(rng, d, n)
        a, b = _codomain_pair(theta, rng)
        phi.append(a @ right)
        psi.append(b @ right)
    return GOperatorFamily(n, tuple(dims), tuple(phi)), GOperatorFamily(n, tuple(dims), tuple(psi))


def _covering_dims(n, m, rng):
    """Subspace dims whose sum reaches n (so S is generically invertible)."""
    dims = rng.integers(1, n + 1, size=m)
    while dims.sum() < n:
        dims[rng.integers(m)] += 1
        dims = np.minimum(dims, n)
    return tuple(int(d) for d in dims)


def tighten(phi, psi, k, delta, rng=None):
    """Precompose both families with ``C`` so that ``S' = delta K K^*``.

    Requires the current biframe operator to be positive definite. With
    ``C = S^{-1/2} sqrt(delta) (K V)^*`` for a unitary ``V``,
    ``C^* S C = delta K K^*``.
    """
    rng = _rng(rng)
    n = phi.ambient_dim
    s = biframe_operator(BiGFrameSystem(phi, psi, np.eye(n)))
    w, v = np.linalg.eigh(symmetrize(s))
    if w[0] <= 1e-8 * w[-1]:
        raise SpecInvalid("tighten needs a positive definite biframe operator")
    inv_root = (v / np.sqrt(w)) @ adjoint(v)
    c = inv_root @ (np.sqrt(delta) * adjoint(as_operator(k) @ random_unitary(n, rng)))
    return phi.compose_right(c), psi.compose_right(c)


def random_system(spec):
    """Deterministic random system for a :class:`GeneratorSpec`.

    generic
        random families, random K; may or may not be a K-bi-g-frame.
    diagonal
        commuting diagonal members with positive coefficients, diagonal K.
    parseval / tight
        ``S = c K K^*`` with ``c = 1`` or ``c`` drawn in ``[0.5, 2]``.
    rank_deficient_k
        positive definite S, K with exactly ``k_rank`` nonzero singular values
        (default ``n // 2``).
    """
    rng = np.random.default_rng(spec.seed)
    n, m = spec.ambient_dim, spec.family_size
    if spec.kind == "generic":
        phi, psi = random_families(n, m, rng)
        return BiGFrameSystem(phi, psi, _cgauss(rng, n, n))
    if spec.kind == "diagonal":
        phi_ops, psi_ops = [], []
        for _ in range(m):
            a = rng.uniform(0.2, 2.0, n) * (rng.random(n) < 0.8)
            b = rng.uniform(0.2, 2.0, n)
            phi_ops.append(np.diag(a).astype(np.complex128))
            psi_ops.append(np.diag(b).astype(np.complex128))
        kd = rng.uniform(0.2, 2.0, n) * (rng.random(n) < 0.7)
        return BiGFrameSystem(GOperatorFamily.from_operators(phi_ops),
                              GOperatorFamily.from_operators(psi_ops),
                              np.diag(kd).astype(np.complex128))
    if spec.kind in ("parseval", "tight"):
        phi, psi = random_families(n, m, rng)
        s = biframe_operator(BiGFrameSystem(phi, psi, np.eye(n)))
        c = 1.0 if spec.kind == "parseval" else float(rng.uniform(0.5, 2.0))
        k = psd_sqrt(s) @ random_unitary(n, rng) / np.sqrt(c)
        return BiGFrameSystem(phi, psi, k)
    # rank_deficient_k
    phi, psi = random_families(n, m, rng, dims=_covering_dims(n, m, rng))
    r = spec.k_rank if spec.k_rank is not None else max(n // 2, 1)
    return BiGFrameSystem(phi, psi, random_operator(n, "rank", rng, rank=r))


# ------------------------------------------------------------- serialization

def _fmt(z):
    return f"{z.real:.17g} {z.imag:.17g}"


def _write_rows(out, mat):
    for row in mat:
        out.write(" ".join(_fmt(z) for z in row))
        out.write("\n")


def serialize(sys):
    """Encode a system as ``bigframe v1`` text (returned as UTF-8 bytes)."""
    out = io.StringIO()
    out.write("bigframe v1\n")
    out.write(f"dim {sys.dim}\n")
    out.write(f"count {len(sys)}\n")
    for d, p, q in zip(sys.phi.subspace_dims, sys.phi, sys.psi):
        out.write(f"subdim {d}\n")
        out.write("phi\n")
        _write_rows(out, p)
        out.write("psi\n")
        _write_rows(out, q)
    out.write("K\n")
    _write_rows(out, sys.k_op)
    return out.getvalue().encode("utf-8")


def serialize_matrix(mat):
    """Standalone matrix file: ``matrix <rows> <cols>`` then the rows."""
    mat = as_operator(mat)
    out = io.StringIO()
    out.write(f"matrix {mat.shape[0]} {mat.shape[1]}\n")
    _write_rows(out, mat)
    return out.getvalue().encode("utf-8")


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


class _Lines:
    def __init__(self, data):
        if isinstance(data, (bytes, bytearray)):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(1, f"not UTF-8: {exc}") from None
        raw = data.split("\n")
        self.items = [(i + 1, ln.strip()) for i, ln in enumerate(raw)
                      if ln.strip() and not ln.lstrip().startswith("#")]
        self.pos = 0
        self.last_line = len(raw)

    def next(self, what):
        if self.pos >= len(self.items):
            raise ParseError(self.last_line, f"unexpected end of input, missing {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item

    def keyword(self, word):
        lineno, text = self.next(f"'{word}'")
        if text != word:
            raise ParseError(lineno, f"expected '{word}', got {text!r}")

    def keyed_int(self, key):
        lineno, text = self.next(f"'{key} <int>'")
        parts = text.split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(lineno, f"expected '{key} <int>', got {text!r}")
        try:
            v = int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"{key} is not an integer: {parts[1]!r}") from None
        if v < 1:
            raise ParseError(lineno, f"{key} must be positive")
        return v

    def matrix(self, rows, cols, label):
        out = np.empty((rows, cols), dtype=np.complex128)
        for r in range(rows):
            if self.pos >= len(self.items):
                raise ParseError(self.last_line,
                                 f"{label}: expected {rows} rows, input ended after {r}")
            lineno, text = self.items[self.pos]
            tokens = text.split()
            try:
                vals = [float(t) for t in tokens]
            except ValueError:
                if r == 0:
                    raise ParseError(lineno, f"{label}: expected {rows} rows, got 0") from None
                raise ParseError(lineno, f"{label}: expected {rows} rows, got {r}") from None
            self.pos += 1
            if len(vals) != 2 * cols:
                raise ParseError(lineno, f"expected {cols} entries ({2 * cols} numbers), got {len(vals)} numbers")
            if not np.all(np.isfinite(vals)):
                raise ParseError(lineno, "non-finite entry")
            out[r] = np.asarray(vals[0::2]) + 1j * np.asarray(vals[1::2])
        if self.pos < len(self.items):
            lineno, text = self.items[self.pos]
            tokens = text.split()
            if tokens and _is_number(tokens[0]):
                raise ParseError(lineno, f"{label}: expected {rows} rows, got more")
        return out

    def expect_end(self):
        if self.pos < len(self.items):
            lineno, text = self.items[self.pos]
            raise ParseError(lineno, f"trailing content {text!r}")


def deserialize(data):
    """Decode ``bigframe v1`` text or bytes.

    Raises
    ------
    ParseError
        With the 1-based line number of the offending line.
    """
    lines = _Lines(data)
    lines.keyword("bigframe v1")
    n = lines.keyed_int("dim")
    if n > MAX_DIM:
        raise ParseError(lines.items[lines.pos - 1][0], f"dim exceeds {MAX_DIM}")
    m = lines.keyed_int("count")
    dims, phi, psi = [], [], []
    for i in range(1, m + 1):
        d = lines.keyed_int("subdim")
        dims.append(d)
        lines.keyword("phi")
        phi.append(lines.matrix(d, n, f"operator {i}"))
        lines.keyword("psi")
        psi.append(lines.matrix(d, n, f"operator {i}"))
    lines.keyword("K")
    k = lines.matrix(n, n, "K")
    lines.expect_end()
    return BiGFrameSystem(GOperatorFamily(n, tuple(dims), tuple(phi)),
                          GOperatorFamily(n, tuple(dims), tuple(psi)), k)


def deserialize_matrix(data):
    lines = _Lines(data)
    lineno, text = lines.next("'matrix <rows> <cols>'")
    parts = text.split()
    if len(parts) != 3 or parts[0] != "matrix":
        raise ParseError(lineno, f"expected 'matrix <rows> <cols>', got {text!r}")
    try:
        rows, cols = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(lineno, "matrix dimensions must be integers") from None
    if rows < 1 or cols < 1:
        raise ParseError(lineno, "matrix dimensions must be positive")
    mat = lines.matrix(rows, cols, "matrix")
    lines.expect_end()
    return mat
