"""Finite-dimensional tracial algebras and their noncommutative L_p calculus.

A :class:`TracialAlgebra` is a direct sum of full matrix blocks ``M_{d_i}``
carrying the normalized trace

    tau(x) = sum_i w_i * Tr(x_i) / d_i,     sum_i w_i = 1.

All blocks of size one give a classical probability space on
``len(blocks)`` points; a single block gives ``(M_n, Tr/n)``.

Elements are vectorized in an orthonormal basis for the pairing
``<a, b> = tau(a* b)`` (scaled matrix units), so that channels become
plain matrices acting on ``C^D`` with ``D = sum_i d_i**2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .exceptions import DomainError, StructureError

HERMITIAN_TOL = 1e-10
POSITIVE_TOL = 1e-10
RANK_RTOL = 1e-12

__all__ = [
    "TracialAlgebra",
    "AlgebraElement",
    "matrix_algebra",
    "commutative_algebra",
    "inner_product",
    "trace",
    "schatten_norm",
    "signed_power",
    "positive_part",
    "negative_part",
    "absolute_value",
    "mazur_map",
    "duality_map",
    "dual_exponent",
    "embed_2x2",
]


@dataclass(frozen=True)
class TracialAlgebra:
    """Direct sum of matrix blocks with a normalized weighted trace.

    Parameters
    ----------
    blocks : sequence of (dim, weight)
        Block sizes and trace weights. Weights must be positive and sum to 1.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple((int(d), float(w)) for d, w in self.blocks)
        if not blocks:
            raise StructureError("an algebra needs at least one block")
        for d, w in blocks:
            if d < 1:
                raise StructureError(f"block dimension must be >= 1, got {d}")
            if not w > 0:
                raise StructureError(f"block weight must be > 0, got {w}")
        total = sum(w for _, w in blocks)
        if abs(total - 1.0) > 1e-12:
            raise StructureError(f"block weights must sum to 1, got {total!r}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dims(self) -> tuple:
        return tuple(d for d, _ in self.blocks)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.blocks)

    @property
    def dimension(self) -> int:
        """Complex dimension ``sum d_i**2`` of the algebra."""
        return sum(d * d for d in self.dims)

    @property
    def size(self) -> int:
        """Side ``sum d_i`` of the block-diagonal matrix representation."""
        return sum(self.dims)

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.dims)

    @property
    def is_single_block(self) -> bool:
        return len(self.blocks) == 1

    @cached_property
    def _scales(self) -> np.ndarray:
        # coordinate scale sqrt(w/d) per block
        return np.array([np.sqrt(w / d) for d, w in self.blocks])

    @cached_property
    def _offsets(self) -> tuple:
        out, k = [], 0
        for d in self.dims:
            out.append(k)
            k += d * d
        out.append(k)
        return tuple(out)

    def doubled(self) -> "TracialAlgebra":
        """``M_2 ⊗ self``: every block doubles in size, weights unchanged."""
        return TracialAlgebra(tuple((2 * d, w) for d, w in self.blocks))

    # element constructors -------------------------------------------------

    def element(self, blocks) -> "AlgebraElement":
        return AlgebraElement(self, blocks)

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.eye(d) for d in self.dims])

    def zeros(self) -> "AlgebraElement":
        return AlgebraElement(self, [np.zeros((d, d)) for d in self.dims])

    def from_matrix(self, matrix) -> "AlgebraElement":
        """Read the diagonal blocks of a ``size x size`` matrix."""
        m = np.asarray(matrix)
        if m.shape != (self.size, self.size):
            raise StructureError(f"expected a {self.size}x{self.size} matrix, got {m.shape}")
        out, k = [], 0
        for d in self.dims:
            out.append(m[k:k + d, k:k + d])
            k += d
        return AlgebraElement(self, out)

    def from_function(self, values) -> "AlgebraElement":
        """Element of a commutative algebra from its point values."""
        if not self.is_commutative:
            raise StructureError("from_function needs a commutative algebra")
        v = np.asarray(values)
        if v.shape != (len(self.blocks),):
            raise StructureError(f"expected {len(self.blocks)} values, got shape {v.shape}")
        return AlgebraElement(self, [np.array([[c]]) for c in v])

    def from_vector(self, vec) -> "AlgebraElement":
        """Inverse of :meth:`AlgebraElement.vector`."""
        v = np.asarray(vec)
        if v.shape != (self.dimension,):
            raise StructureError(f"expected a vector of length {self.dimension}, got {v.shape}")
        out = []
        for i, d in enumerate(self.dims):
            lo, hi = self._offsets[i], self._offsets[i + 1]
            out.append(v[lo:hi].reshape(d, d) / self._scales[i])
        return AlgebraElement(self, out)

    def basis(self) -> list:
        """Orthonormal basis (scaled matrix units) for the trace pairing."""
        eye = np.eye(self.dimension)
        return [self.from_vector(eye[k]) for k in range(self.dimension)]

    def matrix_units(self):
        """Yield ``(block, j, k, e_jk)`` for the unnormalized matrix units."""
        for i, d in enumerate(self.dims):
            for j in range(d):
                for k in range(d):
                    blocks = [np.zeros((dd, dd)) for dd in self.dims]
                    blocks[i][j, k] = 1.0
                    yield i, j, k, AlgebraElement(self, blocks)

    # batched helpers on vector coordinates --------------------------------

    def unvectorize_batch(self, vecs: np.ndarray) -> list:
        """Split ``(B, D)`` coordinates into per-block ``(B, d, d)`` stacks."""
        vecs = np.atleast_2d(vecs)
        out = []
        for i, d in enumerate(self.dims):
            lo, hi = self._offsets[i], self._offsets[i + 1]
            out.append(vecs[:, lo:hi].reshape(-1, d, d) / self._scales[i])
        return out

    def norms_batch(self, vecs: np.ndarray, p: float) -> np.ndarray:
        """Schatten p-norms of a batch of vectorized elements."""
        _check_norm_exponent(p)
        sv = [np.linalg.svd(b, compute_uv=False) for b in self.unvectorize_batch(vecs)]
        if np.isinf(p):
            return np.max(np.concatenate(sv, axis=1), axis=1)
        total = sum(w * np.mean(s ** p, axis=1) for s, w in zip(sv, self.weights))
        return total ** (1.0 / p)


def matrix_algebra(n: int) -> TracialAlgebra:
    """``(M_n, Tr/n)``."""
    return TracialAlgebra(((n, 1.0),))


def commutative_algebra(n: int, weights: Sequence[float] | None = None) -> TracialAlgebra:
    """``L_inf`` of an ``n``-point probability space (uniform by default)."""
    if weights is None:
        weights = [1.0 / n] * n
    if len(weights) != n:
        raise StructureError(f"need {n} weights, got {len(weights)}")
    return TracialAlgebra(tuple((1, w) for w in weights))


class AlgebraElement:
    """A block-diagonal complex matrix living in a :class:`TracialAlgebra`.

    Instances are immutable; arithmetic returns new elements.
    """

    __slots__ = ("algebra", "blocks", "__weakref__")
    __array_priority__ = 100

    def __init__(self, algebra: TracialAlgebra, blocks):
        blocks = [np.array(b, dtype=complex) for b in blocks]
        if len(blocks) != len(algebra.blocks):
            raise StructureError(f"expected {len(algebra.blocks)} blocks, got {len(blocks)}")
        for b, d in zip(blocks, algebra.dims):
            if b.shape != (d, d):
                raise StructureError(f"block shape {b.shape} does not match dimension {d}")
            b.setflags(write=False)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", tuple(blocks))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def __repr__(self):
        return f"AlgebraElement(dims={self.algebra.dims}, blocks={[b.round(6).tolist() for b in self.blocks]})"

    # arithmetic -------------------------------------------------------

    def _same(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise StructureError("elements belong to different algebras")
        return other

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.algebra, [-a for a in self.blocks])

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.algebra, [scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return AlgebraElement(self.algebra, [a / scalar for a in self.blocks])

    def __matmul__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    @property
    def H(self) -> "AlgebraElement":
        """Adjoint ``x*``."""
        return AlgebraElement(self.algebra, [a.conj().T for a in self.blocks])

    # views --------------------------------------------------------------

    def vector(self) -> np.ndarray:
        """Coordinates in the orthonormal trace basis."""
        return np.concatenate(
            [s * b.reshape(-1) for s, b in zip(self.algebra._scales, self.blocks)]
        )

    def to_matrix(self) -> np.ndarray:
        """Block-diagonal ``size x size`` matrix."""
        n = self.algebra.size
        out = np.zeros((n, n), dtype=complex)
        k = 0
        for b in self.blocks:
            d = b.shape[0]
            out[k:k + d, k:k + d] = b
            k += d
        return out

    # predicates ------------------------------------------------------------

    def hermitian_deviation(self) -> float:
        """Operator norm of ``x - x*``."""
        return max(np.linalg.norm(b - b.conj().T, 2) for b in self.blocks)

    def is_self_adjoint(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_deviation() <= tol

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hermitian part."""
        return min(np.linalg.eigvalsh((b + b.conj().T) / 2).min() for b in self.blocks)

    def is_positive(self, tol: float = POSITIVE_TOL) -> bool:
        return self.is_self_adjoint(tol) and self.min_eigenvalue() >= -tol

    def is_normal(self, tol: float = HERMITIAN_TOL) -> bool:
        return all(
            np.linalg.norm(b @ b.conj().T - b.conj().T @ b, 2) <= tol for b in self.blocks
        )

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        self._same(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))


# ---------------------------------------------------------------------------
# trace, inner product, norms


def _check_same(a: AlgebraElement, b: AlgebraElement):
    if a.algebra != b.algebra:
        raise StructureError("elements belong to different algebras")


def trace(x: AlgebraElement) -> complex:
    """Normalized trace ``tau(x)``."""
    return complex(sum(w * np.trace(b) / d for b, (d, w) in zip(x.blocks, x.algebra.blocks)))


def inner_product(a: AlgebraElement, b: AlgebraElement) -> complex:
    """Trace pairing ``tau(a* b)``, conjugate-linear in ``a``."""
    _check_same(a, b)
    return complex(
        sum(w * np.vdot(x, y) / d for x, y, (d, w) in zip(a.blocks, b.blocks, a.algebra.blocks))
    )


def _check_norm_exponent(p):
    if not (np.isinf(p) or p >= 1):
        raise DomainError(f"Schatten exponent must lie in [1, inf], got {p}")


def schatten_norm(x: AlgebraElement, p: float) -> float:
    """``||x||_p = tau(|x|^p)^(1/p)``; ``p = inf`` gives the operator norm."""
    _check_norm_exponent(p)
    sv = [np.linalg.svd(b, compute_uv=False) for b in x.blocks]
    if np.isinf(p):
        return float(max(s.max() for s in sv))
    total = sum(w * np.mean(s ** p) for s, w in zip(sv, x.algebra.weights))
    return float(total ** (1.0 / p))


def dual_exponent(p: float) -> float:
    """Hölder conjugate ``p' = p / (p - 1)``."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# functional calculus


def _require_self_adjoint(x: AlgebraElement, what: str):
    dev = x.hermitian_deviation()
    if dev > HERMITIAN_TOL:
        raise DomainError(f"{what} needs a self-adjoint element (deviation {dev:.3g})")


def _hermitian_apply(x: AlgebraElement, fn) -> AlgebraElement:
    out = []
    for b in x.blocks:
        evals, evecs = np.linalg.eigh((b + b.conj().T) / 2)
        out.append((evecs * fn(evals)) @ evecs.conj().T)
    return AlgebraElement(x.algebra, out)


def signed_power(x: AlgebraElement, alpha: float) -> AlgebraElement:
    """``x_+^alpha - x_-^alpha`` for self-adjoint ``x``.

    For positive ``x`` this is the usual power ``x**alpha``.
    """
    if not alpha > 0:
        raise DomainError(f"exponent must be positive, got {alpha}")
    _require_self_adjoint(x, "signed_power")
    return _hermitian_apply(x, lambda e: np.sign(e) * np.abs(e) ** alpha)


def positive_part(x: AlgebraElement) -> AlgebraElement:
    _require_self_adjoint(x, "positive_part")
    return _hermitian_apply(x, lambda e: np.maximum(e, 0.0))


def negative_part(x: AlgebraElement) -> AlgebraElement:
    _require_self_adjoint(x, "negative_part")
    return _hermitian_apply(x, lambda e: np.maximum(-e, 0.0))


def absolute_value(x: AlgebraElement) -> AlgebraElement:
    """``|x| = (x* x)^(1/2)``."""
    out = []
    for b in x.blocks:
        _, s, vh = np.linalg.svd(b)
        out.append((vh.conj().T * s) @ vh)
    return AlgebraElement(x.algebra, out)


def _polar_power(x: AlgebraElement, r: float) -> AlgebraElement:
    """``u |x|^r`` with ``x = u|x|``; numerical kernel mapped to zero."""
    svds = [np.linalg.svd(b) for b in x.blocks]
    smax = max((s.max() for _, s, _ in svds), default=0.0)
    cutoff = RANK_RTOL * smax
    out = []
    for u, s, vh in svds:
        keep = s > cutoff
        sr = np.zeros_like(s)
        sr[keep] = s[keep] ** r
        out.append((u * sr) @ vh)
    return AlgebraElement(x.algebra, out)


def mazur_map(x: AlgebraElement, p: float, q: float) -> AlgebraElement:
    """``M_{p,q}(x) = x |x|^{p/q - 1}``, mapping the unit sphere of L_p onto that of L_q."""
    if not (0 < p < np.inf and 0 < q < np.inf):
        raise DomainError(f"Mazur exponents must lie in (0, inf), got p={p}, q={q}")
    if p == q:
        return x
    return _polar_power(x, p / q)


def duality_map(x: AlgebraElement, p: float) -> AlgebraElement:
    """Norming functional ``J_p(x) = u|x|^{p-1} / ||x||_p^{p-1}``.

    ``||J_p(x)||_{p'} = 1`` and ``Re tau(J_p(x)* x) = ||x||_p``.
    """
    if not 1 < p < np.inf:
        raise DomainError(f"duality map needs 1 < p < inf, got {p}")
    nrm = schatten_norm(x, p)
    if nrm == 0:
        raise DomainError("duality map is undefined at 0")
    return _polar_power(x, p - 1.0) / nrm ** (p - 1.0)


def embed_2x2(x: AlgebraElement) -> AlgebraElement:
    """Self-adjoint dilation ``[[0, x], [x*, 0]]`` in ``M_2 ⊗ M``.

    The doubled algebra keeps normalized traces on each ``2d`` block, so the
    dilation has the same L_p norm as ``x`` for every ``p``.
    """
    out = []
    for b in x.blocks:
        d = b.shape[0]
        big = np.zeros((2 * d, 2 * d), dtype=complex)
        big[:d, d:] = b
        big[d:, :d] = b.conj().T
        out.append(big)
    return AlgebraElement(x.algebra.doubled(), out)
