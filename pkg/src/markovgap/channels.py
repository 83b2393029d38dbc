"""Markov maps (unital, completely positive, trace preserving) on tracial algebras.

Every :class:`MarkovMap` keeps the structured representation it was built
from next to a transfer matrix, i.e. its matrix in the orthonormal trace
basis of :meth:`TracialAlgebra.basis`. The transfer matrix is assembled once
at construction and the three Markov conditions are checked then.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra, commutative_algebra, matrix_algebra
from .exceptions import DomainError, StructureError

MARKOV_TOL = 1e-10
CHOI_HERMITIAN_TOL = 1e-12

KINDS = ("kraus", "schur", "stochastic", "conditional_expectation", "composition", "transfer")

__all__ = [
    "MarkovMap",
    "ValidationReport",
    "apply",
    "compose",
    "adjoint",
    "validate_markov",
    "choi_matrix",
    "build_channel",
    "kraus_channel",
    "random_unitary_channel",
    "schur_multiplier",
    "stochastic_kernel",
    "fourier_multiplier",
    "depolarizing",
    "identity_channel",
    "transpose_map",
    "from_transfer",
    "projection_channel",
    "weyl_operators",
    "amplify_2x2",
]


@dataclass(frozen=True)
class ValidationReport:
    """Residuals for the three Markov conditions.

    ``reasons`` lists human readable failures; an empty list means valid.
    """

    unital_residual: float
    trace_residual: float
    min_choi_eigenvalue: float
    choi_hermitian_residual: float
    reasons: tuple = field(default_factory=tuple)

    @property
    def unital(self) -> bool:
        return self.unital_residual <= MARKOV_TOL

    @property
    def trace_preserving(self) -> bool:
        return self.trace_residual <= MARKOV_TOL

    @property
    def completely_positive(self) -> bool:
        return (
            self.choi_hermitian_residual <= CHOI_HERMITIAN_TOL
            and self.min_choi_eigenvalue >= -MARKOV_TOL
        )

    @property
    def valid(self) -> bool:
        return not self.reasons

    @property
    def reason(self) -> str:
        return "; ".join(self.reasons)


class MarkovMap:
    """A linear map on a tracial algebra with a structured representation.

    Use the constructor functions of this module (:func:`kraus_channel`,
    :func:`schur_multiplier`, ...) or :func:`build_channel` rather than
    instantiating directly.

    Attributes
    ----------
    algebra : TracialAlgebra
    kind : str
        One of ``kraus``, ``schur``, ``stochastic``,
        ``conditional_expectation``, ``composition``, ``transfer``.
    data
        Representation payload: Kraus operators, mask, kernel, subalgebra
        basis, factor list or raw matrix.
    transfer : ndarray
        Matrix on trace-basis coordinates.
    validation : ValidationReport
    """

    __slots__ = ("algebra", "kind", "data", "transfer", "validation", "label", "__weakref__")

    def __init__(self, algebra: TracialAlgebra, kind: str, data, label: str = "",
                 extra_reasons: Sequence[str] = ()):
        if kind not in KINDS:
            raise StructureError(f"unknown representation kind {kind!r}")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "label", label or kind)
        transfer = self._assemble_transfer()
        transfer.setflags(write=False)
        object.__setattr__(self, "transfer", transfer)
        object.__setattr__(self, "validation", validate_markov(self, extra_reasons))

    def __setattr__(self, name, value):
        raise AttributeError("MarkovMap is immutable")

    def __repr__(self):
        status = "valid" if self.valid else f"invalid: {self.validation.reason}"
        return f"MarkovMap({self.label}, dims={self.algebra.dims}, {status})"

    @property
    def valid(self) -> bool:
        return self.validation.valid

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        return apply(self, x)

    # representation-level application -------------------------------------

    def apply_structured(self, x: AlgebraElement) -> AlgebraElement:
        """Apply through the structured representation, bypassing the transfer matrix."""
        if x.algebra != self.algebra:
            raise StructureError("element and channel live on different algebras")
        kind, data = self.kind, self.data
        if kind == "kraus":
            out = [np.zeros_like(b) for b in x.blocks]
            for a in data:
                for i, (ab, xb) in enumerate(zip(a.blocks, x.blocks)):
                    out[i] = out[i] + ab @ xb @ ab.conj().T
            return AlgebraElement(self.algebra, out)
        if kind == "schur":
            return AlgebraElement(self.algebra, [data * x.blocks[0]])
        if kind == "stochastic":
            f = np.array([b[0, 0] for b in x.blocks])
            return self.algebra.from_function(data @ f)
        if kind == "conditional_expectation":
            q = data
            return self.algebra.from_vector(q @ (q.conj().T @ x.vector()))
        if kind == "composition":
            for factor in reversed(data):
                x = factor.apply_structured(x)
            return x
        return self.algebra.from_vector(data @ x.vector())

    def _assemble_transfer(self) -> np.ndarray:
        if self.kind == "transfer":
            m = np.array(self.data, dtype=complex)
            d = self.algebra.dimension
            if m.shape != (d, d):
                raise StructureError(f"transfer matrix must be {d}x{d}, got {m.shape}")
            return m
        if self.kind == "conditional_expectation":
            return self.data @ self.data.conj().T
        if self.kind == "composition":
            out = np.eye(self.algebra.dimension, dtype=complex)
            for factor in self.data:
                out = out @ factor.transfer
            return out
        cols = [self.apply_structured(e).vector() for e in self.algebra.basis()]
        return np.array(cols, dtype=complex).T


# ---------------------------------------------------------------------------
# core operations


def apply(T: MarkovMap, x: AlgebraElement) -> AlgebraElement:
    """``T(x)`` via the cached transfer matrix."""
    if x.algebra != T.algebra:
        raise StructureError("element and channel live on different algebras")
    return T.algebra.from_vector(T.transfer @ x.vector())


def compose(S: MarkovMap, T: MarkovMap) -> MarkovMap:
    """``S ∘ T`` (apply ``T`` first). Factor lists are flattened."""
    if S.algebra != T.algebra:
        raise StructureError("cannot compose maps on different algebras")
    factors = []
    for m in (S, T):
        factors.extend(m.data if m.kind == "composition" else [m])
    return MarkovMap(S.algebra, "composition", tuple(factors), label=f"{S.label}∘{T.label}")


def adjoint(T: MarkovMap) -> MarkovMap:
    """Adjoint for the trace pairing ``tau(T(a)* b) = tau(a* T†(b))``."""
    alg, kind, data = T.algebra, T.kind, T.data
    label = f"adj({T.label})"
    if kind == "kraus":
        return MarkovMap(alg, "kraus", tuple(a.H for a in data), label=label)
    if kind == "schur":
        return MarkovMap(alg, "schur", data.conj(), label=label)
    if kind == "stochastic":
        w = np.array(alg.weights)
        # Q_ji = w_i P_ij / w_j
        return MarkovMap(alg, "stochastic", (w[:, None] * data).T / w[:, None], label=label)
    if kind == "conditional_expectation":
        return T
    if kind == "composition":
        return MarkovMap(alg, "composition", tuple(adjoint(f) for f in reversed(data)), label=label)
    return MarkovMap(alg, "transfer", T.transfer.conj().T, label=label)


def choi_matrix(T: MarkovMap) -> np.ndarray:
    """``C = sum_{jk} e_jk ⊗ T(e_jk)`` over matrix units of every block.

    Side ``(sum d_i)**2``; positive semidefinite iff ``T`` is completely positive.
    """
    alg = T.algebra
    n = alg.size
    choi = np.zeros((n * n, n * n), dtype=complex)
    offsets = np.cumsum((0,) + alg.dims)
    idx = 0
    for i, d in enumerate(alg.dims):
        for j in range(d):
            for k in range(d):
                image = alg.from_vector(T.transfer[:, idx] * alg._scales[i]).to_matrix()
                J, K = offsets[i] + j, offsets[i] + k
                choi[J * n:(J + 1) * n, K * n:(K + 1) * n] = image
                idx += 1
    return choi


def validate_markov(T: MarkovMap, extra_reasons: Sequence[str] = ()) -> ValidationReport:
    """Check unitality, trace preservation and complete positivity.

    Failures are reported as data; nothing is raised.
    """
    alg = T.algebra
    one = alg.identity().vector()
    unital_res = _opnorm(alg, T.transfer @ one - one)
    trace_res = _opnorm(alg, T.transfer.conj().T @ one - one)
    choi = choi_matrix(T)
    herm_res = float(np.linalg.norm(choi - choi.conj().T, 2))
    min_eig = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2).min())
    reasons = list(extra_reasons)
    if unital_res > MARKOV_TOL:
        reasons.append(f"not unital (residual {unital_res:.3g})")
    if trace_res > MARKOV_TOL:
        reasons.append(f"not trace preserving (residual {trace_res:.3g})")
    if herm_res > CHOI_HERMITIAN_TOL:
        reasons.append(f"Choi not Hermitian (residual {herm_res:.3g})")
    elif min_eig < -MARKOV_TOL:
        reasons.append(f"Choi not PSD (min eigenvalue {min_eig:.3g})")
    return ValidationReport(unital_res, trace_res, min_eig, herm_res, tuple(reasons))


def _opnorm(alg: TracialAlgebra, vec: np.ndarray) -> float:
    return float(max(np.linalg.norm(b, 2) for b in alg.from_vector(vec).blocks))


# ---------------------------------------------------------------------------
# constructors


def _as_element(alg: TracialAlgebra, a) -> AlgebraElement:
    if isinstance(a, AlgebraElement):
        if a.algebra != alg:
            raise StructureError("Kraus operator from a different algebra")
        return a
    a = np.asarray(a)
    if alg.is_single_block:
        return AlgebraElement(alg, [a])
    return alg.from_matrix(a)


def kraus_channel(operators, algebra: TracialAlgebra | None = None, label: str = "kraus") -> MarkovMap:
    """``T(x) = sum_l a_l x a_l*``.

    Plain arrays are read as matrices on a single block ``M_n`` unless an
    algebra is given.
    """
    ops = list(operators)
    if not ops:
        raise StructureError("need at least one Kraus operator")
    if algebra is None:
        first = ops[0]
        algebra = first.algebra if isinstance(first, AlgebraElement) else matrix_algebra(np.shape(first)[0])
    return MarkovMap(algebra, "kraus", tuple(_as_element(algebra, a) for a in ops), label=label)


def random_unitary_channel(unitaries, weights, algebra: TracialAlgebra | None = None,
                           label: str = "random_unitary") -> MarkovMap:
    """``x -> sum_l p_l u_l x u_l*`` as a Kraus channel with ``a_l = sqrt(p_l) u_l``."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(unitaries):
        raise StructureError("need one weight per unitary")
    if np.any(weights < 0):
        raise DomainError("mixture weights must be nonnegative")
    ops = []
    for w, u in zip(weights, unitaries):
        u = u.blocks if isinstance(u, AlgebraElement) else u
        if isinstance(u, tuple):
            ops.append(AlgebraElement(algebra or unitaries[0].algebra, [np.sqrt(w) * b for b in u]))
        else:
            ops.append(np.sqrt(w) * np.asarray(u))
    return kraus_channel(ops, algebra, label=label)


def schur_multiplier(mask, label: str = "schur") -> MarkovMap:
    """Entrywise multiplier ``(x_ij) -> (s_ij x_ij)`` on ``M_n``."""
    s = np.array(mask, dtype=complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise StructureError(f"Schur mask must be square, got shape {s.shape}")
    reasons = []
    if not np.allclose(np.diag(s), 1.0, rtol=0, atol=MARKOV_TOL):
        reasons.append("mask diagonal != 1")
    herm = (s + s.conj().T) / 2
    if np.linalg.norm(s - s.conj().T, 2) > MARKOV_TOL or np.linalg.eigvalsh(herm).min() < -MARKOV_TOL:
        reasons.append("mask not PSD")
    return MarkovMap(matrix_algebra(s.shape[0]), "schur", s, label=label, extra_reasons=reasons)


def stochastic_kernel(kernel, weights: Sequence[float] | None = None, label: str = "stochastic") -> MarkovMap:
    """Markov operator ``(Tf)(i) = sum_j P_ij f(j)`` on a finite probability space."""
    P = np.array(kernel, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise StructureError(f"kernel must be square, got shape {P.shape}")
    alg = commutative_algebra(P.shape[0], weights)
    w = np.array(alg.weights)
    reasons = []
    if P.min() < -MARKOV_TOL:
        reasons.append("kernel has negative entries")
    if np.abs(P.sum(axis=1) - 1).max() > MARKOV_TOL:
        reasons.append("kernel rows do not sum to 1")
    if np.abs(w @ P - w).max() > MARKOV_TOL:
        reasons.append("kernel does not preserve the weights")
    return MarkovMap(alg, "stochastic", P, label=label, extra_reasons=reasons)


def fourier_multiplier(measure, label: str = "fourier") -> MarkovMap:
    """Fourier multiplier on the cyclic group ``Z_n`` given by a probability measure.

    Realized as convolution on the dual group, i.e. the circulant kernel
    ``P_ij = mu[(j - i) mod n]`` on ``n`` uniform points. The multiplier
    symbol is ``np.fft.fft(measure)``.
    """
    mu = np.asarray(measure, dtype=float)
    n = len(mu)
    if mu.min() < 0 or abs(mu.sum() - 1) > MARKOV_TOL:
        raise DomainError("Fourier multiplier needs a probability vector")
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return stochastic_kernel(mu[idx], label=label)


def weyl_operators(n: int) -> list:
    """The ``n**2`` unitaries ``X^a Z^b`` (shift times clock)."""
    shift = np.roll(np.eye(n), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    return [
        np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
        for a in range(n) for b in range(n)
    ]


def depolarizing(n: int, lam: float) -> MarkovMap:
    """``x -> (1 - lam) x + lam tau(x) 1`` on ``M_n``, in Kraus form."""
    if not 0 <= lam <= 1:
        raise DomainError(f"depolarizing parameter must lie in [0, 1], got {lam}")
    ws = weyl_operators(n)
    ops = [np.sqrt(1 - lam + lam / n**2) * ws[0]]
    ops += [np.sqrt(lam) / n * w for w in ws[1:]]
    return kraus_channel(ops, matrix_algebra(n), label=f"depolarizing({lam:g})")


def identity_channel(algebra: TracialAlgebra) -> MarkovMap:
    return kraus_channel([algebra.identity()], algebra, label="identity")


def from_transfer(algebra: TracialAlgebra, matrix, label: str = "transfer") -> MarkovMap:
    """Raw transfer-matrix map; validated like any other."""
    return MarkovMap(algebra, "transfer", np.array(matrix, dtype=complex), label=label)


def transpose_map(n: int) -> MarkovMap:
    """Transpose on ``M_n``: positive, unital, trace preserving, not completely positive."""
    alg = matrix_algebra(n)
    cols = [AlgebraElement(alg, [e.blocks[0].T]).vector() for e in alg.basis()]
    return from_transfer(alg, np.array(cols).T, label="transpose")


def projection_channel(algebra: TracialAlgebra, basis_matrix: np.ndarray, label: str = "E") -> MarkovMap:
    """Orthogonal projection onto the span of orthonormal columns (a conditional expectation)."""
    q = np.array(basis_matrix, dtype=complex)
    q.setflags(write=False)
    return MarkovMap(algebra, "conditional_expectation", q, label=label)


def amplify_2x2(T: MarkovMap) -> MarkovMap:
    """``Id_{M_2} ⊗ T`` on the doubled algebra, as a raw transfer map."""
    small = T.algebra
    big = small.doubled()

    def act(X: AlgebraElement) -> AlgebraElement:
        out = [np.zeros_like(b) for b in X.blocks]
        for r in range(2):
            for c in range(2):
                corner = AlgebraElement(
                    small,
                    [b[r * d:(r + 1) * d, c * d:(c + 1) * d] for b, d in zip(X.blocks, small.dims)],
                )
                image = apply(T, corner)
                for o, ib, d in zip(out, image.blocks, small.dims):
                    o[r * d:(r + 1) * d, c * d:(c + 1) * d] = ib
        return AlgebraElement(big, out)

    cols = [act(e).vector() for e in big.basis()]
    return from_transfer(big, np.array(cols).T, label=f"Id2⊗{T.label}")


# ---------------------------------------------------------------------------
# description-driven construction


def build_channel(spec: dict, algebra: TracialAlgebra | None = None) -> MarkovMap:
    """Build a :class:`MarkovMap` from a JSON-style description.

    ``spec["kind"]`` selects the family: ``identity``, ``depolarizing``,
    ``kraus``, ``random_unitary``, ``schur``, ``stochastic``,
    ``fourier_multiplier``, ``conditional_expectation``, ``transpose``,
    ``transfer`` or ``composition``. Matrices follow :mod:`markovgap.io`.

    Markov violations do not raise: the returned map carries an invalid
    :class:`ValidationReport`. Malformed descriptions raise ``StructureError``.
    """
    from . import io

    if not isinstance(spec, dict) or "kind" not in spec:
        raise StructureError("channel description needs a 'kind'")
    kind = spec["kind"]
    label = spec.get("id", "")
    if "algebra" in spec:
        algebra = io.parse_algebra(spec["algebra"])
    elif "n" in spec:
        algebra = io.parse_algebra({"matrix": spec["n"]})

    def need_algebra():
        if algebra is None:
            raise StructureError(f"channel kind {kind!r} needs an algebra or 'n'")
        return algebra

    if kind == "identity":
        T = identity_channel(need_algebra())
    elif kind == "depolarizing":
        lam = float(spec.get("lambda", spec.get("lam", 0.0)))
        T = depolarizing(_single_block_size(need_algebra(), kind), lam)
    elif kind == "kraus":
        ops = [io.parse_matrix(m) for m in _list(spec, "operators")]
        T = kraus_channel(ops, algebra)
    elif kind == "random_unitary":
        us = [io.parse_matrix(m) for m in _list(spec, "unitaries")]
        T = random_unitary_channel(us, [float(w) for w in _list(spec, "weights")], algebra)
    elif kind == "schur":
        T = schur_multiplier(io.parse_matrix(spec.get("mask")))
    elif kind == "stochastic":
        P = io.parse_matrix(spec.get("kernel"))
        if np.abs(P.imag).max() > 0:
            raise StructureError("stochastic kernel must be real")
        T = stochastic_kernel(P.real, spec.get("weights"))
    elif kind == "fourier_multiplier":
        T = fourier_multiplier([float(t) for t in _list(spec, "measure")])
    elif kind == "conditional_expectation":
        from .structure import conditional_expectation, subalgebra_from_spec

        T = conditional_expectation(subalgebra_from_spec(spec.get("subalgebra"), need_algebra()))
    elif kind == "transpose":
        T = transpose_map(_single_block_size(need_algebra(), kind))
    elif kind == "transfer":
        T = from_transfer(need_algebra(), io.parse_matrix(spec.get("matrix")))
    elif kind == "composition":
        factors = [build_channel(f, algebra) for f in _list(spec, "factors")]
        T = factors[-1]
        for f in reversed(factors[:-1]):
            T = compose(f, T)
    else:
        raise StructureError(f"unknown channel kind {kind!r}")
    if label:
        object.__setattr__(T, "label", label)
    return T


def _list(spec, key) -> list:
    v = spec.get(key)
    if not isinstance(v, list) or not v:
        raise StructureError(f"'{key}' must be a non-empty list")
    return v


def _single_block_size(algebra: TracialAlgebra, kind: str) -> int:
    if not algebra.is_single_block:
        raise StructureError(f"channel kind {kind!r} needs a single matrix block")
    return algebra.size
