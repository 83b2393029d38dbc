"""Unital *-subalgebras, conditional expectations, fixed-point algebras and
explicit factorizations ``T = E_M ∘ pi`` of Markov maps.

A :class:`Subalgebra` is stored as an orthonormal basis (columns of ``Q``)
in trace-basis coordinates, so the conditional expectation onto it is the
orthogonal projection ``Q Q*``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .algebra import AlgebraElement, TracialAlgebra, inner_product, schatten_norm, trace
from .channels import MarkovMap, apply, projection_channel, weyl_operators
from .exceptions import DomainError, StructureError, UnsupportedChannelError

GRAM_TOL = 1e-10
CLOSURE_TOL = 1e-9
IDENTITY_TOL = 1e-10
CLOSURE_RANK_RTOL = 1e-10
FIXED_POINT_TOL = 1e-8
INTERSECTION_COS = 1 - 1e-9
FACTORIZATION_TOL = 1e-9

__all__ = [
    "Subalgebra",
    "generate_subalgebra",
    "conditional_expectation",
    "fixed_point_algebra",
    "intersection",
    "commutant",
    "scalars",
    "diagonal",
    "full",
    "rotated_diagonal",
    "conjugated_diagonal",
    "subalgebra_from_spec",
    "birkhoff_decomposition",
    "DilationCertificate",
    "FactorizationReport",
    "InnerAutomorphism",
    "PointPermutation",
    "build_dilation",
    "verify_factorization",
]


def _orthonormal_span(vectors: np.ndarray, rtol: float = CLOSURE_RANK_RTOL) -> np.ndarray:
    """Orthonormal basis for the column span, rank decided at relative ``rtol``."""
    if vectors.shape[1] == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return vectors[:, :0]
    return u[:, s > rtol * s[0]]


class Subalgebra:
    """Unital *-subalgebra given by an orthonormal basis.

    Parameters
    ----------
    algebra : TracialAlgebra
    basis : ndarray, shape (D, k)
        Orthonormal columns in trace-basis coordinates.
    check : bool
        Verify orthonormality, closure under adjoints and products, and
        that the unit lies in the span. Raises ``StructureError`` on failure.
    """

    def __init__(self, algebra: TracialAlgebra, basis: np.ndarray, check: bool = True):
        q = np.array(basis, dtype=complex)
        if q.ndim != 2 or q.shape[0] != algebra.dimension:
            raise StructureError(f"basis must have {algebra.dimension} rows, got shape {q.shape}")
        q.setflags(write=False)
        self.algebra = algebra
        self.basis = q
        if check:
            self.check()

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __repr__(self):
        return f"Subalgebra(dim={self.dim}, algebra dims={self.algebra.dims})"

    def elements(self) -> list:
        return [self.algebra.from_vector(c) for c in self.basis.T]

    def project(self, x: AlgebraElement) -> AlgebraElement:
        """Orthogonal projection (the conditional expectation) of ``x``."""
        if x.algebra != self.algebra:
            raise StructureError("element lives on a different algebra")
        q = self.basis
        return self.algebra.from_vector(q @ (q.conj().T @ x.vector()))

    def residual(self, x: AlgebraElement) -> float:
        """L_2 distance from ``x`` to the span."""
        v = x.vector()
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v)))

    def contains(self, x: AlgebraElement, tol: float = CLOSURE_TOL) -> bool:
        return self.residual(x) <= tol * max(1.0, schatten_norm(x, 2))

    def closure_residuals(self) -> dict:
        q = self.basis
        gram = float(np.abs(q.conj().T @ q - np.eye(self.dim)).max()) if self.dim else 0.0
        elems = self.elements()
        adj = max((self.residual(b.H) for b in elems), default=0.0)
        prod = 0.0
        for a in elems:
            for b in elems:
                ab = a @ b
                prod = max(prod, self.residual(ab) / max(1.0, schatten_norm(ab, 2)))
        unit = self.residual(self.algebra.identity())
        return {"gram": gram, "adjoint": adj, "product": prod, "identity": unit}

    def check(self):
        r = self.closure_residuals()
        problems = []
        if r["gram"] > GRAM_TOL:
            problems.append(f"basis not orthonormal ({r['gram']:.3g})")
        if r["adjoint"] > CLOSURE_TOL:
            problems.append(f"not closed under adjoints ({r['adjoint']:.3g})")
        if r["product"] > CLOSURE_TOL:
            problems.append(f"not closed under products ({r['product']:.3g})")
        if r["identity"] > IDENTITY_TOL:
            problems.append(f"identity not in span ({r['identity']:.3g})")
        if problems:
            raise StructureError("not a unital *-subalgebra: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# construction


def generate_subalgebra(algebra: TracialAlgebra, generators: Sequence[AlgebraElement] = ()) -> Subalgebra:
    """Smallest unital *-subalgebra containing ``generators``.

    Repeatedly adds adjoints and pairwise products to the span until its
    dimension stops growing.
    """
    vecs = [algebra.identity().vector()]
    for g in generators:
        if g.algebra != algebra:
            raise StructureError("generator lives on a different algebra")
        vecs += [g.vector(), g.H.vector()]
    q = _orthonormal_span(np.array(vecs).T)
    for _ in range(algebra.dimension + 1):
        elems = [algebra.from_vector(c) for c in q.T]
        cand = [q]
        cand.append(np.array([b.H.vector() for b in elems]).T)
        cand.append(np.array([(a @ b).vector() for a in elems for b in elems]).T)
        new = _orthonormal_span(np.hstack(cand))
        if new.shape[1] == q.shape[1]:
            break
        q = new
    return Subalgebra(algebra, q)


def scalars(algebra: TracialAlgebra) -> Subalgebra:
    return Subalgebra(algebra, algebra.identity().vector()[:, None])


def full(algebra: TracialAlgebra) -> Subalgebra:
    return Subalgebra(algebra, np.eye(algebra.dimension))


def diagonal(algebra: TracialAlgebra) -> Subalgebra:
    """Diagonal matrices in every block."""
    cols = []
    for i, d in enumerate(algebra.dims):
        lo = algebra._offsets[i]
        for j in range(d):
            e = np.zeros(algebra.dimension)
            e[lo + j * d + j] = 1.0
            cols.append(e)
    return Subalgebra(algebra, np.array(cols).T)


def conjugated_diagonal(algebra: TracialAlgebra, unitary) -> Subalgebra:
    """``u D u*`` for the diagonal subalgebra ``D`` of a single block."""
    if not algebra.is_single_block:
        raise StructureError("conjugated_diagonal needs a single matrix block")
    u = np.asarray(unitary, dtype=complex)
    n = algebra.size
    gens = []
    for j in range(n):
        e = np.zeros((n, n))
        e[j, j] = 1.0
        gens.append(AlgebraElement(algebra, [u @ e @ u.conj().T]))
    return generate_subalgebra(algebra, gens)


def rotated_diagonal(algebra: TracialAlgebra, angle: float) -> Subalgebra:
    """Maximal abelian subalgebra of ``M_2`` tilted away from the diagonal.

    The tilt is normalized by correlation: ``E_D ∘ E_B`` restricted to
    trace-zero elements has L_2 norm ``cos(angle)**2``, where ``D`` is the
    diagonal and ``B`` the returned subalgebra. In Bloch-sphere terms the
    two axes meet at ``arccos(cos(angle)**2)``; the conjugating real
    rotation turns by half of that.
    """
    if algebra.dims != (2,):
        raise StructureError("rotated_diagonal is defined on M_2")
    psi = 0.5 * np.arccos(np.cos(angle) ** 2)
    r = np.array([[np.cos(psi), -np.sin(psi)], [np.sin(psi), np.cos(psi)]])
    return conjugated_diagonal(algebra, r)


_PRESET = re.compile(r"^\s*([a-z\-]+)\s*(?:\(\s*([-+0-9.eE]+)\s*(deg|rad)?\s*\))?\s*$")


def subalgebra_from_spec(spec, algebra: TracialAlgebra) -> Subalgebra:
    """Resolve a preset name or generator list.

    Presets: ``"scalars"``, ``"diagonal"``, ``"full"``,
    ``"rotated-diagonal(θ)"`` and ``"basis-rotation(ψ)"`` (angles in
    degrees unless suffixed ``rad``). A dict ``{"generators": [...]}``
    generates from raw matrices.
    """
    from . import io

    if isinstance(spec, dict):
        gens = spec.get("generators", [])
        if not isinstance(gens, list):
            raise StructureError("'generators' must be a list of matrices")
        return generate_subalgebra(algebra, [_element_from_matrix(algebra, io.parse_matrix(g)) for g in gens])
    if not isinstance(spec, str):
        raise StructureError(f"subalgebra must be a preset name or generator object, got {spec!r}")
    m = _PRESET.match(spec)
    if not m:
        raise StructureError(f"unrecognized subalgebra preset {spec!r}")
    name, arg, unit = m.groups()
    if name in ("scalars", "diagonal", "full"):
        if arg is not None:
            raise StructureError(f"preset {name!r} takes no argument")
        return {"scalars": scalars, "diagonal": diagonal, "full": full}[name](algebra)
    if name in ("rotated-diagonal", "basis-rotation"):
        if arg is None:
            raise StructureError(f"preset {name!r} needs an angle")
        angle = float(arg) if unit == "rad" else np.deg2rad(float(arg))
        if name == "rotated-diagonal":
            return rotated_diagonal(algebra, angle)
        r = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        return conjugated_diagonal(algebra, r)
    raise StructureError(f"unrecognized subalgebra preset {spec!r}")


def _element_from_matrix(algebra, m):
    if algebra.is_single_block:
        return AlgebraElement(algebra, [m])
    return algebra.from_matrix(m)


def conditional_expectation(S: Subalgebra) -> MarkovMap:
    """Trace preserving conditional expectation onto ``S`` (orthogonal projection)."""
    S.check()
    return projection_channel(S.algebra, S.basis, label=f"E[dim {S.dim}]")


def fixed_point_algebra(T: MarkovMap) -> Subalgebra:
    """Fixed points of ``T``: kernel of ``transfer - I`` at tolerance 1e-8.

    Raises ``DomainError`` for maps that fail Markov validation.
    """
    if not T.valid:
        raise DomainError(f"map is not Markov: {T.validation.reason}")
    a = T.transfer - np.eye(T.algebra.dimension)
    _, s, vh = np.linalg.svd(a)
    null = vh[s <= FIXED_POINT_TOL].conj().T
    try:
        return Subalgebra(T.algebra, null)
    except StructureError as exc:
        raise StructureError(f"fixed points not an algebra ({exc})") from exc


def intersection(A: Subalgebra, B: Subalgebra) -> Subalgebra:
    """``A ∩ B`` from principal angles: directions with cosine >= 1 - 1e-9."""
    if A.algebra != B.algebra:
        raise StructureError("subalgebras live on different algebras")
    u, s, _ = np.linalg.svd(A.basis.conj().T @ B.basis)
    k = int(np.sum(s >= INTERSECTION_COS))
    q = _orthonormal_span(A.basis @ u[:, :k])
    return Subalgebra(A.algebra, q)


def principal_cosines(A: Subalgebra, B: Subalgebra) -> np.ndarray:
    return np.linalg.svd(A.basis.conj().T @ B.basis, compute_uv=False)


def commutant(S: Subalgebra) -> Subalgebra:
    """Relative commutant ``S' ∩ M`` (single-block algebras)."""
    alg = S.algebra
    if not alg.is_single_block:
        raise StructureError("commutant is implemented for single-block algebras")
    n = alg.size
    eye = np.eye(n)
    rows = []
    for b in S.elements():
        m = b.blocks[0]
        # row-major vec: vec(m y) = (m ⊗ I) vec y,  vec(y m) = (I ⊗ m^T) vec y
        rows.append(np.kron(m, eye) - np.kron(eye, m.T))
    _, s, vh = np.linalg.svd(np.vstack(rows))
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > 1e-9 * smax))
    null = vh[rank:].conj().T  # coordinates of plain matrix entries
    scale = alg._scales[0]
    return Subalgebra(alg, _orthonormal_span(null * scale))


# ---------------------------------------------------------------------------
# factorization certificates


class InnerAutomorphism:
    """``x -> u x u*`` for a unitary (block-diagonal) ``u``."""

    def __init__(self, u: AlgebraElement):
        self.u = u

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        return self.u @ x @ self.u.H

    def then(self, other):
        """Automorphism ``self ∘ other``."""
        if isinstance(other, InnerAutomorphism):
            return InnerAutomorphism(self.u @ other.u)
        return _Composed(self, other)

    def __repr__(self):
        return f"InnerAutomorphism({self.u!r})"


class PointPermutation:
    """Composition operator ``f -> f ∘ sigma`` on a commutative algebra."""

    def __init__(self, perm):
        self.perm = np.asarray(perm, dtype=int)

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        f = np.array([b[0, 0] for b in x.blocks])
        return x.algebra.from_function(f[self.perm])

    def then(self, other):
        if isinstance(other, PointPermutation):
            # (f ∘ s2) ∘ s1 after applying self on top: self(other(f)) = f ∘ s_other ∘ s_self
            return PointPermutation(other.perm[self.perm])
        return _Composed(self, other)

    def __repr__(self):
        return f"PointPermutation({self.perm.tolist()})"


class _Composed:
    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner

    def __call__(self, x):
        return self.outer(self.inner(x))

    def then(self, other):
        return _Composed(self, other)


@dataclass(frozen=True)
class DilationCertificate:
    """Explicit factorization ``T(x) = E_M(pi(x))``.

    The big algebra is ``N`` copies of ``M`` with trace weights scaled by
    ``weights``; ``M`` sits inside diagonally, ``pi`` applies one
    trace-preserving automorphism per copy, and ``E_M`` averages the copies
    with the weights.
    """

    base: TracialAlgebra
    weights: tuple
    branches: tuple
    description: str = ""

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def dilated_algebra(self) -> TracialAlgebra:
        return TracialAlgebra(tuple((d, p * w) for p in self.weights for d, w in self.base.blocks))

    def embed(self, x: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.dilated_algebra, list(x.blocks) * self.n_branches)

    def represent(self, x: AlgebraElement) -> AlgebraElement:
        out = []
        for br in self.branches:
            out.extend(br(x).blocks)
        return AlgebraElement(self.dilated_algebra, out)

    def expectation(self, y: AlgebraElement) -> AlgebraElement:
        """``E_M`` on the big algebra, returned inside ``M``."""
        k = len(self.base.blocks)
        parts = [y.blocks[i * k:(i + 1) * k] for i in range(self.n_branches)]
        return self._average(parts)

    def factor(self, x: AlgebraElement) -> AlgebraElement:
        """``E_M(pi(x))`` as an element of ``M``."""
        return self._average([br(x).blocks for br in self.branches])

    def dilated_trace(self, parts) -> complex:
        return sum(p * trace(AlgebraElement(self.base, blk)) for p, blk in zip(self.weights, parts))

    def _average(self, parts) -> AlgebraElement:
        total = sum(self.weights)
        blocks = [sum(p * blk[i] for p, blk in zip(self.weights, parts)) / total
                  for i in range(len(self.base.blocks))]
        return AlgebraElement(self.base, blocks)


@dataclass(frozen=True)
class FactorizationReport:
    factor_residual: float
    trace_residual: float
    homomorphism_residual: float
    embedding_residual: float

    @property
    def passed(self) -> bool:
        return max(self.factor_residual, self.trace_residual,
                   self.homomorphism_residual, self.embedding_residual) <= FACTORIZATION_TOL


def verify_factorization(cert: DilationCertificate, T: MarkovMap) -> FactorizationReport:
    """Residuals of ``T = E_M ∘ pi`` and of the *-homomorphism/trace conditions on a basis."""
    if cert.base != T.algebra:
        raise StructureError("certificate and map live on different algebras")
    basis = T.algebra.basis()
    images = [[br(x) for br in cert.branches] for x in basis]
    fac = tr = hom = emb = 0.0
    for x, imgs in zip(basis, images):
        fx = cert._average([im.blocks for im in imgs])
        fac = max(fac, schatten_norm(apply(T, x) - fx, 2))
        tx = trace(x)
        tr = max(tr, abs(tx - cert.dilated_trace([im.blocks for im in imgs])))
        tr = max(tr, abs(tx - cert.dilated_trace([x.blocks] * cert.n_branches)))
        for br, im in zip(cert.branches, imgs):
            hom = max(hom, schatten_norm(br(x.H) - im.H, 2))
        # E_M fixes the diagonal copy of M
        emb = max(emb, schatten_norm(cert._average([x.blocks] * cert.n_branches) - x, 2))
    for x, xi in zip(basis, images):
        for y, yi in zip(basis, images):
            xy = x @ y
            for br, a, b in zip(cert.branches, xi, yi):
                hom = max(hom, schatten_norm(br(xy) - a @ b, 2))
    return FactorizationReport(fac, tr, hom, emb)


def birkhoff_decomposition(D, tol: float = 1e-12) -> list:
    """Greedy Birkhoff-von Neumann decomposition ``D = sum_l c_l Pi_l``.

    Returns ``(c_l, perm_l)`` with ``Pi_l[i, perm_l[i]] = 1``.
    """
    D = np.array(D, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n):
        raise DomainError("Birkhoff decomposition needs a square matrix")
    if D.min() < -tol or np.abs(D.sum(0) - 1).max() > 1e-9 or np.abs(D.sum(1) - 1).max() > 1e-9:
        raise DomainError("matrix is not doubly stochastic")
    out = []
    rest = D.copy()
    for _ in range(n * n + 1):
        if rest.max() <= tol:
            break
        cost = np.where(rest > tol, -rest, n + 1.0)
        rows, cols = linear_sum_assignment(cost)
        c = rest[rows, cols].min()
        if c <= tol:
            break
        out.append((float(c), cols.copy()))
        rest[rows, cols] -= c
    return out


def build_dilation(T: MarkovMap) -> DilationCertificate:
    """Explicit factorization for mixtures of automorphisms.

    Supported: Kraus maps whose operators are multiples of unitaries,
    maps on uniform commutative algebras (Birkhoff decomposition of the
    kernel), conditional expectations on a single matrix block (twirl over
    a finite unitary group spanning the commutant), and compositions of
    supported maps.
    """
    if not T.valid:
        raise DomainError(f"map is not Markov: {T.validation.reason}")
    alg = T.algebra
    if T.kind == "composition":
        certs = [build_dilation(f) for f in T.data]
        cert = certs[-1]
        for outer in reversed(certs[:-1]):
            cert = _compose_certificates(outer, cert)
        return cert
    if T.kind == "kraus":
        try:
            return _random_unitary_dilation(T)
        except UnsupportedChannelError:
            if not _uniform_commutative(alg):
                raise
    if _uniform_commutative(alg):
        return _kernel_dilation(T)
    if T.kind == "conditional_expectation" and alg.is_single_block:
        S = Subalgebra(alg, T.data)
        weights, unitaries = _twirl(S)
        cert = DilationCertificate(
            alg, tuple(weights), tuple(InnerAutomorphism(AlgebraElement(alg, [u])) for u in unitaries),
            description="unitary twirl over the commutant",
        )
        if not verify_factorization(cert, T).passed:
            raise UnsupportedChannelError("commutant twirl did not reproduce the conditional expectation")
        return cert
    raise UnsupportedChannelError(f"no explicit dilation for representation {T.kind!r} on {alg.dims}")


def _uniform_commutative(alg: TracialAlgebra) -> bool:
    w = np.array(alg.weights)
    return alg.is_commutative and np.allclose(w, w[0], rtol=0, atol=1e-15)


def _random_unitary_dilation(T: MarkovMap) -> DilationCertificate:
    alg = T.algebra
    weights, branches = [], []
    eye = alg.identity()
    for a in T.data:
        c = inner_product(a, a).real  # tau(a* a)
        if c <= 1e-15:
            continue
        u = a / np.sqrt(c)
        if not ((u.H @ u).allclose(eye, 1e-10) and (u @ u.H).allclose(eye, 1e-10)):
            raise UnsupportedChannelError("Kraus operator is not a multiple of a unitary")
        weights.append(c)
        branches.append(InnerAutomorphism(u))
    return DilationCertificate(alg, tuple(weights), tuple(branches), description="random unitary")


def _kernel_dilation(T: MarkovMap) -> DilationCertificate:
    alg = T.algebra
    n = len(alg.blocks)
    eye = np.eye(n)
    kernel = np.array([[apply(T, alg.from_function(eye[j])).blocks[i][0, 0].real for j in range(n)]
                       for i in range(n)])
    terms = birkhoff_decomposition(kernel)
    return DilationCertificate(
        alg, tuple(c for c, _ in terms), tuple(PointPermutation(perm) for _, perm in terms),
        description="Birkhoff decomposition",
    )


def _compose_certificates(outer: DilationCertificate, inner: DilationCertificate) -> DilationCertificate:
    weights, branches = [], []
    for p, s in zip(outer.weights, outer.branches):
        for q, t in zip(inner.weights, inner.branches):
            weights.append(p * q)
            branches.append(s.then(t))
    return DilationCertificate(outer.base, tuple(weights), tuple(branches),
                               description=f"product of ({outer.description}) and ({inner.description})")


def _cluster_projections(h: np.ndarray, tol: float = 1e-6) -> list:
    """Spectral projections of Hermitian ``h``, eigenvalues grouped within ``tol``."""
    evals, evecs = np.linalg.eigh(h)
    spread = max(1.0, evals[-1] - evals[0])
    groups, start = [], 0
    for k in range(1, len(evals) + 1):
        if k == len(evals) or evals[k] - evals[k - 1] > tol * spread:
            groups.append(evecs[:, start:k])
            start = k
    return groups


def _polar_unitary_part(m: np.ndarray, rank: int) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u[:, :rank] @ vh[:rank]


def _twirl(S: Subalgebra):
    """Finite unitary family in ``S'`` whose uniform twirl is ``E_S``.

    Decomposes the commutant as ``⊕_k M_{m_k} ⊗ 1``: central projections
    ``P_k`` give a phase group, and matrix units in each summand give a
    shift/clock (Weyl) group.
    """
    alg = S.algebra
    n = alg.size
    rng = np.random.default_rng(20240607)
    comm = commutant(S)
    center = intersection(comm, S)
    cmats = [e.blocks[0] for e in center.elements()]
    h = sum(rng.standard_normal() * (c + c.conj().T) for c in cmats)
    central = [v @ v.conj().T for v in _cluster_projections(h)]
    K = len(central)

    comm_mats = [e.blocks[0] for e in comm.elements()]
    families = []
    for P in central:
        evals, evecs = np.linalg.eigh(P)
        W = evecs[:, evals > 0.5]
        compressed = [W.conj().T @ y @ W for y in comm_mats]
        hk = sum(rng.standard_normal() * (y + y.conj().T) for y in compressed)
        minimal = _cluster_projections(hk)
        m = len(minimal)
        if m == 1:
            continue
        r = minimal[0].shape[1]
        q = [v @ v.conj().T for v in minimal]
        a = sum((rng.standard_normal() + 1j * rng.standard_normal()) * y for y in compressed)
        e1 = [q[0]] + [_polar_unitary_part(q[0] @ a @ q[j], r) for j in range(1, m)]  # e_{1j}
        shift = sum(e1[(j + 1) % m].conj().T @ e1[j] for j in range(m))  # e_{j+1,1} e_{1,j}
        omega = np.exp(2j * np.pi / m)
        clock = sum(omega ** j * q[j] for j in range(m))
        rest = np.eye(n) - P
        fam = [
            W @ (np.linalg.matrix_power(shift, s) @ np.linalg.matrix_power(clock, c)) @ W.conj().T + rest
            for s in range(m) for c in range(m)
        ]
        families.append(fam)
    phases = [sum(np.exp(2j * np.pi * c * k / K) * central[k] for k in range(K)) for c in range(K)]

    unitaries = phases
    for fam in families:
        unitaries = [w @ u for w in fam for u in unitaries]
    weights = [1.0 / len(unitaries)] * len(unitaries)
    return weights, unitaries
