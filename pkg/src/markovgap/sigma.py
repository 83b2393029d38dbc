"""Σ-norms for a pair of subalgebras and their equivalence with L_p norms.

For unital *-subalgebras ``A, B`` with ``A ∩ B = N`` and ``x`` in ``L_p^0``,

    ||x||_{Σ,p} = ||(1 - E_A) x||_p + ||(1 - E_B) x||_p,

always dominated by ``4 ||x||_p``. The reverse domination holds with
constant ``1 / (1 - c_p)`` when ``E_A E_B`` has an L_p spectral gap
``c_p < 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .algebra import AlgebraElement, schatten_norm
from .bounds import forward_bound
from .channels import compose
from .exceptions import DomainError, StructureError
from .gap import GapEstimate, _duality_vec, gap_l2, gap_lp
from .structure import Subalgebra, conditional_expectation, fixed_point_algebra, intersection

MEAN_ZERO_TOL = 1e-9
FIXED_POINT_MATCH_TOL = 1e-8

__all__ = ["SigmaInstance", "EquivalenceReport", "sigma_norm", "equivalence_ratio", "corollary_sweep"]


class SigmaInstance:
    """Pair of subalgebras with their intersection and ``T = E_A E_B``.

    Raises ``StructureError`` if the fixed points of ``T`` differ from
    ``A ∩ B``.
    """

    def __init__(self, A: Subalgebra, B: Subalgebra):
        if A.algebra != B.algebra:
            raise StructureError("subalgebras live on different algebras")
        self.algebra = A.algebra
        self.A, self.B = A, B
        self.N = intersection(A, B)
        self.E_A = conditional_expectation(A)
        self.E_B = conditional_expectation(B)
        self.E_N = conditional_expectation(self.N)
        self.T = compose(self.E_A, self.E_B)
        self.T_reversed = compose(self.E_B, self.E_A)
        fixed = fixed_point_algebra(self.T)
        pn = self.N.basis @ self.N.basis.conj().T
        pf = fixed.basis @ fixed.basis.conj().T
        res = float(np.abs(pn - pf).max())
        if res > FIXED_POINT_MATCH_TOL:
            raise StructureError(f"fixed points of E_A E_B differ from A ∩ B (residual {res:.3g})")

    def __repr__(self):
        return f"SigmaInstance(dim A={self.A.dim}, dim B={self.B.dim}, dim N={self.N.dim})"

    def deviations(self, x: AlgebraElement):
        """``((1 - E_A) x, (1 - E_B) x)``."""
        return x - self.A.project(x), x - self.B.project(x)


def sigma_norm(inst: SigmaInstance, x: AlgebraElement, p: float) -> float:
    """``||(1 - E_A) x||_p + ||(1 - E_B) x||_p`` for ``x`` with ``E_N x = 0``."""
    if x.algebra != inst.algebra:
        raise StructureError("element lives on a different algebra")
    if schatten_norm(inst.N.project(x), 2) > MEAN_ZERO_TOL * max(1.0, schatten_norm(x, 2)):
        raise DomainError("sigma norm is defined on L_p^0 (E_N x must vanish)")
    a, b = inst.deviations(x)
    return schatten_norm(a, p) + schatten_norm(b, p)


@dataclass(frozen=True)
class EquivalenceReport:
    """Worst ``||x||_p / ||x||_{Σ,p}`` found, against ``1 / (1 - c_p upper)``."""

    p: float
    worst_ratio: float
    witness: AlgebraElement | None
    c2: float
    cp_upper: float | None
    upper_source: str | None
    paper_bound: float

    @property
    def certified(self) -> bool:
        """Whether a spectral gap ``c_p < 1`` is certified."""
        return self.cp_upper is not None and self.cp_upper < 1

    @property
    def bound_satisfied(self) -> bool:
        return (not self.certified) or self.worst_ratio <= self.paper_bound + 1e-6

    @property
    def status(self) -> str:
        return "certified" if self.certified else "equivalence not certified"


def equivalence_ratio(inst: SigmaInstance, p: float, restarts: int = 20, seed=0,
                      max_iters: int = 1000) -> EquivalenceReport:
    """Maximize ``||x||_p / ||x||_{Σ,p}`` over ``L_p^0``.

    Restarted L-BFGS on the real coordinates of an orthonormal basis of
    ``L_p^0``; the gradient combines the duality maps of the three norms.
    Seeds: the L_2 witnesses of ``E_A E_B`` and ``E_B E_A``, then Gaussian
    elements.
    """
    if not (1 < p < np.inf):
        raise DomainError(f"equivalence ratio needs 1 < p < inf, got {p}")
    alg = inst.algebra
    qn = inst.N.basis
    P0 = np.eye(alg.dimension) - qn @ qn.conj().T
    u, s, _ = np.linalg.svd(P0)
    B = u[:, s > 0.5]
    m = B.shape[1]
    c2 = gap_l2(inst.T, inst.N).lower
    cp_upper, source = _cp_upper(c2, p)
    paper_bound = 1.0 / (1.0 - cp_upper) if cp_upper is not None and cp_upper < 1 else float("inf")
    if m == 0:
        return EquivalenceReport(p, 0.0, None, c2, cp_upper, source, paper_bound)

    IA = np.eye(alg.dimension) - inst.A.basis @ inst.A.basis.conj().T
    IB = np.eye(alg.dimension) - inst.B.basis @ inst.B.basis.conj().T
    DA, DB = IA @ B, IB @ B

    def term(M, c):
        y = M @ c
        if np.linalg.norm(y) < 1e-300:
            return 0.0, np.zeros(m, dtype=complex)
        j, n = _duality_vec(alg, y, p)
        return n, M.conj().T @ j

    def fun(v):
        c = v[:m] + 1j * v[m:]
        nx, gx = term(B, c)
        na, ga = term(DA, c)
        nb, gb = term(DB, c)
        sig = na + nb
        if sig == 0:
            return 0.0, np.zeros(2 * m)
        g = gx / sig - (nx / sig ** 2) * (ga + gb)
        return -nx / sig, -np.concatenate([g.real, g.imag])

    seeds = [gap_l2(inst.T, inst.N).witness, gap_l2(inst.T_reversed, inst.N).witness]
    seeds = [B.conj().T @ w.vector() for w in seeds if w is not None]
    rng = np.random.default_rng(seed)
    while len(seeds) < max(restarts, 1):
        seeds.append(rng.standard_normal(m) + 1j * rng.standard_normal(m))

    best_val, best_c = -1.0, None
    for c0 in seeds:
        if np.linalg.norm(c0) < 1e-12:
            continue
        c0 = c0 / np.linalg.norm(c0)
        v0 = np.concatenate([c0.real, c0.imag])
        res = minimize(fun, v0, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iters, "ftol": 1e-15, "gtol": 1e-12})
        v = res.x if res.fun <= fun(v0)[0] else v0
        val = -fun(v)[0]
        if val > best_val:
            best_val, best_c = val, v[:m] + 1j * v[m:]
    x = alg.from_vector(B @ best_c)
    x = x / schatten_norm(x, p)
    worst = schatten_norm(x, p) / sigma_norm(inst, x, p)
    return EquivalenceReport(p, worst, x, c2, cp_upper, source, paper_bound)


def _cp_upper(c2: float, p: float):
    if p == 2:
        return c2, "exact-L2"
    if c2 >= 1 - 1e-12:
        return None, None
    rep = forward_bound(c2, p)
    return rep.minimum_applicable, rep.minimum_source


@dataclass(frozen=True)
class SweepRow:
    p: float
    forward: GapEstimate
    reversed: GapEstimate
    equivalence: EquivalenceReport


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    c2_forward: float
    c2_reversed: float

    @property
    def symmetry_residual(self) -> float:
        return abs(self.c2_forward - self.c2_reversed)

    @property
    def symmetric(self) -> bool:
        return self.symmetry_residual <= 1e-10

    @property
    def all_or_nothing(self) -> bool:
        flags = {r.equivalence.certified for r in self.rows}
        return len(flags) <= 1

    @property
    def passed(self) -> bool:
        return self.symmetric and self.all_or_nothing and all(r.equivalence.bound_satisfied for r in self.rows)


def corollary_sweep(inst: SigmaInstance, ps, restarts: int = 20, seed=0) -> SweepReport:
    """Gap brackets of ``E_A E_B`` and ``E_B E_A`` and the equivalence ratio per ``p``.

    The report checks that the gap is certified for every ``p`` or for
    none, and that the two orders have the same L_2 gap.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rows = []
    for p, child in zip(ps, ss.spawn(len(ps))):
        s1, s2, s3 = child.spawn(3)
        fwd = gap_lp(inst.T, inst.N, p, restarts=restarts, seed=s1)
        rev = gap_lp(inst.T_reversed, inst.N, p, restarts=restarts, seed=s2)
        eq = equivalence_ratio(inst, p, restarts=restarts, seed=s3)
        rows.append(SweepRow(float(p), fwd, rev, eq))
    return SweepReport(tuple(rows), gap_l2(inst.T, inst.N).lower, gap_l2(inst.T_reversed, inst.N).lower)
