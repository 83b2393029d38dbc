"""L_p spectral gaps of Markov maps.

``c_p = ||T : L_p^0 -> L_p^0||`` where ``L_p^0`` is the kernel of the
conditional expectation onto the fixed-point algebra. At ``p = 2`` this is a
singular value; otherwise a nonlinear power iteration returns a certified
lower bound with its witness, and the closed-form bounds supply the upper
side.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .algebra import AlgebraElement, TracialAlgebra, dual_exponent, schatten_norm
from .channels import MarkovMap, apply
from .exceptions import DomainError
from .structure import Subalgebra, fixed_point_algebra

COMMUTATION_TOL = 1e-8
MONOTONE_SLACK = 1e-12
ORACLE_MAX_DIMENSION = 16
INNER_MAX_STEPS = 50

__all__ = ["GapEstimate", "gap_l2", "gap_lp", "gap_lp_oracle", "power_iteration", "GapProblem"]


@dataclass(frozen=True)
class GapEstimate:
    """Certified lower estimate of ``c_p`` with witness and optional upper bound.

    Attributes
    ----------
    p : float
    lower : float
        ``||T(witness)||_p``, recomputed from the witness.
    witness : AlgebraElement or None
        Unit vector of ``L_p^0``; ``None`` when ``L_p^0 = 0``.
    upper : float or None
    upper_source : str or None
        ``exact-L2``, ``theorem-bound``, ``hmo-bound`` or ``interpolation-bound``.
    iterations : int
        Total power-iteration steps over all restarts.
    restarts_used : int
    converged : bool
        Whether the best restart met the tolerance.
    history : tuple
        Objective values of the best restart.
    """

    p: float
    lower: float
    witness: AlgebraElement | None
    upper: float | None = None
    upper_source: str | None = None
    iterations: int = 0
    restarts_used: int = 0
    converged: bool = True
    history: tuple = field(default=(), repr=False)

    @property
    def bracket(self):
        return self.lower, self.upper


# ---------------------------------------------------------------------------
# vector-coordinate calculus


def _polar_power_vec(alg: TracialAlgebra, v: np.ndarray, r: float):
    """``(vec(u|x|^r), sum_i w_i mean(s_i^q))`` helpers in one SVD pass.

    Returns the coordinates of ``u|x|^r`` and the raw singular values per block.
    """
    out = np.empty(alg.dimension, dtype=complex)
    svals = []
    svds = []
    for i, d in enumerate(alg.dims):
        lo, hi = alg._offsets[i], alg._offsets[i + 1]
        u, s, vh = np.linalg.svd(v[lo:hi].reshape(d, d) / alg._scales[i])
        svds.append((u, s, vh))
        svals.append(s)
    smax = max(s.max() for s in svals)
    cut = 1e-12 * smax
    for i, (u, s, vh) in enumerate(svds):
        lo, hi = alg._offsets[i], alg._offsets[i + 1]
        sr = np.where(s > cut, np.abs(s) ** r, 0.0) if r != 0 else (s > cut).astype(float)
        out[lo:hi] = ((u * sr) @ vh).ravel() * alg._scales[i]
    return out, svals


def _norm_from_svals(alg: TracialAlgebra, svals, p: float) -> float:
    return float(sum(w * np.mean(s ** p) for s, w in zip(svals, alg.weights)) ** (1.0 / p))


def _vec_norm(alg, v, p):
    _, s = _polar_power_vec(alg, v, 1.0)
    return _norm_from_svals(alg, s, p)


def _duality_vec(alg, v, p):
    """Coordinates of ``J_p(x)`` and ``||x||_p``."""
    h, s = _polar_power_vec(alg, v, p - 1.0)
    nrm = _norm_from_svals(alg, s, p)
    return h / nrm ** (p - 1.0), nrm


class GapProblem:
    """``T`` restricted to ``L_p^0 = ker E_N`` in trace-basis coordinates."""

    def __init__(self, T: MarkovMap, N: Subalgebra, check: bool = True):
        if T.algebra != N.algebra:
            raise DomainError("channel and subalgebra live on different algebras")
        if not T.valid:
            raise DomainError(f"map is not Markov: {T.validation.reason}")
        self.T, self.N = T, N
        self.algebra = T.algebra
        D = self.algebra.dimension
        self.QN = np.asarray(N.basis)
        self.EN = self.QN @ self.QN.conj().T
        self.P0 = np.eye(D) - self.EN
        u, s, _ = np.linalg.svd(self.P0)
        self.B = u[:, s > 0.5]  # orthonormal basis of L^0
        self.A = np.asarray(T.transfer) @ self.P0
        self.Ah = self.P0 @ np.asarray(T.transfer).conj().T
        if check:
            tr = np.asarray(T.transfer)
            res = max(np.abs(tr @ self.EN - self.EN @ tr).max(), np.abs(tr @ self.EN - self.EN).max())
            if res > COMMUTATION_TOL:
                raise DomainError(
                    f"subalgebra is not the fixed-point algebra of the map (commutation residual {res:.3g})"
                )

    @property
    def codim(self) -> int:
        return self.B.shape[1]

    def objective(self, v: np.ndarray, p: float) -> float:
        return _vec_norm(self.algebra, self.A @ v, p)

    def normalize(self, v: np.ndarray, p: float) -> np.ndarray:
        v = self.P0 @ v
        return v / _vec_norm(self.algebra, v, p)

    def quotient_representative(self, z: np.ndarray, q: float, warm: np.ndarray | None = None):
        """``z - n*`` with ``n*`` minimizing ``||z - n||_q`` over ``n`` in ``N``.

        Damped Newton on the real coefficients of ``n`` with the analytic
        gradient ``-q Re/Im Q_N* vec(u|w|^(q-1))`` and a forward-difference
        Hessian; warm-started from the previous outer step.
        """
        alg, QN = self.algebra, self.QN
        k = QN.shape[1]

        def fun(c):
            w = z - QN @ (c[:k] + 1j * c[k:])
            h, s = _polar_power_vec(alg, w, q - 1.0)
            val = sum(wt * np.mean(sv ** q) for sv, wt in zip(s, alg.weights))
            g = QN.conj().T @ h
            return val, -q * np.concatenate([g.real, g.imag])

        c = np.zeros(2 * k) if warm is None else warm.copy()
        f, g = fun(c)
        eye = np.eye(2 * k)
        for _ in range(INNER_MAX_STEPS):
            scale = max(1.0, float(np.abs(c).max()))
            eps = 1e-7 * scale
            H = np.empty((2 * k, 2 * k))
            for j in range(2 * k):
                H[:, j] = (fun(c + eps * eye[j])[1] - g) / eps
            H = 0.5 * (H + H.T)
            try:
                step = -np.linalg.solve(H + 1e-14 * scale * eye, g)
            except np.linalg.LinAlgError:
                step = -g
            slope = float(g @ step)
            if not slope < 0:
                step, slope = -g, -float(g @ g)
            if -slope <= 1e-15 * max(f, 1e-300):
                break  # Newton decrement at roundoff level
            # Backtrack to the first sufficient decrease, then keep halving
            # while that improves: Newton overshoots along directions where a
            # singular value of w tends to zero (curvature ~ s**(q-2)).
            t = 1.0
            for _ in range(30):
                fn, gn = fun(c + t * step)
                if fn <= f + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            for _ in range(30):
                fh, gh = fun(c + 0.5 * t * step)
                if fh >= fn:
                    break
                t, fn, gn = 0.5 * t, fh, gh
            moved = t * float(np.abs(step).max())
            c, f, g = c + t * step, fn, gn
            if moved <= 1e-14 * scale:
                break
        return z - QN @ (c[:k] + 1j * c[k:]), c


def power_iteration(problem: GapProblem, x0: np.ndarray, p: float, max_iters: int = 5000, tol: float = 1e-10):
    """Boyd-type ascent for ``max ||T x||_p`` over the unit sphere of ``L_p^0``.

    One step maps ``x`` to the norming point of the functional
    ``(I - E_N) T^† J_p(T x)`` on ``L_p^0``. Its dual norm is the quotient
    norm of ``L_{p'} / N``, so the step solves a small convex problem over
    ``N``. The objective is nondecreasing; a decrease beyond 1e-12 stops the
    run and keeps the previous iterate.

    Returns
    -------
    x : ndarray
        Best iterate (unit in L_p).
    history : list of float
    converged : bool
    """
    alg = problem.algebra
    q = dual_exponent(p)
    x = problem.normalize(x0, p)
    obj = problem.objective(x, p)
    history = [obj]
    warm = None
    converged = False
    for _ in range(max_iters):
        y = problem.A @ x
        if obj == 0.0:
            converged = True
            break
        g, _ = _duality_vec(alg, y, p)
        z = problem.Ah @ g
        w, warm = problem.quotient_representative(z, q, warm)
        xn, _ = _duality_vec(alg, w, q)
        xn = problem.normalize(xn, p)
        new = problem.objective(xn, p)
        if new < obj - MONOTONE_SLACK * max(1.0, obj):
            break
        history.append(new)
        done = abs(new - obj) <= tol * max(obj, 1e-300)
        x, obj = xn, new
        if done:
            converged = True
            break
    return x, history, converged


def quotient_ascent(problem: GapProblem, x0: np.ndarray, p: float, max_iters: int = 500) -> np.ndarray:
    """L-BFGS on ``||T x||_p / ||x||_p`` over real coordinates of ``L_p^0``.

    The gradient comes from duality maps: ``d||y||_p = Re tau(J_p(y)* dy)``.
    Used to bring a seed close to a stationary point before the power
    iteration, which then converges in a handful of steps.
    """
    alg, B = problem.algebra, problem.B
    AB = problem.A @ B
    m = B.shape[1]

    def fun(v):
        c = v[:m] + 1j * v[m:]
        jy, ny = _duality_vec(alg, AB @ c, p)
        jx, nx = _duality_vec(alg, B @ c, p)
        g = (AB.conj().T @ jy) / nx - (ny / nx ** 2) * (B.conj().T @ jx)
        return -ny / nx, -np.concatenate([g.real, g.imag])

    c0 = B.conj().T @ x0
    c0 = c0 / np.linalg.norm(c0)
    if _vec_norm(alg, AB @ c0, p) == 0:
        return x0
    res = minimize(fun, np.concatenate([c0.real, c0.imag]), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iters, "ftol": 1e-15, "gtol": 1e-12})
    v = res.x if res.fun <= fun(np.concatenate([c0.real, c0.imag]))[0] else np.concatenate([c0.real, c0.imag])
    return B @ (v[:m] + 1j * v[m:])


def _l2_witness(problem: GapProblem):
    # SVD on L^0 coordinates so the right singular vector stays in L^0 even when T kills it
    _, s, vh = np.linalg.svd(problem.A @ problem.B)
    return float(s[0]), problem.B @ vh[0].conj()


def gap_l2(T: MarkovMap, N: Subalgebra | None = None) -> GapEstimate:
    """Exact ``c_2``: top singular value of ``T (I - E_N)``."""
    if N is None:
        N = fixed_point_algebra(T)
    problem = GapProblem(T, N)
    if problem.codim == 0:
        return GapEstimate(2.0, 0.0, None, 0.0, "exact-L2")
    c2, v = _l2_witness(problem)
    v = problem.normalize(v, 2.0)
    w = problem.algebra.from_vector(v)
    return GapEstimate(2.0, c2, w, c2, "exact-L2", iterations=0, restarts_used=1, converged=True)


def _check_exponent(p):
    if not (1 < p < np.inf):
        raise DomainError(
            f"gap estimation needs 1 < p < inf, got p={p}; the transfer result is false for p=1 and p=inf"
        )


def gap_lp(T: MarkovMap, N: Subalgebra | None = None, p: float = 2.0, restarts: int = 20,
           max_iters: int = 5000, tol: float = 1e-10, seed: int | np.random.SeedSequence | None = 0,
           with_upper: bool = True, accelerate: bool = True) -> GapEstimate:
    """Estimate ``c_p`` from below by restarted power iteration.

    Seeds, in order: the L_2 witness, its Mazur transport ``M_{2,p}``, and
    Gaussian elements (alternately general and self-adjoint) until
    ``restarts`` seeds have run.

    Parameters
    ----------
    T : MarkovMap
    N : Subalgebra, optional
        Fixed-point algebra; computed when omitted.
    p : float
        Exponent in ``(1, inf)``.
    restarts : int
        Total number of seeds.
    max_iters, tol
        Per-seed iteration cap and relative convergence tolerance.
    seed
        Seed for the random starts.
    with_upper : bool
        Fill ``upper`` from the closed-form bounds (and exactly at ``p=2``).
    accelerate : bool
        Climb each seed with :func:`quotient_ascent` before the power
        iteration. The iteration still decides convergence and the
        reported history.
    """
    _check_exponent(p)
    if N is None:
        N = fixed_point_algebra(T)
    problem = GapProblem(T, N)
    alg = problem.algebra
    if problem.codim == 0:
        return GapEstimate(p, 0.0, None, 0.0 if with_upper else None, "exact-L2" if with_upper else None,
                           converged=True)
    c2, v2 = _l2_witness(problem)
    seeds = [v2]
    if restarts > 1 and p != 2:
        mz, _ = _polar_power_vec(alg, problem.normalize(v2, 2.0), 2.0 / p)
        seeds.append(mz)
    rng = np.random.default_rng(seed)
    k = 0
    while len(seeds) < max(restarts, 1):
        c = rng.standard_normal(problem.codim) + 1j * rng.standard_normal(problem.codim)
        v = problem.B @ c
        if k % 2 == 1:
            x = alg.from_vector(v)
            v = (x + x.H).vector()
        seeds.append(v)
        k += 1

    best = None
    total = 0
    for s in seeds:
        if np.linalg.norm(problem.P0 @ s) < 1e-14:
            continue
        if accelerate and p != 2:
            s = quotient_ascent(problem, s, p)
        x, hist, conv = power_iteration(problem, s, p, max_iters=max_iters, tol=tol)
        total += len(hist) - 1
        if best is None or hist[-1] > best[1][-1]:
            best = (x, hist, conv)
    x, hist, conv = best
    witness = alg.from_vector(x)
    lower = schatten_norm(apply(T, witness), p)
    upper, source = None, None
    if with_upper:
        upper, source = _upper(c2, p)
    return GapEstimate(p, lower, witness, upper, source, iterations=total, restarts_used=len(seeds),
                       converged=conv, history=tuple(hist))


def _upper(c2: float, p: float):
    if p == 2:
        return c2, "exact-L2"
    if c2 >= 1 - 1e-12:
        return None, None
    from .bounds import forward_bound

    rep = forward_bound(min(c2, 1.0), p)
    return rep.minimum_applicable, rep.minimum_source


def gap_lp_oracle(T: MarkovMap, N: Subalgebra | None = None, p: float = 2.0, budget: int = 20000,
                  seed: int | None = 0, refine: int = 4) -> GapEstimate:
    """Brute-force lower estimate of ``c_p`` for tiny algebras.

    Samples ``budget`` Gaussian elements of ``L_p^0`` (half general, half
    self-adjoint), then runs a coordinate pattern search on the real
    coordinates of an orthonormal ``L_p^0`` basis from the ``refine`` best
    samples. Shares no code with the power iteration beyond the norm.
    """
    _check_exponent(p)
    alg = T.algebra
    if alg.dimension > ORACLE_MAX_DIMENSION:
        raise DomainError(f"oracle is limited to algebras of dimension <= {ORACLE_MAX_DIMENSION}")
    if N is None:
        N = fixed_point_algebra(T)
    q = np.asarray(N.basis)
    _, s, vh = np.linalg.svd(q.conj().T, full_matrices=True)
    basis = vh[q.shape[1]:].conj().T  # orthogonal complement of N
    m = basis.shape[1]
    if m == 0:
        return GapEstimate(p, 0.0, None)
    tr = np.asarray(T.transfer)
    rng = np.random.default_rng(seed)

    def ratio(coeffs):
        vecs = coeffs @ basis.T
        num = alg.norms_batch(vecs @ tr.T, p)
        den = alg.norms_batch(vecs, p)
        return num / den

    half = budget // 2
    general = rng.standard_normal((half, m)) + 1j * rng.standard_normal((half, m))
    sa = rng.standard_normal((budget - half, m)) + 1j * rng.standard_normal((budget - half, m))
    # self-adjoint draws: symmetrize in element space, then read coordinates back
    sa_vecs = sa @ basis.T
    adj = _adjoint_coords(alg)
    sa_vecs = 0.5 * (sa_vecs + np.conj(sa_vecs) @ adj.T)
    sa = sa_vecs @ basis.conj()
    samples = np.vstack([general, sa])
    vals = np.concatenate([ratio(samples[i:i + 4096]) for i in range(0, len(samples), 4096)])
    order = np.argsort(vals)[::-1][:refine]

    best_val, best_c = -1.0, None
    for idx in order:
        c = samples[idx] / np.linalg.norm(samples[idx])
        val, c = _pattern_search(ratio, c)
        if val > best_val:
            best_val, best_c = val, c
    v = best_c @ basis.T
    w = alg.from_vector(v)
    w = w / schatten_norm(w, p)
    return GapEstimate(p, schatten_norm(apply(T, w), p), w, converged=True)


def _adjoint_coords(alg: TracialAlgebra) -> np.ndarray:
    """Real-linear adjoint in coordinates: ``vec(x*) = conj(vec(x)) @ adj.T``."""
    D = alg.dimension
    perm = np.zeros((D, D))
    for i, d in enumerate(alg.dims):
        lo = alg._offsets[i]
        for j in range(d):
            for k in range(d):
                perm[lo + k * d + j, lo + j * d + k] = 1.0
    return perm


def _pattern_search(ratio, c, step=0.25, min_step=1e-9, max_rounds=20000):
    m = c.shape[0]
    dirs = np.vstack([np.eye(m), 1j * np.eye(m)]).astype(complex)
    dirs = np.vstack([dirs, -dirs])
    val = float(ratio(c[None, :])[0])
    rounds = 0
    while step > min_step and rounds < max_rounds:
        rounds += 1
        trial = c[None, :] + step * dirs
        tv = ratio(trial)
        j = int(np.argmax(tv))
        if tv[j] > val:
            val, c = float(tv[j]), trial[j] / np.linalg.norm(trial[j])
        else:
            step *= 0.5
    return val, c
