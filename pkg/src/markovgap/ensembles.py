"""Random Markov maps and random elements for property tests and sweeps."""
from __future__ import annotations

import numpy as np
from scipy.linalg import sqrtm
from scipy.stats import unitary_group

from .algebra import AlgebraElement, TracialAlgebra, matrix_algebra
from .channels import MarkovMap, kraus_channel, random_unitary_channel, schur_multiplier, stochastic_kernel
from .exceptions import NumericalInstabilityError

__all__ = [
    "haar_unitary",
    "random_element",
    "random_self_adjoint",
    "random_positive",
    "random_kraus_channel",
    "random_mixed_unitary_channel",
    "random_schur_multiplier",
    "random_doubly_stochastic",
    "random_channel",
]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random((1, 1)))


def random_element(alg: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(alg, [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for d in alg.dims])


def random_self_adjoint(alg: TracialAlgebra, rng: np.random.Generator) -> AlgebraElement:
    x = random_element(alg, rng)
    return (x + x.H) * 0.5


def random_positive(alg: TracialAlgebra, rng: np.random.Generator, rank_deficient: bool = False) -> AlgebraElement:
    """``g g*`` for Gaussian ``g``; optionally with a random kernel."""
    blocks = []
    for d in alg.dims:
        k = rng.integers(1, d + 1) if rank_deficient else d
        g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
        blocks.append(g @ g.conj().T)
    return AlgebraElement(alg, blocks)


def _inv_sqrt(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v / np.sqrt(w)) @ v.conj().T


def random_kraus_channel(n: int, rng: np.random.Generator, n_ops: int = 3, max_rounds: int = 2000,
                         tol: float = 1e-13) -> MarkovMap:
    """Unital trace-preserving Kraus channel on ``M_n`` by operator Sinkhorn scaling.

    Gaussian Kraus operators are alternately normalized on the right
    (``sum a* a = 1``) and on the left (``sum a a* = 1``).
    """
    ops = [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(n_ops)]
    eye = np.eye(n)
    for _ in range(max_rounds):
        r = _inv_sqrt(sum(a.conj().T @ a for a in ops))
        ops = [a @ r for a in ops]
        left = sum(a @ a.conj().T for a in ops)
        if np.abs(left - eye).max() < tol:
            break
        s = _inv_sqrt(left)
        ops = [s @ a for a in ops]
    else:
        raise NumericalInstabilityError("operator Sinkhorn scaling did not converge")
    return kraus_channel(ops, matrix_algebra(n), label="random-kraus")


def random_mixed_unitary_channel(n: int, rng: np.random.Generator, n_terms: int = 3) -> MarkovMap:
    """``x -> sum_l p_l u_l x u_l*`` with Haar unitaries and Dirichlet weights."""
    us = [haar_unitary(n, rng) for _ in range(n_terms)]
    w = rng.dirichlet(np.ones(n_terms))
    return random_unitary_channel(us, w, matrix_algebra(n), label="random-unitary")


def random_schur_multiplier(n: int, rng: np.random.Generator, rank: int = 2) -> MarkovMap:
    """Gram matrix of random complex unit vectors."""
    v = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return schur_multiplier(v @ v.conj().T, label="random-schur")


def random_doubly_stochastic(n: int, rng: np.random.Generator, n_terms: int = 3) -> MarkovMap:
    """Convex combination of random permutation kernels."""
    w = rng.dirichlet(np.ones(n_terms))
    P = sum(c * np.eye(n)[rng.permutation(n)] for c in w)
    return stochastic_kernel(P, label="random-stochastic")


def random_channel(n: int, rng: np.random.Generator, attempts: int = 5) -> MarkovMap:
    """One of the random families above on ``M_n`` (Kraus, mixed unitary, Schur).

    A Kraus draw whose Sinkhorn scaling stalls is redrawn, up to ``attempts``
    times.
    """
    kind = rng.integers(3)
    if kind == 0:
        for _ in range(attempts - 1):
            try:
                return random_kraus_channel(n, rng, n_ops=int(rng.integers(2, 5)))
            except NumericalInstabilityError:
                pass
        return random_kraus_channel(n, rng, n_ops=int(rng.integers(2, 5)))
    if kind == 1:
        return random_mixed_unitary_channel(n, rng, n_terms=int(rng.integers(2, 5)))
    return random_schur_multiplier(n, rng, rank=int(rng.integers(1, n + 1)))
