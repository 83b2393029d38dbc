"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra
from .channels import MarkovMap
from .exceptions import DomainError, StructureError
from .structure import Subalgebra


def check_exponent(p, allow_two: bool = True) -> float:
    """Return ``p`` as a float in ``(1, inf)``."""
    if isinstance(p, bool) or not isinstance(p, numbers.Real):
        raise DomainError(f"exponent must be a real number, got {p!r}")
    p = float(p)
    if not (1 < p < np.inf):
        raise DomainError(f"exponent must lie in (1, inf), got {p}; the endpoints 1 and inf are excluded")
    if not allow_two and p == 2:
        raise DomainError("exponent 2 is excluded here")
    return p


def check_channel(T, require_valid: bool = True) -> MarkovMap:
    if not isinstance(T, MarkovMap):
        raise StructureError(f"expected a MarkovMap, got {type(T).__name__}")
    if require_valid and not T.valid:
        raise DomainError(f"map is not Markov: {T.validation.reason}")
    return T


def check_element(x, algebra: TracialAlgebra | None = None) -> AlgebraElement:
    if not isinstance(x, AlgebraElement):
        raise StructureError(f"expected an AlgebraElement, got {type(x).__name__}")
    if algebra is not None and x.algebra != algebra:
        raise StructureError("element lives on a different algebra")
    return x


def check_elements(X, algebra: TracialAlgebra | None = None) -> list:
    """Accept one element or an iterable of elements."""
    if isinstance(X, AlgebraElement):
        X = [X]
    return [check_element(x, algebra) for x in X]


def check_subalgebra(S, algebra: TracialAlgebra | None = None) -> Subalgebra:
    if not isinstance(S, Subalgebra):
        raise StructureError(f"expected a Subalgebra, got {type(S).__name__}")
    if algebra is not None and S.algebra != algebra:
        raise StructureError("subalgebra lives on a different algebra")
    return S


def check_positive_int(n, name: str) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_random_state(seed) -> np.random.Generator:
    """``numpy.random.Generator`` from ``None``, an int, a ``SeedSequence`` or a generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
