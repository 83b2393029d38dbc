"""JSON encodings for matrices, algebras and elements.

Matrices are nested arrays whose entries are either real numbers or
``[re, im]`` pairs. Elements serialize as a list of block matrices.
"""
from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement, TracialAlgebra, commutative_algebra, matrix_algebra
from .exceptions import StructureError


def parse_matrix(obj) -> np.ndarray:
    """Decode a square complex matrix; raise ``StructureError`` when malformed."""
    if not isinstance(obj, list) or not obj:
        raise StructureError("matrix must be a non-empty list of rows")
    rows = []
    for r in obj:
        if not isinstance(r, list):
            raise StructureError("matrix rows must be lists")
        rows.append([_parse_entry(e) for e in r])
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise StructureError(f"matrix must be square, got {n} rows of lengths {[len(r) for r in rows]}")
    return np.array(rows, dtype=complex)


def parse_vector(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise StructureError("vector must be a non-empty list")
    return np.array([_parse_entry(e) for e in obj], dtype=complex)


def _parse_entry(e) -> complex:
    if isinstance(e, bool):
        raise StructureError(f"bad matrix entry {e!r}")
    if isinstance(e, (int, float)):
        return complex(e)
    if (isinstance(e, list) and len(e) == 2
            and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in e)):
        return complex(e[0], e[1])
    raise StructureError(f"bad matrix entry {e!r}; expected a number or [re, im]")


def matrix_to_json(m) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def element_to_json(x: AlgebraElement) -> dict:
    return {
        "blocks": [[d, w] for d, w in x.algebra.blocks],
        "data": [matrix_to_json(b) for b in x.blocks],
    }


def element_from_json(obj) -> AlgebraElement:
    alg = TracialAlgebra(tuple(tuple(b) for b in obj["blocks"]))
    return AlgebraElement(alg, [parse_matrix(b) for b in obj["data"]])


def parse_algebra(obj) -> TracialAlgebra:
    """``{"matrix": n}``, ``{"commutative": n, "weights": [...]}`` or ``{"blocks": [[d, w], ...]}``."""
    if isinstance(obj, int) and not isinstance(obj, bool):
        return matrix_algebra(obj)
    if not isinstance(obj, dict):
        raise StructureError("algebra must be an object or an integer")
    if "matrix" in obj:
        return matrix_algebra(_posint(obj["matrix"], "matrix"))
    if "commutative" in obj:
        n = _posint(obj["commutative"], "commutative")
        w = obj.get("weights")
        return commutative_algebra(n, None if w is None else [float(t) for t in w])
    if "blocks" in obj:
        blocks = obj["blocks"]
        if not isinstance(blocks, list) or not all(isinstance(b, list) and len(b) == 2 for b in blocks):
            raise StructureError("blocks must be a list of [dim, weight] pairs")
        return TracialAlgebra(tuple((_posint(d, "dim"), float(w)) for d, w in blocks))
    raise StructureError("algebra needs one of 'matrix', 'commutative', 'blocks'")


def _posint(v, name) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise StructureError(f"{name} must be a positive integer, got {v!r}")
    return v
