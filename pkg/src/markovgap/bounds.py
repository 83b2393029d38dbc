"""Closed-form spectral-gap transfer bounds and checkers for the auxiliary
inequalities behind them.

Every bound has the form ``c <= 1 - gap``; the complements ``1 - bound``
are evaluated with ``log1p``/``expm1`` so that slopes near ``c2 = 1`` stay
accurate even when the complement is far below machine epsilon.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraElement,
    mazur_map,
    schatten_norm,
    signed_power,
)
from .channels import MarkovMap, apply
from .exceptions import DomainError, NumericalInstabilityError

SLACK = 1e-9
SLOPE_STEPS = (1e-3, 1e-4, 1e-5)
SLOPE_SPREAD = 0.05

__all__ = [
    "BoundReport",
    "forward_bound",
    "reverse_bound",
    "reverse_theta",
    "asymptotic_slope",
    "delta_p",
    "InequalityReport",
    "RatioReport",
    "check_psmall",
    "check_pbig",
    "check_pto2",
    "check_ando",
    "check_mazur_holder",
]


def _one_minus_pow(c: float, e: float) -> float:
    """``1 - c**e`` for ``0 <= c <= 1``."""
    if c == 0:
        return 1.0
    return float(-np.expm1(e * np.log(c)))


def _one_minus_root(t: float, p: float) -> float:
    """``1 - (1 - t)**(1/p)`` for ``0 <= t <= 1``."""
    if t >= 1:
        return 1.0
    return float(-np.expm1(np.log1p(-t) / p))


def delta_p(p: float) -> float:
    """``(1 - 2**(-1/p)) / 2``."""
    return 0.5 * float(-np.expm1(-np.log(2) / p))


@dataclass(frozen=True)
class BoundReport:
    """Evaluated forward bounds ``c_2 -> c_p``.

    Each bound is stored together with its complement ``1 - bound`` (the
    ``*_gap`` fields), computed without cancellation.
    """

    c2: float
    p: float
    thm21_case_bounds: tuple
    thm21_case_gaps: tuple
    hmo: float
    hmo_gap: float
    interpolation: float | None
    interpolation_gap: float | None
    minimum_applicable: float
    minimum_source: str
    direction: str = "forward"
    formulas: tuple = field(default=(), repr=False)

    @property
    def thm21_final(self) -> float:
        return max(self.thm21_case_bounds)

    @property
    def thm21_gap(self) -> float:
        return min(self.thm21_case_gaps)

    def rows(self) -> list:
        """``(formula, value)`` pairs for reporting."""
        out = [(f"thm21_case_{i + 1}", v) for i, v in enumerate(self.thm21_case_bounds)]
        out += [("thm21_final", self.thm21_final), ("hmo", self.hmo)]
        if self.interpolation is not None:
            out.append(("interpolation", self.interpolation))
        out.append(("minimum_applicable", self.minimum_applicable))
        return out


def _check_forward(c2, p):
    if not (0 <= c2 < 1):
        raise DomainError(f"forward bounds need 0 <= c2 < 1, got {c2}")
    if not (1 < p < np.inf):
        raise DomainError(f"forward bounds need 1 < p < inf, got {p}")


def _thm21_gaps(c2: float, p: float) -> list:
    """Complements of the case bounds of the forward transfer theorem."""
    if p <= 2:
        one_minus_K = ((1 - c2) * (1 + c2)) / 145.0
        logK = np.log1p(-one_minus_K)
        e_small = (2 * p - 2) / (2 * p)
        gaps = [
            _one_minus_root(0.5 * _one_minus_pow(c2, 2 * p - 2), p),
            _one_minus_root(0.5 * float(-np.expm1(e_small * logK)), p),
        ]
        # the last display is printed with exponent (2p-2)/2 and the parallel one with (2p-2)/(2p)
        for e in ((2 * p - 2) / 2, e_small):
            gaps.append(_one_minus_root(float(-np.expm1(e * logK)) / 4.0 ** p, p))
        return gaps
    d = delta_p(p) ** p
    return [
        _one_minus_root(0.5 * ((1 - c2) * (1 + c2)), p),
        _one_minus_root(d * ((1 - c2) * (1 + c2)) / (2 * (1 + d)), p),
    ]


def _hmo_gap(c2: float, p: float) -> float:
    ps = max(p, p / (p - 1))
    return _one_minus_root(2.0 ** (2 - ps) * (1 - c2), ps)


def _interpolation_gap(c2: float, p: float):
    if p <= 2 or c2 == 0:
        return None if p <= 2 else 1.0
    return float(-np.expm1((2 / p) * np.log(c2) + (1 - 2 / p) * np.log(2)))


def forward_bound(c2: float, p: float) -> BoundReport:
    """Every closed-form upper bound on ``c_p`` given the L_2 gap ``c2``.

    The transfer theorem contributes one bound per proof case and its final
    value is the worst of them. The alternative ``hmo`` bound
    ``(1 - 2**(2-p*) (1 - c2))**(1/p*)`` uses ``p* = max(p, p')``; the interpolation bound
    ``c2**(2/p) 2**(1-2/p)`` is listed only for ``p > 2`` when it is
    below 1. ``minimum_applicable`` is the smallest bound below 1 (at
    ``p = 2`` the exact value ``c2`` is included).
    """
    _check_forward(c2, p)
    gaps = _thm21_gaps(c2, p)
    hmo_gap = _hmo_gap(c2, p)
    interp_gap = _interpolation_gap(c2, p)
    interp = None
    if interp_gap is not None and interp_gap <= 0:
        interp_gap = None
    if interp_gap is not None:
        interp = 1.0 - interp_gap

    candidates = [(min(gaps), "theorem-bound"), (hmo_gap, "hmo-bound")]
    if interp_gap is not None:
        candidates.append((interp_gap, "interpolation-bound"))
    if p == 2:
        candidates.append((1.0 - c2, "exact-L2"))
    best_gap, source = max(candidates, key=lambda t: t[0])
    if best_gap <= 0:
        best_gap, source = 0.0, "contraction"
    return BoundReport(
        c2=float(c2),
        p=float(p),
        thm21_case_bounds=tuple(1.0 - g for g in gaps),
        thm21_case_gaps=tuple(gaps),
        hmo=1.0 - hmo_gap,
        hmo_gap=hmo_gap,
        interpolation=interp,
        interpolation_gap=interp_gap,
        minimum_applicable=1.0 - best_gap,
        minimum_source=source,
    )


def reverse_theta(p: float) -> float:
    """Hölder exponent ``min(p/2, 2/p) / 4`` of the L_p to L_2 transfer."""
    return 0.25 * min(p / 2, 2 / p)


def reverse_bound(cp: float, p: float, C: float) -> float:
    """Upper bound on ``c_2`` implied by ``c_p`` for factorizable maps.

    ``1 - ((C/p)(1 - cp))**(2/theta)`` clamped to ``[0, 1]``. The constant
    ``C`` is unknown in general and must be supplied.
    """
    if not (0 <= cp < 1):
        raise DomainError(f"reverse bound needs 0 <= cp < 1, got {cp}")
    if not (1 < p < np.inf) or p == 2:
        raise DomainError(f"reverse bound needs p in (1, inf) minus {{2}}, got {p}")
    if not C > 0:
        raise DomainError(f"reverse bound needs C > 0, got {C}")
    base = (C / p) * (1 - cp)
    val = 1.0 - base ** (2 / reverse_theta(p))
    return float(min(1.0, max(0.0, val)))


def asymptotic_slope(p: float, which: str = "thm21") -> float:
    """Limit of ``(1 - bound) / (1 - c2)`` as ``c2 -> 1``.

    Evaluated at ``c2 = 1 - h`` for ``h`` in 1e-3, 1e-4, 1e-5; raises
    ``NumericalInstabilityError`` if the three quotients spread by more than
    5% and otherwise returns the first-order Richardson extrapolation of the
    two smallest steps.
    """
    if not (1 < p < np.inf):
        raise DomainError(f"slope needs 1 < p < inf, got {p}")
    if which not in ("thm21", "hmo"):
        raise DomainError(f"unknown bound {which!r}")
    slopes = []
    for h in SLOPE_STEPS:
        rep = forward_bound(1.0 - h, p)
        g = rep.thm21_gap if which == "thm21" else rep.hmo_gap
        slopes.append(g / h)
    slopes = np.array(slopes)
    ref = abs(slopes[-1])
    if ref == 0 or (slopes.max() - slopes.min()) / ref > SLOPE_SPREAD:
        raise NumericalInstabilityError(f"slope estimates do not agree: {slopes.tolist()}")
    ratio = SLOPE_STEPS[1] / SLOPE_STEPS[2]
    return float((ratio * slopes[2] - slopes[1]) / (ratio - 1))


# ---------------------------------------------------------------------------
# inequality checkers


@dataclass(frozen=True)
class InequalityReport:
    """``lhs <= rhs`` up to ``slack``; ``margin = rhs - lhs``."""

    name: str
    lhs: float
    rhs: float
    slack: float = SLACK

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + self.slack


@dataclass(frozen=True)
class RatioReport:
    name: str
    numerator: float
    denominator: float
    ratio: float


def _require_positive(x: AlgebraElement, what: str):
    if not x.is_positive():
        raise DomainError(f"{what} must be positive (min eigenvalue {x.min_eigenvalue():.3g})")


def _herm(x: AlgebraElement) -> AlgebraElement:
    return (x + x.H) * 0.5


def check_psmall(T: MarkovMap, x: AlgebraElement, p: float) -> InequalityReport:
    """``||T x||_p <= ||T(x^p)||_1^(2/p-1) ||T(x^(p/2))||_2^(2-2/p)`` for positive ``x``, ``1 < p <= 2``."""
    if not (1 < p <= 2):
        raise DomainError(f"check_psmall needs 1 < p <= 2, got {p}")
    _require_positive(x, "x")
    x = _herm(x)
    lhs = schatten_norm(apply(T, x), p)
    r1 = schatten_norm(apply(T, signed_power(x, p)), 1)
    r2 = schatten_norm(apply(T, signed_power(x, p / 2)), 2)
    return InequalityReport("psmall", lhs, r1 ** (2 / p - 1) * r2 ** (2 - 2 / p))


def check_pbig(T: MarkovMap, x: AlgebraElement, alpha: float, p: float) -> InequalityReport:
    """``||T(x)^alpha||_p <= ||T(x^alpha)||_p`` for positive ``x``, ``alpha >= 1``."""
    if alpha < 1 or p < 1:
        raise DomainError(f"check_pbig needs alpha >= 1 and p >= 1, got alpha={alpha}, p={p}")
    _require_positive(x, "x")
    x = _herm(x)
    tx = _herm(apply(T, x))
    lhs = schatten_norm(signed_power(tx, alpha), p)
    rhs = schatten_norm(apply(T, signed_power(x, alpha)), p)
    return InequalityReport("pbig", lhs, rhs)


def check_ando(a: AlgebraElement, b: AlgebraElement, p: float) -> InequalityReport:
    """``||a^(2/p) - b^(2/p)||_p <= ||a - b||_2^(2/p)`` for positive ``a, b``, ``p > 2``."""
    if not p > 2:
        raise DomainError(f"check_ando needs p > 2, got {p}")
    _require_positive(a, "a")
    _require_positive(b, "b")
    a, b = _herm(a), _herm(b)
    e = 2.0 / p
    lhs = schatten_norm(signed_power(a, e) - signed_power(b, e), p)
    return InequalityReport("ando", lhs, schatten_norm(a - b, 2) ** e)


def check_pto2(T: MarkovMap, y: AlgebraElement, p: float) -> RatioReport:
    """``||T(M_{2,p} y) - M_{2,p} y||_p / (||T y - y||_2^theta ||y||_2^(1-theta))``.

    The ratio is 0 when the denominator is below 1e-14 and the numerator
    below 1e-12; a vanishing denominator with a nonzero numerator gives
    ``inf``.
    """
    if not (1 < p < np.inf):
        raise DomainError(f"check_pto2 needs 1 < p < inf, got {p}")
    ny = schatten_norm(y, 2)
    if ny == 0:
        raise DomainError("check_pto2 needs y != 0")
    th = reverse_theta(p)
    m = mazur_map(y, 2, p)
    num = schatten_norm(apply(T, m) - m, p)
    den = schatten_norm(apply(T, y) - y, 2) ** th * ny ** (1 - th)
    return RatioReport("pto2", num, den, _ratio(num, den))


def check_mazur_holder(x: AlgebraElement, y: AlgebraElement, p: float, q: float) -> RatioReport:
    """``||M_{p,q} x - M_{p,q} y||_q / ||x - y||_p^min(1, p/q)`` on the unit sphere of L_p.

    Inputs are normalized first.
    """
    nx, ny = schatten_norm(x, p), schatten_norm(y, p)
    if nx == 0 or ny == 0:
        raise DomainError("check_mazur_holder needs nonzero inputs")
    x, y = x / nx, y / ny
    num = schatten_norm(mazur_map(x, p, q) - mazur_map(y, p, q), q)
    den = schatten_norm(x - y, p) ** min(1.0, p / q)
    return RatioReport("mazur_holder", num, den, _ratio(num, den))


def _ratio(num, den):
    if den < 1e-14:
        return 0.0 if num < 1e-12 else float("inf")
    return float(num / den)
