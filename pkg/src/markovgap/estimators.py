"""scikit-learn style wrappers.

Estimators are fitted on Markov maps (or pairs of subalgebras) rather than
data matrices; ``transform``/``predict`` act on algebra elements.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .algebra import schatten_norm
from .bounds import forward_bound
from .channels import apply
from .gap import gap_l2, gap_lp
from .sigma import SigmaInstance, equivalence_ratio
from .structure import fixed_point_algebra
from .validation import (
    check_channel,
    check_elements,
    check_exponent,
    check_positive_int,
    check_subalgebra,
)

__all__ = ["FixedPointProjector", "SpectralGapEstimator", "SigmaNormEquivalence"]


class FixedPointProjector(TransformerMixin, BaseEstimator):
    """Learn the fixed-point algebra of a map; ``transform`` removes the fixed part.

    Attributes
    ----------
    subalgebra_ : Subalgebra
    expectation_ : MarkovMap
        Conditional expectation onto ``subalgebra_``.
    """

    def fit(self, X, y=None):
        from .structure import conditional_expectation

        T = check_channel(X)
        self.subalgebra_ = fixed_point_algebra(T)
        self.expectation_ = conditional_expectation(self.subalgebra_)
        return self

    def transform(self, X):
        """``(1 - E_N) x`` for each element."""
        check_is_fitted(self, "subalgebra_")
        xs = check_elements(X, self.subalgebra_.algebra)
        return [x - self.subalgebra_.project(x) for x in xs]


class SpectralGapEstimator(BaseEstimator):
    """Bracket ``[lower, upper]`` for the L_p spectral gap of a Markov map.

    Parameters
    ----------
    p : float
    restarts, max_iters, tol, accelerate
        Passed to :func:`markovgap.gap.gap_lp`.
    random_state : int or None

    Attributes
    ----------
    c2_ : float
        Exact L_2 gap.
    lower_, upper_ : float
    upper_source_ : str or None
    witness_ : AlgebraElement or None
    estimate_ : GapEstimate
    bounds_ : BoundReport or None
    """

    def __init__(self, p=2.0, restarts=20, max_iters=5000, tol=1e-10, random_state=0, accelerate=True):
        self.p = p
        self.restarts = restarts
        self.max_iters = max_iters
        self.tol = tol
        self.random_state = random_state
        self.accelerate = accelerate

    def fit(self, X, y=None):
        T = check_channel(X)
        p = check_exponent(self.p)
        restarts = check_positive_int(self.restarts, "restarts")
        N = fixed_point_algebra(T)
        self.channel_ = T
        self.subalgebra_ = N
        self.c2_ = gap_l2(T, N).lower
        self.estimate_ = gap_lp(T, N, p, restarts=restarts, max_iters=self.max_iters, tol=self.tol,
                                seed=self.random_state, accelerate=self.accelerate)
        self.lower_ = self.estimate_.lower
        self.upper_ = self.estimate_.upper
        self.upper_source_ = self.estimate_.upper_source
        self.witness_ = self.estimate_.witness
        self.bounds_ = forward_bound(self.c2_, p) if self.c2_ < 1 - 1e-12 else None
        return self

    def predict(self, X):
        """Contraction ratios ``||T x||_p / ||x||_p`` of the mean-zero parts of ``X``."""
        check_is_fitted(self, "estimate_")
        xs = check_elements(X, self.channel_.algebra)
        p = float(self.p)
        out = []
        for x in xs:
            x0 = x - self.subalgebra_.project(x)
            n = schatten_norm(x0, p)
            out.append(0.0 if n == 0 else schatten_norm(apply(self.channel_, x0), p) / n)
        return np.array(out)

    def score(self, X, y=None):
        """Largest ratio over ``X`` relative to the fitted lower bound."""
        r = self.predict(X)
        return float(r.max() / self.lower_) if self.lower_ > 0 else float(r.max() == 0)


class SigmaNormEquivalence(BaseEstimator):
    """Worst ratio ``||x||_p / ||x||_{Σ,p}`` for a pair of subalgebras.

    ``fit`` takes a pair ``(A, B)``.

    Attributes
    ----------
    instance_ : SigmaInstance
    report_ : EquivalenceReport
    worst_ratio_, paper_bound_ : float
    """

    def __init__(self, p=2.0, restarts=20, random_state=0):
        self.p = p
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        A, B = X
        A = check_subalgebra(A)
        B = check_subalgebra(B, A.algebra)
        p = check_exponent(self.p)
        self.instance_ = SigmaInstance(A, B)
        self.report_ = equivalence_ratio(self.instance_, p, restarts=check_positive_int(self.restarts, "restarts"),
                                         seed=self.random_state)
        self.worst_ratio_ = self.report_.worst_ratio
        self.paper_bound_ = self.report_.paper_bound
        return self

    def predict(self, X):
        """Ratios ``||x||_p / ||x||_{Σ,p}`` of the mean-zero parts of ``X``."""
        from .sigma import sigma_norm

        check_is_fitted(self, "report_")
        inst = self.instance_
        out = []
        for x in check_elements(X, inst.algebra):
            x0 = x - inst.N.project(x)
            s = sigma_norm(inst, x0, float(self.p))
            out.append(0.0 if s == 0 else schatten_norm(x0, float(self.p)) / s)
        return np.array(out)
