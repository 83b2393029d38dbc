"""Property-based checks of algebraic and analytic invariants."""
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from markovgap.algebra import (
    TracialAlgebra,
    dual_exponent,
    duality_map,
    embed_2x2,
    inner_product,
    mazur_map,
    negative_part,
    positive_part,
    schatten_norm,
)
from markovgap.bounds import check_ando, check_pbig, check_psmall, forward_bound
from markovgap.channels import adjoint, apply
from markovgap.ensembles import random_channel, random_element, random_positive, random_self_adjoint
from markovgap.gap import gap_l2, gap_lp
from markovgap.structure import conditional_expectation, fixed_point_algebra

seeds = st.integers(0, 2**32 - 1)
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0])
open_exponents = st.floats(1.05, 6.0)


@st.composite
def algebras(draw):
    k = draw(st.integers(1, 3))
    dims = draw(st.lists(st.integers(1, 3), min_size=k, max_size=k))
    w = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=k, max_size=k)))
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return TracialAlgebra(tuple(zip(dims, w.tolist())))


@given(algebras(), seeds, exponents, exponents)
def test_norm_monotone_in_p(alg, seed, p, q):
    x = random_element(alg, np.random.default_rng(seed))
    lo, hi = min(p, q), max(p, q)
    assert schatten_norm(x, lo) <= schatten_norm(x, hi) * (1 + 1e-12)


@given(algebras(), seeds, exponents, exponents)
def test_mazur_norm_identity(alg, seed, p, q):
    x = random_element(alg, np.random.default_rng(seed))
    assert schatten_norm(mazur_map(x, p, q), q) == pytest.approx(schatten_norm(x, p) ** (p / q), rel=1e-10)


@given(algebras(), seeds, exponents, exponents)
def test_mazur_round_trip(alg, seed, p, q):
    x = random_element(alg, np.random.default_rng(seed))
    assert mazur_map(mazur_map(x, p, q), q, p).allclose(x, 1e-8 * max(1, schatten_norm(x, np.inf)))


@given(algebras(), seeds, exponents)
def test_disjoint_support_additivity(alg, seed, p):
    x = random_self_adjoint(alg, np.random.default_rng(seed))
    lhs = schatten_norm(x, p) ** p
    rhs = schatten_norm(positive_part(x), p) ** p + schatten_norm(negative_part(x), p) ** p
    assert lhs == pytest.approx(rhs, rel=1e-10)


@given(algebras(), seeds, exponents)
def test_difference_of_positives(alg, seed, p):
    rng = np.random.default_rng(seed)
    a, b = random_positive(alg, rng, True), random_positive(alg, rng, True)
    assert schatten_norm(a - b, p) ** p <= (schatten_norm(a, p) ** p + schatten_norm(b, p) ** p) * (1 + 1e-10)


@given(algebras(), seeds, open_exponents)
def test_duality_map(alg, seed, p):
    x = random_element(alg, np.random.default_rng(seed))
    j = duality_map(x, p)
    assert inner_product(j, x).real == pytest.approx(schatten_norm(x, p), rel=1e-10)
    assert schatten_norm(j, dual_exponent(p)) == pytest.approx(1, abs=1e-10)


@given(algebras(), seeds, exponents)
def test_embed_preserves_norm(alg, seed, p):
    x = random_element(alg, np.random.default_rng(seed))
    y = embed_2x2(x)
    assert y.is_self_adjoint()
    assert schatten_norm(y, p) == pytest.approx(schatten_norm(x, p), rel=1e-12)


@given(seeds, st.sampled_from([2, 3]))
def test_transfer_agrees_with_structure(seed, n):
    rng = np.random.default_rng(seed)
    T = random_channel(n, rng)
    x = random_element(T.algebra, rng)
    assert T.apply_structured(x).allclose(apply(T, x), 1e-12)
    assert np.allclose(adjoint(adjoint(T)).transfer, T.transfer, atol=1e-14)


@given(seeds, st.sampled_from([2, 3]))
def test_expectation_commutes(seed, n):
    T = random_channel(n, np.random.default_rng(seed))
    N = fixed_point_algebra(T)
    E = conditional_expectation(N)
    assert E.valid
    assert np.allclose(E.transfer @ E.transfer, E.transfer, atol=1e-12)
    assert np.abs(T.transfer @ E.transfer - E.transfer @ T.transfer).max() <= 1e-9


@given(seeds, st.floats(1.01, 2.0), st.floats(1.0, 5.0), st.floats(1.0, 6.0), st.floats(2.01, 8.0))
def test_inequalities(seed, p_small, alpha, p_big, p_ando):
    rng = np.random.default_rng(seed)
    T = random_channel(2, rng)
    alg = T.algebra
    x = random_positive(alg, rng, True)
    assert check_psmall(T, x, p_small).passed
    assert check_pbig(T, x, alpha, p_big).passed
    assert check_ando(x, random_positive(alg, rng, True), p_ando).passed


@given(st.floats(0, 0.9999), st.floats(0, 0.9999), st.floats(1.05, 10))
def test_forward_bound_monotone(a, b, p):
    lo, hi = sorted((a, b))
    assert forward_bound(lo, p).minimum_applicable <= forward_bound(hi, p).minimum_applicable + 1e-12
    assert forward_bound(lo, p).thm21_final <= forward_bound(hi, p).thm21_final + 1e-12


@given(seeds, st.sampled_from([1.3, 1.5, 3.0, 4.0]))
def test_bracket_soundness(seed, p):
    T = random_channel(2, np.random.default_rng(seed))
    c2 = gap_l2(T).lower
    assume(c2 < 1 - 1e-6)
    est = gap_lp(T, p=p, restarts=4, seed=seed)
    assert est.lower <= forward_bound(c2, p).minimum_applicable + 1e-7
