import dataclasses

import numpy as np
import pytest

from markovgap.algebra import AlgebraElement, TracialAlgebra, commutative_algebra, matrix_algebra, schatten_norm
from markovgap.channels import (
    apply,
    compose,
    depolarizing,
    identity_channel,
    random_unitary_channel,
    schur_multiplier,
    stochastic_kernel,
    transpose_map,
)
from markovgap.ensembles import random_channel, random_element, random_positive
from markovgap.exceptions import DomainError, StructureError, UnsupportedChannelError
from markovgap.structure import (
    InnerAutomorphism,
    Subalgebra,
    birkhoff_decomposition,
    build_dilation,
    commutant,
    conditional_expectation,
    diagonal,
    fixed_point_algebra,
    full,
    generate_subalgebra,
    intersection,
    principal_cosines,
    rotated_diagonal,
    scalars,
    subalgebra_from_spec,
    verify_factorization,
)

M2, M3, M4 = matrix_algebra(2), matrix_algebra(3), matrix_algebra(4)


def el(m, alg):
    return AlgebraElement(alg, [np.asarray(m, dtype=complex)])


def kron_subalgebra(alg, left: bool):
    """M_2 ⊗ 1 (left) or 1 ⊗ M_2 inside M_4."""
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    e = np.eye(2)
    return generate_subalgebra(alg, [el(np.kron(s, e) if left else np.kron(e, s), alg) for s in paulis])


class TestSubalgebra:
    def test_rejects_non_closed_basis(self):
        v = el([[0, 1], [0, 0]], M2).vector()
        basis = np.stack([M2.identity().vector(), v], axis=1)
        with pytest.raises(StructureError):
            Subalgebra(M2, basis)

    def test_generate_empty_is_scalars(self):
        assert generate_subalgebra(M2, []).dim == 1

    def test_generate_distinct_eigenvalues_gives_diagonal(self):
        S = generate_subalgebra(M2, [el(np.diag([1, 2]), M2)])
        assert S.dim == 2
        assert S.contains(el(np.diag([5, -1]), M2))

    def test_generate_matrix_unit_gives_all(self):
        assert generate_subalgebra(M2, [el([[0, 1], [0, 0]], M2)]).dim == 4

    def test_closure_residuals_small(self):
        for S in (scalars(M3), diagonal(M3), full(M3), rotated_diagonal(M2, 0.3), kron_subalgebra(M4, True)):
            res = S.closure_residuals()
            assert max(res.values()) < 1e-9

    def test_presets(self):
        assert subalgebra_from_spec("diagonal", M3).dim == 3
        assert subalgebra_from_spec("rotated-diagonal(45)", M2).dim == 2
        assert subalgebra_from_spec("rotated-diagonal(0.5 rad)", M2).dim == 2
        with pytest.raises(StructureError):
            subalgebra_from_spec("diagonal(3)", M2)
        with pytest.raises(StructureError):
            subalgebra_from_spec("rotated-diagonal", M2)
        with pytest.raises(StructureError):
            subalgebra_from_spec(42, M2)

    def test_rotated_diagonal_correlation(self):
        # E_D E_B on trace-zero elements has L2 norm cos(theta)^2
        from markovgap.gap import gap_l2

        for theta in (0.2, np.pi / 4, 1.0):
            T = compose(conditional_expectation(diagonal(M2)), conditional_expectation(rotated_diagonal(M2, theta)))
            assert gap_l2(T).lower == pytest.approx(np.cos(theta) ** 2, abs=1e-12)


class TestConditionalExpectation:
    def test_scalars(self, rng):
        x = random_element(M3, rng)
        E = conditional_expectation(scalars(M3))
        assert apply(E, x).allclose(M3.identity() * (np.trace(x.blocks[0]) / 3), 1e-12)

    def test_diagonal(self, rng):
        x = random_element(M2, rng)
        E = conditional_expectation(diagonal(M2))
        assert apply(E, x).allclose(el(np.diag(np.diag(x.blocks[0])), M2), 1e-12)

    def test_full(self, rng):
        x = random_element(M2, rng)
        assert apply(conditional_expectation(full(M2)), x).allclose(x, 1e-12)

    def test_partial_trace(self, rng):
        # onto M_2 ⊗ 1 the expectation is the normalized partial trace
        S = kron_subalgebra(M4, True)
        x = random_element(M4, rng)
        m = x.blocks[0].reshape(2, 2, 2, 2)
        pt = np.einsum("ikjk->ij", m) / 2
        assert apply(conditional_expectation(S), x).allclose(el(np.kron(pt, np.eye(2)), M4), 1e-12)

    @pytest.mark.parametrize("make", [lambda: scalars(M3), lambda: diagonal(M3), lambda: kron_subalgebra(M4, False)])
    def test_markov_idempotent_bimodule(self, rng, make):
        S = make()
        E = conditional_expectation(S)
        assert E.valid
        assert np.allclose(E.transfer @ E.transfer, E.transfer, atol=1e-12)
        elems = S.elements()
        a = sum((rng.standard_normal() * e for e in elems), S.algebra.zeros())
        b = sum((rng.standard_normal() * e for e in elems), S.algebra.zeros())
        x = random_element(S.algebra, rng)
        assert apply(E, a @ x @ b).allclose(a @ apply(E, x) @ b, 1e-9)

    @pytest.mark.parametrize("p", [2.5, 3, 4])
    def test_contraction_on_positive(self, rng, p):
        for S in (scalars(M3), diagonal(M3)):
            a = random_positive(M3, rng)
            assert schatten_norm(a - S.project(a), p) <= schatten_norm(a, p) + 1e-9


class TestFixedPoints:
    def test_depolarizing(self):
        assert fixed_point_algebra(depolarizing(2, 0.5)).dim == 1

    def test_schur(self):
        s = np.array([[1, 0.3, 0.5j], [0.3, 1, 0.2], [-0.5j, 0.2, 1]])
        N = fixed_point_algebra(schur_multiplier(s))
        assert N.dim == 3
        assert N.contains(el(np.diag([1, 2, 3]), M3))

    def test_identity(self):
        alg = TracialAlgebra(((2, 0.5), (1, 0.5)))
        assert fixed_point_algebra(identity_channel(alg)).dim == 5

    def test_commutes_with_channel(self, rng):
        for _ in range(5):
            T = random_channel(3, rng)
            E = conditional_expectation(fixed_point_algebra(T))
            assert np.abs(T.transfer @ E.transfer - E.transfer @ T.transfer).max() < 1e-9

    def test_unitary_conjugation(self):
        # x -> u x u* with u = diag(1, i): fixed points are the diagonal
        T = random_unitary_channel([np.diag([1, 1j])], [1.0], M2)
        assert fixed_point_algebra(T).dim == 2


class TestIntersection:
    def test_two_masas(self):
        N = intersection(diagonal(M2), rotated_diagonal(M2, np.pi / 4))
        assert N.dim == 1

    def test_nested(self):
        assert intersection(diagonal(M3), full(M3)).dim == 3

    def test_principal_cosines(self):
        c = principal_cosines(diagonal(M2), rotated_diagonal(M2, np.pi / 4))
        # identity is shared; the trace-zero parts meet with correlation 1/2
        assert c[0] == pytest.approx(1)
        assert c[1] == pytest.approx(0.5, abs=1e-12)

    def test_commutant(self):
        assert commutant(diagonal(M3)).dim == 3
        assert commutant(scalars(M3)).dim == 9
        assert commutant(kron_subalgebra(M4, True)).dim == 4


class TestDilation:
    def test_unitary_mixture(self):
        u = np.array([[0, 1], [1, 0]])
        T = random_unitary_channel([u, np.eye(2)], [0.5, 0.5], M2)
        cert = build_dilation(T)
        assert cert.n_branches == 2
        assert cert.weights == pytest.approx((0.5, 0.5))
        assert verify_factorization(cert, T).passed

    def test_birkhoff_kernel(self):
        T = stochastic_kernel(np.array([[0.75, 0.25], [0.25, 0.75]]))
        cert = build_dilation(T)
        assert sorted(cert.weights) == pytest.approx([0.25, 0.75])
        assert sorted(br.perm.tolist() for br in cert.branches) == [[0, 1], [1, 0]]
        assert verify_factorization(cert, T).passed

    def test_birkhoff_reconstructs(self, rng):
        for _ in range(5):
            n = 4
            D = sum(w * np.eye(n)[rng.permutation(n)] for w in rng.dirichlet(np.ones(5)))
            terms = birkhoff_decomposition(D)
            rebuilt = sum(c * np.eye(n)[perm] for c, perm in terms)
            assert np.allclose(rebuilt, D, atol=1e-12)
            assert sum(c for c, _ in terms) == pytest.approx(1)

    def test_birkhoff_rejects(self):
        with pytest.raises(DomainError):
            birkhoff_decomposition(np.array([[0.5, 0.6], [0.5, 0.4]]))

    def test_diagonal_expectation_two_branches(self):
        T = conditional_expectation(diagonal(M2))
        cert = build_dilation(T)
        assert cert.n_branches == 2
        assert verify_factorization(cert, T).passed
        # E_diag(x) = (x + z x z) / 2
        x = el([[1, 2], [3, 4]], M2)
        z = el(np.diag([1, -1]), M2)
        assert apply(T, x).allclose((x + z @ x @ z) * 0.5, 1e-12)

    @pytest.mark.parametrize("make", [
        lambda: diagonal(M3),
        lambda: scalars(M3),
        lambda: kron_subalgebra(M4, True),
        lambda: kron_subalgebra(M4, False),
        lambda: rotated_diagonal(M2, 0.4),
        lambda: generate_subalgebra(M3, [el(np.diag([1, 0, 0]), M3), el([[0, 0, 0], [0, 0, 1], [0, 0, 0]], M3)]),
    ])
    def test_twirl_expectations(self, make):
        T = conditional_expectation(make())
        cert = build_dilation(T)
        assert verify_factorization(cert, T).passed

    def test_composition_certificate(self):
        T = compose(conditional_expectation(diagonal(M2)), conditional_expectation(rotated_diagonal(M2, 0.7)))
        cert = build_dilation(T)
        assert cert.n_branches == 4
        assert verify_factorization(cert, T).passed

    def test_non_unitary_branch_fails(self):
        T = depolarizing(2, 0.5)
        cert = build_dilation(T)
        bad = InnerAutomorphism(el(np.diag([1, 0.5]), M2))
        broken = dataclasses.replace(cert, branches=(bad,) + cert.branches[1:])
        rep = verify_factorization(broken, T)
        assert rep.homomorphism_residual > 1e-3 and not rep.passed

    def test_wrong_weights_fail(self):
        T = random_unitary_channel([np.eye(2), np.array([[0, 1], [1, 0]])], [0.5, 0.5], M2)
        cert = build_dilation(T)
        broken = dataclasses.replace(cert, weights=(0.6, 0.6))
        rep = verify_factorization(broken, T)
        assert rep.trace_residual > 1e-3 and not rep.passed

    def test_unsupported(self):
        with pytest.raises(UnsupportedChannelError):
            build_dilation(schur_multiplier(np.array([[1, 0.3], [0.3, 1]])))

    def test_invalid_map(self):
        with pytest.raises(DomainError):
            build_dilation(transpose_map(2))

    def test_homomorphism_on_random_products(self, rng):
        T = depolarizing(3, 0.4)
        cert = build_dilation(T)
        x, y = random_element(M3, rng), random_element(M3, rng)
        assert cert.represent(x @ y).allclose(cert.represent(x) @ cert.represent(y), 1e-10)
        assert cert.expectation(cert.represent(x)).allclose(apply(T, x), 1e-10)
        assert cert.expectation(cert.embed(x)).allclose(x, 1e-12)
