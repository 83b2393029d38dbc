import numpy as np
import pytest

from markovgap.algebra import AlgebraElement, absolute_value, commutative_algebra, matrix_algebra, schatten_norm
from markovgap.channels import (
    adjoint,
    amplify_2x2,
    apply,
    build_channel,
    choi_matrix,
    compose,
    depolarizing,
    fourier_multiplier,
    identity_channel,
    kraus_channel,
    random_unitary_channel,
    schur_multiplier,
    stochastic_kernel,
    transpose_map,
    validate_markov,
)
from markovgap.ensembles import random_channel, random_element, random_self_adjoint
from markovgap.exceptions import DomainError, StructureError
from markovgap.structure import conditional_expectation, diagonal, rotated_diagonal, scalars

M2 = matrix_algebra(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def el(m, alg=M2):
    return AlgebraElement(alg, [np.asarray(m, dtype=complex)])


def brute_choi(T):
    """Choi matrix assembled entry by entry from matrix-unit images."""
    n = T.algebra.size
    C = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n))
            e[i, j] = 1
            C[i * n:(i + 1) * n, j * n:(j + 1) * n] = apply(T, el(e, T.algebra)).blocks[0]
    return C


class TestValidation:
    def test_depolarizing_valid(self):
        T = depolarizing(2, 0.5)
        assert T.valid
        # direct check of the three conditions on a basis
        assert apply(T, M2.identity()).allclose(M2.identity(), 1e-12)
        for x in M2.basis():
            assert np.trace(apply(T, x).blocks[0]) == pytest.approx(np.trace(x.blocks[0]), abs=1e-12)
        assert np.linalg.eigvalsh(brute_choi(T)).min() > -1e-12

    def test_transpose_not_cp(self):
        rep = validate_markov(transpose_map(2))
        assert not rep.valid
        assert "Choi not PSD" in rep.reason
        assert rep.min_choi_eigenvalue == pytest.approx(-1, abs=1e-12)
        assert np.linalg.eigvalsh(brute_choi(transpose_map(2))).min() == pytest.approx(-1)

    def test_schur_valid(self):
        assert schur_multiplier(np.array([[1, 0.3], [0.3, 1]])).valid

    def test_schur_not_psd(self):
        T = schur_multiplier(np.array([[1, 1.5], [1.5, 1]]))
        assert not T.valid and "mask not PSD" in T.validation.reason

    def test_identity_residuals_zero(self):
        rep = identity_channel(M2).validation
        assert rep.unital_residual == 0 and rep.trace_residual == 0

    def test_nonunital_kraus(self):
        T = kraus_channel([np.diag([1.0, 0.5])], M2)
        assert not T.valid and not T.validation.unital

    def test_choi_matches_brute_force(self, rng):
        T = random_channel(3, rng)
        assert np.allclose(choi_matrix(T), brute_choi(T), atol=1e-12)


class TestApply:
    def test_depolarizing_on_traceless(self, rng):
        x = random_element(M2, rng)
        x = x - M2.identity() * (np.trace(x.blocks[0]) / 2)
        assert apply(depolarizing(2, 0.3), x).allclose(x * 0.7, 1e-12)

    def test_schur_on_matrix_unit(self):
        s = np.array([[1, 0.3], [0.3, 1]])
        e12 = el([[0, 1], [0, 0]])
        assert apply(schur_multiplier(s), e12).allclose(e12 * 0.3, 1e-14)

    def test_stochastic_kernel(self):
        T = stochastic_kernel(np.array([[0.75, 0.25], [0.25, 0.75]]))
        x = T.algebra.from_function([1.0, -1.0])
        assert apply(T, x).allclose(T.algebra.from_function([0.5, -0.5]), 1e-14)

    def test_structured_agrees_with_transfer(self, rng):
        for n in (2, 3):
            T = random_channel(n, rng)
            x = random_element(T.algebra, rng)
            assert T.apply_structured(x).allclose(apply(T, x), 1e-12)

    def test_fourier_multiplier_coefficients(self):
        mu = np.array([0.5, 0.3, 0.0, 0.2])
        T = fourier_multiplier(mu)
        assert T.valid
        # characters of Z_4 are eigenvectors with eigenvalues given by the DFT of mu
        coeffs = np.fft.fft(mu)
        for k in range(4):
            chi = np.exp(2j * np.pi * k * np.arange(4) / 4)
            img = np.array([b[0, 0] for b in apply(T, T.algebra.from_function(chi)).blocks])
            lam = img[0] / chi[0]
            assert np.allclose(img, lam * chi)
            assert abs(lam) == pytest.approx(abs(coeffs[k]))


class TestCompose:
    def test_identity_left(self, rng):
        T = random_channel(2, rng)
        S = compose(identity_channel(M2), T)
        assert np.allclose(S.transfer, T.transfer)

    def test_nested_expectations(self):
        S = compose(conditional_expectation(diagonal(M2)), conditional_expectation(scalars(M2)))
        assert np.allclose(S.transfer, conditional_expectation(scalars(M2)).transfer, atol=1e-14)

    def test_two_masas(self):
        from markovgap.structure import fixed_point_algebra

        T = compose(conditional_expectation(diagonal(M2)), conditional_expectation(rotated_diagonal(M2, np.pi / 4)))
        assert T.valid
        assert fixed_point_algebra(T).dim == 1

    def test_composition_keeps_factors(self):
        A, B = depolarizing(2, 0.1), depolarizing(2, 0.2)
        assert compose(A, B).data == (A, B)

    def test_mismatched_algebras(self):
        with pytest.raises(StructureError):
            compose(depolarizing(2, 0.1), depolarizing(3, 0.1))


class TestAdjoint:
    def test_depolarizing_self_adjoint(self):
        T = depolarizing(3, 0.4)
        assert np.allclose(adjoint(T).transfer, T.transfer, atol=1e-14)

    def test_schur_conjugates(self):
        s = np.array([[1, 0.2 + 0.3j], [0.2 - 0.3j, 1]])
        assert np.allclose(adjoint(schur_multiplier(s)).transfer, schur_multiplier(s.conj()).transfer)

    def test_stochastic_transposes(self):
        P = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
        assert np.allclose(adjoint(stochastic_kernel(P)).transfer, stochastic_kernel(P.T).transfer)

    def test_involution(self, rng):
        T = random_channel(3, rng)
        assert np.allclose(adjoint(adjoint(T)).transfer, T.transfer)

    def test_pairing(self, rng):
        from markovgap.algebra import inner_product

        T = random_channel(2, rng)
        x, y = random_element(M2, rng), random_element(M2, rng)
        assert inner_product(apply(adjoint(T), y), x) == pytest.approx(inner_product(y, apply(T, x)), abs=1e-12)


class TestContractivity:
    @pytest.mark.parametrize("p", [1, 1.5, 2, 3, 4, np.inf])
    def test_lp_contraction(self, rng, p):
        for _ in range(10):
            T = random_channel(int(rng.integers(2, 4)), rng)
            x = random_element(T.algebra, rng)
            assert schatten_norm(apply(T, x), p) <= schatten_norm(x, p) + 1e-9

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_normal_element_monotonicity(self, rng, q):
        for _ in range(10):
            T = random_channel(2, rng)
            u = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
            y = el(u @ np.diag(rng.standard_normal(2) + 1j * rng.standard_normal(2)) @ u.conj().T)
            assert schatten_norm(apply(T, y), q) <= schatten_norm(apply(T, absolute_value(y)), q) + 1e-9


class TestBuildChannel:
    def test_depolarizing(self):
        T = build_channel({"kind": "depolarizing", "n": 2, "lambda": 0.5, "id": "d"})
        assert T.valid and T.label == "d"

    def test_random_unitary(self):
        T = build_channel({"kind": "random_unitary", "unitaries": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]],
                           "weights": [0.5, 0.5]})
        assert T.valid

    def test_complex_entries(self):
        T = build_channel({"kind": "schur", "mask": [[1, [0, 0.5]], [[0, -0.5], 1]]})
        assert T.valid

    def test_transpose_invalid(self):
        assert not build_channel({"kind": "transpose", "n": 2}).valid

    def test_composition(self):
        T = build_channel({"kind": "composition", "n": 2, "factors": [
            {"kind": "conditional_expectation", "subalgebra": "diagonal"},
            {"kind": "conditional_expectation", "subalgebra": "rotated-diagonal(45)"},
        ]})
        assert T.valid and T.kind == "composition"

    @pytest.mark.parametrize("spec", [
        {"kind": "nope"},
        {},
        {"kind": "schur", "mask": [[1, 2, 3], [1, 2]]},
        {"kind": "schur", "mask": "eye"},
        {"kind": "kraus", "operators": []},
        {"kind": "stochastic", "kernel": [[1, [0, 1]], [0, 1]]},
        {"kind": "depolarizing"},
    ])
    def test_malformed(self, spec):
        with pytest.raises(StructureError):
            build_channel(spec)

    def test_depolarizing_range(self):
        with pytest.raises(DomainError):
            depolarizing(2, 1.5)


def test_amplification_is_markov(rng):
    T = random_channel(2, rng)
    A = amplify_2x2(T)
    assert A.valid
    x = random_self_adjoint(M2, rng)
    from markovgap.algebra import embed_2x2

    assert apply(A, embed_2x2(x)).allclose(embed_2x2(apply(T, x)), 1e-12)


def test_random_unitary_weights():
    with pytest.raises(DomainError):
        random_unitary_channel([np.eye(2), SX], [1.2, -0.2], M2)
    # weights off the simplex give a report, not an exception
    T = random_unitary_channel([np.eye(2), SX], [0.5, 0.6], M2)
    assert not T.valid and not T.validation.unital
