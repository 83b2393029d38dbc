import numpy as np
import pytest

from markovgap.algebra import AlgebraElement, matrix_algebra, schatten_norm
from markovgap.ensembles import random_element
from markovgap.exceptions import DomainError, StructureError
from markovgap.gap import gap_l2
from markovgap.sigma import SigmaInstance, corollary_sweep, equivalence_ratio, sigma_norm
from markovgap.structure import conditional_expectation, diagonal, full, rotated_diagonal, scalars

M2 = matrix_algebra(2)
SZ = AlgebraElement(M2, [np.diag([1.0, -1.0]).astype(complex)])


def rotated_pair(theta):
    return SigmaInstance(diagonal(M2), rotated_diagonal(M2, theta))


def mean_zero(inst, x):
    return x - inst.N.project(x)


class TestSigmaNorm:
    def test_zero(self):
        assert sigma_norm(rotated_pair(0.5), M2.zeros(), 3) == 0

    def test_element_of_A(self):
        inst = rotated_pair(0.5)
        x = SZ
        assert sigma_norm(inst, x, 3) == pytest.approx(schatten_norm(x - inst.B.project(x), 3))

    def test_rejects_non_mean_zero(self):
        with pytest.raises(DomainError):
            sigma_norm(rotated_pair(0.5), M2.identity(), 2)

    def test_projection_arithmetic(self):
        # the 45° preset conjugates the diagonal by a real rotation through 30°
        psi = np.pi / 6
        r = np.array([[np.cos(psi), -np.sin(psi)], [np.sin(psi), np.cos(psi)]])
        projs = [np.outer(r[:, k], r[:, k]) for k in range(2)]
        z = np.diag([1.0, -1.0])
        eb = sum(P @ z @ P for P in projs)
        dev = z - eb
        s = np.linalg.svd(dev, compute_uv=False)
        want = np.sqrt(np.mean(s**2))
        assert sigma_norm(rotated_pair(np.pi / 4), SZ, 2) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(np.sqrt(3) / 2, abs=1e-12)

    @pytest.mark.parametrize("p", [1.5, 2, 3, 4])
    def test_bounded_by_four(self, rng, p):
        inst = rotated_pair(0.7)
        for _ in range(50):
            x = mean_zero(inst, random_element(M2, rng))
            assert sigma_norm(inst, x, p) <= 4 * schatten_norm(x, p) + 1e-10


class TestInstance:
    def test_intersection_scalars(self):
        assert rotated_pair(np.pi / 4).N.dim == 1

    def test_mismatched_algebras(self):
        with pytest.raises(StructureError):
            SigmaInstance(diagonal(M2), diagonal(matrix_algebra(3)))

    def test_gap_symmetry(self):
        for theta in (0.1, 0.5, 1.2):
            inst = rotated_pair(theta)
            assert gap_l2(inst.T, inst.N).lower == pytest.approx(gap_l2(inst.T_reversed, inst.N).lower, abs=1e-10)


class TestEquivalence:
    def test_45_degrees(self):
        rep = equivalence_ratio(rotated_pair(np.pi / 4), 2)
        assert rep.c2 == pytest.approx(0.5, abs=1e-10)
        assert rep.paper_bound == pytest.approx(2, abs=1e-9)
        assert rep.worst_ratio <= 2 + 1e-6
        assert rep.certified and rep.bound_satisfied

    def test_witness_realizes_ratio(self):
        inst = rotated_pair(0.6)
        rep = equivalence_ratio(inst, 3)
        w = rep.witness
        assert schatten_norm(w, 3) / sigma_norm(inst, w, 3) == pytest.approx(rep.worst_ratio, abs=1e-12)

    def test_same_algebra(self):
        # N = A, so every mean-zero x has Σ-norm 2 ||x||_p
        A = diagonal(M2)
        inst = SigmaInstance(A, A)
        rep = equivalence_ratio(inst, 3)
        assert rep.worst_ratio == pytest.approx(0.5, abs=1e-9)
        assert rep.c2 == 0

    def test_failure_direction(self):
        ratios = [equivalence_ratio(rotated_pair(eps), 2).worst_ratio for eps in (0.5, 0.1, 0.01)]
        assert ratios[0] < ratios[1] < ratios[2]

    def test_domain(self):
        with pytest.raises(DomainError):
            equivalence_ratio(rotated_pair(0.5), 1)


class TestSweep:
    def test_45_all_certified(self):
        rep = corollary_sweep(rotated_pair(np.pi / 4), [1.5, 2, 3, 4], restarts=6)
        assert rep.passed and rep.symmetric and rep.all_or_nothing
        assert all(r.equivalence.certified for r in rep.rows)

    def test_same_algebra_trivial(self):
        A = diagonal(M2)
        rep = corollary_sweep(SigmaInstance(A, A), [1.5, 3], restarts=4)
        assert rep.passed
        assert all(r.forward.lower == pytest.approx(0, abs=1e-12) for r in rep.rows)

    def test_nested_pair(self):
        rep = corollary_sweep(SigmaInstance(scalars(M2), full(M2)), [3], restarts=3)
        assert rep.passed
