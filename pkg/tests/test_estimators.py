import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from markovgap.algebra import matrix_algebra, schatten_norm
from markovgap.channels import depolarizing, schur_multiplier, transpose_map
from markovgap.ensembles import random_element
from markovgap.estimators import FixedPointProjector, SigmaNormEquivalence, SpectralGapEstimator
from markovgap.exceptions import DomainError, StructureError
from markovgap.structure import diagonal, rotated_diagonal

M2 = matrix_algebra(2)


class TestSpectralGapEstimator:
    def test_params_round_trip(self):
        est = SpectralGapEstimator(p=3, restarts=5)
        assert est.get_params()["p"] == 3
        assert clone(est).get_params() == est.get_params()
        est.set_params(p=4)
        assert est.p == 4

    def test_fit_depolarizing(self):
        est = SpectralGapEstimator(p=3, restarts=4).fit(depolarizing(2, 0.25))
        assert est.c2_ == pytest.approx(0.75)
        assert est.lower_ == pytest.approx(0.75, abs=1e-6)
        assert est.lower_ <= est.upper_ + 1e-7
        assert est.upper_source_ in {"theorem-bound", "hmo-bound", "interpolation-bound"}
        assert est.bounds_.minimum_applicable == est.upper_

    def test_predict_dominated_by_lower(self, rng):
        T = schur_multiplier(np.array([[1, 0.5], [0.5, 1]]))
        est = SpectralGapEstimator(p=1.5, restarts=6).fit(T)
        ratios = est.predict([random_element(M2, rng) for _ in range(20)])
        assert ratios.shape == (20,)
        assert np.all(ratios <= est.lower_ + 1e-9)
        assert est.predict(est.witness_)[0] == pytest.approx(est.lower_, abs=1e-10)
        assert est.score([est.witness_]) == pytest.approx(1, abs=1e-9)

    def test_unfitted(self):
        with pytest.raises(NotFittedError):
            SpectralGapEstimator().predict(M2.identity())

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            SpectralGapEstimator(p=1).fit(depolarizing(2, 0.1))
        with pytest.raises(DomainError):
            SpectralGapEstimator().fit(transpose_map(2))
        with pytest.raises(StructureError):
            SpectralGapEstimator().fit(np.eye(4))
        with pytest.raises(DomainError):
            SpectralGapEstimator(restarts=0).fit(depolarizing(2, 0.1))


class TestFixedPointProjector:
    def test_transform_removes_fixed_part(self, rng):
        T = schur_multiplier(np.array([[1, 0.5], [0.5, 1]]))
        proj = FixedPointProjector().fit(T)
        assert proj.subalgebra_.dim == 2
        x = random_element(M2, rng)
        (y,) = proj.transform(x)
        assert np.allclose(np.diag(y.blocks[0]), 0)

    def test_mismatched_algebra(self):
        proj = FixedPointProjector().fit(depolarizing(2, 0.5))
        with pytest.raises(StructureError):
            proj.transform(matrix_algebra(3).identity())


class TestSigmaNormEquivalence:
    def test_45_degrees(self, rng):
        est = SigmaNormEquivalence(p=2, restarts=6).fit((diagonal(M2), rotated_diagonal(M2, np.pi / 4)))
        assert est.worst_ratio_ <= est.paper_bound_ + 1e-6
        assert est.paper_bound_ == pytest.approx(2)
        r = est.predict([random_element(M2, rng) for _ in range(10)])
        assert np.all(r <= est.worst_ratio_ + 1e-9)

    def test_mismatched(self):
        with pytest.raises(StructureError):
            SigmaNormEquivalence().fit((diagonal(M2), diagonal(matrix_algebra(3))))


def test_witness_norm(rng):
    est = SpectralGapEstimator(p=4, restarts=3).fit(depolarizing(3, 0.6))
    assert schatten_norm(est.witness_, 4) == pytest.approx(1, abs=1e-10)
