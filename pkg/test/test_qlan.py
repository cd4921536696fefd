import unittest
import numpy as np

from holevo_bounds.bounds import rld_bound
from holevo_bounds.gaussian import gaussian_hcr
from holevo_bounds.hcr import hcr_bound
from holevo_bounds.holevo_exceptions import DegenerateSpectrumError, DomainError
from holevo_bounds.model import CostMatrix, evaluate, qubit_bloch_cartesian
from holevo_bounds.qlan import (
    heterodyne_variance,
    lam_bures,
    lam_cost,
    lam_frobenius,
    limit_cost_matrix,
    limit_gaussian_model,
    limit_model,
    validate_spectrum,
)
from fixtures import rng_for


def qubit_spectrum(r: float):
    return [(1 + r) / 2, (1 - r) / 2]


def random_spectrum(rng, d: int) -> np.ndarray:
    return np.sort(rng.dirichlet(np.ones(d)))[::-1]


class QubitLimitTest(unittest.TestCase):
    def test_bures_closed_form(self):
        for r in (0.1, 0.5, 0.9):
            assert abs(lam_bures(qubit_spectrum(r)) - (3 + 2 * r)) < 1e-12

    def test_frobenius_is_half_the_euclidean_bound(self):
        for r in (0.2, 0.5, 0.8):
            pt = evaluate(qubit_bloch_cartesian(), [0.0, 0.0, r])
            euclidean = rld_bound(pt, CostMatrix.identity(3))
            assert abs(lam_frobenius(qubit_spectrum(r)) - euclidean / 2) < 1e-10

    def test_frobenius_matches_holevo_sdp(self):
        r = 0.5
        pt = evaluate(qubit_bloch_cartesian(), [0.0, 0.0, r])
        euclidean = hcr_bound(pt, CostMatrix.identity(3)).value
        assert abs(lam_frobenius(qubit_spectrum(r)) - euclidean / 2) < 1e-6


class QuditLimitTest(unittest.TestCase):
    def test_bures_sandwich(self):
        rng = rng_for(71)
        for d in (2, 3, 4, 5):
            for _ in range(10):
                value = lam_bures(random_spectrum(rng, d))
                assert d**2 - 1 - 1e-9 <= value <= (d - 1) * (2 * d + 1) + 1e-9

    def test_frobenius_formula(self):
        mu = np.array([0.5, 0.3, 0.2])
        d = len(mu)
        expected = np.sum(mu * (1 - mu)) + 2 * np.sum((d - 1 - np.arange(d)) * mu)
        assert abs(lam_frobenius(mu) - expected) < 1e-12

    def test_gaussian_limit_attains_lam_cost(self):
        rng = rng_for(72)
        for d in (2, 3):
            mu = random_spectrum(rng, d)
            g = rng.normal(size=(d - 1, d - 1))
            classical = g @ g.T + 0.1 * np.eye(d - 1)
            weights = rng.uniform(0.5, 2.0, size=(d, d))
            expected = lam_cost(mu, classical, weights)
            model = limit_gaussian_model(mu)
            value = gaussian_hcr(model, limit_cost_matrix(mu, classical, weights)).value
            assert abs(value - expected) <= 1e-8 * (1 + expected)

    def test_mode_structure(self):
        model = limit_model([0.5, 0.3, 0.2])
        assert [(m.i, m.j) for m in model.modes] == [(0, 1), (0, 2), (1, 2)]
        assert model.classical_cov.shape == (2, 2)
        for m in model.modes:
            assert m.thermal_cov >= 0.5

    def test_heterodyne_variance(self):
        mu = [0.5, 0.3, 0.2]
        assert abs(heterodyne_variance(mu, 0, 2) - 0.25) < 1e-12
        assert abs(heterodyne_variance(mu, 1, 2) - 0.15) < 1e-12
        with self.assertRaises(DomainError):
            heterodyne_variance(mu, 2, 1)


class SpectrumValidationTest(unittest.TestCase):
    def test_degenerate(self):
        with self.assertRaises(DegenerateSpectrumError):
            lam_bures([0.5, 0.5])
        with self.assertRaises(DegenerateSpectrumError):
            limit_model([0.4, 0.3, 0.3])

    def test_ascending_input_is_sorted(self):
        assert np.allclose(validate_spectrum([0.2, 0.8]), [0.8, 0.2])
        assert abs(lam_bures([0.25, 0.75]) - lam_bures([0.75, 0.25])) < 1e-12

    def test_invalid_entries(self):
        with self.assertRaises(DomainError):
            validate_spectrum([1.0, 0.0])
        with self.assertRaises(DomainError):
            validate_spectrum([0.6, 0.6])
        with self.assertRaises(DomainError):
            validate_spectrum([1.0])

    def test_quantum_weight_shape(self):
        with self.assertRaises(DomainError):
            lam_cost([0.7, 0.3], [[1.0]], np.ones((3, 3)))
