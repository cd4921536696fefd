import unittest
import numpy as np

from holevo_bounds.common import HcrMethod
from holevo_bounds.gaussian import (
    GaussianShiftModel,
    gaussian_hcr,
    gaussian_qfi,
    gaussian_rld_bound,
    gaussian_sld_bound,
    linear_estimator_cost,
    optimal_linear_measurement,
    qp_model,
    qubit_matched_models,
    symplectic_form,
)
from holevo_bounds.holevo_exceptions import (
    DomainError,
    InjectivityError,
    RldUndefinedError,
    SingularCovarianceError,
    SymmetryViolationError,
    UncertaintyViolationError,
)
from holevo_bounds.model import CostMatrix
from fixtures import random_cost, rng_for


def random_gaussian_model(rng, q_modes: int, c_vars: int, p: int) -> GaussianShiftModel:
    r_dim = 2 * q_modes + c_vars
    w = rng.normal(size=(r_dim, r_dim))
    cov = 0.5 * np.eye(r_dim) + 0.3 * w @ w.T
    encoding = rng.normal(size=(r_dim, p))
    return GaussianShiftModel(q_modes, c_vars, encoding, cov)


class MatchedModelsTest(unittest.TestCase):
    def test_values_against_qubit_columns(self):
        for r in (0.2, 0.5, 0.8):
            for c in (0.5, 1.0, 2.0):
                models = qubit_matched_models(r)
                costs = {
                    "theta_phi": CostMatrix.identity(2),
                    "r_theta": CostMatrix.diag([1.0, c]),
                    "r_theta_phi": CostMatrix.diag([1.0, 1.0, c]),
                }
                expected = {
                    "theta_phi": (2.0, 4.0),
                    "r_theta": (1 + c * (1 - r**2), 1 + c * (1 - r**2)),
                    "r_theta_phi": (2 + c * (1 - r**2), 2 + c * (1 - r**2) + 2 * r),
                }
                for name, g in models.items():
                    sld, hcr = expected[name]
                    assert abs(gaussian_sld_bound(g, costs[name]) - sld) < 1e-9, name
                    assert abs(gaussian_hcr(g, costs[name]).value - hcr) < 1e-5, name

    def test_methods(self):
        models = qubit_matched_models(0.5)
        assert gaussian_hcr(models["theta_phi"], CostMatrix.identity(2)).method == HcrMethod.closed_form
        assert gaussian_hcr(models["r_theta"], CostMatrix.identity(2)).method == HcrMethod.sdp

    def test_radius_out_of_range(self):
        with self.assertRaises(DomainError):
            qubit_matched_models(0.0)


class HcrTest(unittest.TestCase):
    def test_sdp_agrees_with_closed_form(self):
        rng = rng_for(61)
        for q_modes, c_vars in ((1, 0), (1, 1), (2, 0)):
            p = 2 * q_modes + c_vars
            g = random_gaussian_model(rng, q_modes, c_vars, p)
            c = random_cost(p, rng)
            closed = gaussian_hcr(g, c, HcrMethod.closed_form).value
            sdp = gaussian_hcr(g, c, HcrMethod.sdp).value
            assert abs(closed - sdp) <= 1e-6 * (1 + closed)

    def test_rld_equals_hcr_for_square_encoding(self):
        rng = rng_for(62)
        for q_modes, c_vars in ((1, 0), (1, 1), (1, 2), (2, 0)):
            p = 2 * q_modes + c_vars
            g = random_gaussian_model(rng, q_modes, c_vars, p)
            c = random_cost(p, rng)
            hcr = gaussian_hcr(g, c).value
            assert abs(gaussian_rld_bound(g, c) - hcr) <= 1e-8 * (1 + hcr)

    def test_bound_ordering_for_tall_encoding(self):
        rng = rng_for(63)
        for _ in range(5):
            g = random_gaussian_model(rng, 1, 1, 2)
            c = random_cost(2, rng)
            res = gaussian_hcr(g, c)
            sld = gaussian_sld_bound(g, c)
            assert sld - 1e-6 <= res.value <= 2 * sld + 1e-6
            assert np.allclose(res.b_matrix @ g.encoding, np.eye(2), atol=1e-7)
            assert abs(res.sdp_value - res.value) <= 1e-5 * (1 + res.value)

    def test_qfi_of_vacuum(self):
        g = qp_model(0.5, 0.5)
        assert np.allclose(gaussian_qfi(g), 2 * np.eye(2))

    def test_linear_cost_of_identity_estimator(self):
        g = qp_model(0.5, 0.5)
        assert abs(linear_estimator_cost(g, CostMatrix.identity(2), np.eye(2)) - 2.0) < 1e-12


class MeasurementTest(unittest.TestCase):
    def test_saturates_matched_models(self):
        r, c = 0.5, 1.0
        models = qubit_matched_models(r)
        costs = {
            "theta_phi": CostMatrix.identity(2),
            "r_theta": CostMatrix.diag([1.0, c]),
            "r_theta_phi": CostMatrix.diag([1.0, 1.0, c]),
        }
        for name, g in models.items():
            m = optimal_linear_measurement(g, costs[name])
            assert abs(m.cost - gaussian_hcr(g, costs[name]).value) <= 1e-5, name
            assert not m.regularized

    def test_saturates_random_square_models(self):
        rng = rng_for(64)
        shapes = ((1, 0), (1, 1), (2, 0), (1, 2))
        for k in range(50):
            q_modes, c_vars = shapes[k % len(shapes)]
            p = 2 * q_modes + c_vars
            g = random_gaussian_model(rng, q_modes, c_vars, p)
            c = random_cost(p, rng)
            m = optimal_linear_measurement(g, c)
            assert abs(m.cost - gaussian_hcr(g, c).value) <= 1e-7 * max(1.0, m.cost)
            assert m.full_ancilla_cov is not None

    def test_ancilla_satisfies_uncertainty(self):
        g = qubit_matched_models(0.5)["theta_phi"]
        m = optimal_linear_measurement(g, CostMatrix.identity(2))
        low = np.linalg.eigvalsh(m.ancilla_cov - 0.5j * m.ancilla_symplectic)[0]
        assert low >= -1e-9

    def test_singular_cost_is_regularized(self):
        g = qubit_matched_models(0.5)["theta_phi"]
        m = optimal_linear_measurement(g, CostMatrix.diag([1.0, 0.0]))
        assert m.regularized


class ValidationTest(unittest.TestCase):
    def test_uncertainty_violation(self):
        with self.assertRaises(UncertaintyViolationError):
            GaussianShiftModel(1, 0, np.eye(2), 0.1 * np.eye(2))

    def test_injectivity(self):
        with self.assertRaises(InjectivityError):
            GaussianShiftModel(1, 0, np.array([[1.0, 2.0], [0.5, 1.0]]), np.eye(2))

    def test_shape_mismatch(self):
        with self.assertRaises(DomainError):
            GaussianShiftModel(1, 1, np.eye(2), np.eye(2))

    def test_asymmetric_covariance(self):
        with self.assertRaises(SymmetryViolationError):
            GaussianShiftModel(1, 0, np.eye(2), np.array([[1.0, 0.3], [0.0, 1.0]]))

    def test_singular_covariance(self):
        g = GaussianShiftModel(0, 1, np.array([[1.0]]), np.array([[0.0]]))
        with self.assertRaises(SingularCovarianceError):
            gaussian_sld_bound(g, CostMatrix.identity(1))

    def test_pure_state_rld(self):
        with self.assertRaises(RldUndefinedError):
            gaussian_rld_bound(qp_model(0.5, 0.5), CostMatrix.identity(2))

    def test_closed_form_needs_square_encoding(self):
        g = qubit_matched_models(0.5)["r_theta"]
        with self.assertRaises(DomainError):
            gaussian_hcr(g, CostMatrix.identity(2), HcrMethod.closed_form)

    def test_symplectic_form(self):
        s = symplectic_form(1, 1)
        assert np.allclose(s, [[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
