import unittest
import numpy as np

from holevo_bounds.bounds import (
    compatibility_report,
    d_invariance_check,
    d_invariant_hcr,
    hgm_bound,
    qfi_inverse,
    rld_bound,
    sld_cr_bound,
    sld_parallel_value,
    sld_set,
)
from holevo_bounds.holevo_exceptions import (
    DomainError,
    RldUndefinedError,
    UnidentifiableParameterError,
    UnsupportedError,
)
from holevo_bounds.matrix import IDENTITY_2, SIGMA_X, SIGMA_Z
from holevo_bounds.model import (
    CostMatrix,
    evaluate,
    explicit_point,
    pure_qubit,
    qubit_bloch_cartesian,
    qubit_bloch_spherical,
    qubit_phase,
    qubit_r_theta,
    qudit_gell_mann,
)
from fixtures import HALF_PI, random_point, rng_for, sld_residual


class SldSetTest(unittest.TestCase):
    def test_pure_qubit_qfi(self):
        s = sld_set(evaluate(pure_qubit(), [HALF_PI, 0.0]))
        assert np.allclose(s.qfi, np.eye(2))

    def test_r_theta_qfi(self):
        r = 0.5
        s = sld_set(evaluate(qubit_r_theta(), [r, 1.0]))
        assert np.allclose(s.qfi, np.diag([1 / (1 - r**2), r**2]))

    def test_cartesian_mean_commutators(self):
        r = 0.3
        s = sld_set(evaluate(qubit_bloch_cartesian(), [0.0, 0.0, r]))
        assert abs(s.mean_commutators[0, 1].imag / 2 - r) < 1e-12
        assert abs(s.mean_commutators[1, 2]) < 1e-12
        assert np.allclose(s.mean_commutators, -s.mean_commutators.T)

    def test_sld_equation_holds_on_builtin_models(self):
        rng = rng_for(31)
        draws = [
            (qubit_r_theta(), lambda: [rng.uniform(0.05, 0.95), rng.uniform(0.1, 3.0)]),
            (qubit_bloch_spherical(), lambda: [rng.uniform(0.05, 0.95), rng.uniform(0.1, 3.0), rng.uniform(-3, 3)]),
            (qubit_bloch_cartesian(), lambda: rng.uniform(-0.5, 0.5, size=3)),
            (pure_qubit(), lambda: [rng.uniform(0.1, 3.0), rng.uniform(-3, 3)]),
        ]
        for model, draw in draws:
            for _ in range(50):
                pt = evaluate(model, draw())
                s = sld_set(pt)
                assert sld_residual(pt.rho, s.slds, pt.grads) <= 1e-9
                assert np.allclose(s.qfi, s.qfi.T)
                assert np.linalg.eigvalsh(s.qfi)[0] >= -1e-10


class SldBoundTest(unittest.TestCase):
    def test_pure_qubit(self):
        s = sld_set(evaluate(pure_qubit(), [HALF_PI, 0.0]))
        assert abs(sld_cr_bound(s, CostMatrix.identity(2)) - 2.0) < 1e-10

    def test_r_theta(self):
        r = 0.5
        s = sld_set(evaluate(qubit_r_theta(), [r, HALF_PI]))
        assert abs(sld_cr_bound(s, CostMatrix.diag([1.0, r**2])) - 1.75) < 1e-10

    def test_cartesian_at_center(self):
        s = sld_set(evaluate(qubit_bloch_cartesian(), [0.0, 0.0, 0.0]))
        assert abs(sld_cr_bound(s, CostMatrix.identity(3)) - 3.0) < 1e-10

    def test_unidentifiable(self):
        pt = explicit_point(IDENTITY_2 / 2, [SIGMA_X / 2, np.zeros((2, 2))])
        with self.assertRaises(UnidentifiableParameterError):
            qfi_inverse(sld_set(pt), CostMatrix.identity(2))

    def test_kernel_free_cost_is_accepted(self):
        pt = explicit_point(IDENTITY_2 / 2, [SIGMA_X / 2, np.zeros((2, 2))])
        assert abs(sld_cr_bound(sld_set(pt), CostMatrix.diag([1.0, 0.0])) - 1.0) < 1e-10

    def test_size_mismatch(self):
        s = sld_set(evaluate(qubit_r_theta(), [0.5, 1.0]))
        with self.assertRaises(DomainError):
            sld_cr_bound(s, CostMatrix.identity(3))


class RldBoundTest(unittest.TestCase):
    def test_cartesian_matches_closed_form(self):
        for r in (0.1, 0.5, 0.9):
            pt = evaluate(qubit_bloch_cartesian(), [0.0, 0.0, r])
            assert abs(rld_bound(pt, CostMatrix.identity(3)) - (2 + (1 - r**2) + 2 * r)) < 1e-9

    def test_single_parameter_not_below_sld(self):
        pt = evaluate(qubit_phase(0.6), [0.3])
        c = CostMatrix.identity(1)
        assert rld_bound(pt, c) >= sld_cr_bound(sld_set(pt), c) - 1e-10

    def test_pure_state_undefined(self):
        with self.assertRaises(RldUndefinedError):
            rld_bound(evaluate(pure_qubit(), [HALF_PI, 0.0]), CostMatrix.identity(2))


class CompatibilityTest(unittest.TestCase):
    def test_r_theta_commutes(self):
        r = 0.5
        s = sld_set(evaluate(qubit_r_theta(), [r, 1.0]))
        report = compatibility_report(s, CostMatrix.diag([1.0, r**2]))
        assert report.commutators_vanish
        assert report.predicts_hcr_equals_sld

    def test_pure_qubit_incompatible(self):
        s = sld_set(evaluate(pure_qubit(), [HALF_PI, 0.0]))
        report = compatibility_report(s, CostMatrix.identity(2))
        assert not report.commutators_vanish
        assert not report.predicts_hcr_equals_sld
        assert report.cost_full_rank

    def test_rank_one_cost(self):
        s = sld_set(evaluate(pure_qubit(), [HALF_PI, 0.0]))
        report = compatibility_report(s, CostMatrix.rank_one([1.0, 2.0]))
        assert report.cost_rank_one
        assert report.predicts_hcr_equals_sld


class DInvarianceTest(unittest.TestCase):
    def test_cartesian_is_invariant(self):
        result = d_invariance_check(evaluate(qubit_bloch_cartesian(), [0.0, 0.0, 0.4]))
        assert result.invariant
        assert result.sld_span_dim == 3

    def test_r_theta_is_not(self):
        result = d_invariance_check(evaluate(qubit_r_theta(), [0.5, 1.0]))
        assert not result.invariant
        assert result.span_dim > result.sld_span_dim

    def test_commuting_single_parameter(self):
        pt = explicit_point(np.diag([0.75, 0.25]), [SIGMA_Z / 2])
        assert d_invariance_check(pt).invariant

    def test_pure_state_unsupported(self):
        with self.assertRaises(UnsupportedError):
            d_invariance_check(evaluate(pure_qubit(), [HALF_PI, 0.0]))

    def test_closed_form_holevo(self):
        r = 0.5
        pt = evaluate(qubit_bloch_cartesian(), [0.0, 0.0, r])
        value = d_invariant_hcr(pt, CostMatrix.identity(3))
        assert abs(value - (2 + (1 - r**2) + 2 * r)) < 1e-9
        with self.assertRaises(UnsupportedError):
            d_invariant_hcr(evaluate(qubit_r_theta(), [r, 1.0]), CostMatrix.identity(2))

    def test_parallel_value_bounds_sld(self):
        rng = rng_for(32)
        for _ in range(20):
            s = sld_set(random_point(3, 2, rng))
            c = CostMatrix.identity(2)
            assert sld_parallel_value(s, c) >= sld_cr_bound(s, c) - 1e-10


class HgmBoundTest(unittest.TestCase):
    def test_r_theta(self):
        r = 0.6
        s = sld_set(evaluate(qubit_r_theta(), [r, 1.0]))
        assert abs(hgm_bound(s, CostMatrix.diag([1.0, r**2])) - 3.24) < 1e-10

    def test_three_parameter_bures(self):
        r = 0.5
        s = sld_set(evaluate(qubit_bloch_spherical(), [r, HALF_PI, 0.0]))
        assert abs(hgm_bound(s, CostMatrix.diag([1 / (1 - r**2), r**2, r**2])) - 9.0) < 1e-9

    def test_near_pure_limit(self):
        r = 1 - 1e-9
        s = sld_set(evaluate(qubit_r_theta(), [r, 1.0]))
        assert abs(hgm_bound(s, CostMatrix.diag([1.0, r**2])) - 1.0) < 1e-3

    def test_qutrit_rejected(self):
        m = qudit_gell_mann(3)
        s = sld_set(evaluate(m, np.zeros(m.param_count)))
        with self.assertRaises(DomainError):
            hgm_bound(s, CostMatrix.identity(m.param_count))
