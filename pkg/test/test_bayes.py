import unittest
import numpy as np

from holevo_bounds.bayes import (
    CovariantQubitSpec,
    Prior,
    bayes_holevo_asymptotic,
    bayes_lower_multi,
    bayes_lower_multi_gaussian,
    bayes_optimal_single,
    covariant_mixed_estimator,
    covariant_mixed_qubit_cost,
    covariant_pure_qubit_cost,
    van_trees_bound,
)
from holevo_bounds.holevo_exceptions import DomainError, PriorError, VanTreesRefusedError
from holevo_bounds.model import CostMatrix, qubit_bloch_spherical, qubit_phase, qubit_r_theta, state
from holevo_bounds.sim import spin_blocks
from holevo_bounds.spin import spin_operators
from fixtures import HALF_PI


def two_point_brute_force(model, delta: float, grid: int = 181) -> float:
    """Best two-outcome projective measurement with posterior-mean estimates."""
    rhos = [state(model, [-delta]), state(model, [delta])]
    thetas = np.array([-delta, delta])
    best = np.inf
    for polar in np.linspace(0, np.pi, grid):
        for azimuth in np.linspace(0, 2 * np.pi, 2 * grid):
            v = np.array([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)])
            probs = np.array([[np.real(v.conj() @ rho @ v), 1 - np.real(v.conj() @ rho @ v)] for rho in rhos])
            joint = 0.5 * probs
            cost = 0.0
            for k in range(2):
                if (mass := joint[:, k].sum()) <= 1e-15:
                    continue
                guess = joint[:, k] @ thetas / mass
                cost += joint[:, k] @ (thetas - guess) ** 2
            best = min(best, cost)
    return float(best)


def measurement_cost(model, prior: Prior, result) -> float:
    total = 0.0
    for p, t in zip(prior.probabilities, prior.nodes):
        rho = state(model, t)
        outcome = np.real(np.einsum("ak,ab,bk->k", result.measurement.conj(), rho, result.measurement))
        total += p * outcome @ (t[0] - result.estimates) ** 2
    return float(total)


class SingleParameterTest(unittest.TestCase):
    def test_gaussian_prior_identity(self):
        model = qubit_phase(0.8)
        mean, var = 0.2, 0.3
        exact = bayes_optimal_single(model, Prior.gaussian([mean], [[var]])).cost
        via_qfi = bayes_lower_multi_gaussian(model, [mean], [[var]], CostMatrix.identity(1))
        assert abs(exact - via_qfi) <= 1e-7

    def test_cost_below_prior_variance(self):
        model = qubit_phase(0.6)
        for var in (0.05, 0.5, 2.0):
            result = bayes_optimal_single(model, Prior.gaussian([0.0], [[var]]))
            assert 0.0 <= result.cost <= result.prior_variance + 1e-12

    def test_two_point_prior_against_brute_force(self):
        model = qubit_phase(0.9)
        delta = 0.4
        prior = Prior.discrete([[-delta], [delta]], [0.5, 0.5])
        result = bayes_optimal_single(model, prior)
        brute = two_point_brute_force(model, delta)
        assert result.cost <= brute + 1e-9
        assert brute - result.cost <= 1e-3
        assert abs(measurement_cost(model, prior, result) - result.cost) <= 1e-10

    def test_multi_bound_reduces_to_single(self):
        model = qubit_phase(0.7)
        prior = Prior.uniform([-1.0], [1.0], nodes=64)
        single = bayes_optimal_single(model, prior).cost
        assert abs(bayes_lower_multi(model, prior, CostMatrix.identity(1)) - single) <= 1e-10

    def test_multi_parameter_model_rejected(self):
        with self.assertRaises(DomainError):
            bayes_optimal_single(qubit_r_theta(), Prior.gaussian([0.0], [[0.1]]))


class PriorTest(unittest.TestCase):
    def test_gaussian_moments(self):
        prior = Prior.gaussian([0.5, -1.0], [[0.2, 0.05], [0.05, 0.1]], nodes=32)
        assert np.allclose(prior.mean, [0.5, -1.0], atol=1e-8)
        assert np.allclose(prior.covariance, [[0.2, 0.05], [0.05, 0.1]], atol=1e-8)

    def test_uniform_moments(self):
        prior = Prior.uniform([0.0], [2.0], nodes=16)
        assert abs(prior.mean[0] - 1.0) < 1e-12
        assert abs(prior.covariance[0, 0] - 1 / 3) < 1e-12

    def test_unnormalized_rejected(self):
        with self.assertRaises(PriorError):
            Prior.discrete([[0.0], [1.0]], [0.5, 0.6])
        with self.assertRaises(PriorError):
            Prior.uniform([1.0], [0.0])


class VanTreesTest(unittest.TestCase):
    def test_constant_fisher_closed_form(self):
        r, var = 0.8, 0.5
        value = van_trees_bound(qubit_phase(r), Prior.gaussian([0.0], [[var]]), CostMatrix.identity(1))
        assert abs(value - 1 / (r**2 + 1 / var)) <= 1e-8

    def test_below_exact_bayes_cost(self):
        model = qubit_phase(0.8)
        prior = Prior.gaussian([0.1], [[0.4]])
        exact = bayes_optimal_single(model, prior).cost
        assert van_trees_bound(model, prior, CostMatrix.identity(1)) <= exact + 1e-8

    def test_refused_for_flat_prior(self):
        with self.assertRaises(VanTreesRefusedError):
            van_trees_bound(qubit_phase(0.8), Prior.uniform([-1.0], [1.0]), CostMatrix.identity(1))


class HolevoAsymptoticTest(unittest.TestCase):
    def test_two_parameter_bures(self):
        prior = Prior.discrete([[0.5, 1.0]], [1.0])
        value = bayes_holevo_asymptotic(
            qubit_r_theta(), prior, lambda t: CostMatrix.diag([1 / (1 - t[0] ** 2), t[0] ** 2])
        )
        assert abs(value - 2.0) < 1e-9

    def test_three_parameter_bures(self):
        prior = Prior.discrete([[0.3, HALF_PI, 0.0], [0.7, HALF_PI, 0.0]], [0.5, 0.5])
        value = bayes_holevo_asymptotic(
            qubit_bloch_spherical(),
            prior,
            lambda t: CostMatrix.diag([1 / (1 - t[0] ** 2), t[0] ** 2, (t[0] * np.sin(t[1])) ** 2]),
        )
        assert abs(value - 4.0) < 1e-5


class CovariantTest(unittest.TestCase):
    def test_pure_qubit(self):
        assert covariant_pure_qubit_cost(2) == 1.0
        assert abs(covariant_pure_qubit_cost(10) - 1 / 3) < 1e-15
        assert abs(1000 * covariant_pure_qubit_cost(1000) - 4.0) < 1e-2
        with self.assertRaises(DomainError):
            covariant_pure_qubit_cost(0)

    def test_mixed_approaches_asymptote(self):
        exact, asymptotic = covariant_mixed_qubit_cost(CovariantQubitSpec.uniform(100))
        assert abs(100 * asymptotic - 4.0) < 1e-9
        assert abs(100 * exact - 4.0) / 4.0 <= 0.05

    def test_mixed_monotone_in_copies(self):
        costs = [covariant_mixed_qubit_cost(CovariantQubitSpec.uniform(n, nodes=64))[0] for n in range(1, 51)]
        assert np.all(np.diff(costs) <= 1e-12)
        assert 0.0 < costs[-1] < costs[0] <= 2.0

    def test_near_pure_single_copy(self):
        spec = CovariantQubitSpec(1, [1 - 1e-6], [1.0])
        exact, _ = covariant_mixed_qubit_cost(spec)
        assert abs(exact - covariant_pure_qubit_cost(1)) < 1e-3
        assert exact <= covariant_pure_qubit_cost(1) + 1e-12

    def test_single_radius_against_spin_blocks(self):
        r = 0.6
        for n in (1, 2, 3, 4):
            exact, _ = covariant_mixed_qubit_cost(CovariantQubitSpec(n, [r], [1.0]))
            total = 0.0
            for blk in spin_blocks(n, r, 0.0):
                _, _, jz = spin_operators(blk.j)
                mean_jz = float(np.trace(blk.block @ jz).real)
                total += blk.weight * np.sqrt((1 - r**2) + (r * mean_jz / (blk.j + 1)) ** 2)
            assert abs(exact - 2 * (1 - total)) <= 1e-10

    def test_estimator_rows(self):
        rows = covariant_mixed_estimator(CovariantQubitSpec.uniform(6, nodes=64))
        assert rows.shape == (4, 2)
        assert np.allclose(rows[:, 0], [3.0, 2.0, 1.0, 0.0])
        assert np.all((rows[:, 1] >= 0) & (rows[:, 1] <= 1))

    def test_spec_validation(self):
        with self.assertRaises(DomainError):
            CovariantQubitSpec(0, [0.5], [1.0])
        with self.assertRaises(PriorError):
            CovariantQubitSpec(3, [0.5], [0.5])

    def test_quadrature_and_copy_limits(self):
        with self.assertRaises(DomainError):
            covariant_mixed_qubit_cost(CovariantQubitSpec.uniform(10, nodes=32))
        with self.assertRaises(DomainError):
            covariant_mixed_estimator(CovariantQubitSpec.uniform(10, nodes=63))
        with self.assertRaises(DomainError):
            covariant_mixed_qubit_cost(CovariantQubitSpec.uniform(10001))
        exact, _ = covariant_mixed_qubit_cost(CovariantQubitSpec.uniform(10000, nodes=64))
        assert 0.0 < exact < 1e-3
        # explicit radii carry no node count
        exact, _ = covariant_mixed_qubit_cost(CovariantQubitSpec(2, [0.5], [1.0]))
        assert 0.0 < exact <= 2.0
