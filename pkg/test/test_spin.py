import unittest
import numpy as np
import scipy.special

from holevo_bounds.holevo_exceptions import DomainError
from holevo_bounds.matrix import IDENTITY_2, SIGMA_X, SIGMA_Z
from holevo_bounds.sim import spin_blocks
from holevo_bounds.spin import (
    allowed_spins,
    block_log_weights,
    block_spectrum,
    dense_block_decomposition,
    log_block_sums,
    log_block_terms,
    log_multiplicity,
    magnetic_numbers,
    spin_operators,
)


def bloch_rho(r: float, theta: float) -> np.ndarray:
    return (IDENTITY_2 + r * (np.sin(theta) * SIGMA_X + np.cos(theta) * SIGMA_Z)) / 2


def multiplicity(n: int, j: float) -> int:
    return int(round(np.exp(log_multiplicity(n, j))))


class SpinOperatorsTest(unittest.TestCase):
    def test_commutation_and_casimir(self):
        for j in (0.5, 1.0, 1.5, 3.0):
            jx, jy, jz = spin_operators(j)
            assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
            assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(int(2 * j + 1)))

    def test_spin_half_is_half_pauli(self):
        jx, _, jz = spin_operators(0.5)
        assert np.allclose(jx, SIGMA_X / 2)
        assert np.allclose(jz, SIGMA_Z / 2)

    def test_invalid_spin(self):
        with self.assertRaises(DomainError):
            spin_operators(0.3)

    def test_allowed_spins(self):
        assert np.allclose(allowed_spins(4), [2.0, 1.0, 0.0])
        assert np.allclose(allowed_spins(5), [2.5, 1.5, 0.5])
        assert np.allclose(magnetic_numbers(1.0), [1.0, 0.0, -1.0])

    def test_dimension_count(self):
        for n in range(1, 12):
            total = sum(multiplicity(n, j) * (2 * j + 1) for j in allowed_spins(n))
            assert total == 2**n


class BlockWeightsTest(unittest.TestCase):
    def test_two_qubits(self):
        r = 0.6
        weights = np.exp(block_log_weights(2, r))
        assert np.allclose(weights, [(3 + r**2) / 4, (1 - r**2) / 4])

    def test_weights_sum_to_one(self):
        for n in (1, 7, 50, 400):
            for r in (0.0, 0.3, 0.99, 1.0):
                assert abs(scipy.special.logsumexp(block_log_weights(n, r))) < 1e-9

    def test_pure_state_lives_in_top_block(self):
        weights = np.exp(block_log_weights(6, 1.0))
        assert abs(weights[0] - 1.0) < 1e-12
        assert np.allclose(weights[1:], 0.0)

    def test_radius_out_of_range(self):
        with self.assertRaises(DomainError):
            block_log_weights(4, 1.5)


class DenseOracleTest(unittest.TestCase):
    def test_blocks_match_brute_force(self):
        for n in range(2, 7):
            for r, theta in ((0.4, 0.0), (0.7, 1.1)):
                dense = dense_block_decomposition(n, bloch_rho(r, theta))
                for blk in spin_blocks(n, r, theta):
                    weight, vals = dense[blk.j]
                    mult = multiplicity(n, blk.j)
                    assert abs(weight - blk.weight) < 1e-10
                    expected = np.sort(np.repeat(np.linalg.eigvalsh(blk.block), mult) / mult)
                    assert np.allclose(vals, expected, atol=1e-10)

    def test_rotation_moves_z_to_x(self):
        n, r = 4, 0.5
        flat = spin_blocks(n, r, 0.0)
        turned = spin_blocks(n, r, np.pi / 2)
        for a, b in zip(flat, turned):
            jx, _, jz = spin_operators(a.j)
            assert abs(np.trace(a.block @ jz) - np.trace(b.block @ jx)) < 1e-10
            assert abs(np.trace(b.block).real - 1.0) < 1e-12


class ClosedFormSumsTest(unittest.TestCase):
    def test_against_direct_sums(self):
        radii = np.array([0.05, 0.3, 0.8, 0.97])
        for n in (3, 10, 41):
            log_s0, log_s1 = log_block_sums(n, radii)
            for k, j in enumerate(allowed_spins(n)):
                m = magnetic_numbers(j)
                for col, r in enumerate(radii):
                    terms = log_block_terms(n, j, r)
                    assert abs(log_s0[k, col] - scipy.special.logsumexp(terms)) < 1e-9
                    if j > 0:
                        direct = np.log(np.sum(m * np.exp(terms)))
                        assert abs(log_s1[k, col] - direct) < 1e-7

    def test_block_spectrum_normalized(self):
        spec = block_spectrum(8, 3.0, 0.4)
        assert abs(spec.sum() - 1.0) < 1e-12
        assert np.all(np.diff(spec) < 0)

    def test_radius_must_be_interior(self):
        with self.assertRaises(DomainError):
            log_block_sums(4, [0.0, 0.5])
        with self.assertRaises(DomainError):
            log_block_sums(4, 1.0)
