"""
Gaussian limit of i.i.d. qudit models around a full-rank state with
spectrum mu_1 > ... > mu_d.

The diagonal parameters become a classical (d-1)-variate Gaussian with
covariance diag(mu) - mu mu^T, and each off-diagonal pair i < j becomes a
displaced thermal mode. LAM costs are the Holevo bounds of that limit.
"""

from dataclasses import dataclass
import numpy as np

from .gaussian import GaussianShiftModel
from .holevo_exceptions import DegenerateSpectrumError, DomainError
from .model import CostMatrix
from .utils import get_logging, get_tolerance

_logger = get_logging().getLogger(__name__)


@dataclass(frozen=True)
class ThermalMode:
    i: int
    j: int
    shift_scale: float
    thermal_cov: float


@dataclass(frozen=True)
class QuditLimitModel:
    spectrum: np.ndarray
    classical_cov: np.ndarray
    modes: tuple

    @property
    def dim(self) -> int:
        return len(self.spectrum)


def validate_spectrum(mu) -> np.ndarray:
    """
    Returns the spectrum sorted in descending order. Ascending or unsorted
    input is sorted with a warning.
    """
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.size < 2:
        raise DomainError(f"Spectrum needs at least two entries, got {mu.size}")
    if np.any(mu <= 0):
        _logger.error(f"Spectrum {mu} has non-positive entries.")
        raise DomainError("Spectrum must be strictly positive")
    if abs(mu.sum() - 1.0) > 1e-9:
        _logger.error(f"Spectrum sums to {mu.sum()}.")
        raise DomainError(f"Spectrum sums to {mu.sum():.12g}, expected 1")
    if np.any(np.diff(mu) > 0):
        _logger.warning(f"Spectrum {mu} is not descending, sorting it.")
        mu = np.sort(mu)[::-1]
    if (gap := float(np.min(-np.diff(mu)))) <= get_tolerance("degeneracy"):
        _logger.error(f"Spectrum {mu} is degenerate (gap {gap:.3e}).")
        raise DegenerateSpectrumError(f"Spectrum has a degenerate pair (gap {gap:.3e}), no Gaussian limit")
    return mu


def classical_covariance(mu) -> np.ndarray:
    """V_c = diag(mu) - mu mu^T over the first d-1 entries."""
    head = np.asarray(mu, dtype=float)[:-1]
    return np.diag(head) - np.outer(head, head)


def limit_model(mu) -> QuditLimitModel:
    mu = validate_spectrum(mu)
    modes = tuple(
        ThermalMode(
            i=i,
            j=j,
            shift_scale=float(np.sqrt(2.0 / (mu[i] - mu[j]))),
            thermal_cov=float((mu[i] + mu[j]) / (2 * (mu[i] - mu[j]))),
        )
        for i in range(len(mu))
        for j in range(i + 1, len(mu))
    )
    return QuditLimitModel(spectrum=mu, classical_cov=classical_covariance(mu), modes=modes)


def _quantum_weights(quantum_costs, d: int) -> np.ndarray:
    weights = np.asarray(quantum_costs, dtype=float)
    if weights.ndim == 0:
        return np.full((d, d), float(weights))
    if weights.shape != (d, d):
        raise DomainError(f"Quantum cost weights of shape {weights.shape}, expected {(d, d)}")
    return weights


def lam_cost(mu, classical_cost, quantum_costs) -> float:
    """
    Tr(V_c C_c) + sum_{i<j} C_q[i, j] mu_i: the classical Gaussian part plus
    the optimal heterodyne cost mu_i per unit weight of each thermal mode.

    Args:
        mu: spectrum, descending.
        classical_cost: (d-1) x (d-1) cost on the diagonal parameters.
        quantum_costs: scalar or d x d matrix of weights on mode (i, j).
    """
    model = limit_model(mu)
    mu = model.spectrum
    c_c = np.atleast_2d(np.asarray(classical_cost, dtype=float))
    weights = _quantum_weights(quantum_costs, len(mu))
    quantum = sum(weights[m.i, m.j] * mu[m.i] for m in model.modes)
    return float(np.trace(model.classical_cov @ c_c) + quantum)


def frobenius_costs(mu):
    d = len(mu)
    return np.eye(d - 1) + np.ones((d - 1, d - 1)), 2.0


def bures_costs(mu):
    mu = np.asarray(mu, dtype=float)
    return np.linalg.inv(classical_covariance(mu)), 4.0 / (mu[:, None] + mu[None, :])


def lam_frobenius(mu) -> float:
    """sum_i mu_i (1 - mu_i) + 2 sum_i (d - i) mu_i."""
    mu = validate_spectrum(mu)
    return lam_cost(mu, *frobenius_costs(mu))


def lam_bures(mu) -> float:
    """(d - 1) + 4 sum_{i<j} mu_i / (mu_i + mu_j)."""
    mu = validate_spectrum(mu)
    return lam_cost(mu, *bures_costs(mu))


def limit_gaussian_model(mu) -> GaussianShiftModel:
    """
    The limit as a shift model: two parameters per thermal mode (both
    quadratures), then the d-1 classical parameters.
    """
    model = limit_model(mu)
    k = len(model.modes)
    d1 = model.dim - 1
    encoding = np.zeros((2 * k + d1, 2 * k + d1))
    covariance = np.zeros_like(encoding)
    for idx, mode in enumerate(model.modes):
        block = slice(2 * idx, 2 * idx + 2)
        encoding[block, block] = mode.shift_scale * np.eye(2)
        covariance[block, block] = mode.thermal_cov * np.eye(2)
    encoding[2 * k :, 2 * k :] = np.eye(d1)
    covariance[2 * k :, 2 * k :] = model.classical_cov
    return GaussianShiftModel(k, d1, encoding, covariance)


def limit_cost_matrix(mu, classical_cost, quantum_costs) -> CostMatrix:
    """Cost on the parameters of :func:`limit_gaussian_model` matching :func:`lam_cost`."""
    model = limit_model(mu)
    weights = _quantum_weights(quantum_costs, model.dim)
    diag = np.concatenate([[weights[m.i, m.j]] * 2 for m in model.modes]) if model.modes else np.zeros(0)
    k = len(diag)
    g = np.zeros((k + model.dim - 1, k + model.dim - 1))
    g[:k, :k] = np.diag(diag)
    g[k:, k:] = np.atleast_2d(np.asarray(classical_cost, dtype=float))
    return CostMatrix(g)


def heterodyne_variance(mu, i: int, j: int) -> float:
    """Per-quadrature variance of the heterodyne estimate of mode (i, j): mu_i / 2."""
    mu = validate_spectrum(mu)
    if not 0 <= i < j < len(mu):
        raise DomainError(f"Mode ({i}, {j}) needs 0 <= i < j < {len(mu)}")
    mode = next(m for m in limit_model(mu).modes if (m.i, m.j) == (i, j))
    return (mode.thermal_cov + 0.5) / mode.shift_scale**2
