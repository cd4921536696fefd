"""
Bayesian costs and bounds over quadrature priors.

Priors are finite node sets with quadrature weights and density values, so
every integral over the parameter space is the weighted sum
sum_k weight_k * density_k * f(theta_k).
"""

from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional, Union
import numpy as np
import scipy.special
from numpy.polynomial.legendre import leggauss

from .bounds import sld_set
from .hcr import hcr_bound
from .holevo_exceptions import (
    DomainError,
    InconsistencyError,
    PrecisionError,
    PriorError,
    VanTreesRefusedError,
)
from .matrix import anticomm_solve, eig_hermitian, kernel_weight
from .model import CostMatrix, ParametricModel, evaluate, state
from .spin import allowed_spins, log_block_sums, log_multiplicity
from .utils import (
    get_logging,
    get_tolerance,
    get_quadrature_nodes,
    get_covariant_nodes,
    get_covariant_limits,
)

_logger = get_logging().getLogger(__name__)

# Gaussian priors are truncated at this many standard deviations
_GAUSSIAN_SPAN = 8.0


def _legendre_on(lower: float, upper: float, nodes: int):
    x, w = leggauss(nodes)
    half = (upper - lower) / 2
    return lower + half * (x + 1), half * w


def _tensor_grid(axes):
    points = np.array(list(product(*[a[0] for a in axes])))
    weights = np.prod(np.array(list(product(*[a[1] for a in axes]))), axis=1)
    return points, weights


@dataclass(frozen=True)
class Prior:
    nodes: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    boundary_vanishing: bool = False
    density_grad: Optional[np.ndarray] = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes = nodes.reshape(len(nodes), -1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        density = np.asarray(self.density, dtype=float).reshape(-1)
        if not len(nodes) == len(weights) == len(density):
            raise PriorError(
                f"Prior has {len(nodes)} nodes, {len(weights)} weights and {len(density)} density values"
            )
        if np.any(weights < 0) or np.any(density < 0):
            raise PriorError("Prior weights and density must be non-negative")
        if abs((total := float(weights @ density)) - 1.0) > 1e-6:
            _logger.error(f"Prior integrates to {total}.")
            raise PriorError(f"Prior integrates to {total:.9g}, expected 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "density", density)
        if self.density_grad is not None:
            grad = np.asarray(self.density_grad, dtype=float).reshape(nodes.shape)
            object.__setattr__(self, "density_grad", grad)

    @property
    def param_count(self) -> int:
        return self.nodes.shape[1]

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights * self.density

    @property
    def mean(self) -> np.ndarray:
        return self.probabilities @ self.nodes

    @property
    def covariance(self) -> np.ndarray:
        centered = self.nodes - self.mean
        return (centered * self.probabilities[:, None]).T @ centered

    @staticmethod
    def gaussian(mean, cov, nodes: int = None) -> "Prior":
        """
        Normal prior on a box of +-8 standard deviations per axis, Gauss-Legendre
        nodes per axis. The configured count by default, smaller for p >= 3
        since the tensor grid has nodes^p points.
        """
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        nodes = nodes or get_quadrature_nodes(len(mean))
        chol = np.linalg.cholesky(cov)
        x, w = _tensor_grid([_legendre_on(-_GAUSSIAN_SPAN, _GAUSSIAN_SPAN, nodes)] * len(mean))
        std_density = np.exp(-0.5 * np.sum(x**2, axis=1)) / (2 * np.pi) ** (len(mean) / 2)
        points = mean + x @ chol.T
        det = float(np.prod(np.diag(chol)))
        density = std_density / det
        weights = w * det
        scale = float(weights @ density)
        grad = -np.linalg.solve(cov, (points - mean).T).T * density[:, None] / scale
        return Prior(points, weights, density / scale, boundary_vanishing=True, density_grad=grad)

    @staticmethod
    def uniform(lower, upper, nodes: int = None) -> "Prior":
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if np.any(upper <= lower):
            raise PriorError("Uniform prior needs upper > lower on every axis")
        nodes = nodes or get_quadrature_nodes(len(lower))
        points, weights = _tensor_grid([_legendre_on(lo, hi, nodes) for lo, hi in zip(lower, upper)])
        density = np.full(len(points), 1.0 / float(np.prod(upper - lower)))
        return Prior(points, weights, density, boundary_vanishing=False, density_grad=np.zeros_like(points))

    @staticmethod
    def from_density(
        lower,
        upper,
        density_fn: Callable,
        grad_fn: Callable = None,
        boundary_vanishing: bool = False,
        nodes: int = None,
    ) -> "Prior":
        """Prior with an unnormalized density on a box; normalized by quadrature."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        nodes = nodes or get_quadrature_nodes(len(lower))
        points, weights = _tensor_grid([_legendre_on(lo, hi, nodes) for lo, hi in zip(lower, upper)])
        raw = np.array([float(density_fn(t)) for t in points])
        if (scale := float(weights @ raw)) <= 0:
            raise PriorError("Prior density integrates to zero")
        grad = None
        if grad_fn is not None:
            grad = np.array([np.atleast_1d(grad_fn(t)) for t in points]) / scale
        return Prior(points, weights, raw / scale, boundary_vanishing, grad)

    @staticmethod
    def discrete(points, probabilities) -> "Prior":
        """Finite prior, e.g. the two-point prior at +-delta."""
        points = np.asarray(points, dtype=float)
        probabilities = np.asarray(probabilities, dtype=float)
        return Prior(points.reshape(len(points), -1), np.ones(len(points)), probabilities)

    @staticmethod
    def from_grid(points, density, weights=None) -> "Prior":
        """
        Support grid with density values and optional quadrature weights (unit
        weights by default). The density is rescaled so that weights . density = 1.
        """
        points = np.asarray(points, dtype=float)
        points = points.reshape(len(points), -1)
        density = np.asarray(density, dtype=float).reshape(-1)
        weights = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
        if len(weights) != len(density) or np.any(density < 0) or np.any(weights < 0):
            raise PriorError("Grid prior needs non-negative weights and density, one per point")
        if (total := float(weights @ density)) <= 0:
            raise PriorError("Grid prior density sums to zero")
        if abs(total - 1.0) > 1e-6:
            _logger.warning(f"Grid prior sums to {total:.9g}; rescaling to one.")
        return Prior(points, weights, density / total)

    @staticmethod
    def uniform_sphere(nodes: int = None) -> "Prior":
        """Uniform prior on the Bloch sphere in (theta, phi): density sin(theta) / 4 pi."""
        return Prior.from_density([0.0, 0.0], [np.pi, 2 * np.pi], lambda t: np.sin(t[0]), nodes=nodes)

    @staticmethod
    def radial(w_fn: Callable = None, nodes: int = None) -> "Prior":
        """
        Rotation-invariant prior w(r) dr dOmega in (r, theta, phi), uniform in r
        when w_fn is omitted.
        """
        w_fn = w_fn or (lambda r: 1.0)
        return Prior.from_density(
            [0.0, 0.0, 0.0], [1.0, np.pi, 2 * np.pi], lambda t: float(w_fn(t[0])) * np.sin(t[1]), nodes=nodes
        )


@dataclass(frozen=True)
class BayesSingleResult:
    cost: float
    seed: np.ndarray
    measurement: np.ndarray
    estimates: np.ndarray
    prior_variance: float


@dataclass(frozen=True)
class CovariantQubitSpec:
    n: int
    radii: np.ndarray
    weights: np.ndarray
    # Gauss-Legendre node count when built from a density; None for explicit radii
    nodes: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"Copy count must be at least 1, got {self.n}")
        object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if abs((total := float(np.sum(self.weights))) - 1.0) > 1e-6:
            _logger.error(f"Radial density integrates to {total}.")
            raise PriorError(f"Radial density integrates to {total:.9g}, expected 1")

    @staticmethod
    def from_density(n: int, w_fn: Callable, nodes: int = None, normalize: bool = False) -> "CovariantQubitSpec":
        """
        w(r) on [0, 1] sampled on Gauss-Legendre nodes; weights carry w(r_k) dr.
        With normalize the weights are rescaled to sum to one, for tabulated
        densities whose integral is only approximately one.
        """
        nodes = nodes or get_covariant_nodes()
        radii, quad = _legendre_on(0.0, 1.0, nodes)
        weights = quad * np.array([float(w_fn(r)) for r in radii])
        if normalize:
            if (total := float(weights.sum())) <= 0:
                raise PriorError("Radial density integrates to zero")
            weights = weights / total
        return CovariantQubitSpec(n, radii, weights, nodes)

    @staticmethod
    def uniform(n: int, nodes: int = None) -> "CovariantQubitSpec":
        return CovariantQubitSpec.from_density(n, lambda r: 1.0, nodes)


def _prior_moments(model: ParametricModel, prior: Prior):
    """rho_bar = E[rho_theta] and rho_bar'_i = E[(theta - mean)_i rho_theta]."""
    if prior.param_count != model.param_count:
        raise DomainError(f"Prior over {prior.param_count} parameters for a {model.param_count}-parameter model")
    probs = prior.probabilities
    keep = probs > 0
    states = np.array([state(model, t) for t in prior.nodes[keep]])
    centered = prior.nodes[keep] - prior.mean
    rho_bar = np.einsum("k,kab->ab", probs[keep], states)
    rho_prime = np.einsum("k,ki,kab->iab", probs[keep], centered, states)
    return (rho_bar + rho_bar.conj().T) / 2, (rho_prime + rho_prime.conj().transpose(0, 2, 1)) / 2


def _seed_operators(rho_bar: np.ndarray, rho_prime: np.ndarray) -> np.ndarray:
    seeds = []
    for i, d in enumerate(rho_prime):
        if (weight := kernel_weight(rho_bar, d)) > get_tolerance("anticomm_residual"):
            _logger.error(f"Averaged derivative {i} has weight {weight:.3e} on the kernel of rho_bar.")
            raise InconsistencyError(
                f"rho_bar' has weight {weight:.3e} outside the support of rho_bar, the seed equation has no solution"
            )
        seeds.append(anticomm_solve(rho_bar, d))
    return np.array(seeds)


def bayes_optimal_single(model: ParametricModel, prior: Prior) -> BayesSingleResult:
    """
    Exact minimal Bayesian quadratic cost of a single parameter.

    The seed Lambda solves Lambda rho_bar + rho_bar Lambda = 2 rho_bar', the
    cost is Var(theta) - tr(rho_bar Lambda^2), and the optimal measurement is
    the eigenbasis of Lambda with estimates mean + eigenvalues.

    Returns:
        BayesSingleResult: cost, seed, measurement vectors (columns) and the
        estimate attached to each.
    """
    if model.param_count != 1:
        raise DomainError(f"Single-parameter solution requested for {model.param_count} parameters")
    rho_bar, rho_prime = _prior_moments(model, prior)
    seed = _seed_operators(rho_bar, rho_prime)[0]
    variance = float(prior.covariance[0, 0])
    cost = variance - float(np.trace(rho_bar @ seed @ seed).real)
    vals, vecs = eig_hermitian(seed)
    return BayesSingleResult(
        cost=cost,
        seed=seed,
        measurement=vecs,
        estimates=float(prior.mean[0]) + vals,
        prior_variance=variance,
    )


def bayes_lower_multi(model: ParametricModel, prior: Prior, c: CostMatrix) -> float:
    """trace(C Cov) - trace(C Re tr(rho_bar Lambda Lambda^T)); tight for one parameter only."""
    rho_bar, rho_prime = _prior_moments(model, prior)
    seeds = _seed_operators(rho_bar, rho_prime)
    gram = np.einsum("ab,ibc,jca->ij", rho_bar, seeds, seeds).real
    return float(np.trace(c.g @ prior.covariance) - np.trace(c.g @ gram))


def averaged_family(model: ParametricModel, cov, nodes: int = None) -> ParametricModel:
    """
    theta_0 -> E[rho_theta] under N(theta_0, cov), on the same node layout as
    :meth:`Prior.gaussian`. Derivatives are numeric.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    base = Prior.gaussian(np.zeros(cov.shape[0]), cov, nodes)
    offsets, probs = base.nodes, base.probabilities

    def state_fn(t):
        return np.einsum("k,kab->ab", probs, np.array([model.state_fn(t + o) for o in offsets]))

    return ParametricModel(model.param_count, model.dim, state_fn, None, model.step, name=f"{model.name}_averaged")


def bayes_lower_multi_gaussian(model: ParametricModel, mean, cov, c: CostMatrix, nodes: int = None) -> float:
    """Gaussian-prior form trace(C V) - trace(C V F_Q(rho_bar) V), F_Q of the averaged family at the mean."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    qfi = sld_set(evaluate(averaged_family(model, cov, nodes), mean)).qfi
    return float(np.trace(c.g @ cov) - np.trace(c.g @ cov @ qfi @ cov))


def van_trees_bound(model: ParametricModel, prior: Prior, c: CostMatrix) -> float:
    """trace(C (E[F_Q] + I_prior)^-1), I_prior = E[grad p grad p^T / p^2]."""
    if not prior.boundary_vanishing:
        _logger.error("Van Trees bound requested for a prior that does not vanish on its boundary.")
        raise VanTreesRefusedError("Van Trees bound needs a prior vanishing on the boundary of its support")
    if prior.density_grad is None:
        raise PriorError("Van Trees bound needs the gradient of the prior density")
    keep = prior.probabilities > 0
    mean_qfi = sum(
        p * sld_set(evaluate(model, t)).qfi for p, t in zip(prior.probabilities[keep], prior.nodes[keep])
    )
    grads = prior.density_grad[keep]
    prior_info = (grads * (prior.weights[keep] / prior.density[keep])[:, None]).T @ grads
    return float(np.trace(c.g @ np.linalg.inv(mean_qfi + prior_info)))


def bayes_holevo_asymptotic(
    model: ParametricModel,
    prior: Prior,
    c: Union[CostMatrix, Callable[[np.ndarray], CostMatrix]],
    shortcut: bool = True,
) -> float:
    """
    Prior mean of the Holevo bound, the n -> infinity per-copy constant of the
    Bayesian cost. c may depend on theta.
    """
    total = 0.0
    for p, t in zip(prior.probabilities, prior.nodes):
        if p <= 0:
            continue
        cost = c(t) if callable(c) else c
        total += p * hcr_bound(evaluate(model, t), cost, shortcut=shortcut).value
    return float(total)


def covariant_pure_qubit_cost(n: int) -> float:
    """Optimal covariant fidelity cost 4(1 - (n+1)/(n+2)) for n pure qubit copies."""
    if n < 1:
        raise DomainError(f"Copy count must be at least 1, got {n}")
    return 4.0 / (n + 2)


def _check_covariant(spec: CovariantQubitSpec):
    min_nodes, max_copies = get_covariant_limits()
    if spec.n > max_copies:
        _logger.error(f"Covariant cost asked for n={spec.n} copies.")
        raise DomainError(f"Covariant mixed-qubit cost supports at most {max_copies} copies, got {spec.n}")
    if spec.nodes is not None and spec.nodes < min_nodes:
        _logger.error(f"Covariant radial quadrature has {spec.nodes} nodes.")
        raise DomainError(f"Radial quadrature needs at least {min_nodes} nodes, got {spec.nodes}")


def _covariant_log_terms(spec: CovariantQubitSpec):
    """log v0_j and log vz_j for every allowed spin, by log-domain quadrature."""
    _check_covariant(spec)
    live = spec.weights > 0
    radii, log_w = spec.radii[live], np.log(spec.weights[live])
    log_s0, log_s1 = log_block_sums(spec.n, radii)
    spins = allowed_spins(spec.n)[:, None]
    log_v0 = scipy.special.logsumexp(log_w + 0.5 * np.log1p(-radii**2) + log_s0, axis=1)
    log_vz = scipy.special.logsumexp(log_w + np.log(radii) - np.log(spins + 1) + log_s1, axis=1)
    return allowed_spins(spec.n), log_v0, log_vz


def covariant_mixed_qubit_cost(spec: CovariantQubitSpec):
    """
    Optimal Bayesian fidelity cost of n copies of a mixed qubit under a
    rotation-invariant prior w(r) dr dOmega.

    Returns:
        tuple: (exact cost 2(1 - sum_j m_j sqrt(v0_j^2 + vz_j^2)),
        asymptotic value E_w[3 + 2r] / n)
    """
    spins, log_v0, log_vz = _covariant_log_terms(spec)
    log_m = np.array([log_multiplicity(spec.n, j) for j in spins])
    log_terms = log_m + 0.5 * np.logaddexp(2 * log_v0, 2 * log_vz)
    total = float(np.exp(scipy.special.logsumexp(log_terms)))
    exact = 2.0 * (1.0 - total)
    if not np.isfinite(exact):
        _logger.error(f"Covariant cost is not finite for n={spec.n}.")
        raise PrecisionError(f"Covariant mixed-qubit cost lost precision at n={spec.n}")
    asymptotic = float(spec.weights @ (3 + 2 * spec.radii)) / spec.n
    return exact, asymptotic


def covariant_mixed_estimator(spec: CovariantQubitSpec) -> np.ndarray:
    """
    Radial estimate attached to each total-spin outcome,
    |vz_j| / sqrt(v0_j^2 + vz_j^2).

    Returns:
        np.ndarray: rows (j, r_tilde(j)) for j = n/2 down to 0 or 1/2.
    """
    spins, log_v0, log_vz = _covariant_log_terms(spec)
    estimates = np.exp(log_vz - 0.5 * np.logaddexp(2 * log_v0, 2 * log_vz))
    return np.column_stack([spins, estimates])
