"""
Measurement simulation: POVMs, classical Fisher information, local qubit
strategies and the collective n-copy strategy on the (r, theta) qubit model.

Random numbers come from Philox streams keyed by the run seed; chunk k of a
run uses the stream jumped k times, so results do not depend on how chunks
are scheduled across threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional
import numpy as np
import scipy.linalg
import scipy.optimize

from .bounds import sld_set
from .common import RadialEstimator
from .holevo_exceptions import (
    DomainError,
    PrecisionError,
    SingularModelError,
    UnidentifiableParameterError,
)
from .matrix import IDENTITY_2, PAULIS, check_hermitian, eigvals_hermitian, pinv_sqrt_psd
from .model import CostMatrix, ModelPoint
from .spin import allowed_spins, block_log_weights, block_spectrum, spin_operators
from .utils import (
    get_logging,
    get_default_seed,
    get_min_trials,
    get_sim_chunk_size,
    get_thread_cap,
)

_logger = get_logging().getLogger(__name__)

_ZERO_PROBABILITY = 1e-12
_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class Povm:
    elements: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        elements = np.array([check_hermitian(e, tol=1e-10) for e in self.elements])
        for k, e in enumerate(elements):
            if (low := float(eigvals_hermitian(e)[0])) < -1e-10:
                _logger.error(f"POVM element {k} has eigenvalue {low:.3e}.")
                raise DomainError(f"POVM element {k} is not positive semidefinite (eigenvalue {low:.3e})")
        dim = elements.shape[1]
        if (dev := float(np.max(np.abs(elements.sum(axis=0) - np.eye(dim))))) > 1e-9:
            _logger.error(f"POVM elements sum to identity only within {dev:.3e}.")
            raise DomainError(f"POVM is not complete: max |sum M - I| = {dev:.3e}")
        labels = tuple(self.labels) or tuple(str(k) for k in range(len(elements)))
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("ab,kba->k", rho, self.elements).real


@dataclass(frozen=True)
class SpinBlockState:
    n: int
    j: float
    block: np.ndarray
    weight: float


@dataclass(frozen=True)
class LocalStrategyResult:
    fisher: np.ndarray
    cost: float
    weights: np.ndarray


@dataclass(frozen=True)
class CollectiveRunResult:
    n: int
    r: float
    mean_cost: float
    stderr: float
    expected: float
    trials: int
    estimator: RadialEstimator


def make_rng(seed: Optional[int] = None, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by seed, jumped `stream` times."""
    bit_generator = np.random.Philox(key=get_default_seed() if seed is None else int(seed))
    if stream:
        bit_generator = bit_generator.jumped(stream)
    return np.random.Generator(bit_generator)


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        if axis not in _AXES:
            raise DomainError(f"Unknown axis '{axis}', expected one of {_AXES}")
        return _AXES.index(axis)
    return int(axis)


def pauli_povm(axis) -> Povm:
    """Projective measurement of sigma_axis, outcomes +1 then -1."""
    k = _axis_index(axis)
    sigma = PAULIS[k]
    return Povm(
        np.array([(IDENTITY_2 + sigma) / 2, (IDENTITY_2 - sigma) / 2]),
        (f"{_AXES[k]}+", f"{_AXES[k]}-"),
    )


def weighted_axis_povm(weights) -> Povm:
    """sigma_x, sigma_y, sigma_z measured with probabilities weights, as one POVM."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (3,) or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
        raise DomainError(f"Axis weights must be three non-negative numbers summing to 1, got {weights}")
    elements, labels = [], []
    for k, w in enumerate(weights):
        if w > 0:
            axis = pauli_povm(k)
            elements.extend(w * axis.elements)
            labels.extend(axis.labels)
    return Povm(np.array(elements), tuple(labels))


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> Povm:
    """M_k = S^-1/2 G_k S^-1/2 for random positive G_k with S = sum_k G_k."""
    gs = []
    for _ in range(outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gs.append(g @ g.conj().T)
    root = pinv_sqrt_psd(sum(gs))
    return Povm(np.array([root @ g @ root for g in gs]))


def classical_fisher(povm: Povm, pt: ModelPoint) -> np.ndarray:
    """
    F_ij = sum_m d_i p_m d_j p_m / p_m for p_m = tr(rho M_m). Outcomes with
    vanishing probability are dropped when their gradient vanishes too.
    """
    if povm.dim != pt.dim:
        raise DomainError(f"POVM of dimension {povm.dim} for a state of dimension {pt.dim}")
    probs = povm.probabilities(pt.rho)
    grads = np.einsum("iab,kba->ki", pt.grads, povm.elements).real
    fisher = np.zeros((pt.param_count, pt.param_count))
    for label, p, dp in zip(povm.labels, probs, grads):
        if p <= _ZERO_PROBABILITY:
            if np.max(np.abs(dp)) > 1e-9:
                _logger.error(f"Outcome {label} has zero probability and gradient {dp}.")
                raise SingularModelError(f"Outcome {label} has zero probability but nonzero gradient")
            _logger.warning(f"Dropping outcome {label} with probability {p:.3e}.")
            continue
        fisher += np.outer(dp, dp) / p
    return fisher


def _fisher_cost(fisher: np.ndarray, c: CostMatrix) -> float:
    vals = np.linalg.eigvalsh(fisher)
    if vals[0] <= 1e-12 * max(vals[-1], 1e-300):
        return np.inf
    return float(np.trace(c.g @ np.linalg.inv(fisher)))


def weighted_local_strategy(pt: ModelPoint, c: CostMatrix, weights=None) -> LocalStrategyResult:
    """
    Randomly measures sigma_k with probability p_k. With weights given the cost
    trace(C F(p)^-1) is evaluated; otherwise p is optimized. When the per-axis
    Fisher matrices have mutually orthogonal ranges the optimum is
    p_k ~ sqrt(trace(C F_k^+)).
    """
    if pt.dim != 2:
        raise DomainError(f"Local Pauli strategies need a qubit model, got dimension {pt.dim}")
    per_axis = [classical_fisher(pauli_povm(k), pt) for k in range(3)]
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        fisher = sum(w * f for w, f in zip(weights, per_axis))
        return LocalStrategyResult(fisher, _fisher_cost(fisher, c), weights)

    active = [k for k in range(3) if np.max(np.abs(per_axis[k])) > 1e-12]
    separable = all(np.max(np.abs(per_axis[a] @ per_axis[b])) < 1e-10 for a in active for b in active if a < b)
    if separable:
        a = np.zeros(3)
        for k in active:
            a[k] = max(float(np.trace(c.g @ np.linalg.pinv(per_axis[k], hermitian=True))), 0.0)
        weights = np.sqrt(a) / np.sum(np.sqrt(a)) if a.sum() > 0 else np.full(3, 1.0 / 3)
    else:
        result = scipy.optimize.minimize(
            lambda w: min(_fisher_cost(sum(wk * f for wk, f in zip(w, per_axis)), c), 1e12),
            np.full(3, 1.0 / 3),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * 3,
            constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1.0}],
        )
        weights = np.clip(result.x, 0.0, 1.0)
        weights = weights / weights.sum()
    fisher = sum(w * f for w, f in zip(weights, per_axis))
    if not np.isfinite(cost := _fisher_cost(fisher, c)):
        raise UnidentifiableParameterError("Pauli measurements leave a parameter without information")
    return LocalStrategyResult(fisher, cost, weights)


def spin_blocks(n: int, r: float, theta: float) -> list:
    """
    rho^{(x) n} for the Bloch vector r (sin theta, 0, cos theta) as blocks
    U diag(l+^(n/2+m) l-^(n/2-m)) U^dagger, U = exp(-i theta J_y), with
    weights p_{n,j}.
    """
    if n < 1:
        raise DomainError(f"Copy count must be at least 1, got {n}")
    log_weights = block_log_weights(n, r)
    weights = np.exp(log_weights - np.logaddexp.reduce(log_weights))
    blocks = []
    for j, w in zip(allowed_spins(n), weights):
        _, jy, _ = spin_operators(j)
        u = scipy.linalg.expm(-1j * theta * jy)
        block = (u * block_spectrum(n, j, r)) @ u.conj().T
        blocks.append(SpinBlockState(n=n, j=float(j), block=block, weight=float(w)))
    if abs(sum(b.weight for b in blocks) - 1.0) > 1e-9:
        raise PrecisionError(f"Spin block weights of n={n}, r={r} do not sum to one")
    return blocks


@dataclass(frozen=True)
class _BlockTable:
    j: float
    weight: float
    radial_score: float
    outcome_probs: np.ndarray
    angle_scores: np.ndarray
    angle_fisher: float


def _block_tables(n: int, r: float) -> list:
    """Per-block data at theta = 0; the J_x measurement is rotated with the state."""
    lam_plus, lam_minus = (1 + r) / 2, (1 - r) / 2
    log_weights = block_log_weights(n, r)
    weights = np.exp(log_weights - np.logaddexp.reduce(log_weights))
    tables = []
    for j, w in zip(allowed_spins(n), weights):
        jx, jy, _ = spin_operators(j)
        m = j - np.arange(len(jx))
        spectrum = block_spectrum(n, j, r)
        radial = float(spectrum @ ((n / 2 + m) / (2 * lam_plus) - (n / 2 - m) / (2 * lam_minus)))
        _, xvecs = np.linalg.eigh(jx)
        diag = np.diag(spectrum).astype(complex)
        derivative = -1j * (jy @ diag - diag @ jy)
        probs = np.einsum("ak,a,ak->k", xvecs.conj(), spectrum, xvecs).real
        dprobs = np.einsum("ak,ab,bk->k", xvecs.conj(), derivative, xvecs).real
        live = probs > _ZERO_PROBABILITY
        scores = np.where(live, dprobs / np.where(live, probs, 1.0), 0.0)
        probs = np.clip(probs, 0.0, None)
        tables.append(
            _BlockTable(
                j=float(j),
                weight=float(w),
                radial_score=radial,
                outcome_probs=probs / probs.sum(),
                angle_scores=scores,
                angle_fisher=float(np.sum(probs[live] * scores[live] ** 2)),
            )
        )
    return tables


def _radial_estimates(tables, n: int, r: float, estimator: RadialEstimator) -> np.ndarray:
    if estimator == RadialEstimator.total_spin:
        return np.array([min(max(2 * t.j / n, 0.0), 1.0) for t in tables])
    fisher = sum(t.weight * t.radial_score**2 for t in tables)
    if fisher <= 1e-300:
        raise DomainError(f"Total spin carries no information about r at n={n}")
    return np.array([r + t.radial_score / fisher for t in tables])


def _angle_fisher(tables) -> float:
    fisher = sum(t.weight * t.angle_fisher for t in tables)
    if fisher <= 1e-300:
        raise DomainError("The rotated J_x measurement carries no information about theta")
    return fisher


@dataclass(frozen=True)
class _Outcomes:
    """Flat outcome table: probability and estimation errors of each outcome."""

    probs: np.ndarray
    radial_errors: np.ndarray
    angle_errors: np.ndarray

    def costs(self, r: float, c: float) -> np.ndarray:
        return c * self.radial_errors**2 + r**2 * self.angle_errors**2

    def expected(self, n: int, r: float, c: float) -> float:
        return float(n * self.probs @ self.costs(r, c))


def _block_outcomes(n: int, r: float, estimator: RadialEstimator) -> _Outcomes:
    tables = _block_tables(n, r)
    radial = _radial_estimates(tables, n, r, estimator)
    angle_fisher = _angle_fisher(tables)
    probs = np.concatenate([t.weight * t.outcome_probs for t in tables])
    return _Outcomes(
        probs=probs / probs.sum(),
        radial_errors=np.concatenate([np.full(len(t.outcome_probs), est - r) for t, est in zip(tables, radial)]),
        angle_errors=np.concatenate([t.angle_scores / angle_fisher for t in tables]),
    )


def _single_copy_outcomes(r: float, c: float) -> _Outcomes:
    """
    One copy has no total-spin information on r. The locally unbiased
    replacement measures the radial axis with probability w and the tangential
    axis otherwise, w = a/(a + 1) with a = sqrt(c (1 - r^2)), which gives
    E[cost] = (a + 1)^2, the HGM bound of the (r, theta) model.

    Outcome order: radial +, radial -, tangential +, tangential -.
    """
    a = np.sqrt(c * (1 - r**2))
    w = a / (a + 1)
    probs = np.array([w * (1 + r) / 2, w * (1 - r) / 2, (1 - w) / 2, (1 - w) / 2])
    radial_errors = np.array([(1 - r) / w, -(1 + r) / w, 0.0, 0.0]) if w > 0 else np.zeros(4)
    angle_errors = np.array([0.0, 0.0, 1.0, -1.0]) / ((1 - w) * r)
    return _Outcomes(probs=probs, radial_errors=radial_errors, angle_errors=angle_errors)


def _collective_outcomes(n: int, r: float, c: float, estimator: RadialEstimator) -> _Outcomes:
    if n < 1:
        raise DomainError(f"The collective strategy needs at least one copy, got {n}")
    if not 0.0 < r < 1.0:
        raise DomainError(f"Bloch radius {r} must lie strictly inside (0, 1)")
    if c < 0:
        raise DomainError(f"Radial cost weight must be non-negative, got {c}")
    if n == 1 and estimator == RadialEstimator.one_step:
        _logger.info("Single copy: using the HGM-optimal axis measurement for the one-step estimator.")
        return _single_copy_outcomes(r, c)
    return _block_outcomes(n, r, estimator)


def collective_expected_cost(
    n: int, r: float, c: float = 1.0, estimator: RadialEstimator = RadialEstimator.one_step
) -> float:
    """
    Exact n E[c (r_hat - r)^2 + r^2 (theta_hat - theta)^2] of the collective
    strategy; the one-step radial estimator gives n (c / F_r + r^2 / F_theta).
    """
    return _collective_outcomes(n, r, c, estimator).expected(n, r, c)


def collective_estimation_run(
    n: int,
    r: float,
    theta: float,
    c: float = 1.0,
    trials: int = 100000,
    seed: Optional[int] = None,
    estimator: RadialEstimator = RadialEstimator.one_step,
) -> CollectiveRunResult:
    """
    Monte-Carlo run of the collective strategy: measure the total spin j, then
    J_x in the frame rotated by theta inside the block, and form locally
    unbiased estimates of r and theta. A single copy with the one-step
    estimator uses the optimal radial/tangential axis measurement instead.

    The cost is covariant in theta, so the errors do not depend on it.

    Returns:
        CollectiveRunResult: mean and standard error of n * cost, and its exact
        expectation.
    """
    outcomes = _collective_outcomes(n, r, c, estimator)
    if trials < get_min_trials():
        raise DomainError(f"At least {get_min_trials()} trials are needed, got {trials}")
    seed = get_default_seed() if seed is None else int(seed)
    outcome_costs = outcomes.costs(r, c)
    chunk = get_sim_chunk_size()
    sizes = [min(chunk, trials - start) for start in range(0, trials, chunk)]

    def run_chunk(k: int) -> np.ndarray:
        picks = make_rng(seed, k).choice(len(outcomes.probs), size=sizes[k], p=outcomes.probs)
        return outcome_costs[picks]

    with ThreadPoolExecutor(max_workers=get_thread_cap()) as pool:
        costs = np.concatenate(list(pool.map(run_chunk, range(len(sizes)))))
    _logger.info(f"Collective run n={n} r={r} theta={theta}: {trials} trials in {len(sizes)} chunks.")
    return CollectiveRunResult(
        n=n,
        r=r,
        mean_cost=float(n * costs.mean()),
        stderr=float(n * costs.std(ddof=1) / np.sqrt(trials)),
        expected=outcomes.expected(n, r, c),
        trials=trials,
        estimator=estimator,
    )


def sample_povm(rho, povm: Povm, trials: int, seed: Optional[int] = None) -> np.ndarray:
    """Outcome counts of `trials` independent measurements, Born-rule multinomial."""
    probs = np.clip(povm.probabilities(check_hermitian(rho)), 0.0, None)
    return make_rng(seed).multinomial(trials, probs / probs.sum())


def qfi_dominates(povm: Povm, pt: ModelPoint, tol: float = 1e-7) -> bool:
    """Whether F_Q - F_classical is PSD within tol."""
    gap = sld_set(pt).qfi - classical_fisher(povm, pt)
    return bool(np.linalg.eigvalsh((gap + gap.T) / 2)[0] >= -tol)
