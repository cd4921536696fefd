"""
Parametric state families rho_theta with their parameter derivatives.

A :class:`ParametricModel` is evaluated at a parameter vector into a
:class:`ModelPoint` (rho and the list of d rho / d theta_i), which is what every
bound consumes. The qubit families use the Bloch normalization
rho = 1/2 (I + r . sigma).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional
import numpy as np
import scipy.linalg

from .common import DerivativeMode
from .holevo_exceptions import (
    DomainError,
    InvertibilityError,
    ModelValidityError,
    SizeError,
    SymmetryViolationError,
)
from .matrix import (
    IDENTITY_2,
    PAULIS,
    check_hermitian,
    hermitian_basis,
    hermitian_part,
    kron_all,
    min_eigenvalue,
)
from .utils import get_logging, get_tolerance, get_numeric_step, get_multi_copy_cap

_logger = get_logging().getLogger(__name__)

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class ParametricModel:
    param_count: int
    dim: int
    state_fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    step: Optional[float] = None
    name: str = "custom"

    @property
    def derivative_mode(self) -> DerivativeMode:
        return DerivativeMode.analytic if self.grad_fn else DerivativeMode.numeric


@dataclass(frozen=True)
class ModelPoint:
    rho: np.ndarray
    grads: np.ndarray
    theta: Optional[np.ndarray] = None

    @property
    def param_count(self) -> int:
        return self.grads.shape[0]

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class CostMatrix:
    g: np.ndarray = field(repr=True)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.g, dtype=float))
        if g.shape[0] != g.shape[1]:
            raise SymmetryViolationError(f"Cost matrix of shape {g.shape} is not square")
        if np.max(np.abs(g - g.T)) > get_tolerance("hermitian") * max(1.0, np.max(np.abs(g))):
            _logger.error("Cost matrix is not symmetric.")
            raise SymmetryViolationError("Cost matrix is not symmetric")
        g = (g + g.T) / 2
        if np.linalg.eigvalsh(g)[0] < -get_tolerance("psd_slack"):
            _logger.error(f"Cost matrix has eigenvalue {np.linalg.eigvalsh(g)[0]:.3e}.")
            raise DomainError("Cost matrix is not positive semidefinite")
        object.__setattr__(self, "g", g)

    @property
    def size(self) -> int:
        return self.g.shape[0]

    @staticmethod
    def identity(p: int) -> "CostMatrix":
        return CostMatrix(np.eye(p))

    @staticmethod
    def diag(values) -> "CostMatrix":
        return CostMatrix(np.diag(np.asarray(values, dtype=float)))

    @staticmethod
    def rank_one(c) -> "CostMatrix":
        c = np.asarray(c, dtype=float)
        return CostMatrix(np.outer(c, c))

    def rank(self, rel_tol: float = 1e-12) -> int:
        vals = np.linalg.eigvalsh(self.g)
        return int(np.sum(vals > rel_tol * max(vals[-1], 1e-300)))

    def sqrt(self) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.g)
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def validate_state(rho) -> np.ndarray:
    """Checks that rho is a Hermitian, PSD, unit-trace matrix."""
    try:
        rho = check_hermitian(rho, tol=get_tolerance("trace"))
    except SymmetryViolationError as exc:
        raise ModelValidityError(f"State is not Hermitian: {exc}") from exc
    rho = hermitian_part(rho)
    if abs(np.trace(rho).real - 1.0) > get_tolerance("trace"):
        _logger.error(f"State trace {np.trace(rho).real} is not 1.")
        raise ModelValidityError(f"State has trace {np.trace(rho).real:.12g}, expected 1")
    if (low := min_eigenvalue(rho)) < -get_tolerance("psd_slack"):
        _logger.error(f"State has negative eigenvalue {low:.3e}.")
        raise ModelValidityError(f"State is not PSD: min eigenvalue {low:.3e}")
    return rho


def _project_derivative(d: np.ndarray) -> np.ndarray:
    d = hermitian_part(d)
    return d - np.trace(d) / d.shape[0] * np.eye(d.shape[0])


def _numeric_grads(m: ParametricModel, theta: np.ndarray) -> np.ndarray:
    h = m.step or get_numeric_step()
    grads = []
    for i in range(m.param_count):
        e = np.zeros_like(theta)
        e[i] = h
        try:
            grads.append((m.state_fn(theta + e) - m.state_fn(theta - e)) / (2 * h))
        except DomainError:
            # second order one-sided difference on the side that stays in the domain
            try:
                f0, f1, f2 = (m.state_fn(theta + k * e) for k in (0, 1, 2))
                grads.append((-3 * f0 + 4 * f1 - f2) / (2 * h))
            except DomainError:
                f0, f1, f2 = (m.state_fn(theta - k * e) for k in (0, 1, 2))
                grads.append((3 * f0 - 4 * f1 + f2) / (2 * h))
    return np.array(grads, dtype=complex)


def evaluate(m: ParametricModel, theta) -> ModelPoint:
    """
    Evaluates the model and its derivatives at theta.

    Args:
        m (ParametricModel): the family.
        theta: parameter vector of length m.param_count.

    Returns:
        ModelPoint: rho and the symmetrized, trace-projected gradients.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (m.param_count,):
        _logger.error(f"Model {m.name} expects {m.param_count} parameters, got {theta.shape}.")
        raise DomainError(f"Model {m.name} expects {m.param_count} parameters, got {theta.size}")
    rho = validate_state(m.state_fn(theta))
    if m.grad_fn:
        raw = np.asarray(m.grad_fn(theta), dtype=complex)
        for i, d in enumerate(raw):
            if np.max(np.abs(d - d.conj().T)) > 1e-9 or abs(np.trace(d)) > 1e-9:
                _logger.error(f"Analytic derivative {i} of {m.name} is not traceless Hermitian.")
                raise ModelValidityError(
                    f"Analytic derivative {i} of model {m.name} is not traceless Hermitian"
                )
    else:
        raw = _numeric_grads(m, theta)
    grads = np.array([_project_derivative(d) for d in raw]).reshape(m.param_count, m.dim, m.dim)
    return ModelPoint(rho=rho, grads=grads, theta=theta)


def state(m: ParametricModel, theta) -> np.ndarray:
    """Validated state without derivatives."""
    return validate_state(m.state_fn(np.atleast_1d(np.asarray(theta, dtype=float))))


def explicit_point(rho, grads, theta=None) -> ModelPoint:
    """Builds a validated ModelPoint from explicit matrices."""
    rho = validate_state(rho)
    grads = np.array([check_hermitian(d, tol=1e-9) for d in grads], dtype=complex)
    if grads.ndim != 3 or grads.shape[1:] != rho.shape:
        raise ModelValidityError(
            f"Gradients of shape {grads.shape} do not match state of shape {rho.shape}"
        )
    for i, d in enumerate(grads):
        if abs(np.trace(d)) > 1e-9:
            raise ModelValidityError(f"Gradient {i} has nonzero trace {abs(np.trace(d)):.3e}")
    grads = np.array([_project_derivative(d) for d in grads])
    return ModelPoint(
        rho=rho, grads=grads, theta=None if theta is None else np.asarray(theta, dtype=float)
    )


# Qubit families


def bloch_state(rvec) -> np.ndarray:
    rx, ry, rz = rvec
    return 0.5 * (IDENTITY_2 + rx * PAULIS[0] + ry * PAULIS[1] + rz * PAULIS[2])


def _bloch_grad(dvec) -> np.ndarray:
    return 0.5 * sum(c * s for c, s in zip(dvec, PAULIS))


def _check_radius(r: float):
    if r < -_DOMAIN_SLACK or r > 1 + _DOMAIN_SLACK:
        raise DomainError(f"Bloch radius {r} outside [0, 1]")


def _check_polar(theta: float):
    if theta < -_DOMAIN_SLACK or theta > np.pi + _DOMAIN_SLACK:
        raise DomainError(f"Polar angle {theta} outside [0, pi]")


def _spherical(r, th, ph):
    return r * np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def _spherical_jacobian(r, th, ph):
    """Columns d/dr, d/dtheta, d/dphi of the Bloch vector."""
    return np.array(
        [
            [np.sin(th) * np.cos(ph), r * np.cos(th) * np.cos(ph), -r * np.sin(th) * np.sin(ph)],
            [np.sin(th) * np.sin(ph), r * np.cos(th) * np.sin(ph), r * np.sin(th) * np.cos(ph)],
            [np.cos(th), -r * np.sin(th), 0.0],
        ]
    )


def qubit_bloch_cartesian() -> ParametricModel:
    """(r_x, r_y, r_z) with d rho / d r_i = sigma_i / 2."""

    def state_fn(t):
        if np.linalg.norm(t) > 1 + _DOMAIN_SLACK:
            raise DomainError(f"Bloch vector {t} outside the unit ball")
        return bloch_state(t)

    return ParametricModel(
        param_count=3,
        dim=2,
        state_fn=state_fn,
        grad_fn=lambda t: np.array([s / 2 for s in PAULIS]),
        name="qubit_bloch_cartesian",
    )


def qubit_bloch_spherical() -> ParametricModel:
    """(r, theta, phi) spherical Bloch coordinates."""

    def state_fn(t):
        r, th, ph = t
        _check_radius(r)
        _check_polar(th)
        return bloch_state(_spherical(r, th, ph))

    def grad_fn(t):
        jac = _spherical_jacobian(*t)
        return np.array([_bloch_grad(jac[:, k]) for k in range(3)])

    return ParametricModel(3, 2, state_fn, grad_fn, name="qubit_bloch_spherical")


def pure_qubit() -> ParametricModel:
    """(theta, phi) on the surface of the Bloch sphere."""

    def state_fn(t):
        th, ph = t
        _check_polar(th)
        return bloch_state(_spherical(1.0, th, ph))

    def grad_fn(t):
        jac = _spherical_jacobian(1.0, *t)
        return np.array([_bloch_grad(jac[:, k]) for k in (1, 2)])

    return ParametricModel(2, 2, state_fn, grad_fn, name="pure_qubit")


def qubit_r_theta() -> ParametricModel:
    """(r, theta) in the x-z plane, phi = 0."""

    def state_fn(t):
        r, th = t
        _check_radius(r)
        _check_polar(th)
        return bloch_state(_spherical(r, th, 0.0))

    def grad_fn(t):
        jac = _spherical_jacobian(t[0], t[1], 0.0)
        return np.array([_bloch_grad(jac[:, k]) for k in (0, 1)])

    return ParametricModel(2, 2, state_fn, grad_fn, name="qubit_r_theta")


def qubit_phase(r: float = 1.0) -> ParametricModel:
    """Single phase phi on the equator circle of radius r."""
    _check_radius(r)

    def state_fn(t):
        return bloch_state((r * np.cos(t[0]), r * np.sin(t[0]), 0.0))

    def grad_fn(t):
        return np.array([_bloch_grad((-r * np.sin(t[0]), r * np.cos(t[0]), 0.0))])

    return ParametricModel(1, 2, state_fn, grad_fn, name="qubit_phase")


def qudit_gell_mann(dim: int) -> ParametricModel:
    """Full-state family rho = I/d + sum_a theta_a Lambda_a over the traceless basis."""
    lambdas = hermitian_basis(dim)[1:]

    def state_fn(t):
        return np.eye(dim) / dim + np.einsum("a,aij->ij", t, lambdas)

    return ParametricModel(
        dim**2 - 1, dim, state_fn, lambda t: lambdas.copy(), name=f"qudit_gell_mann_{dim}"
    )


def unitary_family(rho0, generators, step: float = None) -> ParametricModel:
    """rho_theta = U rho0 U^dagger with U = exp(-i sum_k theta_k G_k); numeric derivatives."""
    rho0 = validate_state(rho0)
    generators = np.array([check_hermitian(g) for g in generators])

    def state_fn(t):
        u = scipy.linalg.expm(-1j * np.einsum("k,kij->ij", t, generators))
        return u @ rho0 @ u.conj().T

    return ParametricModel(
        len(generators), rho0.shape[0], state_fn, None, step, name="unitary_family"
    )


BUILTIN_MODELS = {
    "qubit_bloch_cartesian": qubit_bloch_cartesian,
    "qubit_bloch_spherical": qubit_bloch_spherical,
    "pure_qubit": pure_qubit,
    "qubit_r_theta": qubit_r_theta,
    "qubit_phase": qubit_phase,
    "qudit_gell_mann": qudit_gell_mann,
}


def get_builtin_model(name: str, **options) -> ParametricModel:
    if (factory := BUILTIN_MODELS.get(name)) is None:
        _logger.error(f"Unknown builtin model {name}.")
        raise DomainError(f"Unknown builtin model '{name}', expected one of {sorted(BUILTIN_MODELS)}")
    return factory(**options)


# Multi-copy and reparametrization


def _leibniz(rho: np.ndarray, grads: np.ndarray, n: int) -> np.ndarray:
    out = []
    for d in grads:
        out.append(sum(kron_all([d if k == j else rho for k in range(n)]) for j in range(n)))
    return np.array(out)


def multi_copy(m: ParametricModel, n: int) -> ParametricModel:
    """
    n-fold tensor power of the family, with Leibniz-rule derivatives when the
    single-copy model has analytic ones.
    """
    if n < 1:
        raise DomainError(f"Copy count must be at least 1, got {n}")
    if (dim := m.dim**n) > get_multi_copy_cap():
        _logger.error(f"Multi-copy dimension {dim} exceeds the cap {get_multi_copy_cap()}.")
        raise SizeError(f"{n} copies of a dimension {m.dim} model exceed the cap {get_multi_copy_cap()}")
    if n == 1:
        return m

    def state_fn(t):
        return kron_all([m.state_fn(t)] * n)

    grad_fn = None
    if m.grad_fn:

        def grad_fn(t):
            return _leibniz(m.state_fn(t), np.asarray(m.grad_fn(t), dtype=complex), n)

    return ParametricModel(m.param_count, dim, state_fn, grad_fn, m.step, name=f"{m.name}^{n}")


def multi_copy_point(pt: ModelPoint, n: int) -> ModelPoint:
    if (dim := pt.dim**n) > get_multi_copy_cap():
        raise SizeError(f"{n} copies of a dimension {pt.dim} point exceed the cap {get_multi_copy_cap()}")
    return ModelPoint(rho=kron_all([pt.rho] * n), grads=_leibniz(pt.rho, pt.grads, n), theta=pt.theta)


def _check_jacobian(jacobian, p: int) -> np.ndarray:
    jac = np.atleast_2d(np.asarray(jacobian, dtype=float))
    if jac.shape != (p, p):
        raise DomainError(f"Jacobian of shape {jac.shape} does not match {p} parameters")
    if abs(np.linalg.det(jac)) <= 1e-12:
        _logger.error("Reparametrization Jacobian is singular.")
        raise InvertibilityError("Reparametrization Jacobian is singular (|det J| <= 1e-12)")
    return jac


def reparametrize(pt: ModelPoint, jacobian) -> ModelPoint:
    """
    Moves a point to new coordinates theta' = f(theta) with J = d theta' / d theta.
    The gradients transform as grads' = (J^T)^-1 grads; theta is carried over as is.
    """
    jac = _check_jacobian(jacobian, pt.param_count)
    grads = np.einsum("ik,kab->iab", np.linalg.inv(jac.T), pt.grads)
    return ModelPoint(rho=pt.rho, grads=grads, theta=pt.theta)


def pull_back_cost(c: CostMatrix, jacobian) -> CostMatrix:
    """C = J^T C' J."""
    jac = _check_jacobian(jacobian, c.size)
    return CostMatrix(jac.T @ c.g @ jac)
