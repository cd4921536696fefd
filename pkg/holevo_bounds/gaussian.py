"""
Gaussian shift models: R has mean A theta and a fixed covariance V, with
[R_a, R_b] = i S_ab, S = diag(Omega, ..., Omega, 0, ..., 0) over q_modes
quantum modes followed by c_vars classical variables.

For a linear estimator X = B R the Holevo matrix is Z = B (V + iS/2) B^T,
so every bound here is a function of B with B A = I.
"""

from dataclasses import dataclass
from typing import Optional
import numpy as np
import scipy.linalg

from .bounds import antisymmetric_trace_norm
from .common import HcrMethod, SdpStatus
from .hcr import holevo_lmi
from .holevo_exceptions import (
    DomainError,
    InjectivityError,
    RldUndefinedError,
    SingularCovarianceError,
    SolverConvergenceError,
    SymmetryViolationError,
    UncertaintyViolationError,
)
from .matrix import abs_hermitian
from .model import CostMatrix
from .utils import get_logging, get_tolerance

_logger = get_logging().getLogger(__name__)

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
_ANCILLA_REGULARIZATION = 1e-9


def symplectic_form(q_modes: int, c_vars: int) -> np.ndarray:
    """diag(Omega, ..., Omega) over q_modes modes, padded with c_vars zero rows and columns."""
    s = np.zeros((2 * q_modes + c_vars, 2 * q_modes + c_vars))
    for k in range(q_modes):
        s[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = OMEGA
    return s


@dataclass(frozen=True)
class GaussianShiftModel:
    q_modes: int
    c_vars: int
    encoding: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        r_dim = 2 * self.q_modes + self.c_vars
        a = np.atleast_2d(np.asarray(self.encoding, dtype=float))
        v = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if a.shape[0] != r_dim or v.shape != (r_dim, r_dim):
            raise DomainError(
                f"Encoding {a.shape} and covariance {v.shape} do not fit {self.q_modes} modes "
                f"and {self.c_vars} classical variables"
            )
        if np.max(np.abs(v - v.T)) > get_tolerance("hermitian") * max(1.0, np.max(np.abs(v))):
            raise SymmetryViolationError("Covariance matrix is not symmetric")
        v = (v + v.T) / 2
        low = np.linalg.eigvalsh(v - 0.5j * symplectic_form(self.q_modes, self.c_vars))[0]
        if low < -get_tolerance("heisenberg"):
            _logger.error(f"Covariance violates the uncertainty relation, min eigenvalue {low:.3e}.")
            raise UncertaintyViolationError(
                f"V - iS/2 has eigenvalue {low:.3e}, the uncertainty relation needs it >= 0"
            )
        if a.shape[1] > r_dim or np.linalg.matrix_rank(a) < a.shape[1]:
            _logger.error(f"Encoding of shape {a.shape} is not injective.")
            raise InjectivityError(f"Encoding matrix of shape {a.shape} lacks full column rank")
        object.__setattr__(self, "encoding", a)
        object.__setattr__(self, "covariance", v)

    @property
    def r_dim(self) -> int:
        return 2 * self.q_modes + self.c_vars

    @property
    def param_count(self) -> int:
        return self.encoding.shape[1]

    @property
    def symplectic(self) -> np.ndarray:
        return symplectic_form(self.q_modes, self.c_vars)


@dataclass(frozen=True)
class GaussianHcrResult:
    value: float
    b_matrix: np.ndarray
    method: HcrMethod
    sdp_value: Optional[float] = None
    sdp_diag: Optional[dict] = None


@dataclass(frozen=True)
class LinearMeasurement:
    b_matrix: np.ndarray
    ancilla_cov: np.ndarray
    ancilla_symplectic: np.ndarray
    cost: float
    full_ancilla_cov: Optional[np.ndarray] = None
    regularized: bool = False


def _check_cost(g: GaussianShiftModel, c: CostMatrix):
    if c.size != g.param_count:
        raise DomainError(f"Cost of size {c.size} for a {g.param_count}-parameter Gaussian model")


def _covariance_inverse(g: GaussianShiftModel) -> np.ndarray:
    vals = np.linalg.eigvalsh(g.covariance)
    if vals[0] <= 1e-12 * max(vals[-1], 1e-300):
        _logger.error(f"Gaussian covariance is singular, min eigenvalue {vals[0]:.3e}.")
        raise SingularCovarianceError("Covariance matrix V is singular")
    return np.linalg.inv(g.covariance)


def sld_coefficients(g: GaussianShiftModel) -> np.ndarray:
    """L_i = sum_a (A^T V^-1)_ia (R_a - <R_a>)."""
    return g.encoding.T @ _covariance_inverse(g)


def gaussian_qfi(g: GaussianShiftModel) -> np.ndarray:
    """F_Q = A^T V^-1 A."""
    f = sld_coefficients(g) @ g.encoding
    return (f + f.T) / 2


def linear_estimator_cost(g: GaussianShiftModel, c: CostMatrix, b) -> float:
    """Holevo objective of X = B R: trace(C B V B^T) + 1/2 ||sqrt(C) B S B^T sqrt(C)||_1."""
    b = np.atleast_2d(np.asarray(b, dtype=float))
    return float(np.trace(c.g @ b @ g.covariance @ b.T)) + 0.5 * antisymmetric_trace_norm(
        c, b @ g.symplectic @ b.T
    )


def _hcr_sdp(g: GaussianShiftModel, c: CostMatrix) -> GaussianHcrResult:
    a = g.encoding
    p = g.param_count
    b0 = np.linalg.pinv(a)
    annihilator = scipy.linalg.null_space(a.T).T
    h = g.covariance + 0.5j * g.symplectic
    vals, vecs = np.linalg.eigh(h)
    t = np.sqrt(np.clip(vals, 0.0, None))[:, None] * vecs.conj().T
    dirs = []
    for row in annihilator:
        for i in range(p):
            d = np.zeros((g.r_dim, p), dtype=complex)
            d[:, i] = t @ row
            dirs.append(d)
    lmi = holevo_lmi(c, t @ b0.T, dirs)
    if lmi.status != SdpStatus.optimal:
        _logger.error(f"Gaussian Holevo SDP did not converge: {lmi.sdp_diag}")
        raise SolverConvergenceError(f"Gaussian Holevo SDP finished with status {lmi.status}", lmi.sdp_diag)
    b = b0 + (lmi.w.reshape(len(annihilator), p).T @ annihilator if len(annihilator) else 0.0)
    return GaussianHcrResult(
        value=linear_estimator_cost(g, c, b),
        b_matrix=b,
        method=HcrMethod.sdp,
        sdp_value=lmi.value,
        sdp_diag=lmi.sdp_diag,
    )


def gaussian_hcr(g: GaussianShiftModel, c: CostMatrix, method: HcrMethod = HcrMethod.auto) -> GaussianHcrResult:
    """
    Holevo bound of a Gaussian shift model, minimized over linear estimators
    B R with B A = I.

    Args:
        g (GaussianShiftModel): the model.
        c (CostMatrix): p x p cost.
        method (HcrMethod): closed_form needs p = r_dim (B = A^-1); auto picks
            it whenever it applies and falls back to the SDP otherwise.

    Returns:
        GaussianHcrResult: the bound and the optimal B.
    """
    _check_cost(g, c)
    square = g.param_count == g.r_dim
    if method == HcrMethod.closed_form and not square:
        raise DomainError(
            f"Closed form needs as many parameters as variables, got {g.param_count} and {g.r_dim}"
        )
    if method == HcrMethod.sdp or not square:
        return _hcr_sdp(g, c)
    b = np.linalg.inv(g.encoding)
    return GaussianHcrResult(value=linear_estimator_cost(g, c, b), b_matrix=b, method=HcrMethod.closed_form)


def gaussian_sld_bound(g: GaussianShiftModel, c: CostMatrix) -> float:
    _check_cost(g, c)
    return float(np.trace(c.g @ np.linalg.inv(gaussian_qfi(g))))


def gaussian_rld_bound(g: GaussianShiftModel, c: CostMatrix) -> float:
    """RLD bound with F_R = A^T (V + iS/2)^-1 A; undefined for pure Gaussian states."""
    _check_cost(g, c)
    h = g.covariance + 0.5j * g.symplectic
    vals = np.linalg.eigvalsh(h)
    if vals[0] <= 1e-12 * max(vals[-1], 1e-300):
        _logger.error("RLD requested for a Gaussian model with singular V + iS/2.")
        raise RldUndefinedError("RLD bound needs V + iS/2 to be invertible")
    f_r = g.encoding.T @ np.linalg.inv(h) @ g.encoding
    f_inv = np.linalg.inv((f_r + f_r.conj().T) / 2)
    return float(np.trace(c.g @ f_inv.real)) + antisymmetric_trace_norm(c, f_inv.imag)


def optimal_linear_measurement(g: GaussianShiftModel, c: CostMatrix) -> LinearMeasurement:
    """
    Commuting observables Y = B R + R~ that attain the Holevo bound, with the
    ancilla R~ on the p estimator coordinates, [R~_i, R~_j] = -i (B S B^T)_ij and
    covariance C^-1/2 |i/2 sqrt(C) B S B^T sqrt(C)| C^-1/2.
    """
    b = gaussian_hcr(g, c).b_matrix
    bsb = b @ g.symplectic @ b.T
    vals, vecs = np.linalg.eigh(c.g)
    cut = 1e-12 * max(vals[-1], 1e-300)
    regularized = bool(np.any(vals <= cut))
    if regularized:
        _logger.warning("Cost matrix is singular, regularizing the ancilla covariance on its kernel.")
        vals = np.where(vals <= cut, _ANCILLA_REGULARIZATION, vals)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    root_inv = (vecs / np.sqrt(vals)) @ vecs.T
    ancilla = (root_inv @ abs_hermitian(0.5j * (root @ bsb @ root)) @ root_inv).real
    ancilla = (ancilla + ancilla.T) / 2
    cost = float(np.trace(c.g @ (b @ g.covariance @ b.T + ancilla)))
    full = None
    if b.shape[0] == b.shape[1]:
        b_inv = np.linalg.inv(b)
        full = b_inv @ ancilla @ b_inv.T
    return LinearMeasurement(
        b_matrix=b,
        ancilla_cov=ancilla,
        ancilla_symplectic=-bsb,
        cost=cost,
        full_ancilla_cov=full,
        regularized=regularized,
    )


# Models matched to the qubit examples


def qp_model(sigma_q2: float, sigma_p2: float, scale: float = 1.0) -> GaussianShiftModel:
    """One mode, both quadratures displaced by scale * (theta_q, theta_p)."""
    return GaussianShiftModel(1, 0, scale * np.eye(2), np.diag([sigma_q2, sigma_p2]))


def qz_model(sigma_q2: float, sigma_p2: float, sigma_z2: float, scale: float = 1.0) -> GaussianShiftModel:
    """One mode displaced along Q only, plus a classical variable z."""
    a = np.zeros((3, 2))
    a[0, 0] = scale
    a[2, 1] = 1.0
    return GaussianShiftModel(1, 1, a, np.diag([sigma_q2, sigma_p2, sigma_z2]))


def qpz_model(sigma_q2: float, sigma_p2: float, sigma_z2: float, scale: float = 1.0) -> GaussianShiftModel:
    return GaussianShiftModel(1, 1, np.diag([scale, scale, 1.0]), np.diag([sigma_q2, sigma_p2, sigma_z2]))


def qubit_matched_models(r: float) -> dict:
    """
    Gaussian counterparts of the qubit (theta, phi), (r, theta) and
    (r, theta, phi) models at Bloch radius r: sigma_q^2 = sigma_p^2 = 1/(2r),
    sigma_z^2 = 1 - r^2 and quadratures scaled by 1/sqrt(2r). The pure
    (theta, phi) column is the vacuum with A = I/sqrt(2).
    """
    if not 0.0 < r <= 1.0:
        raise DomainError(f"Bloch radius {r} outside (0, 1]")
    thermal = 1.0 / (2 * r)
    scale = 1.0 / np.sqrt(2 * r)
    return {
        "theta_phi": qp_model(0.5, 0.5, 1.0 / np.sqrt(2)),
        "r_theta": qz_model(thermal, thermal, 1 - r**2, scale),
        "r_theta_phi": qpz_model(thermal, thermal, 1 - r**2, scale),
    }
