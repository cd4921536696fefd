"""
Closed-form and spectral bounds at a model point: SLDs and the QFI matrix,
the SLD and RLD Cramer-Rao bounds, the Hayashi-Gill-Massar qubit bound and
the compatibility / D-invariance diagnostics that predict when the Holevo
bound collapses to one of them.
"""

from dataclasses import dataclass
import numpy as np

from .holevo_exceptions import (
    DomainError,
    RldUndefinedError,
    UnidentifiableParameterError,
    UnsupportedError,
)
from .matrix import anticomm_solve, eig_hermitian, trace_norm
from .model import CostMatrix, ModelPoint
from .utils import get_logging, get_tolerance, get_cost_rank_threshold

_logger = get_logging().getLogger(__name__)


@dataclass(frozen=True)
class SldSet:
    slds: np.ndarray
    qfi: np.ndarray
    mean_commutators: np.ndarray

    @property
    def param_count(self) -> int:
        return self.slds.shape[0]

    @property
    def dim(self) -> int:
        return self.slds.shape[1]


@dataclass(frozen=True)
class CompatibilityReport:
    max_commutator: float
    commutators_vanish: bool
    cost_rank: int
    cost_rank_one: bool
    cost_full_rank: bool

    @property
    def predicts_hcr_equals_sld(self) -> bool:
        return self.commutators_vanish or self.cost_rank_one


@dataclass(frozen=True)
class DInvarianceResult:
    invariant: bool
    sld_span_dim: int
    span_dim: int
    basis: np.ndarray


def sld_set(pt: ModelPoint) -> SldSet:
    """
    Solves 1/2 {L_i, rho} = d_i rho for every parameter and assembles
    F_ij = Re tr(rho L_i L_j) and tr(rho [L_i, L_j]).
    """
    slds = np.array([anticomm_solve(pt.rho, d) for d in pt.grads])
    z = np.einsum("ab,ibc,jca->ij", pt.rho, slds, slds)
    qfi = z.real
    return SldSet(slds=slds, qfi=(qfi + qfi.T) / 2, mean_commutators=z - z.T)


def qfi_inverse(s: SldSet, c: CostMatrix) -> np.ndarray:
    """
    Pseudo-inverse of the QFI, refusing costs that weigh directions in its
    kernel.
    """
    if c.size != s.param_count:
        raise DomainError(f"Cost of size {c.size} for a {s.param_count}-parameter model")
    vals, vecs = np.linalg.eigh(s.qfi)
    cut = get_tolerance("qfi_pinv") * max(float(vals[-1]), 0.0)
    keep = vals > cut
    if not keep.all():
        kernel = vecs[:, ~keep]
        weight = np.linalg.norm(c.g @ kernel)
        if not keep.any() or weight > 1e-10 * max(1.0, np.linalg.norm(c.g)):
            _logger.error(f"Cost weight {weight:.3e} on the QFI kernel.")
            raise UnidentifiableParameterError(
                "Parameters are not identifiable: the cost weighs a direction with zero "
                f"quantum Fisher information (weight {weight:.3e})"
            )
    return (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T


def sld_cr_bound(s: SldSet, c: CostMatrix) -> float:
    """trace(C F_Q^-1)."""
    return float(np.trace(c.g @ qfi_inverse(s, c)))


def antisymmetric_trace_norm(c: CostMatrix, a: np.ndarray) -> float:
    """||sqrt(C) A sqrt(C)||_1 for a real antisymmetric A."""
    root = c.sqrt()
    return trace_norm(1j * (root @ a @ root))


def sld_parallel_value(s: SldSet, c: CostMatrix) -> float:
    """
    Holevo objective at the SLD-parallel choice X = F^-1 L:
    trace(C F^-1) + 1/2 ||sqrt(C) F^-1 tr(rho [L, L^T]) F^-1 sqrt(C)||_1.
    Always an upper bound on the Holevo bound, equal to it for D-invariant models.
    """
    finv = qfi_inverse(s, c)
    im_z = finv @ (s.mean_commutators / 2j).real @ finv
    return float(np.trace(c.g @ finv)) + antisymmetric_trace_norm(c, im_z)


def rld_bound(pt: ModelPoint, c: CostMatrix) -> float:
    """
    RLD bound trace(C Re F_R^-1) + ||sqrt(C) Im F_R^-1 sqrt(C)||_1 with
    (F_R)_ij = tr(d_i rho rho^-1 d_j rho). Requires a full-rank state.
    """
    vals, vecs = eig_hermitian(pt.rho)
    if vals[0] <= get_tolerance("kernel_threshold") * vals[-1]:
        _logger.error(f"RLD requested for a rank-deficient state (min eigenvalue {vals[0]:.3e}).")
        raise RldUndefinedError("RLD bound needs a full-rank state")
    if c.size != pt.param_count:
        raise DomainError(f"Cost of size {c.size} for a {pt.param_count}-parameter model")
    grads = np.einsum("ab,ibc,cd->iad", vecs.conj().T, pt.grads, vecs)
    f_r = np.einsum("iab,b,jba->ij", grads, 1.0 / vals, grads)
    f_r = (f_r + f_r.conj().T) / 2
    try:
        f_inv = np.linalg.inv(f_r)
    except np.linalg.LinAlgError as exc:
        raise UnidentifiableParameterError("RLD Fisher information is singular") from exc
    return float(np.trace(c.g @ f_inv.real)) + antisymmetric_trace_norm(c, f_inv.imag)


def compatibility_report(s: SldSet, c: CostMatrix) -> CompatibilityReport:
    max_comm = float(np.max(np.abs(s.mean_commutators), initial=0.0))
    vals = np.linalg.eigvalsh(c.g)
    rank = int(np.sum(vals > get_cost_rank_threshold() * max(vals[-1], 1e-300)))
    return CompatibilityReport(
        max_commutator=max_comm,
        commutators_vanish=max_comm <= get_tolerance("commutator"),
        cost_rank=rank,
        cost_rank_one=rank == 1,
        cost_full_rank=rank == c.size,
    )


def _to_real(ops: np.ndarray) -> np.ndarray:
    return np.concatenate([ops.real.reshape(len(ops), -1), ops.imag.reshape(len(ops), -1)], axis=1)


def _span(ops: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal (real Hilbert-Schmidt) basis of the real span of ops."""
    if not len(ops):
        return ops
    _, sing, vt = np.linalg.svd(_to_real(ops), full_matrices=False)
    keep = sing > tol * max(sing[0], 1e-300)
    half = vt.shape[1] // 2
    dim = int(round(np.sqrt(half)))
    return (vt[keep, :half] + 1j * vt[keep, half:]).reshape(-1, dim, dim)


def d_invariance_check(pt: ModelPoint) -> DInvarianceResult:
    """
    Closes span{L_i} under D, D(X)_ij = i (l_i - l_j)/(l_i + l_j) X_ij in the
    eigenbasis of rho, and reports whether the closure adds anything.
    """
    vals, vecs = eig_hermitian(pt.rho)
    if vals[0] <= get_tolerance("kernel_threshold") * vals[-1]:
        _logger.error("D-invariance check requested for a rank-deficient state.")
        raise UnsupportedError("D-invariance check needs a full-rank state")
    tol = get_tolerance("d_invariance_rank")
    factor = 1j * (vals[:, None] - vals[None, :]) / (vals[:, None] + vals[None, :])
    slds = sld_set(pt).slds
    current = _span(np.einsum("ab,ibc,cd->iad", vecs.conj().T, slds, vecs), tol)
    sld_dim = len(current)
    for _ in range(pt.param_count * pt.dim**2):
        grown = _span(np.concatenate([current, factor[None, :, :] * current]), tol)
        if len(grown) == len(current):
            break
        current = grown
    basis = np.einsum("ab,ibc,cd->iad", vecs, current, vecs.conj().T)
    return DInvarianceResult(
        invariant=len(current) == sld_dim, sld_span_dim=sld_dim, span_dim=len(current), basis=basis
    )


def d_invariant_hcr(pt: ModelPoint, c: CostMatrix) -> float:
    """Closed-form Holevo bound of a D-invariant model."""
    if not d_invariance_check(pt).invariant:
        raise UnsupportedError("Model is not D-invariant at this point")
    return sld_parallel_value(sld_set(pt), c)


def hgm_bound(s: SldSet, c: CostMatrix) -> float:
    """Hayashi-Gill-Massar bound (trace sqrt(sqrt(F^-1) C sqrt(F^-1)))^2, qubits only."""
    if s.dim != 2:
        _logger.error(f"HGM bound requested for dimension {s.dim}.")
        raise DomainError(f"The HGM bound holds for qubit models only, got dimension {s.dim}")
    finv = qfi_inverse(s, c)
    vals, vecs = np.linalg.eigh(finv)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    inner = np.linalg.eigvalsh(root @ c.g @ root)
    return float(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2)
