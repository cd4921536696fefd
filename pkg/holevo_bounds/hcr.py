"""
Holevo Cramer-Rao bound as a semidefinite program.

At a model point the bound is

    min  trace(C V)   over real V and Hermitian X_1..X_p
    s.t. V >= Z[X],  Z[X]_ij = tr(rho X_i X_j),  tr(d_i rho X_j) = delta_ij.

Operators are expanded in an orthonormal Hermitian basis, X_j = sum_a x_aj L_a,
so Z[X] = x^T S x with S_ab = tr(rho L_a L_b) = R^dagger R. The local
unbiasedness equalities are eliminated by writing x = x0 + N w over the null
space of the constraint matrix, which leaves a single LMI

    [[V', (R x Q)^dagger], [R x Q, I]] >= 0,   V' = Q^T V Q,  C = Q Q^T

minimized over trace(V') and solved with :mod:`holevo_bounds.sdp`.
"""

from dataclasses import dataclass
from typing import Optional
import numpy as np
import scipy.linalg

from .bounds import compatibility_report, qfi_inverse, sld_cr_bound, sld_set
from .common import SdpStatus
from .holevo_exceptions import (
    ConstraintError,
    DomainError,
    SizeError,
    SolverConvergenceError,
    UnidentifiableParameterError,
)
from .matrix import abs_hermitian, hermitian_basis, trace_norm
from .model import CostMatrix, ModelPoint, ParametricModel, evaluate, multi_copy
from .sdp import complex_psd_embed, lmi_problem, solve
from .utils import (
    get_logging,
    get_tolerance,
    get_hcr_dim_cap,
    get_s_clip,
    get_cost_rank_threshold,
)

_logger = get_logging().getLogger(__name__)

_DIRECTION_TOL = 1e-10


@dataclass(frozen=True)
class HcrSolution:
    value: float
    x_ops: np.ndarray
    v_matrix: np.ndarray
    z_matrix: np.ndarray
    sdp_diag: Optional[dict] = None
    shortcut: Optional[str] = None


@dataclass(frozen=True)
class HolevoLmiResult:
    value: float
    v_prime: np.ndarray
    q: np.ndarray
    w: np.ndarray
    sdp_diag: dict
    status: SdpStatus


def z_matrix(rho: np.ndarray, x_ops: np.ndarray) -> np.ndarray:
    """Z[X]_ij = tr(rho X_i X_j)."""
    z = np.einsum("ab,ibc,jca->ij", rho, x_ops, x_ops)
    return (z + z.conj().T) / 2


def trace_norm_objective(z: np.ndarray, c: CostMatrix) -> float:
    """trace(C Re Z) + ||sqrt(C) Im Z sqrt(C)||_1."""
    root = c.sqrt()
    return float(np.trace(c.g @ z.real)) + trace_norm(1j * (root @ z.imag @ root))


def _cost_factor(c: CostMatrix) -> np.ndarray:
    """Q with C = Q Q^T, restricted to the range of C."""
    vals, vecs = np.linalg.eigh(c.g)
    keep = vals > get_cost_rank_threshold() * max(vals[-1], 1e-300)
    return vecs[:, keep] * np.sqrt(vals[keep])


def _independent_directions(mats: list, tol: float = _DIRECTION_TOL):
    """
    Real-linear combinations of mats that are independent, as a coefficient
    matrix (len(mats) x r).
    """
    if not mats:
        return np.zeros((0, 0))
    stacked = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
    _, sing, vt = np.linalg.svd(stacked, full_matrices=False)
    keep = sing > tol * max(sing[0] if sing.size else 0.0, 1.0)
    return vt[keep].T


def holevo_lmi(c: CostMatrix, y0: np.ndarray, dirs: list) -> HolevoLmiResult:
    """
    Minimizes trace(C V) subject to V >= Y^dagger Y, Y = y0 + sum_k w_k dirs[k],
    over real symmetric V and real w.

    Args:
        c (CostMatrix): p x p cost.
        y0: complex m x p offset.
        dirs (list): complex m x p free directions.

    Returns:
        HolevoLmiResult: value = min trace(C V), V' = Q^T V Q on the range of C,
        and the optimal w in the coordinates of dirs.
    """
    q = _cost_factor(c)
    k = q.shape[1]
    y0q = np.asarray(y0, dtype=complex) @ q
    m = y0q.shape[0]
    dirs_q = [np.asarray(d, dtype=complex) @ q for d in dirs]
    coeffs = _independent_directions(dirs_q)
    reduced = [sum(coeffs[i, r] * dirs_q[i] for i in range(len(dirs_q))) for r in range(coeffs.shape[1])]

    n = k + m

    def block(top_left=None, off=None):
        h = np.zeros((n, n), dtype=complex)
        if top_left is not None:
            h[:k, :k] = top_left
        if off is not None:
            h[k:, :k] = off
            h[:k, k:] = off.conj().T
        return h

    c0 = block(off=y0q)
    c0[k:, k:] = np.eye(m)
    a_list, objective, v_index = [], [], []
    for a in range(k):
        for b in range(a, k):
            e = np.zeros((k, k))
            e[a, b] = e[b, a] = 1.0
            a_list.append(-complex_psd_embed(block(top_left=e)))
            objective.append(-1.0 if a == b else 0.0)
            v_index.append((a, b))
    for d in reduced:
        a_list.append(-complex_psd_embed(block(off=d)))
        objective.append(0.0)

    solution = solve(lmi_problem(complex_psd_embed(c0), a_list, objective))
    y = solution.y
    v_prime = np.zeros((k, k))
    for (a, b), val in zip(v_index, y[: len(v_index)]):
        v_prime[a, b] = v_prime[b, a] = val
    w = coeffs @ y[len(v_index) :] if coeffs.size else np.zeros(len(dirs))
    return HolevoLmiResult(
        value=float(np.trace(v_prime)),
        v_prime=v_prime,
        q=q,
        w=w,
        sdp_diag=solution.summary(),
        status=solution.status,
    )


def lmi_v_matrix(lmi: HolevoLmiResult, z: np.ndarray) -> np.ndarray:
    """
    V on the full parameter space: Q^-T V' Q^-1 for a full-rank cost, otherwise
    the feasible completion Re Z + |i Im Z|.
    """
    p = lmi.q.shape[0]
    if lmi.q.shape[1] == p:
        q_inv = np.linalg.inv(lmi.q)
        v = q_inv.T @ lmi.v_prime @ q_inv
        return (v + v.T) / 2
    return z.real + abs_hermitian(1j * z.imag).real


def _basis_data(pt: ModelPoint):
    """Hermitian basis, S = R^dagger R and the l.u. constraint matrix."""
    basis = hermitian_basis(pt.dim)
    s_vec = np.einsum("ij,aji->a", pt.rho, basis).real
    # basis elements are Hermitian, so tr(L_a L_b L_c) needs no conjugation
    structure = np.einsum("aij,bjk,cki->abc", basis, basis, basis)
    s_mat = np.einsum("abc,c->ab", structure, s_vec)
    s_mat = (s_mat + s_mat.conj().T) / 2
    vals, vecs = np.linalg.eigh(s_mat)
    keep = vals > get_s_clip() * max(vals[-1], 1e-300)
    r_mat = (vecs[:, keep] * np.sqrt(vals[keep])).conj().T
    dmat = np.einsum("iab,cba->ic", pt.grads, basis).real
    return basis, r_mat, dmat


def _shortcut_solution(pt: ModelPoint, c: CostMatrix, reason: str) -> HcrSolution:
    s = sld_set(pt)
    finv = qfi_inverse(s, c)
    x_ops = np.einsum("ij,jab->iab", finv, s.slds)
    z = z_matrix(pt.rho, x_ops)
    return HcrSolution(
        value=sld_cr_bound(s, c),
        x_ops=x_ops,
        v_matrix=z.real,
        z_matrix=z,
        shortcut=reason,
    )


def hcr_bound(pt: ModelPoint, c: CostMatrix, shortcut: bool = False) -> HcrSolution:
    """
    Holevo Cramer-Rao bound at a model point.

    Args:
        pt (ModelPoint): the model point.
        c (CostMatrix): p x p cost.
        shortcut (bool): return the SLD value directly when the compatibility
            report predicts equality (vanishing mean commutators or a rank-one
            cost). The SDP is solved otherwise.

    Returns:
        HcrSolution: the bound, the optimal operators and the SDP diagnostics.
    """
    if c.size != pt.param_count:
        raise DomainError(f"Cost of size {c.size} for a {pt.param_count}-parameter model")
    if pt.dim > (cap := get_hcr_dim_cap()):
        _logger.error(f"Hilbert dimension {pt.dim} above the HCR cap {cap}.")
        raise SizeError(f"Hilbert dimension {pt.dim} exceeds the Holevo SDP cap {cap}")
    s = sld_set(pt)
    sld = sld_cr_bound(s, c)
    if shortcut:
        report = compatibility_report(s, c)
        if report.cost_rank_one:
            return _shortcut_solution(pt, c, "rank_one_cost")
        if report.commutators_vanish and report.cost_full_rank:
            return _shortcut_solution(pt, c, "vanishing_commutators")

    basis, r_mat, dmat = _basis_data(pt)
    p = pt.param_count
    if np.linalg.matrix_rank(dmat) < p:
        _logger.error("Derivatives are linearly dependent, l.u. constraints are infeasible.")
        raise UnidentifiableParameterError("Model derivatives are linearly dependent")
    x0 = np.linalg.pinv(dmat) @ np.eye(p)
    null = scipy.linalg.null_space(dmat)
    if null.size:
        # drop null directions that R annihilates, they change nothing in Z[X]
        rn = r_mat @ null
        coeffs = _independent_directions([rn[:, k : k + 1] for k in range(rn.shape[1])])
        null = null @ coeffs if coeffs.size else np.zeros((dmat.shape[1], 0))
    rn = r_mat @ null
    dirs = []
    for kk in range(null.shape[1]):
        for j in range(p):
            d = np.zeros((r_mat.shape[0], p), dtype=complex)
            d[:, j] = rn[:, kk]
            dirs.append(d)

    lmi = holevo_lmi(c, r_mat @ x0, dirs)
    if lmi.status != SdpStatus.optimal:
        _logger.error(f"Holevo SDP did not converge: {lmi.sdp_diag}")
        raise SolverConvergenceError(f"Holevo SDP finished with status {lmi.status}", lmi.sdp_diag)

    x = x0 + null @ lmi.w.reshape(null.shape[1], p) if null.shape[1] else x0
    x_ops = np.einsum("aj,amn->jmn", x, basis)
    means = np.einsum("ab,jba->j", pt.rho, x_ops).real
    x_ops = x_ops - means[:, None, None] * np.eye(pt.dim)[None, :, :]
    z = z_matrix(pt.rho, x_ops)

    slack = 1e-6 * (1 + abs(sld))
    if not sld - slack <= lmi.value <= 2 * sld + slack:
        _logger.warning(f"Holevo value {lmi.value:.10g} outside [sld, 2 sld] with sld {sld:.10g}.")
    return HcrSolution(
        value=lmi.value,
        x_ops=x_ops,
        v_matrix=lmi_v_matrix(lmi, z),
        z_matrix=z,
        sdp_diag=lmi.sdp_diag,
    )


def evaluate_candidate(pt: ModelPoint, x_ops, c: CostMatrix) -> float:
    """
    Trace-norm form of the Holevo objective at explicit operators X_1..X_p.
    The operators must be locally unbiased, tr(d_i rho X_j) = delta_ij.
    """
    x_ops = np.asarray(x_ops, dtype=complex)
    if x_ops.shape != (pt.param_count, pt.dim, pt.dim):
        raise DomainError(f"Expected {pt.param_count} operators of size {pt.dim}, got {x_ops.shape}")
    residuals = np.einsum("iab,jba->ij", pt.grads, x_ops).real - np.eye(pt.param_count)
    if (worst := float(np.max(np.abs(residuals)))) > get_tolerance("lu_check"):
        _logger.error(f"Candidate violates local unbiasedness by {worst:.3e}.")
        raise ConstraintError(
            f"Candidate operators are not locally unbiased: max residual {worst:.3e}", residuals
        )
    return trace_norm_objective(z_matrix(pt.rho, x_ops), c)


def hcr_multicopy_check(m: ParametricModel, theta, c: CostMatrix, n: int):
    """
    Holevo bound of one copy and of n copies at theta; n times the second
    equals the first.

    Returns:
        tuple: (single, multi)
    """
    if (dim := m.dim**n) > (cap := get_hcr_dim_cap()):
        _logger.error(f"{n} copies of dimension {m.dim} exceed the HCR cap {cap}.")
        raise SizeError(f"{n}-copy dimension {dim} exceeds the Holevo SDP cap {cap}")
    single = hcr_bound(evaluate(m, theta), c).value
    multi = hcr_bound(evaluate(multi_copy(m, n), theta), c).value
    return single, multi
