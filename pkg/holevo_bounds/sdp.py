"""
Dense primal-dual interior-point solver for small linear SDPs.

Solves the pair

    minimize    <C, X>          maximize    b^T y
    subject to  <A_i, X> = b_i  subject to  sum_i y_i A_i + Z = C
                X >= 0                      Z >= 0

over block-diagonal symmetric matrices, with an infeasible-start
path-following method using the HKM search direction and a Mehrotra
predictor-corrector step. Linear matrix inequalities C - sum_i y_i A_i >= 0 are
solved directly in the dual form; complex Hermitian LMIs go through
:func:`complex_psd_embed` first.
"""

from dataclasses import dataclass
from typing import Optional, TextIO
import numpy as np
import scipy.linalg

from . import constants as const
from .common import SdpStatus
from .holevo_exceptions import SymmetryViolationError
from .utils import get_logging, get_sdp_options

_logger = get_logging().getLogger(__name__)


@dataclass(frozen=True)
class SdpProblem:
    block_dims: tuple
    c: tuple
    a: tuple
    b: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        c = tuple(_check_block(m, d, "objective") for m, d in zip(self.c, dims))
        if len(c) != len(dims):
            raise SymmetryViolationError(
                f"Objective has {len(c)} blocks, block structure declares {len(dims)}"
            )
        a = []
        for i, ai in enumerate(self.a):
            if len(ai) != len(dims):
                raise SymmetryViolationError(f"Constraint {i} has {len(ai)} blocks, expected {len(dims)}")
            a.append(tuple(_check_block(m, d, f"constraint {i}") for m, d in zip(ai, dims)))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.size != len(a):
            raise SymmetryViolationError(f"{b.size} right-hand sides for {len(a)} constraints")
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", tuple(a))
        object.__setattr__(self, "b", b)

    @property
    def num_constraints(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class SdpSolution:
    x: tuple
    y: np.ndarray
    z: tuple
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    status: SdpStatus
    primal_infeasibility: float
    dual_infeasibility: float

    def summary(self) -> dict:
        return {
            "status": str(self.status),
            "iterations": self.iterations,
            "primal": self.primal_value,
            "dual": self.dual_value,
            "gap": self.gap,
            "primal_infeasibility": self.primal_infeasibility,
            "dual_infeasibility": self.dual_infeasibility,
        }


def _check_block(m, dim: int, what: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape != (dim, dim):
        raise SymmetryViolationError(f"{what}: block of shape {m.shape}, expected {(dim, dim)}")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(m), initial=0.0)):
        _logger.error(f"{what}: block is not symmetric.")
        raise SymmetryViolationError(f"{what}: block is not symmetric")
    return (m + m.T) / 2


def complex_psd_embed(h) -> np.ndarray:
    """
    Real symmetric embedding [[Re h, -Im h], [Im h, Re h]] of a Hermitian
    matrix; h is PSD iff its embedding is.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def _vec(blocks) -> np.ndarray:
    return np.concatenate([np.asarray(b).ravel() for b in blocks])


def _unvec(v: np.ndarray, dims) -> list:
    out, pos = [], 0
    for d in dims:
        out.append(v[pos : pos + d * d].reshape(d, d))
        pos += d * d
    return out


def _sym(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2


def _inner(xs, zs) -> float:
    return float(sum(np.sum(x * z) for x, z in zip(xs, zs)))


def _inverse_spd(m: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(m), np.eye(m.shape[0]))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return np.linalg.pinv(m)


def _max_step(xs, dxs) -> float:
    """Largest alpha keeping every block of X + alpha dX positive semidefinite."""
    alpha = np.inf
    for x, dx in zip(xs, dxs):
        try:
            chol = scipy.linalg.cholesky(x, lower=True)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            return 0.0
        left = scipy.linalg.solve_triangular(chol, dx, lower=True)
        scaled = scipy.linalg.solve_triangular(chol, left.T, lower=True)
        low = np.linalg.eigvalsh(_sym(scaled))[0]
        if low < 0:
            alpha = min(alpha, -1.0 / low)
    return alpha


def _initial_point(problem: SdpProblem, amat: np.ndarray):
    nmax = max(problem.block_dims)
    a_norms = np.linalg.norm(amat, axis=1) if amat.size else np.zeros(0)
    c_norm = np.linalg.norm(_vec(problem.c))
    xi = max(10.0, np.sqrt(nmax))
    if a_norms.size:
        xi = max(xi, nmax * float(np.max((1 + np.abs(problem.b)) / (1 + a_norms))))
    eta = max(10.0, np.sqrt(nmax), c_norm, float(np.max(a_norms, initial=0.0)))
    xs = [xi * np.eye(d) for d in problem.block_dims]
    zs = [eta * np.eye(d) for d in problem.block_dims]
    return xs, np.zeros(problem.num_constraints), zs


def solve(problem: SdpProblem, opts: Optional[dict] = None) -> SdpSolution:
    """
    Solves the SDP pair.

    Args:
        problem (SdpProblem): the primal problem data.
        opts (dict, optional): overrides of the sdp section of the config
            (max_iters, gap_tol, comp_tol, feas_tol, step, divergence,
            min_step). Optimal status needs the relative gap, the absolute
            trace(X Z) and both residuals within tolerance.

    Returns:
        SdpSolution: iterates at termination with status optimal, max_iter or
        infeasible_detected.
    """
    options = get_sdp_options()
    options.update(opts or {})
    dims = problem.block_dims
    n_total = sum(dims)
    m = problem.num_constraints
    cvec = _vec(problem.c)
    amat = np.array([_vec(ai) for ai in problem.a]) if m else np.zeros((0, cvec.size))
    b = problem.b
    b_scale = 1.0 + np.linalg.norm(b)
    c_scale = 1.0 + np.linalg.norm(cvec)

    xs, y, zs = _initial_point(problem, amat)
    status = SdpStatus.max_iter
    iteration = 0
    for iteration in range(1, options[const.max_iters] + 1):
        xvec = _vec(xs)
        rp = b - amat @ xvec
        rd = cvec - _vec(zs) - amat.T @ y
        pobj, dobj = float(cvec @ xvec), float(b @ y)
        complementarity = _inner(xs, zs)
        mu = complementarity / n_total
        pinf, dinf = np.linalg.norm(rp) / b_scale, np.linalg.norm(rd) / c_scale
        _logger.debug(
            f"sdp iter {iteration}: primal {pobj:.10g} dual {dobj:.10g} "
            f"pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}"
        )
        gap_limit = options[const.gap_tol] * (1 + abs(pobj))
        if (
            max(abs(pobj - dobj), complementarity) <= gap_limit
            and complementarity <= options[const.comp_tol]
            and pinf <= options[const.feas_tol]
            and dinf <= options[const.feas_tol]
        ):
            status = SdpStatus.optimal
            break
        if max(np.linalg.norm(xvec), np.linalg.norm(y)) > options[const.divergence]:
            _logger.warning(f"SDP iterates diverged after {iteration} iterations.")
            status = SdpStatus.infeasible_detected
            break

        zinvs = [_inverse_spd(z) for z in zs]
        rds = _unvec(rd, dims)
        schur = np.empty((m, m))
        for j in range(m):
            schur[:, j] = amat @ _vec([x @ aj @ zi for x, aj, zi in zip(xs, problem.a[j], zinvs)])
        schur = _sym(schur)
        try:
            factor = scipy.linalg.cho_factor(schur)
            solve_schur = lambda rhs: scipy.linalg.cho_solve(factor, rhs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            solve_schur = lambda rhs: np.linalg.lstsq(schur, rhs, rcond=None)[0]
        x_rd_zinv = amat @ _vec([x @ r @ zi for x, r, zi in zip(xs, rds, zinvs)]) if m else np.zeros(0)

        def direction(rcs):
            rhs = rp - amat @ _vec([rc @ zi for rc, zi in zip(rcs, zinvs)]) + x_rd_zinv
            dy = solve_schur(rhs) if m else np.zeros(0)
            dzs = _unvec(rd - amat.T @ dy, dims)
            dxs = [_sym(rc @ zi - x @ dz @ zi) for rc, x, dz, zi in zip(rcs, xs, dzs, zinvs)]
            return dxs, dy, dzs

        # predictor
        dxs, dy, dzs = direction([-x @ z for x, z in zip(xs, zs)])
        alpha_p = min(1.0, options[const.step] * _max_step(xs, dxs))
        alpha_d = min(1.0, options[const.step] * _max_step(zs, dzs))
        mu_aff = (
            _inner([x + alpha_p * dx for x, dx in zip(xs, dxs)], [z + alpha_d * dz for z, dz in zip(zs, dzs)])
            / n_total
        )
        sigma = float(np.clip((mu_aff / mu) ** 3 if mu > 0 else 0.0, 0.0, 1.0))

        # corrector
        rcs = [
            sigma * mu * np.eye(d) - x @ z - dx @ dz
            for d, x, z, dx, dz in zip(dims, xs, zs, dxs, dzs)
        ]
        dxs, dy, dzs = direction(rcs)
        alpha_p = min(1.0, options[const.step] * _max_step(xs, dxs))
        alpha_d = min(1.0, options[const.step] * _max_step(zs, dzs))
        if max(alpha_p, alpha_d) < options[const.min_step]:
            _logger.warning(f"SDP stalled at iteration {iteration} (step {max(alpha_p, alpha_d):.1e}).")
            break

        xs = [_sym(x + alpha_p * dx) for x, dx in zip(xs, dxs)]
        y = y + alpha_d * dy
        zs = [_sym(z + alpha_d * dz) for z, dz in zip(zs, dzs)]

    xvec = _vec(xs)
    pobj, dobj = float(cvec @ xvec), float(b @ y)
    solution = SdpSolution(
        x=tuple(xs),
        y=y,
        z=tuple(zs),
        primal_value=pobj,
        dual_value=dobj,
        gap=abs(pobj - dobj),
        iterations=iteration,
        status=status,
        primal_infeasibility=float(np.linalg.norm(b - amat @ xvec) / b_scale),
        dual_infeasibility=float(np.linalg.norm(cvec - _vec(zs) - amat.T @ y) / c_scale),
    )
    if status != SdpStatus.optimal:
        _logger.warning(f"SDP finished with status {status}: {solution.summary()}")
    return solution


def lmi_problem(c0, a_list, objective) -> SdpProblem:
    """
    Dual-form problem: maximize objective^T y subject to c0 - sum_i y_i a_list[i] >= 0,
    for a single real symmetric LMI block.
    """
    c0 = np.asarray(c0, dtype=float)
    return SdpProblem(
        block_dims=(c0.shape[0],),
        c=(c0,),
        a=tuple((np.asarray(a, dtype=float),) for a in a_list),
        b=np.asarray(objective, dtype=float),
    )


def dump_problem(problem: SdpProblem, stream: TextIO):
    """Plain-text dump: block dimensions, then C, then each (A_i, b_i)."""

    def write_blocks(blocks):
        for k, blk in enumerate(blocks):
            stream.write(f"block {k}\n")
            for row in blk:
                stream.write(" ".join(f"{v:.17g}" for v in row) + "\n")

    stream.write("dims " + " ".join(str(d) for d in problem.block_dims) + "\n")
    stream.write("objective\n")
    write_blocks(problem.c)
    for i, (ai, bi) in enumerate(zip(problem.a, problem.b)):
        stream.write(f"constraint {i} b {bi:.17g}\n")
        write_blocks(ai)
