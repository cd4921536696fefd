"""
Dense complex linear algebra on Hermitian matrices.

Matrices are plain numpy arrays. A HermMatrix is any square complex array that
passes :func:`check_hermitian`; every spectral helper here returns eigenvalues
in ascending order.
"""

from functools import reduce, lru_cache
import numpy as np
import scipy.linalg

from .holevo_exceptions import (
    SymmetryViolationError,
    InconsistencyError,
    RankDeficiencyError,
)
from .utils import get_logging, get_tolerance

_logger = get_logging().getLogger(__name__)

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"Expected a 2-d matrix, got shape {arr.shape}")
    return arr


def hermitian_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, tol: float = None) -> np.ndarray:
    """
    Validates that m is square and Hermitian and returns it as a complex array.

    Args:
        m: matrix-like input.
        tol (float, optional): absolute entrywise tolerance, scaled by the
            largest entry when that exceeds one. Defaults to the configured
            hermitian tolerance.

    Returns:
        np.ndarray: the validated matrix.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        _logger.error(f"Matrix of shape {m.shape} is not square.")
        raise SymmetryViolationError(f"Matrix of shape {m.shape} is not square")
    tol = get_tolerance("hermitian") if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if (dev := hermitian_deviation(m)) > tol * scale:
        _logger.error(f"Matrix deviates from Hermitian by {dev:.3e}.")
        raise SymmetryViolationError(
            f"Matrix is not Hermitian: max |m - m^dagger| = {dev:.3e} > {tol * scale:.1e}"
        )
    return m


def hermitian_part(m) -> np.ndarray:
    m = as_matrix(m)
    return (m + m.conj().T) / 2


def eig_hermitian(m):
    """
    Eigen-decomposition of a Hermitian matrix.

    Returns:
        tuple: (eigenvalues ascending, unitary whose columns are eigenvectors)
    """
    m = check_hermitian(m)
    vals, vecs = scipy.linalg.eigh(hermitian_part(m))
    return vals, vecs


def eigvals_hermitian(m) -> np.ndarray:
    return scipy.linalg.eigvalsh(hermitian_part(check_hermitian(m)))


def min_eigenvalue(m) -> float:
    return float(eigvals_hermitian(m)[0])


def trace_norm(m) -> float:
    return float(np.sum(np.abs(eigvals_hermitian(m))))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, [as_matrix(m) for m in mats])


def sqrtm_psd(m) -> np.ndarray:
    """Square root of a PSD matrix with negative rounding noise clipped to zero."""
    vals, vecs = eig_hermitian(m)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def abs_hermitian(m) -> np.ndarray:
    """|m| = U |diag(lambda)| U^dagger."""
    vals, vecs = eig_hermitian(m)
    return (vecs * np.abs(vals)) @ vecs.conj().T


def pinv_sqrt_psd(m, rel_tol: float = 1e-12) -> np.ndarray:
    vals, vecs = eig_hermitian(m)
    cut = rel_tol * max(float(np.max(np.abs(vals))), 1e-300)
    inv = np.array([1.0 / np.sqrt(v) if v > cut else 0.0 for v in vals])
    return (vecs * inv) @ vecs.conj().T


def anticomm_solve(rho, d) -> np.ndarray:
    """
    Solves 1/2 {L, rho} = d for Hermitian L.

    In the eigenbasis of rho L_ij = 2 d_ij / (lambda_i + lambda_j). Entries
    whose denominator falls below the kernel threshold (relative to the largest
    eigenvalue) are set to zero.

    Args:
        rho: PSD unit-trace Hermitian matrix.
        d: traceless Hermitian matrix.

    Returns:
        np.ndarray: the Hermitian solution L.
    """
    rho = check_hermitian(rho)
    d = check_hermitian(d)
    if abs(tr := np.trace(d)) > get_tolerance("trace"):
        _logger.error(f"Derivative trace {tr} is not zero.")
        raise InconsistencyError(f"Right-hand side has trace {abs(tr):.3e}, expected 0")

    vals, vecs = eig_hermitian(rho)
    threshold = get_tolerance("kernel_threshold") * max(float(vals[-1]), 0.0)
    den = vals[:, None] + vals[None, :]
    support = den > threshold
    d_eig = vecs.conj().T @ d @ vecs
    l_eig = np.zeros_like(d_eig)
    l_eig[support] = 2.0 * d_eig[support] / den[support]
    l_op = hermitian_part(vecs @ l_eig @ vecs.conj().T)

    residual = vecs.conj().T @ (0.5 * (l_op @ rho + rho @ l_op) - d) @ vecs
    if (res := np.linalg.norm(residual[support])) > get_tolerance("anticomm_residual"):
        _logger.error(f"Anticommutator residual {res:.3e} on the support of rho.")
        raise RankDeficiencyError(
            f"1/2{{L, rho}} = d not solved on the support of rho: residual {res:.3e}"
        )
    return l_op


def kernel_weight(rho, d) -> float:
    """
    Frobenius norm of the kernel-kernel block of d in the eigenbasis of rho.
    A valid derivative of a state family has no weight there.
    """
    vals, vecs = eig_hermitian(rho)
    threshold = get_tolerance("kernel_threshold") * max(float(vals[-1]), 0.0)
    kernel = vals <= threshold / 2
    if not kernel.any():
        return 0.0
    d_eig = vecs.conj().T @ as_matrix(d) @ vecs
    return float(np.linalg.norm(d_eig[np.ix_(kernel, kernel)]))


@lru_cache(maxsize=None)
def _gell_mann_basis(dim: int):
    basis = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            basis.append(sym)
            asym = np.zeros((dim, dim), dtype=complex)
            asym[j, k] = -1j / np.sqrt(2)
            asym[k, j] = 1j / np.sqrt(2)
            basis.append(asym)
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return tuple(basis)


def hermitian_basis(dim: int) -> np.ndarray:
    """
    Generalized Gell-Mann basis plus the normalized identity, orthonormal in
    the Hilbert-Schmidt inner product. Element 0 is I/sqrt(dim).

    Returns:
        np.ndarray: array of shape (dim**2, dim, dim).
    """
    return np.array(_gell_mann_basis(dim))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return hermitian_part(rho / np.trace(rho).real)
