"""
SU(2) bookkeeping for n qubits: spin-j matrices, irrep multiplicities and the
log-domain block weights of rho^{(x) n} for a Bloch vector of length r.

Spin-j matrices use the basis |j, m> ordered m = j, j-1, ..., -j.
"""

from functools import lru_cache
import numpy as np
import scipy.special

from .holevo_exceptions import DomainError, PrecisionError
from .matrix import PAULIS, kron_all
from .utils import get_logging

_logger = get_logging().getLogger(__name__)


def allowed_spins(n: int) -> np.ndarray:
    """Total spins n/2, n/2 - 1, ..., down to 0 or 1/2."""
    if n < 0:
        raise DomainError(f"Copy count must be non-negative, got {n}")
    return n / 2 - np.arange(n // 2 + 1)


def magnetic_numbers(j: float) -> np.ndarray:
    return j - np.arange(int(round(2 * j)) + 1)


@lru_cache(maxsize=256)
def _spin_operators(two_j: int):
    j = two_j / 2
    m = magnetic_numbers(j)
    raising = np.zeros((two_j + 1, two_j + 1), dtype=complex)
    for k in range(1, two_j + 1):
        raising[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (raising + raising.conj().T) / 2
    jy = (raising - raising.conj().T) / 2j
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


def spin_operators(j: float):
    """(J_x, J_y, J_z) of the spin-j irrep."""
    two_j = int(round(2 * j))
    if two_j < 0 or abs(two_j - 2 * j) > 1e-12:
        raise DomainError(f"Spin must be a non-negative half-integer, got {j}")
    return tuple(op.copy() for op in _spin_operators(two_j))


def log_multiplicity(n: int, j: float) -> float:
    """log of the multiplicity binom(n, n/2 - j) (2j + 1)/(n/2 + j + 1) of spin j in n qubits."""
    k = n / 2 - j
    log_binom = scipy.special.gammaln(n + 1) - scipy.special.gammaln(k + 1) - scipy.special.gammaln(n - k + 1)
    return float(log_binom + np.log(2 * j + 1) - np.log(n / 2 + j + 1))


def log_block_terms(n: int, j: float, r: float) -> np.ndarray:
    """
    log(l+^(n/2+m) l-^(n/2-m)), l+- = (1 +- r)/2, for m = j..-j.
    Zero exponents on a vanishing eigenvalue contribute a factor one.
    """
    m = magnetic_numbers(j)
    lam_plus, lam_minus = (1 + r) / 2, (1 - r) / 2
    with np.errstate(divide="ignore"):
        return scipy.special.xlogy(n / 2 + m, lam_plus) + scipy.special.xlogy(n / 2 - m, lam_minus)


def block_log_weights(n: int, r: float) -> np.ndarray:
    """
    log p_{n,j} for j in allowed_spins(n): the weight of the spin-j block of
    rho^{(x) n} when |Bloch vector| = r.
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"Bloch radius {r} outside [0, 1]")
    weights = np.array(
        [log_multiplicity(n, j) + scipy.special.logsumexp(log_block_terms(n, j, r)) for j in allowed_spins(n)]
    )
    if not np.isfinite(scipy.special.logsumexp(weights)):
        _logger.error(f"Block weights underflowed for n={n}, r={r}.")
        raise PrecisionError(f"Spin block weights underflow for n={n}, r={r}")
    return weights


def block_spectrum(n: int, j: float, r: float) -> np.ndarray:
    """Normalized diagonal of the spin-j block (m = j..-j) before rotation."""
    logs = log_block_terms(n, j, r)
    return np.exp(logs - scipy.special.logsumexp(logs))


def _log_sinh(y):
    return y + np.log(-np.expm1(-2 * y)) - np.log(2.0)


def _y_coth_minus_one(y):
    series = y**2 / 3 - y**4 / 45 + 2 * y**6 / 945
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = y / np.tanh(y) - 1
    return np.where(np.abs(y) < 1e-3, series, direct)


def log_block_sums(n: int, r) -> tuple:
    """
    Closed-form log of S0_j = sum_m l+^(n/2+m) l-^(n/2-m) and
    S1_j = sum_m m l+^(n/2+m) l-^(n/2-m) for every j in allowed_spins(n) and
    every radius in r (0 < r < 1), as arrays of shape (len(spins), len(r)).

    With L = log(l+/l-) the inner sums are sinh((2j+1)L/2)/sinh(L/2) and its
    derivative in L.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0) or np.any(r >= 1):
        raise DomainError("Closed-form block sums need radii strictly inside (0, 1)")
    spins = allowed_spins(n)[:, None]
    lam_plus, lam_minus = (1 + r) / 2, (1 - r) / 2
    big_l = np.log(lam_plus / lam_minus)[None, :]
    half = (2 * spins + 1) / 2
    base = (n / 2) * np.log(lam_plus * lam_minus)[None, :]
    log_g = _log_sinh(half * big_l) - _log_sinh(big_l / 2)
    bracket = (_y_coth_minus_one(half * big_l) - _y_coth_minus_one(big_l / 2)) / big_l
    with np.errstate(divide="ignore"):
        log_s1 = base + log_g + np.log(np.clip(bracket, 0.0, None))
    return base + log_g, log_s1


def collective_spin_dense(n: int):
    """Dense (J_x, J_y, J_z) on the 2^n dimensional space of n qubits."""
    ops = []
    for pauli in PAULIS:
        total = np.zeros((2**n, 2**n), dtype=complex)
        for k in range(n):
            total += kron_all([pauli if i == k else np.eye(2) for i in range(n)]) / 2
        ops.append(total)
    return tuple(ops)


def dense_block_decomposition(n: int, rho: np.ndarray) -> dict:
    """
    Brute-force decomposition of rho^{(x) n} by diagonalizing the total J^2.

    Returns:
        dict: j -> (weight, ascending eigenvalues of the restriction to the
        spin-j isotypic subspace, normalized to unit trace).
    """
    jx, jy, jz = collective_spin_dense(n)
    casimir = jx @ jx + jy @ jy + jz @ jz
    vals, vecs = np.linalg.eigh(casimir)
    state = kron_all([rho] * n)
    out = {}
    for j in allowed_spins(n):
        sub = vecs[:, np.abs(vals - j * (j + 1)) < 1e-8]
        restricted = sub.conj().T @ state @ sub
        weight = float(np.trace(restricted).real)
        out[float(j)] = (weight, np.linalg.eigvalsh(restricted / weight))
    return out
