import numpy as np

from holevo_bounds.matrix import hermitian_basis, random_density_matrix
from holevo_bounds.model import CostMatrix, explicit_point

HALF_PI = np.pi / 2


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_traceless(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random combination of the traceless Gell-Mann elements."""
    basis = hermitian_basis(dim)[1:]
    return np.einsum("a,aij->ij", rng.normal(size=len(basis)), basis)


def random_point(dim: int, p: int, rng: np.random.Generator):
    """Full-rank state with p random independent derivatives."""
    rho = random_density_matrix(dim, rng)
    grads = [random_traceless(dim, rng) for _ in range(p)]
    return explicit_point(rho, grads)


def random_cost(p: int, rng: np.random.Generator) -> CostMatrix:
    g = rng.normal(size=(p, p))
    return CostMatrix(g @ g.T + 0.1 * np.eye(p))


def random_rank_one_cost(p: int, rng: np.random.Generator) -> CostMatrix:
    return CostMatrix.rank_one(rng.normal(size=p))


def sld_residual(rho, slds, grads) -> float:
    return max(float(np.linalg.norm(0.5 * (l @ rho + rho @ l) - d)) for l, d in zip(slds, grads))
