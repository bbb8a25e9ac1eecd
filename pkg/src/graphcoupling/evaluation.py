"""Neighborhood-preservation scores between a dataset and its embedding.

For neighborhood size k, the agreement q is the average fraction of the
k nearest input-space neighbors that are also among the k nearest
embedding-space neighbors.  The adjusted score

    r = ((n - 1) q - k) / (n - 1 - k)

rescales it so a random embedding scores 0 in expectation and a perfect
one scores 1, making values comparable across k and n.
"""

from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractViolationError, ParameterError
from .linalg import as_float_matrix, pairwise_sq_dists


class NeighborhoodScore(NamedTuple):
    k: int
    q: float
    r: float


def neighbor_indices(D: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest neighbors per row of a distance matrix.

    Ranks follow strictly increasing distance with ties broken in favor
    of the smaller index; the point itself is excluded.  Implemented by
    a stable argsort after forcing the diagonal below every distance.
    """
    D = D.copy()
    np.fill_diagonal(D, -1.0)
    order = np.argsort(D, axis=1, kind="stable")
    return order[:, 1:k + 1]


def kary_agreement(X, Z, k: int) -> NeighborhoodScore:
    """Neighborhood agreement between rows of X and rows of Z at size k."""
    X = as_float_matrix(X, "X")
    Z = as_float_matrix(Z, "Z")
    n = X.shape[0]
    if Z.shape[0] != n:
        raise ContractViolationError(
            f"X and Z must have the same number of rows, got {n} and {Z.shape[0]}")
    if not (1 <= k <= n - 2):
        raise ParameterError(f"k must lie in [1, n - 2 = {n - 2}], got {k}")
    rows = np.arange(n)[:, None]
    in_x = np.zeros((n, n), dtype=bool)
    in_x[rows, neighbor_indices(pairwise_sq_dists(X), k)] = True
    in_z = np.zeros((n, n), dtype=bool)
    in_z[rows, neighbor_indices(pairwise_sq_dists(Z), k)] = True
    q = float((in_x & in_z).sum()) / (k * n)
    r = ((n - 1) * q - k) / (n - 1 - k)
    return NeighborhoodScore(int(k), q, float(r))


def evaluate_embedding(X, Z, ks: Sequence[int]) -> list:
    """Agreement scores at several neighborhood sizes, ascending in k."""
    return [kary_agreement(X, Z, int(k)) for k in sorted(set(int(k) for k in ks))]
