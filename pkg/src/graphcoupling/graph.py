"""Latent graphs, their Laplacians, and the pairwise MRF density.

A latent graph W is an integer matrix with zero diagonal, nonnegative
entries, and no entry exceeding n.  Directed multiplicities are allowed;
undirected structure always goes through the symmetrization W + W^T.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .kernels import log_kernel
from .linalg import as_float_matrix, pairwise_sq_dists


@dataclass(frozen=True)
class Partition:
    """Connected-component assignment; component ids ordered by smallest member."""

    assignment: np.ndarray  # shape (n,), values in [0, n_components)
    sizes: np.ndarray       # shape (n_components,)

    @property
    def n_components(self) -> int:
        return int(self.sizes.shape[0])


def validate_latent_graph(W) -> np.ndarray:
    """Check membership in the latent graph space and return an int64 copy."""
    A = np.asarray(W)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolationError(f"latent graph must be square, got shape {A.shape}")
    n = A.shape[0]
    if not np.issubdtype(A.dtype, np.integer):
        F = np.asarray(A, dtype=np.float64)
        if not np.isfinite(F).all() or not (F == np.round(F)).all():
            raise ContractViolationError("latent graph entries must be integers")
        A = F.astype(np.int64)
    else:
        A = A.astype(np.int64)
    if n and np.diag(A).any():
        raise ContractViolationError("latent graph diagonal must be zero")
    if n and int(A.min()) < 0:
        raise ContractViolationError("latent graph entries must be nonnegative")
    if n and int(A.max()) > n:
        raise ContractViolationError(f"latent graph entries must not exceed n={n}")
    return A


def laplacian(W) -> np.ndarray:
    """Graph Laplacian of the symmetrized graph W + W^T.

    Degrees and off-diagonal terms are accumulated in integer arithmetic,
    so rows sum to zero exactly; the result is cast to float64 at the end.
    """
    A = validate_latent_graph(W)
    B = A + A.T
    L = np.diag(B.sum(axis=1)) - B
    return L.astype(np.float64)


def weighted_laplacian(A) -> np.ndarray:
    """Laplacian diag(row sums) - A of a nonnegative weight matrix.

    Callers that start from a directed weight matrix should pass A + A^T;
    no symmetrization is applied here.
    """
    A = as_float_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise ContractViolationError(f"weight matrix must be square, got {A.shape}")
    if A.size and float(A.min()) < 0.0:
        raise ContractViolationError("weight matrix has negative entries")
    return np.diag(A.sum(axis=1)) - A


def components_from_support(adjacent: np.ndarray) -> Partition:
    """Connected components of a boolean symmetric adjacency matrix.

    Breadth-first search starting from the smallest-index unvisited node;
    component labels therefore increase with the smallest member of each
    component, which fixes the labeling deterministically.
    """
    n = adjacent.shape[0]
    assignment = np.full(n, -1, dtype=np.int64)
    sizes = []
    for start in range(n):
        if assignment[start] >= 0:
            continue
        label = len(sizes)
        count = 0
        queue = deque([start])
        assignment[start] = label
        while queue:
            node = queue.popleft()
            count += 1
            for nb in np.nonzero(adjacent[node])[0]:
                if assignment[nb] < 0:
                    assignment[nb] = label
                    queue.append(int(nb))
        sizes.append(count)
    return Partition(assignment, np.asarray(sizes, dtype=np.int64))


def connected_components(W) -> Partition:
    """Connected components of the positive support of W + W^T."""
    A = validate_latent_graph(W)
    return components_from_support((A + A.T) > 0)


def cc_projector(partition: Partition) -> np.ndarray:
    """Orthogonal projector onto component-wise constant vectors.

    Block-constant matrix with 1/n_r inside component r and zeros across
    components; equals U U^T for the normalized component indicators U.
    """
    assign = partition.assignment
    sizes = partition.sizes
    M = (assign[:, None] == assign[None, :]).astype(np.float64)
    M /= sizes[assign][:, None].astype(np.float64)
    return M


def split_mean_centered(X, partition: Partition):
    """Split X into component-wise means and the centered remainder.

    Returns ``(X_M, X_C)`` whose sum reconstructs X up to one unit of
    roundoff per entry; row i of X_M repeats the mean of the component
    containing i, so each component's rows of X_C sum to zero.
    """
    X = as_float_matrix(X, "X")
    assign = partition.assignment
    if X.shape[0] != assign.shape[0]:
        raise ContractViolationError(
            f"X has {X.shape[0]} rows but partition covers {assign.shape[0]}")
    R = partition.n_components
    means = np.empty((R, X.shape[1]), dtype=np.float64)
    for r in range(R):
        means[r] = X[assign == r].mean(axis=0)
    X_M = means[assign]
    return X_M, X - X_M


def log_mrf_density(X, W, kind: str, bandwidths=None) -> float:
    """Log of the pairwise Markov random field density of (X, W).

    Sum over ordered pairs of W_ij * log k((X_i - X_j) / tau_i).  Pairs
    with zero weight contribute exactly zero, the empty-product
    convention, even where the kernel vanishes; any positively weighted
    pair with k = 0 yields the -inf sentinel.
    """
    A = validate_latent_graph(W)
    X = as_float_matrix(X, "X")
    if X.shape[0] != A.shape[0]:
        raise ContractViolationError(
            f"X has {X.shape[0]} rows but W is {A.shape[0]}x{A.shape[0]}")
    logk = log_kernel(pairwise_sq_dists(X), kind, bandwidths)
    terms = np.where(A > 0, A * logk, 0.0)
    return float(terms.sum())
