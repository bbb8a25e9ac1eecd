"""Posterior edge distributions of the latent graph given observed points.

Three prior families on the latent graph are supported, named by a
single letter:

``"B"``  independent Bernoulli edges,
``"D"``  exactly one outgoing edge per node (row multinomial),
``"E"``  a fixed total of n edges placed by a global multinomial.

In the large-graph limit every posterior is driven by the elementwise
product pi * K of prior weights and kernel values.  Expectations are
packaged as :class:`AffinityMatrix` values tagged with how they are
normalized, and exact posterior samples are latent graphs.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolationError, DegenerateRowError, ParameterError
from .kernels import KernelMatrix
from .linalg import as_float_matrix

PRIOR_KINDS = ("B", "D", "E")

ROW = "row"
GLOBAL = "global"
BERNOULLI = "bernoulli"
SYMMETRIZED_ROW = "symmetrized-row"
THRESHOLDED_BERNOULLI = "thresholded-bernoulli"


@dataclass(frozen=True)
class AffinityMatrix:
    """Posterior edge-probability matrix tagged with its normalization.

    ``normalization`` is one of: ``row`` (rows sum to 1), ``global``
    (all entries sum to 1), ``bernoulli`` (elementwise probabilities),
    ``symmetrized-row`` (P + P^T of a row matrix, total mass 2n) or
    ``thresholded-bernoulli`` (probabilistic-OR of a bernoulli matrix).
    """

    values: np.ndarray
    prior: str
    normalization: str


def check_prior(prior: str) -> str:
    if prior not in PRIOR_KINDS:
        raise ParameterError(f"unknown prior {prior!r}, expected one of {PRIOR_KINDS}")
    return prior


def _weighted_kernel(K, pi) -> np.ndarray:
    """Validate inputs and return pi * K with a zero diagonal."""
    values = K.values if isinstance(K, KernelMatrix) else K
    V = as_float_matrix(values, "K")
    n, m = V.shape
    if n != m:
        raise ContractViolationError(f"kernel matrix must be square, got {V.shape}")
    if n and (np.diag(V) != 0.0).any():
        raise ContractViolationError("kernel matrix must have a zero diagonal")
    if n and float(V.min()) < 0.0:
        raise ContractViolationError("kernel values must be nonnegative")
    if pi is None:
        return V.copy()
    P = as_float_matrix(pi, "pi")
    if P.shape != V.shape:
        raise ContractViolationError(f"pi must have shape {V.shape}, got {P.shape}")
    if float(P.min()) < 0.0:
        raise ContractViolationError("pi entries must be nonnegative")
    return P * V


def posterior_expectation(K, prior: str, pi=None) -> AffinityMatrix:
    """Expected latent graph under the limiting posterior of a prior family.

    B: independent edges with P_ij = pi K / (1 + pi K).
    D: each row is one draw over its off-diagonal cells, so the
       expectation is pi * K row-normalized.
    E: n edges in total, so the per-draw cell distribution is pi * K
       globally normalized; entries sum to 1.
    """
    check_prior(prior)
    G = _weighted_kernel(K, pi)
    n = G.shape[0]
    if prior == "B":
        return AffinityMatrix(G / (1.0 + G), prior, BERNOULLI)
    if prior == "D":
        rows = G.sum(axis=1)
        dead = np.nonzero(rows == 0.0)[0]
        if dead.size:
            raise DegenerateRowError(
                f"row {int(dead[0])} has no admissible edge under the D prior")
        return AffinityMatrix(G / rows[:, None], prior, ROW)
    total = G.sum()
    if total == 0.0:
        raise DegenerateRowError("no admissible edge under the E prior")
    return AffinityMatrix(G / total, prior, GLOBAL)


def sample_posterior_graph(K, prior: str, rng: np.random.Generator, pi=None) -> np.ndarray:
    """Draw one latent graph from the limiting posterior.

    Returns an int64 matrix in the latent graph space: zero diagonal, at
    most one edge per row for D, exactly n edges in total for E, and
    independent 0/1 entries for B.  All randomness comes from ``rng``.
    """
    check_prior(prior)
    G = _weighted_kernel(K, pi)
    n = G.shape[0]
    if prior == "B":
        p = G / (1.0 + G)
        return (rng.random((n, n)) < p).astype(np.int64)
    if prior == "D":
        rows = G.sum(axis=1)
        dead = np.nonzero(rows == 0.0)[0]
        if dead.size:
            raise DegenerateRowError(
                f"row {int(dead[0])} has no admissible edge under the D prior")
        cdf = np.cumsum(G / rows[:, None], axis=1)
        cdf /= cdf[:, -1:]
        # u in (0, 1] with a strict comparison never selects a
        # zero-probability cell, the diagonal in particular.
        u = 1.0 - rng.random((n, 1))
        idx = (cdf < u).sum(axis=1)
        W = np.zeros((n, n), dtype=np.int64)
        W[np.arange(n), idx] = 1
        return W
    total = G.sum()
    if total == 0.0:
        raise DegenerateRowError("no admissible edge under the E prior")
    off = ~np.eye(n, dtype=bool)
    p = G[off] / total
    counts = rng.multinomial(n, p / p.sum())
    W = np.zeros((n, n), dtype=np.int64)
    W[off] = counts
    return W


def symmetrize_row_affinity(P: AffinityMatrix) -> AffinityMatrix:
    """P + P^T of a row-normalized affinity; total mass becomes 2n.

    Kept unnormalized on purpose: dividing by 2n only rescales the
    attraction term of the couplings built from it.
    """
    if P.normalization != ROW:
        raise ContractViolationError(
            f"expected a row-normalized affinity, got {P.normalization!r}")
    return replace(P, values=P.values + P.values.T, normalization=SYMMETRIZED_ROW)


def umap_threshold_prob(P: AffinityMatrix) -> AffinityMatrix:
    """Probability that edge {i, j} exists in at least one direction.

    The probabilistic-OR P_ij + P_ji - P_ij P_ji of an elementwise
    Bernoulli affinity; symmetric with entries in [0, 1].
    """
    if P.normalization != BERNOULLI:
        raise ContractViolationError(
            f"expected an elementwise bernoulli affinity, got {P.normalization!r}")
    V = P.values
    return replace(P, values=V + V.T - V * V.T, normalization=THRESHOLDED_BERNOULLI)
