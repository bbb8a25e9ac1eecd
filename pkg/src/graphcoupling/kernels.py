"""Pairwise similarity kernels and perplexity calibration.

Two kernel families are supported, identified by string:

``"gaussian"``   k(x) = exp(-||x||^2 / 2)
``"student"``    k(x) = 1 / (1 + ||x||^2)      (Student t, one degree of freedom)

A kernel matrix holds K_ij = k((X_i - X_j) / tau_i) with row-specific
bandwidths tau_i > 0 and a zero diagonal by convention.  With unequal
bandwidths K is intentionally not symmetric.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolationError, DegenerateRowError, ParameterError
from .linalg import as_float_matrix, pairwise_sq_dists

GAUSSIAN = "gaussian"
STUDENT = "student"
KERNEL_KINDS = (GAUSSIAN, STUDENT)

#: Entropy tolerance, in bits, for bandwidth calibration.
ENTROPY_TOL = 1e-5
#: Iteration cap shared by bracket expansion and bisection.
MAX_BISECT_ITERS = 64


@dataclass(frozen=True)
class KernelMatrix:
    """A realized kernel matrix plus the settings that produced it."""

    values: np.ndarray
    kind: str
    bandwidths: Optional[np.ndarray] = None


def check_kind(kind: str) -> str:
    if kind not in KERNEL_KINDS:
        raise ParameterError(f"unknown kernel kind {kind!r}, expected one of {KERNEL_KINDS}")
    return kind


def _check_sq_dists(D) -> np.ndarray:
    D = as_float_matrix(D, "D")
    n, m = D.shape
    if n != m:
        raise ContractViolationError(f"distance matrix must be square, got {D.shape}")
    if n and float(D.min()) < 0.0:
        raise ContractViolationError("distance matrix has negative entries")
    return D


def _scaled(D: np.ndarray, bandwidths) -> np.ndarray:
    if bandwidths is None:
        return D
    tau = np.asarray(bandwidths, dtype=np.float64)
    if tau.shape != (D.shape[0],):
        raise ContractViolationError(
            f"bandwidths must have shape ({D.shape[0]},), got {tau.shape}")
    if not (np.isfinite(tau).all() and (tau > 0.0).all()):
        raise ContractViolationError("bandwidths must be finite and positive")
    return D / (tau * tau)[:, None]


def log_kernel(D, kind: str, bandwidths=None) -> np.ndarray:
    """Elementwise log k(.) evaluated on a squared-distance matrix.

    The diagonal comes out as log k(0) = 0; callers that want the zero-
    diagonal convention of :func:`kernel_matrix` must mask it themselves.
    Stable for large distances: no intermediate exponentials are formed.
    """
    check_kind(kind)
    S = _scaled(_check_sq_dists(D), bandwidths)
    if kind == GAUSSIAN:
        return -S / 2.0
    return -np.log1p(S)


def kernel_from_sq_dists(D, kind: str, bandwidths=None) -> KernelMatrix:
    """Kernel matrix from a precomputed squared-distance matrix."""
    values = np.exp(log_kernel(D, kind, bandwidths))
    np.fill_diagonal(values, 0.0)
    tau = None if bandwidths is None else np.asarray(bandwidths, dtype=np.float64).copy()
    return KernelMatrix(values, kind, tau)


def kernel_matrix(X, kind: str, bandwidths=None) -> KernelMatrix:
    """Kernel matrix K_ij = k((X_i - X_j) / tau_i) over the rows of ``X``."""
    return kernel_from_sq_dists(pairwise_sq_dists(X), kind, bandwidths)


def _row_entropy_bits(neg_half_d: np.ndarray, tau: float) -> float:
    """Shannon entropy, in bits, of p_j proportional to exp(-d_j / (2 tau^2))."""
    logits = neg_half_d / (tau * tau)
    logits = logits - logits.max()
    w = np.exp(logits)
    s = w.sum()
    p = w / s
    nz = p > 0.0
    return float(-(p[nz] * np.log2(p[nz])).sum())


def calibrate_bandwidths(D, perplexity: float) -> np.ndarray:
    """Per-row Gaussian bandwidths matching a target perplexity.

    For each row i, finds tau_i such that the Shannon entropy of the
    conditional neighbor distribution p_{j|i} proportional to
    exp(-D_ij / (2 tau_i^2)) equals log2(perplexity) within
    ``ENTROPY_TOL`` bits.  Solved by bisection with geometric bracket
    expansion; both phases are capped at ``MAX_BISECT_ITERS`` steps and
    the midpoint of the final bracket is returned if the cap is hit.

    Raises
    ------
    ParameterError
        If perplexity is outside [1, n - 1].
    DegenerateRowError
        If some row is at distance zero from every other row, which
        makes its neighbor distribution independent of tau.
    """
    D = _check_sq_dists(D)
    n = D.shape[0]
    if n < 2:
        raise ParameterError("calibration needs at least two rows")
    if not (1.0 <= perplexity <= n - 1):
        raise ParameterError(
            f"perplexity must lie in [1, {n - 1}] for n={n}, got {perplexity}")
    target = float(np.log2(perplexity))
    off = ~np.eye(n, dtype=bool)
    tau = np.ones(n, dtype=np.float64)
    for i in range(n):
        d = D[i, off[i]]
        if not d.any():
            raise DegenerateRowError(
                f"row {i} is at distance zero from every other row")
        neg_half_d = -d / 2.0
        lo = hi = 1.0
        h = _row_entropy_bits(neg_half_d, 1.0)
        if abs(h - target) <= ENTROPY_TOL:
            continue
        if h < target:
            for _ in range(MAX_BISECT_ITERS):
                hi *= 2.0
                if _row_entropy_bits(neg_half_d, hi) >= target:
                    break
            lo = hi / 2.0
        else:
            for _ in range(MAX_BISECT_ITERS):
                lo /= 2.0
                if _row_entropy_bits(neg_half_d, lo) <= target:
                    break
            hi = lo * 2.0
        mid = (lo + hi) / 2.0
        for _ in range(MAX_BISECT_ITERS):
            mid = (lo + hi) / 2.0
            h = _row_entropy_bits(neg_half_d, mid)
            if abs(h - target) <= ENTROPY_TOL:
                break
            if h < target:
                lo = mid
            else:
                hi = mid
        tau[i] = mid
    return tau
