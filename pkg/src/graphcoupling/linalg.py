"""Dense linear-algebra primitives used throughout the package.

All routines operate on float64 row-major arrays and are deterministic:
the same input bytes always produce the same output bytes.

Functions
---------
sym_eig            full symmetric eigendecomposition, eigenvalues descending
center_columns     subtract the column mean from every column
pairwise_sq_dists  squared Euclidean distance matrix
"""

from typing import NamedTuple

import numpy as np

from .errors import ContractViolationError, NumericalError

#: Relative asymmetry tolerated by sym_eig before the input is rejected.
SYMMETRY_RTOL = 1e-10


class SymEigResult(NamedTuple):
    eigenvalues: np.ndarray   # shape (n,), descending
    eigenvectors: np.ndarray  # shape (n, n), column k pairs with eigenvalues[k]


def as_float_matrix(a, name: str = "array") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting anything non-finite."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got ndim={out.ndim}")
    if not np.isfinite(out).all():
        raise ContractViolationError(f"{name} contains non-finite entries")
    return out


def sym_eig(A) -> SymEigResult:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order.  Each eigenvector is
    normalized so that its largest-magnitude component is positive, ties
    broken by the lowest index, which fixes the sign freedom and makes
    repeated calls bit-reproducible.

    Raises
    ------
    ContractViolationError
        If ``A`` is not square or deviates from symmetry by more than
        ``SYMMETRY_RTOL`` relative to its largest entry.
    NumericalError
        If the underlying eigensolver fails to converge.
    """
    A = as_float_matrix(A, "A")
    n, m = A.shape
    if n != m:
        raise ContractViolationError(f"A must be square, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max())) if n else 1.0
    if n and float(np.abs(A - A.T).max()) > SYMMETRY_RTOL * scale:
        raise ContractViolationError("A is not symmetric within tolerance")
    try:
        w, V = np.linalg.eigh((A + A.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from None
    # eigh returns ascending order; flip to descending.
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    for k in range(n):
        lead = int(np.argmax(np.abs(V[:, k])))
        if V[lead, k] < 0.0:
            V[:, k] = -V[:, k]
    return SymEigResult(w, V)


def center_columns(X) -> np.ndarray:
    """Return a copy of ``X`` with every column shifted to zero mean."""
    X = as_float_matrix(X, "X")
    return X - X.mean(axis=0, keepdims=True)


def pairwise_sq_dists(X) -> np.ndarray:
    """Matrix of squared Euclidean distances between the rows of ``X``.

    The result is exactly symmetric with an exactly zero diagonal and no
    negative entries.  Columns are centered before the Gram expansion, so
    adding a constant row vector to every row leaves the result unchanged
    up to roundoff.
    """
    Xc = center_columns(X)
    # Coordinates near the float range overflow the Gram expansion; the
    # resulting inf/nan entries are reported as inf so callers can treat
    # the configuration as out of range rather than invalid.
    with np.errstate(over="ignore", invalid="ignore"):
        G = Xc @ Xc.T
        sq = np.diag(G).copy()
        D = sq[:, None] + sq[None, :] - 2.0 * G
        D = (D + D.T) / 2.0
    D[np.isnan(D)] = np.inf
    np.clip(D, 0.0, None, out=D)
    np.fill_diagonal(D, 0.0)
    return D
