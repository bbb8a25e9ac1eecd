"""Cross-entropy couplings between input affinities and a latent embedding.

Each method couples a fixed input-side affinity P with the latent
affinity induced by an embedding Z through a Bernoulli or multinomial
cross entropy.  With the right input normalization these reproduce the
classical neighbor-embedding objectives:

``sne``       row-normalized P against row-normalized latent Q
``tsne``      symmetrized P + P^T against globally normalized latent Q
``largevis``  symmetrized P + P^T against edgewise K / (1 + K)
``umap``      thresholded-OR probabilities against edgewise K / (1 + K)

The symmetrized input is used with its natural total mass 2n; pass
``classic_scale=True`` to divide it by 2n for parity with common t-SNE
implementations (this rescales the attraction term, not the minimizers).

Losses are reported in nats.  A loss of +inf is a sentinel for an
embedding that the method cannot score (collapsed latent mass), not an
error; gradients require a finite loss.
"""

import copy
import math

import numpy as np

from .errors import ContractViolationError, ParameterError
from .kernels import GAUSSIAN, STUDENT, check_kind, log_kernel
from .linalg import as_float_matrix, pairwise_sq_dists
from .posterior import (
    ROW,
    SYMMETRIZED_ROW,
    THRESHOLDED_BERNOULLI,
    AffinityMatrix,
)

SNE = "sne"
TSNE = "tsne"
LARGEVIS = "largevis"
UMAP = "umap"
METHOD_KINDS = (SNE, TSNE, LARGEVIS, UMAP)

#: Input normalization each method requires.
REQUIRED_NORMALIZATION = {
    SNE: ROW,
    TSNE: SYMMETRIZED_ROW,
    LARGEVIS: SYMMETRIZED_ROW,
    UMAP: THRESHOLDED_BERNOULLI,
}

#: Latent kernel used when the caller does not pick one.
DEFAULT_LATENT_KERNEL = {
    SNE: GAUSSIAN,
    TSNE: STUDENT,
    LARGEVIS: STUDENT,
    UMAP: STUDENT,
}


def check_method(method: str) -> str:
    if method not in METHOD_KINDS:
        raise ParameterError(f"unknown method {method!r}, expected one of {METHOD_KINDS}")
    return method


class CouplingProblem:
    """A method, its input affinity, and the latent kernel to couple with."""

    def __init__(self, method: str, affinity: AffinityMatrix, latent_kernel: str = None,
                 classic_scale: bool = False):
        check_method(method)
        required = REQUIRED_NORMALIZATION[method]
        if affinity.normalization != required:
            raise ContractViolationError(
                f"method {method!r} needs a {required!r} affinity, "
                f"got {affinity.normalization!r}")
        P = as_float_matrix(affinity.values, "affinity")
        n, m = P.shape
        if n != m:
            raise ContractViolationError(f"affinity must be square, got {P.shape}")
        if n and (np.diag(P) != 0.0).any():
            raise ContractViolationError("affinity diagonal must be zero")
        if n and float(P.min()) < 0.0:
            raise ContractViolationError("affinity entries must be nonnegative")
        if (affinity.normalization == THRESHOLDED_BERNOULLI and n
                and float(P.max()) > 1.0):
            raise ContractViolationError(
                "thresholded-bernoulli affinity entries must lie in [0, 1]")
        if classic_scale:
            if affinity.normalization != SYMMETRIZED_ROW:
                raise ParameterError(
                    "classic_scale only applies to symmetrized-row affinities")
            P = P / (2.0 * n)
        self.method = method
        self.P = P
        self.latent_kernel = check_kind(latent_kernel or DEFAULT_LATENT_KERNEL[method])

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def with_input_scaled(self, factor: float) -> "CouplingProblem":
        """Copy of the problem with the input affinity multiplied by ``factor``."""
        if not (math.isfinite(factor) and factor > 0.0):
            raise ParameterError(f"scale factor must be positive, got {factor}")
        clone = copy.copy(self)
        clone.P = self.P * factor
        return clone

    def expected_graph(self) -> np.ndarray:
        """Mean latent graph the coupling pulls toward; drives attraction.

        For the symmetrized methods each undirected edge carries half of
        P + P^T per direction, hence the division by two.
        """
        if self.method in (TSNE, LARGEVIS):
            return self.P / 2.0
        return self.P.copy()

    def _check_z(self, Z) -> np.ndarray:
        Z = as_float_matrix(Z, "Z")
        if Z.shape[0] != self.n:
            raise ContractViolationError(
                f"Z has {Z.shape[0]} rows but the affinity is {self.n}x{self.n}")
        return Z

    def _terms(self, Z):
        """(attraction, repulsion); their float sum is the loss."""
        Z = self._check_z(Z)
        n = self.n
        E = self.expected_graph()
        D = pairwise_sq_dists(Z)
        if not np.isfinite(D).all():
            # Squared distances overflowed; the configuration is out of
            # range, not invalid, so score it with the infinite sentinel.
            return math.inf, math.inf
        logK = log_kernel(D, self.latent_kernel)
        attraction = float(-(E * logK).sum())
        off = ~np.eye(n, dtype=bool)
        masked = np.where(off, logK, -np.inf)
        if self.method == SNE:
            peaks = masked.max(axis=1)
            if not np.isfinite(peaks).all():
                return attraction, math.inf
            log_rowsum = peaks + np.log(np.exp(masked - peaks[:, None]).sum(axis=1))
            repulsion = float((self.P.sum(axis=1) * log_rowsum).sum())
        elif self.method == TSNE:
            peak = masked.max()
            if not np.isfinite(peak):
                return attraction, math.inf
            log_total = peak + np.log(np.exp(masked - peak).sum())
            repulsion = float(self.P.sum() / 2.0 * log_total)
        else:
            # Both edgewise methods reduce to the same ordered-pair form:
            # the (1 - P)-weighted and P-weighted log(1 + K) terms merge.
            K = np.exp(logK)
            np.fill_diagonal(K, 0.0)
            repulsion = float(np.log1p(K)[off].sum())
        if not math.isfinite(repulsion):
            return attraction, math.inf
        return attraction, repulsion

    def loss(self, Z) -> float:
        """Cross-entropy loss of the embedding, +inf if unscorable."""
        attraction, repulsion = self._terms(Z)
        return attraction + repulsion

    def attraction_repulsion(self, Z):
        """Split of the loss into attraction and repulsion.

        Attraction is the expected-graph weighted sum of -log latent
        kernel values; repulsion is everything else.  The two terms are
        the exact float summands of :meth:`loss`, so their sum
        reproduces it bit for bit.
        """
        return self._terms(Z)

    def grad(self, Z) -> np.ndarray:
        """Gradient of the loss with respect to Z.

        Requires a finite loss at Z.  Computed through the shared chain
        factor G = dLoss/dD with the kernel derivative folded in
        analytically: the Student kernel contributes -K^2 and the
        Gaussian -K/2 per unit of squared distance.
        """
        Z = self._check_z(Z)
        n = self.n
        E = self.expected_graph()
        D = pairwise_sq_dists(Z)
        logK = log_kernel(D, self.latent_kernel)
        K = np.exp(logK)
        np.fill_diagonal(K, 0.0)
        off = ~np.eye(n, dtype=bool)
        if self.method == SNE:
            masked = np.where(off, logK, -np.inf)
            peaks = masked.max(axis=1)
            log_rowsum = peaks + np.log(np.exp(masked - peaks[:, None]).sum(axis=1))
            # exp of (logK - log normalizer) <= 1, so this cannot overflow
            # even when the normalizer itself underflows
            rho = self.P.sum(axis=1)[:, None] * np.exp(masked - log_rowsum[:, None])
        elif self.method == TSNE:
            masked = np.where(off, logK, -np.inf)
            peak = masked.max()
            log_total = peak + np.log(np.exp(masked - peak).sum())
            rho = (self.P.sum() / 2.0) * np.exp(masked - log_total)
        else:
            rho = K / (1.0 + K)
        if self.latent_kernel == GAUSSIAN:
            G = (E - rho) / 2.0
        else:
            G = (E - rho) * K
        F = G + G.T
        return 2.0 * (F.sum(axis=1)[:, None] * Z - F @ Z)
