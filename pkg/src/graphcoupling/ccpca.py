"""Connected-component PCA: spectral initialization from posterior graphs.

Latent graphs are drawn from the posterior, each is reduced to the
orthogonal projector onto its component-wise constant vectors, and the
projectors are averaged.  PCA of the averaged-projected data then picks
up the directions that separate parts of the data the posterior tends
to keep disconnected, which is what a neighbor embedding needs from its
initialization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graph import cc_projector, connected_components
from .linalg import as_float_matrix
from .posterior import check_prior, sample_posterior_graph
from .spectral import pca


@dataclass(frozen=True)
class CcpcaConfig:
    samples: int = 100
    prior: str = "D"
    q: int = 2
    seed: int = 0

    def validate(self) -> "CcpcaConfig":
        if self.samples < 1:
            raise ParameterError("samples must be at least 1")
        check_prior(self.prior)
        return self


def averaged_projector(K, config: CcpcaConfig = None) -> np.ndarray:
    """Monte-Carlo average of component projectors of posterior graphs.

    Each sample index gets its own deterministically derived generator,
    seeded with (seed, index), so results do not depend on evaluation
    order and a future parallel version would reproduce them.  The
    average of orthogonal projectors is symmetric and doubly stochastic.
    """
    cfg = (config or CcpcaConfig()).validate()
    values = getattr(K, "values", K)
    n = np.asarray(values).shape[0]
    M = np.zeros((n, n), dtype=np.float64)
    for index in range(cfg.samples):
        rng = np.random.default_rng([cfg.seed, index])
        W = sample_posterior_graph(K, cfg.prior, rng)
        M += cc_projector(connected_components(W))
    M /= float(cfg.samples)
    return M


def ccpca(X, K, config: CcpcaConfig = None) -> np.ndarray:
    """PCA scores of the averaged-projector image of X.

    The projected data replaces each point by a posterior-weighted
    average of its component's points, so within-part variation is
    suppressed before the PCA step (which centers its input).
    """
    cfg = (config or CcpcaConfig()).validate()
    X = as_float_matrix(X, "X")
    M = averaged_projector(K, cfg)
    return pca(M @ X, cfg.q)
