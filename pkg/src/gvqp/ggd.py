"""Zero-mean generalized Gaussian parameter estimation by moment matching.

The shape alpha is found by inverting the moment ratio

    rho(alpha) = Gamma(2/alpha)^2 / (Gamma(1/alpha) * Gamma(3/alpha))

against the sample ratio r_hat = (mean |x|)^2 / mean(x^2) over a precomputed
grid; the spread is sigma = sqrt(mean(x^2)). alpha = 2 recovers the Gaussian,
alpha = 1 the Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

ALPHA_GRID_MIN = 0.2
ALPHA_GRID_MAX = 10.0
ALPHA_GRID_STEP = 0.001
MIN_SAMPLES = 16

ALPHA_GRID = np.linspace(
    ALPHA_GRID_MIN,
    ALPHA_GRID_MAX,
    int(round((ALPHA_GRID_MAX - ALPHA_GRID_MIN) / ALPHA_GRID_STEP)) + 1,
)
# Moment ratio table, built once. Strictly increasing in alpha.
RHO_TABLE = special.gamma(2.0 / ALPHA_GRID) ** 2 / (
    special.gamma(1.0 / ALPHA_GRID) * special.gamma(3.0 / ALPHA_GRID)
)


@dataclass(frozen=True)
class GgdParams:
    alpha: float
    sigma: float
    degenerate: bool = False


def gamma_fn(x: float) -> float:
    """Gamma function on the positive reals."""
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return float(special.gamma(x))


def fit_ggd(samples) -> GgdParams:
    """Fit (alpha, sigma) to a flattened coefficient map.

    All-zero input is a legal degenerate case (a perfectly flat map) and is
    encoded as (ALPHA_GRID_MAX, 0) with the degenerate flag set.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    x = x[np.isfinite(x)]
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} finite samples, got {x.size}")
    second = float(np.mean(x * x))
    if second == 0.0:
        return GgdParams(alpha=ALPHA_GRID_MAX, sigma=0.0, degenerate=True)
    mean_abs = float(np.mean(np.abs(x)))
    r_hat = mean_abs * mean_abs / second
    idx = int(np.argmin(np.abs(RHO_TABLE - r_hat)))
    return GgdParams(alpha=float(ALPHA_GRID[idx]), sigma=float(np.sqrt(second)))
