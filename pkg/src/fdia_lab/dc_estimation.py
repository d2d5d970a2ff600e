"""DC-model weighted-least-squares state estimation and bad-data detection.

The classic workflow a stealthy injection bypasses: estimate x from
z = Hx + e by minimizing the weighted quadratic objective, then compare
the objective value against a chi-square threshold.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .io_utils import read_json
from .numerics import Vector, as_matrix, as_vector, solve


@dataclass(frozen=True)
class DcSystem:
    """A measurement model: m x n Jacobian, per-channel weights, threshold."""

    jacobian: np.ndarray    # H, (m, n)
    weights: np.ndarray     # diagonal of W, (m,)
    threshold: float        # bad-data limit for the objective value

    def __post_init__(self):
        h = as_matrix(self.jacobian)
        w = as_vector(self.weights, length=h.shape[0])
        if h.shape[0] < h.shape[1]:
            raise ConfigError("system must have at least as many measurements as states")
        if np.any(w <= 0):
            raise ConfigError("weights must be strictly positive")
        if self.threshold <= 0:
            raise ConfigError("threshold must be positive")

    @property
    def m(self) -> int:
        return self.jacobian.shape[0]

    @property
    def n(self) -> int:
        return self.jacobian.shape[1]


@dataclass(frozen=True)
class WlsResult:
    x_hat: np.ndarray
    g_value: float
    flagged: bool


def wls_estimate(sys: DcSystem, z: Vector) -> Vector:
    """argmin over x of (z - Hx)' W (z - Hx), via the normal equations."""
    z = as_vector(z, length=sys.m)
    h = sys.jacobian
    wh = sys.weights[:, None] * h
    return solve(h.T @ wh, h.T @ (sys.weights * z))


def objective(sys: DcSystem, z: Vector, x_hat: Vector) -> float:
    """Weighted squared residual (z - H x_hat)' W (z - H x_hat)."""
    z = as_vector(z, length=sys.m)
    x_hat = as_vector(x_hat, length=sys.n)
    r = z - sys.jacobian @ x_hat
    return float(np.dot(r, sys.weights * r))


def bad_data_check(g_value: float, mu: float) -> bool:
    """True iff the objective exceeds the threshold (strictly)."""
    if g_value < 0:
        raise DataError("objective value cannot be negative")
    if mu <= 0:
        raise ConfigError("threshold must be positive")
    return g_value > mu


def estimate_and_check(sys: DcSystem, z: Vector) -> WlsResult:
    x_hat = wls_estimate(sys, z)
    g = objective(sys, z, x_hat)
    return WlsResult(x_hat=x_hat, g_value=g, flagged=bad_data_check(g, sys.threshold))


def chi_square_threshold(dof: int, significance: float) -> float:
    """Upper-tail chi-square quantile via the Wilson-Hilferty cube approximation.

    Accurate to about 1% for dof >= 3, which is enough for a flag threshold;
    no table and no external dependency.
    """
    if dof < 1:
        raise ConfigError("degrees of freedom must be at least 1")
    if not 0.0 < significance < 1.0:
        raise ConfigError("significance must lie in (0, 1)")
    z = statistics.NormalDist().inv_cdf(1.0 - significance)
    a = 2.0 / (9.0 * dof)
    return dof * (1.0 - a + z * a ** 0.5) ** 3


def default_weights(sigmas) -> np.ndarray:
    """Per-channel weights 1/sigma_i^2 from measurement noise levels."""
    s = as_vector(sigmas)
    if np.any(s <= 0):
        raise ConfigError("channel noise levels must be positive")
    return 1.0 / s ** 2


def load_system(path) -> DcSystem:
    """Build a DcSystem from JSON: {"H": [[...]], "weights": [...], "significance": a}."""
    raw = read_json(path)
    try:
        h = as_matrix(raw["H"])
        weights = as_vector(raw["weights"])
        significance = float(raw.get("significance", 0.01))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad system JSON: {exc}") from exc
    dof = h.shape[0] - h.shape[1]
    if dof < 1:
        raise ConfigError("system JSON leaves no residual degrees of freedom")
    return DcSystem(jacobian=h, weights=weights,
                    threshold=chi_square_threshold(dof, significance))
