"""Knowledge-driven detection on filter outputs.

Two per-tick metrics with 3-sigma thresholds: the absolute deviation
between predicted and observed measurement (Euclidean channel) and the
normalized state residual ||x - x_hat|| / (||x|| * ||x_hat||) where the
reference x is the one-step prediction (the true state is unavailable in
live detection). The sigma of each channel is calibrated from signed,
zero-mean samples on an attack-free warm-up window so that the k-sigma
rule attains the expected two-sided false-alarm rate (~0.27% at k = 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .io_utils import write_csv
from .numerics import Vector, as_vector, norm2

MIN_CALIBRATION_SAMPLES = 100


@dataclass(frozen=True)
class Thresholds:
    sigma: float
    k: float = 3.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("threshold sigma must be positive")
        if self.k <= 0:
            raise ConfigError("threshold multiplier must be positive")

    @property
    def limit(self) -> float:
        return self.k * self.sigma


@dataclass(frozen=True)
class PassiveVerdict:
    t: int
    euclidean_d: float
    residual_r: float
    flag: bool


def calibrate_sigma(clean_metrics: Sequence[float]) -> float:
    """Sample standard deviation (n-1 denominator) of an attack-free window."""
    values = np.asarray(clean_metrics, dtype=float)
    if values.ndim != 1 or len(values) < MIN_CALIBRATION_SAMPLES:
        raise DataError(
            f"calibration needs at least {MIN_CALIBRATION_SAMPLES} attack-free samples, "
            f"got {values.size}"
        )
    if np.ptp(values) == 0.0:
        raise DataError("calibration window is constant; threshold undefined")
    return float(np.std(values, ddof=1))


def euclidean_deviation(estimated: float, observed: float) -> float:
    """Absolute deviation between predicted and observed signal values."""
    return abs(float(estimated) - float(observed))


def residual_metric(x: Vector, x_hat: Vector) -> float:
    """Normalized residual ||x - x_hat|| / (||x|| * ||x_hat||)."""
    x = as_vector(x)
    x_hat = as_vector(x_hat, length=len(x))
    nx, nh = norm2(x), norm2(x_hat)
    if nx == 0.0 or nh == 0.0:
        raise DataError("residual metric undefined for zero-norm state")
    return norm2(x - x_hat) / (nx * nh)


def decide(metric: float, th: Thresholds) -> bool:
    """True iff the metric reaches k * sigma (inclusive)."""
    if metric < 0:
        raise DataError("detection metrics are non-negative")
    return metric >= th.limit


def channel_samples(outputs, zs, obs_rows) -> tuple[np.ndarray, np.ndarray]:
    """Signed per-tick calibration samples for both channels.

    Euclidean channel: H x_pred - z (zero-mean under no attack).
    Residual channel: the normalized residual with the sign of the
    Euclidean deviation attached, likewise zero-mean by symmetry.
    """
    deviations = np.empty(len(outputs))
    signed_residuals = np.empty(len(outputs))
    for i, (out, z_t, h) in enumerate(zip(outputs, zs, obs_rows)):
        dev = float((h @ out.x_pred)[0]) - float(z_t)
        deviations[i] = dev
        r = residual_metric(out.x_pred, out.x_hat)
        signed_residuals[i] = math.copysign(r, dev) if dev != 0.0 else r
    return deviations, signed_residuals


def calibrate_channels(outputs, zs, obs_rows, warmup: int,
                       skip: int = 10, k: float = 3.0) -> tuple[Thresholds, Thresholds]:
    """Fit both channel thresholds on an attack-free warm-up window.

    The first ``skip`` ticks are excluded to let the filter settle.
    """
    if warmup > len(outputs):
        raise DataError(f"warm-up window {warmup} exceeds run length {len(outputs)}")
    devs, signed_res = channel_samples(outputs[skip:warmup], zs[skip:warmup],
                                       obs_rows[skip:warmup])
    return (Thresholds(sigma=calibrate_sigma(devs), k=k),
            Thresholds(sigma=calibrate_sigma(signed_res), k=k))


def evaluate_stream(outputs, zs, obs_rows, euclid_th: Thresholds,
                    resid_th: Thresholds, armed_from: int = 0) -> list[PassiveVerdict]:
    """Per-tick verdicts; the flag is the union of both channel decisions.

    Ticks before ``armed_from`` (typically the calibration warm-up window)
    record their metric values but never flag: the thresholds do not exist
    yet while they are being fitted.
    """
    verdicts = []
    for out, z_t, h in zip(outputs, zs, obs_rows):
        d = euclidean_deviation(float((h @ out.x_pred)[0]), float(z_t))
        r = residual_metric(out.x_pred, out.x_hat)
        armed = out.t >= armed_from
        flag = armed and (decide(d, euclid_th) or decide(r, resid_th))
        verdicts.append(PassiveVerdict(t=out.t, euclidean_d=d, residual_r=r, flag=flag))
    return verdicts


def write_verdicts_csv(verdicts: Sequence[PassiveVerdict], path) -> None:
    rows = [[v.t, v.euclidean_d, v.residual_r, v.flag] for v in verdicts]
    write_csv(path, ["t", "euclidean_d", "residual_r", "flag"], rows)
