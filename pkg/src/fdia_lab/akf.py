"""Adaptive Kalman filtering with online noise-statistics estimation.

Two per-sample state machines over the same predict/update skeleton:

* ``Classic``: jointly re-estimates the process-noise mean/covariance and
  the measurement-noise mean/covariance with a forgetting factor. Both
  covariance updates contain subtracted mean-square-error terms, so on
  higher-order systems the estimated covariance diagonals can be driven
  negative and the filter diverges. That behaviour is intentional here;
  it is the documented deficiency the improved variant removes.
* ``Improved``: treats the measurement noise as known (covariance held
  fixed, mean zero) and rebuilds the process-noise covariance purely from
  the gained-residual outer product, a convex combination of positive
  semidefinite terms. Diagonals therefore stay non-negative at every step.

Measurements are vectors of any width; the rest of this package drives the
filters with the scalar sinusoidal measurement model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, SingularMatrixError
from .io_utils import write_csv
from .numerics import PIVOT_RTOL, solve_matrix
from .signal_model import SignalParams, Trace, observation_row


class Variant(enum.Enum):
    CLASSIC = "classic"
    IMPROVED = "improved"


@dataclass(frozen=True)
class FilterInit:
    """Initial state estimate and noise statistics."""

    x0: np.ndarray          # (n,)
    err_cov0: np.ndarray    # (n, n)
    proc_cov0: np.ndarray   # (n, n) process-noise covariance guess
    meas_cov0: np.ndarray   # (k, k) measurement-noise covariance guess
    proc_mean0: np.ndarray  # (n,)
    meas_mean0: np.ndarray  # (k,)


@dataclass(frozen=True)
class FilterConfig:
    transition: np.ndarray                     # (n, n) state transition
    noise_gain: np.ndarray                     # (n, n) noise driving matrix
    obs_at: Callable[[int], np.ndarray]        # tick -> (k, n) measurement matrix
    init: FilterInit
    forgetting: float = 0.98
    meas_cov_fixed: np.ndarray | None = None   # (k, k); required by Improved

    def __post_init__(self):
        if not 0.0 < self.forgetting < 1.0:
            raise ConfigError("forgetting factor must lie strictly in (0, 1)")
        n = self.transition.shape[0]
        if self.transition.shape != (n, n) or self.noise_gain.shape != (n, n):
            raise ConfigError("transition and noise_gain must be square and same size")


@dataclass
class FilterState:
    """Everything carried from one sample to the next."""

    t: int
    x: np.ndarray            # state estimate
    err_cov: np.ndarray      # estimation error covariance
    proc_mean: np.ndarray    # estimated process-noise mean
    proc_cov: np.ndarray     # estimated process-noise covariance
    meas_mean: np.ndarray    # estimated measurement-noise mean
    meas_cov: np.ndarray     # estimated measurement-noise covariance


@dataclass(frozen=True)
class StepOutput:
    t: int
    x_pred: np.ndarray
    x_hat: np.ndarray
    innovation: np.ndarray   # (k,)
    gain: np.ndarray         # (n, k)


def initial_state(cfg: FilterConfig) -> FilterState:
    init = cfg.init
    return FilterState(
        t=0,
        x=np.array(init.x0, dtype=float),
        err_cov=np.array(init.err_cov0, dtype=float),
        proc_mean=np.array(init.proc_mean0, dtype=float),
        proc_cov=np.array(init.proc_cov0, dtype=float),
        meas_mean=np.array(init.meas_mean0, dtype=float),
        meas_cov=np.array(init.meas_cov0, dtype=float),
    )


def weighting_coefficient(t: int, forgetting: float) -> float:
    """Forgetting-factor weight c_t = (1 - g) / (1 - g^(t+1)).

    Equals 1 at t = 0 and decreases monotonically toward 1 - g.
    """
    if not 0.0 < forgetting < 1.0:
        raise ConfigError("forgetting factor must lie strictly in (0, 1)")
    if t < 0:
        raise ConfigError("tick must be non-negative")
    return (1.0 - forgetting) / (1.0 - forgetting ** (t + 1))


def predict(state: FilterState, cfg: FilterConfig) -> tuple[np.ndarray, np.ndarray]:
    """One-step state and covariance prediction."""
    b, u = cfg.transition, cfg.noise_gain
    x_pred = b @ state.x + u @ state.proc_mean
    cov_pred = b @ state.err_cov @ b.T + u @ state.proc_cov @ u.T
    return x_pred, cov_pred


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _measurement_update(state, cfg, z_t, meas_cov, meas_mean):
    """Shared gain/update core; returns intermediates for the variants."""
    z_t = np.atleast_1d(np.asarray(z_t, dtype=float))
    h = np.atleast_2d(cfg.obs_at(state.t))
    if h.shape != (len(z_t), len(state.x)):
        raise DimensionError(
            f"observation matrix {h.shape} does not map state {len(state.x)} "
            f"to measurement {len(z_t)}"
        )
    x_pred, cov_pred = predict(state, cfg)
    innovation = z_t - h @ x_pred - meas_mean
    innov_cov = h @ cov_pred @ h.T + meas_cov
    # gain = cov_pred H' (H cov_pred H' + meas_cov)^-1; the scalar-measurement
    # path avoids the general solve, everything else goes through it.
    if innov_cov.shape == (1, 1):
        s = innov_cov[0, 0]
        if abs(s) <= PIVOT_RTOL * max(abs(s), 1e-300):
            raise SingularMatrixError(column=0, pivot=float(s))
        gain = (cov_pred @ h.T) / s
    else:
        gain = solve_matrix(innov_cov, (cov_pred @ h.T).T).T
    x_new = x_pred + gain @ innovation
    eye = np.eye(len(state.x))
    cov_new = _symmetrize((eye - gain @ h) @ cov_pred)
    return z_t, h, x_pred, cov_pred, innovation, gain, x_new, cov_new


def update_classic(state: FilterState, z_t, cfg: FilterConfig) -> tuple[FilterState, StepOutput]:
    """One classic adaptive step: update the estimate, then re-estimate all
    four noise statistics with the forgetting-factor weight."""
    c = weighting_coefficient(state.t, cfg.forgetting)
    (z_vec, h, x_pred, cov_pred, innovation, gain,
     x_new, cov_new) = _measurement_update(state, cfg, z_t, state.meas_cov, state.meas_mean)

    b = cfg.transition
    gained = gain @ innovation
    proc_mean = (1.0 - c) * state.proc_mean + c * (x_new - b @ state.x)
    proc_cov = (1.0 - c) * state.proc_cov + c * (
        np.outer(gained, gained) + cov_new - b @ state.err_cov @ b.T
    )
    meas_mean = (1.0 - c) * state.meas_mean + c * (z_vec - h @ x_pred)
    meas_cov = (1.0 - c) * state.meas_cov + c * (
        np.outer(innovation, innovation) - h @ cov_pred @ h.T
    )

    new_state = FilterState(
        t=state.t + 1, x=x_new, err_cov=cov_new,
        proc_mean=proc_mean, proc_cov=proc_cov,
        meas_mean=meas_mean, meas_cov=meas_cov,
    )
    out = StepOutput(t=state.t, x_pred=x_pred, x_hat=x_new,
                     innovation=innovation, gain=gain)
    return new_state, out


def update_improved(state: FilterState, z_t, cfg: FilterConfig) -> tuple[FilterState, StepOutput]:
    """One improved step: measurement noise fixed and zero-mean, and the
    process-noise covariance rebuilt only from the gained-residual outer
    product, so its diagonal can never go negative."""
    if cfg.meas_cov_fixed is None:
        raise ConfigError("improved variant requires meas_cov_fixed")
    c = weighting_coefficient(state.t, cfg.forgetting)
    zero_mean = np.zeros_like(state.meas_mean)
    (_, _, x_pred, _, innovation, gain,
     x_new, cov_new) = _measurement_update(state, cfg, z_t, cfg.meas_cov_fixed, zero_mean)

    b = cfg.transition
    gained = gain @ innovation
    proc_mean = (1.0 - c) * state.proc_mean + c * (x_new - b @ state.x)
    proc_cov = (1.0 - c) * state.proc_cov + c * np.outer(gained, gained)

    new_state = FilterState(
        t=state.t + 1, x=x_new, err_cov=cov_new,
        proc_mean=proc_mean, proc_cov=proc_cov,
        meas_mean=zero_mean, meas_cov=np.array(cfg.meas_cov_fixed, dtype=float),
    )
    out = StepOutput(t=state.t, x_pred=x_pred, x_hat=x_new,
                     innovation=innovation, gain=gain)
    return new_state, out


def step(state: FilterState, z_t, cfg: FilterConfig,
         variant: Variant) -> tuple[FilterState, StepOutput]:
    if variant is Variant.CLASSIC:
        return update_classic(state, z_t, cfg)
    return update_improved(state, z_t, cfg)


def run(trace: Trace, cfg: FilterConfig, variant: Variant) -> list[StepOutput]:
    """Filter every sample of a trace in order."""
    if len(trace) == 0:
        raise ConfigError("trace must be non-empty")
    state = initial_state(cfg)
    outputs = []
    for z_t in trace.z:
        state, out = step(state, z_t, cfg, variant)
        outputs.append(out)
    return outputs


def run_measurements(zs: Sequence, cfg: FilterConfig,
                     variant: Variant) -> list[StepOutput]:
    """Filter a bare measurement sequence (vector or scalar entries)."""
    state = initial_state(cfg)
    outputs = []
    for z_t in zs:
        state, out = step(state, z_t, cfg, variant)
        outputs.append(out)
    return outputs


def config_for_sinusoid(params: SignalParams, z0: float,
                        forgetting: float = 0.98) -> FilterConfig:
    """Filter configuration for the 2-state sinusoidal measurement model.

    Identity transition and noise gain; the estimate starts at [z0, 0]
    (the first measurement read at tick 0, where the observation row is
    [1, 0]); noise statistics start from the model's sigmas.
    """
    init = FilterInit(
        x0=np.array([z0, 0.0]),
        err_cov0=np.eye(2),
        proc_cov0=params.sigma_process ** 2 * np.eye(2),
        meas_cov0=np.array([[params.sigma_meas ** 2]]),
        proc_mean0=np.zeros(2),
        meas_mean0=np.zeros(1),
    )
    return FilterConfig(
        transition=np.eye(2),
        noise_gain=np.eye(2),
        obs_at=lambda t: observation_row(t, params.omega),
        init=init,
        forgetting=forgetting,
        meas_cov_fixed=np.array([[params.sigma_meas ** 2]]),
    )


def write_filter_log_csv(trace: Trace, outputs: Sequence[StepOutput], path) -> None:
    """Per-sample log for the scalar-measurement 2-state model."""
    if outputs and (outputs[0].x_hat.shape != (2,) or outputs[0].innovation.shape != (1,)):
        raise DimensionError("filter log format expects 2 states and a scalar measurement")
    rows = []
    for z_t, out in zip(trace.z, outputs):
        rows.append([
            out.t, z_t,
            out.x_pred[0], out.x_pred[1],
            out.x_hat[0], out.x_hat[1],
            out.innovation[0],
            out.gain[0, 0], out.gain[1, 0],
        ])
    write_csv(path, ["t", "z", "x_pred1", "x_pred2", "x_hat1", "x_hat2",
                     "e", "gain1", "gain2"], rows)
