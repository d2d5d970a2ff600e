"""Two-state sinusoidal voltage measurement process.

A single-point voltage signal V_a*cos(omega*t + psi) is carried by the
state pair (x1, x2) = (V_a*cos(psi), V_a*sin(psi)). The state is constant
up to process noise (the transition matrix is the identity) and the scalar
measurement at tick t reads the state through the time-varying row
[cos(omega*t), -sin(omega*t)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .io_utils import read_csv, write_csv
from .numerics import Matrix


@dataclass(frozen=True)
class SignalParams:
    """Process parameters: angular rate per tick, noise levels, RNG seed."""

    omega: float
    sigma_process: float = 0.0
    sigma_meas: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigError("omega must be positive")
        if self.sigma_process < 0 or self.sigma_meas < 0:
            raise ConfigError("noise standard deviations must be non-negative")


@dataclass(frozen=True)
class SignalState:
    """Amplitude-phase components of the voltage signal."""

    x1: float
    x2: float


@dataclass(frozen=True)
class Trace:
    """A simulated run: per-tick true states and scalar measurements."""

    ticks: np.ndarray   # (n,) int
    states: np.ndarray  # (n, 2)
    z: np.ndarray       # (n,)

    def __post_init__(self):
        n = len(self.ticks)
        if self.states.shape != (n, 2) or self.z.shape != (n,):
            raise DataError("trace arrays have inconsistent lengths")
        if n > 1 and not np.all(np.diff(self.ticks) > 0):
            raise DataError("trace ticks must be strictly increasing")

    def __len__(self) -> int:
        return len(self.ticks)

    def state_at(self, i: int) -> SignalState:
        return SignalState(float(self.states[i, 0]), float(self.states[i, 1]))

    @property
    def measurements(self) -> list[tuple[int, float]]:
        return [(int(t), float(v)) for t, v in zip(self.ticks, self.z)]


def observation_row(t: int, omega: float) -> Matrix:
    """The 1x2 measurement row [cos(omega*t), -sin(omega*t)] at tick t."""
    angle = omega * t
    return np.array([[math.cos(angle), -math.sin(angle)]])


def simulate(params: SignalParams, initial: SignalState, n: int) -> Trace:
    """Run the process for n ticks; deterministic for a fixed seed.

    x(t+1) = x(t) + eta(t) with eta ~ N(0, sigma_process^2 I), and
    z(t) = [cos(omega t), -sin(omega t)] . x(t) + zeta(t),
    zeta ~ N(0, sigma_meas^2).
    """
    if n < 1:
        raise ConfigError("trace length must be at least 1")
    rng = np.random.default_rng(params.seed)
    etas = rng.normal(0.0, params.sigma_process, size=(n - 1, 2))
    zetas = rng.normal(0.0, params.sigma_meas, size=n)

    states = np.empty((n, 2))
    states[0] = (initial.x1, initial.x2)
    if n > 1:
        states[1:] = states[0] + np.cumsum(etas, axis=0)

    ticks = np.arange(n)
    angles = params.omega * ticks
    z = np.cos(angles) * states[:, 0] - np.sin(angles) * states[:, 1] + zetas
    return Trace(ticks=ticks, states=states, z=z)


def amplitude_phase(state: SignalState) -> tuple[float, float]:
    """Recover (V_a, psi) from the state components."""
    return math.hypot(state.x1, state.x2), math.atan2(state.x2, state.x1)


def write_trace_csv(trace: Trace, path) -> None:
    rows = zip(trace.ticks, trace.states[:, 0], trace.states[:, 1], trace.z)
    write_csv(path, ["t", "x1", "x2", "z"], rows)


def read_trace_csv(path) -> Trace:
    header, rows = read_csv(path)
    if header != ["t", "x1", "x2", "z"]:
        raise DataError(f"unexpected trace header: {header}")
    ticks = np.array([int(r[0]) for r in rows])
    states = np.array([[float(r[1]), float(r[2])] for r in rows]).reshape(len(rows), 2)
    z = np.array([float(r[3]) for r in rows])
    return Trace(ticks=ticks, states=states, z=z)


def write_labels_csv(ticks: np.ndarray, labels: np.ndarray, path) -> None:
    write_csv(path, ["t", "label"], zip(ticks, labels.astype(int)))


def read_labels_csv(path) -> tuple[np.ndarray, np.ndarray]:
    header, rows = read_csv(path)
    if header != ["t", "label"]:
        raise DataError(f"unexpected labels header: {header}")
    ticks = np.array([int(r[0]) for r in rows])
    labels = np.array([int(r[1]) for r in rows])
    return ticks, labels
