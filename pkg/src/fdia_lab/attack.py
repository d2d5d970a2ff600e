"""Construction and injection of false-data attack sequences.

Three attack kinds against a measurement vector:

* ``RANDOM_SINUSOID``: an arbitrary sinusoidal bias on selected sensors.
* ``FRACTION_SCALE``: a fixed fraction of the current measurement added
  on top of it (e.g. +5%).
* ``STEALTHY``: a precomputed bias ac = H d that shifts the estimate by d
  while leaving the weighted-least-squares residual unchanged.

Injection is confined to [onset, onset + duration); an optional period /
duty pair turns the window into a repeating on-off cycle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .io_utils import read_json, write_json
from .numerics import Matrix, Vector, as_matrix, as_vector, norm2


class AttackKind(enum.Enum):
    RANDOM_SINUSOID = "random_sinusoid"
    STEALTHY = "stealthy"
    FRACTION_SCALE = "fraction_scale"


@dataclass(frozen=True)
class SensorSelection:
    """Which sensors the attacker controls (diagonal of the selection matrix)."""

    deltas: tuple[bool, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.deltas, dtype=float)


@dataclass(frozen=True)
class AttackScenario:
    selection: SensorSelection
    kind: AttackKind
    onset: int
    duration: int
    amplitude: float | None = None       # random sinusoid peak
    sinusoid_omega: float | None = None  # random sinusoid angular rate per tick
    fraction: float | None = None        # fractional scaling, e.g. 0.05
    bias: np.ndarray | None = None       # precomputed stealthy ac
    period: int | None = None            # on-off cycle length; None = continuous
    duty: int | None = None              # on-ticks per period

    def __post_init__(self):
        if self.onset < 0:
            raise ConfigError("attack onset must be non-negative")
        if self.duration < 1:
            raise ConfigError("attack duration must be at least 1 tick")
        if self.kind is AttackKind.RANDOM_SINUSOID:
            if self.amplitude is None or self.sinusoid_omega is None:
                raise ConfigError("random sinusoid attack needs amplitude and sinusoid_omega")
        elif self.kind is AttackKind.FRACTION_SCALE:
            if self.fraction is None or self.fraction <= 0:
                raise ConfigError("fraction-scale attack needs a positive fraction")
        elif self.kind is AttackKind.STEALTHY:
            if self.bias is None:
                raise ConfigError("stealthy attack needs a precomputed bias vector")
            if len(self.bias) != len(self.selection.deltas):
                raise DimensionError("stealthy bias length must match sensor count")
        if (self.period is None) != (self.duty is None):
            raise ConfigError("period and duty must be given together")
        if self.period is not None and not 0 < self.duty <= self.period:
            raise ConfigError("duty must lie in (0, period]")


def active_at(scenario: AttackScenario, t: int) -> bool:
    """Whether the attack injects at tick t (window plus duty cycle)."""
    if not scenario.onset <= t < scenario.onset + scenario.duration:
        return False
    if scenario.period is None:
        return True
    return (t - scenario.onset) % scenario.period < scenario.duty


def attack_sequence_value(scenario: AttackScenario, z_t: Vector, t: int) -> np.ndarray:
    """The raw attack sequence y_ac(t) before sensor selection."""
    if scenario.kind is AttackKind.RANDOM_SINUSOID:
        return np.full(len(z_t), scenario.amplitude * math.sin(scenario.sinusoid_omega * t))
    if scenario.kind is AttackKind.FRACTION_SCALE:
        return scenario.fraction * z_t
    return np.asarray(scenario.bias, dtype=float)


def inject(z_t: Vector, scenario: AttackScenario, t: int) -> Vector:
    """Apply the attack to one measurement vector at tick t."""
    z_t = as_vector(z_t)
    if len(z_t) != len(scenario.selection.deltas):
        raise DimensionError(
            f"measurement has {len(z_t)} sensors, scenario selects over "
            f"{len(scenario.selection.deltas)}"
        )
    if not active_at(scenario, t):
        return z_t
    return z_t + scenario.selection.as_array() * attack_sequence_value(scenario, z_t, t)


def labels_for(scenario: AttackScenario, n: int) -> np.ndarray:
    """Per-tick 0/1 attack labels for a trace of length n."""
    return np.array([1 if active_at(scenario, t) else 0 for t in range(n)])


def build_stealthy(h: Matrix, d: Vector) -> Vector:
    """The stealthy bias ac = H d for a desired estimate shift d."""
    h = as_matrix(h)
    d = as_vector(d, length=h.shape[1])
    return h @ d


def attacked_residual_bound(z: Vector, ac: Vector, h: Matrix, x_hat: Vector,
                            d: Vector) -> tuple[float, float]:
    """Attacked residual norm and its triangle-inequality bound.

    e_ac = ||(z + ac) - H(x_hat + d)|| <= ||z - H x_hat|| + ||ac - H d||.
    """
    z = as_vector(z)
    ac = as_vector(ac, length=len(z))
    h = as_matrix(h, rows=len(z))
    x_hat = as_vector(x_hat, length=h.shape[1])
    d = as_vector(d, length=h.shape[1])
    e_ac = norm2((z + ac) - h @ (x_hat + d))
    bound = norm2(z - h @ x_hat) + norm2(ac - h @ d)
    return e_ac, bound


def scenario_to_json(scenario: AttackScenario) -> dict:
    obj = {
        "kind": scenario.kind.value,
        "onset": scenario.onset,
        "duration": scenario.duration,
        "sensors": [bool(x) for x in scenario.selection.deltas],
    }
    if scenario.amplitude is not None:
        obj["amplitude"] = scenario.amplitude
    if scenario.sinusoid_omega is not None:
        obj["sinusoid_omega"] = scenario.sinusoid_omega
    if scenario.fraction is not None:
        obj["fraction"] = scenario.fraction
    if scenario.bias is not None:
        obj["d"] = [float(x) for x in scenario.bias]
    if scenario.period is not None:
        obj["period"] = scenario.period
        obj["duty"] = scenario.duty
    return obj


def scenario_from_json(obj: dict) -> AttackScenario:
    try:
        kind = AttackKind(obj["kind"])
        selection = SensorSelection(tuple(bool(x) for x in obj["sensors"]))
        bias = np.asarray(obj["d"], dtype=float) if "d" in obj else None
        return AttackScenario(
            selection=selection,
            kind=kind,
            onset=int(obj["onset"]),
            duration=int(obj["duration"]),
            amplitude=obj.get("amplitude"),
            sinusoid_omega=obj.get("sinusoid_omega"),
            fraction=obj.get("fraction"),
            bias=bias,
            period=obj.get("period"),
            duty=obj.get("duty"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad attack scenario JSON: {exc}") from exc


def save_scenario(scenario: AttackScenario, path) -> None:
    write_json(path, scenario_to_json(scenario))


def load_scenario(path) -> AttackScenario:
    return scenario_from_json(read_json(path))
