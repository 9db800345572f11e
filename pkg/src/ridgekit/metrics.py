"""Stage performance metrics from mass-flow-weighted stagnation quantities."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_GAMMA_GAS = 1.4

_TR_GUARD = 1e-14


@dataclass(frozen=True)
class StreamState:
    """Mass flow (kg/s), stagnation pressure (N/m^2), stagnation
    temperature (K) of one stream."""

    mass_flow: float
    stagnation_pressure: float
    stagnation_temperature: float

    def __post_init__(self):
        for name in ("mass_flow", "stagnation_pressure", "stagnation_temperature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class StationState:
    """Inlet, bypass, and core stream states plus the ratio of specific heats."""

    inlet: StreamState
    bypass: StreamState
    core: StreamState
    gamma: float = DEFAULT_GAMMA_GAS

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be strictly positive")


def perf_metrics(s: StationState) -> dict[str, float]:
    """Pressure ratio, temperature ratio, isentropic efficiency (percent),
    and the exit flow capacities m_dot sqrt(T) / P.

    PR and TR weight the exit streams by mass flow against the inlet;
    efficiency follows (PR^((gamma-1)/gamma) - 1) / (TR - 1) * 100 and is
    undefined at TR = 1.
    """
    pr = (
        s.bypass.mass_flow * s.bypass.stagnation_pressure
        + s.core.mass_flow * s.core.stagnation_pressure
    ) / (s.inlet.mass_flow * s.inlet.stagnation_pressure)
    tr = (
        s.bypass.mass_flow * s.bypass.stagnation_temperature
        + s.core.mass_flow * s.core.stagnation_temperature
    ) / (s.inlet.mass_flow * s.inlet.stagnation_temperature)
    if abs(tr - 1.0) <= _TR_GUARD:
        raise ZeroDivisionError(
            "temperature ratio equals 1; isentropic efficiency is undefined"
        )
    eta = (pr ** ((s.gamma - 1.0) / s.gamma) - 1.0) / (tr - 1.0) * 100.0
    return {
        "pressure_ratio": pr,
        "temperature_ratio": tr,
        "efficiency_percent": eta,
        "capacity_core": s.core.mass_flow
        * s.core.stagnation_temperature**0.5
        / s.core.stagnation_pressure,
        "capacity_bypass": s.bypass.mass_flow
        * s.bypass.stagnation_temperature**0.5
        / s.bypass.stagnation_pressure,
    }
