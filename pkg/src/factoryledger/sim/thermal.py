"""First-order conveyor thermal model with safety-mode hysteresis.

Belt friction heats the conveyor in proportion to its actual speed;
cooling is proportional to the temperature excess over ambient:

    T' = T + dt * (k_heat * actual_speed - k_cool * (T - ambient))

Crossing t_safe latches safety mode, which caps the actual speed at
s_safe until the temperature drops below t_safe - hysteresis.

The compiled simulation kernel inlines this exact update; keep the two
in lockstep (the kernel parity test enforces it).
"""

from __future__ import annotations

from dataclasses import dataclass

from .specs import SimConstants


@dataclass(frozen=True)
class ConveyorState:
    temperature: float
    commanded_speed: float
    actual_speed: float
    safety_mode: bool


def _actual(commanded: float, safety_mode: bool, s_safe: float) -> float:
    return min(commanded, s_safe) if safety_mode else commanded


def conveyor_thermal_step(
    state: ConveyorState, ambient: float, dt: float, constants: SimConstants
) -> ConveyorState:
    """Advance the conveyor one time step of length dt seconds."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    actual = _actual(state.commanded_speed, state.safety_mode, constants.s_safe)
    temp = state.temperature + dt * (
        constants.k_heat * actual - constants.k_cool * (state.temperature - ambient)
    )
    safety_mode = state.safety_mode
    if temp > constants.t_safe:
        safety_mode = True
    elif temp < constants.t_safe - constants.hysteresis:
        safety_mode = False
    return ConveyorState(
        temperature=temp,
        commanded_speed=state.commanded_speed,
        actual_speed=_actual(state.commanded_speed, safety_mode, constants.s_safe),
        safety_mode=safety_mode,
    )
