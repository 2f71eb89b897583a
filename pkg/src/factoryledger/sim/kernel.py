"""Tick-engine selection: compiled extension when available, pure Python otherwise.

Both engines implement the same ABI (`advance`) over KernelInputs and are
bit-identical: the extension is compiled with float contraction disabled
and both sides draw noise from the same integer counter RNG through the
same libm calls. tests/test_kernel_parity.py enforces equality.

Set FACTORYLEDGER_PURE_KERNEL=1 to force the pure engine (used by the
benchmark and the parity tests).

Frozen ABI shared by both engines:
  sensor kind codes 0..10: Potentiometer, LoadCell, PressureGauge,
    ConveyorTemperature, ConveyorSpeed, ConveyorVibration, EStop,
    ContainerTemperature, Humidity, Gyroscope, Gps
  injection mode codes 0..2: Offset, SetValue, Press
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass

(
    KIND_POT,
    KIND_LOAD,
    KIND_PRESSURE,
    KIND_CONV_TEMP,
    KIND_CONV_SPEED,
    KIND_CONV_VIB,
    KIND_ESTOP,
    KIND_CONTAINER_TEMP,
    KIND_HUMIDITY,
    KIND_GYRO,
    KIND_GPS,
) = range(11)

MODE_OFFSET, MODE_SET_VALUE, MODE_PRESS = range(3)


@dataclass
class KernelInputs:
    """Flat view of the world consumed by the tick engines.

    Sensor arrays are ordered by ascending sensor_id, which makes the
    per-tick emission order lexicographic by construction. conv_temp and
    conv_safety are mutated in place by `advance`.
    """

    seed: int  # u64
    n_sensors: int
    kind: array  # 'l'
    asset: array  # 'l' robot/conveyor index, 0 otherwise
    period: array  # 'q'
    sigma: array  # 'd'
    key: array  # 'Q' per-sensor RNG stream key
    gps_chan: array  # 'l' 0=lat 1=lon
    estop_idx: array  # 'l' sensor indices of e-stops

    k_heat: float
    k_cool: float
    t_safe: float
    hysteresis: float
    s_safe: float
    ambient: float
    dt: float
    commanded_speed: float

    cycle_ticks: int
    grip_start: int
    grip_end: int
    robot_offsets: array  # 'q'
    pot_amplitude: float
    load_idle: float
    load_grip: float
    pressure_idle: float
    pressure_grip: float
    vib_per_speed: float

    container_temp: float
    container_humidity: float
    gyro_baseline: float

    wp_tick: array  # 'q'
    wp_lat: array  # 'd'
    wp_lon: array  # 'd'

    conv_temp: array  # 'd' mutable
    conv_safety: array  # 'l' mutable

    inj_start: array  # 'q'
    inj_end: array  # 'q'
    inj_sidx: array  # 'l'
    inj_mode: array  # 'l'
    inj_mag: array  # 'd'


def _select():
    if not os.environ.get("FACTORYLEDGER_PURE_KERNEL"):
        try:
            from . import _speed

            return _speed
        except ImportError:
            pass
    from . import _kernel_py

    return _kernel_py


_impl = _select()
advance = _impl.advance
KERNEL_NAME = _impl.KERNEL_NAME


def load_pure():
    """The pure-Python engine, regardless of what import selected."""
    from . import _kernel_py

    return _kernel_py
