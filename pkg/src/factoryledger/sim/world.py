"""The simulated world: state, stepping, fault injection, export.

One tick is 100 ms of simulated time. Stepping is a deterministic
function of (seed, constants, injection schedule): the reading stream is
byte-identical across runs and across any partition of the tick range.
Pressing any e-stop halts the whole cell (conveyors command zero speed,
robot process cycles freeze) for as long as the press lasts.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

from ..canonical import canonical_bytes
from . import kernel
from .specs import (
    TICK_MS,
    AssetKind,
    FaultInjection,
    InjectionMode,
    SensorKind,
    SensorReading,
    SensorSpec,
    SimConstants,
    default_roster,
)

_M64 = (1 << 64) - 1

_KIND_CODES = {
    SensorKind.POTENTIOMETER: kernel.KIND_POT,
    SensorKind.LOAD_CELL: kernel.KIND_LOAD,
    SensorKind.PRESSURE_GAUGE: kernel.KIND_PRESSURE,
    SensorKind.ESTOP: kernel.KIND_ESTOP,
    SensorKind.HUMIDITY: kernel.KIND_HUMIDITY,
    SensorKind.GYROSCOPE: kernel.KIND_GYRO,
    SensorKind.GPS: kernel.KIND_GPS,
}

_MODE_CODES = {
    InjectionMode.OFFSET: kernel.MODE_OFFSET,
    InjectionMode.SET_VALUE: kernel.MODE_SET_VALUE,
    InjectionMode.PRESS: kernel.MODE_PRESS,
}


class UnknownSensor(KeyError):
    pass


class InvalidMode(ValueError):
    pass


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _M64
    return h


def _kind_code(spec: SensorSpec) -> int:
    if spec.kind == SensorKind.TEMPERATURE:
        if spec.asset.kind == AssetKind.CONVEYOR:
            return kernel.KIND_CONV_TEMP
        return kernel.KIND_CONTAINER_TEMP
    if spec.kind == SensorKind.SPEED:
        return kernel.KIND_CONV_SPEED
    if spec.kind == SensorKind.VIBRATION:
        return kernel.KIND_CONV_VIB
    return _KIND_CODES[spec.kind]


@dataclass
class SimWorld:
    seed: int
    constants: SimConstants
    roster: list[SensorSpec]  # sorted by sensor_id
    tick: int = 0
    profile_phase: int = 0
    conv_temp: array = field(default_factory=lambda: array("d"))
    conv_safety: array = field(default_factory=lambda: array("l"))
    injections: list[FaultInjection] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.roster = sorted(self.roster, key=lambda s: s.sensor_id)
        self._by_id = {s.sensor_id: s for s in self.roster}
        self._conv_labels = sorted(
            {s.asset.label for s in self.roster if s.asset.kind == AssetKind.CONVEYOR}
        )
        self._robot_labels = sorted(
            {s.asset.label for s in self.roster if s.asset.kind == AssetKind.ROBOT}
        )
        if len(self.conv_temp) == 0:
            self.conv_temp = array(
                "d", [self.constants.ambient] * len(self._conv_labels)
            )
            self.conv_safety = array("l", [0] * len(self._conv_labels))
        self._kinputs: Optional[kernel.KernelInputs] = None

    @property
    def sensors(self) -> dict[str, SensorSpec]:
        return self._by_id

    @property
    def start_epoch_ms(self) -> int:
        return self.constants.start_epoch_ms

    def timestamp_ms(self, tick: int) -> int:
        return self.constants.start_epoch_ms + tick * TICK_MS

    def conveyor_temperature(self, label: str) -> float:
        return self.conv_temp[self._conv_labels.index(label)]

    def conveyor_safety_mode(self, label: str) -> bool:
        return bool(self.conv_safety[self._conv_labels.index(label)])

    def _build_kinputs(self) -> kernel.KernelInputs:
        c = self.constants
        conv_index = {label: i for i, label in enumerate(self._conv_labels)}
        robot_index = {label: i for i, label in enumerate(self._robot_labels)}

        kinds = array("l")
        assets = array("l")
        periods = array("q")
        sigmas = array("d")
        keys = array("Q")
        gps_chans = array("l")
        estops = array("l")
        for i, spec in enumerate(self.roster):
            kinds.append(_kind_code(spec))
            if spec.asset.kind == AssetKind.CONVEYOR:
                assets.append(conv_index[spec.asset.label])
            elif spec.asset.kind == AssetKind.ROBOT:
                assets.append(robot_index[spec.asset.label])
            else:
                assets.append(0)
            periods.append(spec.sample_period)
            sigmas.append(spec.noise_sigma)
            keys.append(_fnv1a64(spec.sensor_id))
            gps_chans.append(1 if spec.gps_channel == "lon" else 0)
            if spec.kind == SensorKind.ESTOP:
                estops.append(i)

        sensor_index = {s.sensor_id: i for i, s in enumerate(self.roster)}
        inj_start = array("q")
        inj_end = array("q")
        inj_sidx = array("l")
        inj_mode = array("l")
        inj_mag = array("d")
        for inj in self.injections:
            inj_start.append(inj.at_tick)
            inj_end.append(inj.at_tick + inj.duration_ticks)
            inj_sidx.append(sensor_index[inj.sensor_id])
            inj_mode.append(_MODE_CODES[inj.mode])
            inj_mag.append(inj.magnitude)

        waypoints = sorted(c.waypoints)
        return kernel.KernelInputs(
            seed=self.seed & _M64,
            n_sensors=len(self.roster),
            kind=kinds,
            asset=assets,
            period=periods,
            sigma=sigmas,
            key=keys,
            gps_chan=gps_chans,
            estop_idx=estops,
            k_heat=c.k_heat,
            k_cool=c.k_cool,
            t_safe=c.t_safe,
            hysteresis=c.hysteresis,
            s_safe=c.s_safe,
            ambient=c.ambient,
            dt=TICK_MS / 1000.0,
            commanded_speed=c.commanded_speed,
            cycle_ticks=c.cycle_ticks,
            grip_start=int(c.cycle_ticks * c.grip_window[0]),
            grip_end=int(c.cycle_ticks * c.grip_window[1]),
            robot_offsets=array(
                "q", [i * 7 for i in range(max(1, len(self._robot_labels)))]
            ),
            pot_amplitude=c.pot_amplitude,
            load_idle=c.load_idle,
            load_grip=c.load_grip,
            pressure_idle=c.pressure_idle,
            pressure_grip=c.pressure_grip,
            vib_per_speed=c.vib_per_speed,
            container_temp=c.container_temp,
            container_humidity=c.container_humidity,
            gyro_baseline=c.gyro_baseline,
            wp_tick=array("q", [int(w[0]) for w in waypoints]),
            wp_lat=array("d", [float(w[1]) for w in waypoints]),
            wp_lon=array("d", [float(w[2]) for w in waypoints]),
            conv_temp=self.conv_temp,
            conv_safety=self.conv_safety,
            inj_start=inj_start,
            inj_end=inj_end,
            inj_sidx=inj_sidx,
            inj_mode=inj_mode,
            inj_mag=inj_mag,
        )

    def kinputs(self) -> kernel.KernelInputs:
        if self._kinputs is None:
            self._kinputs = self._build_kinputs()
        return self._kinputs

    def invalidate(self) -> None:
        self._kinputs = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "constants": self.constants.to_dict(),
            "tick": self.tick,
            "profile_phase": self.profile_phase,
            "conv_temp": list(self.conv_temp),
            "conv_safety": list(self.conv_safety),
            "injections": [inj.to_dict() for inj in self.injections],
            "sensors": [s.sensor_id for s in self.roster],
        }

    def canonical(self) -> bytes:
        return canonical_bytes(self.to_dict())


def build_default_world(
    seed: int, constants: Optional[SimConstants] = None
) -> SimWorld:
    return SimWorld(
        seed=seed, constants=constants or SimConstants(), roster=default_roster()
    )


def step(world: SimWorld, ticks: int) -> tuple[SimWorld, list[SensorReading]]:
    """Advance the world, returning readings in (timestamp, sensor_id) order."""
    if ticks < 1:
        raise ValueError("ticks must be >= 1")
    k = world.kinputs()

    total = 0
    t0 = world.tick
    t1 = world.tick + ticks
    for spec in world.roster:
        p = spec.sample_period
        total += t1 // p - t0 // p

    out_tick = array("q", bytes(8 * total))
    out_sidx = array("l", bytes(array("l").itemsize * total))
    out_val = array("d", bytes(8 * total))

    written, world.profile_phase = kernel.advance(
        k, t0, ticks, world.profile_phase, out_tick, out_sidx, out_val
    )
    assert written == total
    world.tick = t1

    epoch = world.constants.start_epoch_ms
    roster = world.roster
    readings = [
        SensorReading(
            sensor_id=roster[out_sidx[i]].sensor_id,
            timestamp=epoch + out_tick[i] * TICK_MS,
            value=out_val[i],
            unit=roster[out_sidx[i]].unit,
        )
        for i in range(written)
    ]
    return world, readings


def inject(world: SimWorld, injection: FaultInjection) -> SimWorld:
    """Queue a fault injection; overlaps compose last-writer-wins per tick."""
    spec = world.sensors.get(injection.sensor_id)
    if spec is None:
        raise UnknownSensor(injection.sensor_id)
    if injection.mode == InjectionMode.PRESS and spec.kind != SensorKind.ESTOP:
        raise InvalidMode(f"Press is only valid for EStop sensors: {spec.sensor_id}")
    if injection.at_tick < world.tick:
        raise ValueError(
            f"at_tick {injection.at_tick} is before current tick {world.tick}"
        )
    world.injections.append(injection)
    world.invalidate()
    return world


def write_readings_ndjson(readings: Iterable[SensorReading], fp: IO[str]) -> None:
    for r in readings:
        fp.write(canonical_bytes(r.to_dict()).decode("utf-8"))
        fp.write("\n")


def read_readings_ndjson(fp: IO[str]) -> list[SensorReading]:
    readings = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        data = json.loads(line)
        readings.append(
            SensorReading(
                sensor_id=data["sensor_id"],
                timestamp=data["timestamp"],
                value=data["value"],
                unit=data["unit"],
            )
        )
    return readings
