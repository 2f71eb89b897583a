"""Asset and sensor rosters for the simulated cell.

The default roster models one assembly cell (five robots R01-R05, four
conveyors Conv1-Conv4, e-stops on every robot plus the HMI and the main
control panel) and one supply-chain container with environmental sensors.
All tuning constants live in SimConstants so scenarios can override them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

TICK_MS = 100  # one simulated tick


class AssetKind(str, Enum):
    ROBOT = "Robot"
    CONVEYOR = "Conveyor"
    CONTAINER = "Container"
    HMI = "HMI"
    CONTROL_PANEL = "ControlPanel"


class SensorKind(str, Enum):
    POTENTIOMETER = "Potentiometer"
    LOAD_CELL = "LoadCell"
    PRESSURE_GAUGE = "PressureGauge"
    TEMPERATURE = "Temperature"
    SPEED = "Speed"
    VIBRATION = "Vibration"
    ESTOP = "EStop"
    HUMIDITY = "Humidity"
    GYROSCOPE = "Gyroscope"
    GPS = "Gps"


class InjectionMode(str, Enum):
    OFFSET = "Offset"
    SET_VALUE = "SetValue"
    PRESS = "Press"


ROBOT_LABELS = ("R01", "R02", "R03", "R04", "R05")
CONVEYOR_LABELS = ("Conv1", "Conv2", "Conv3", "Conv4")

UNITS = {
    SensorKind.POTENTIOMETER: "%",
    SensorKind.LOAD_CELL: "N",
    SensorKind.PRESSURE_GAUGE: "bar",
    SensorKind.TEMPERATURE: "degC",
    SensorKind.SPEED: "mm/s",
    SensorKind.VIBRATION: "mm/s",
    SensorKind.ESTOP: "state",
    SensorKind.HUMIDITY: "%RH",
    SensorKind.GYROSCOPE: "deg",
    SensorKind.GPS: "deg",
}


@dataclass(frozen=True)
class AssetId:
    kind: AssetKind
    label: str


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: str
    asset: AssetId
    kind: SensorKind
    unit: str
    sample_period: int  # ticks
    noise_sigma: float
    gps_channel: Optional[str] = None  # "lat" | "lon" for Gps sensors

    def __post_init__(self) -> None:
        if self.sample_period < 1:
            raise ValueError(f"{self.sensor_id}: sample_period must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError(f"{self.sensor_id}: noise_sigma must be >= 0")


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    timestamp: int  # simulated epoch ms
    value: float
    unit: str

    def to_dict(self) -> dict:
        return {
            "sensor_id": self.sensor_id,
            "timestamp": self.timestamp,
            "value": self.value,
            "unit": self.unit,
        }


@dataclass(frozen=True)
class FaultInjection:
    at_tick: int
    sensor_id: str
    mode: InjectionMode
    magnitude: float
    duration_ticks: int

    def __post_init__(self) -> None:
        if self.at_tick < 0:
            raise ValueError("at_tick must be >= 0")
        if self.duration_ticks < 1:
            raise ValueError("duration_ticks must be >= 1")

    def to_dict(self) -> dict:
        return {
            "at_tick": self.at_tick,
            "sensor_id": self.sensor_id,
            "mode": self.mode.value,
            "magnitude": self.magnitude,
            "duration_ticks": self.duration_ticks,
        }


@dataclass(frozen=True)
class SimConstants:
    """Scenario-tunable physics and waveform constants."""

    start_epoch_ms: int = 1_700_000_000_000
    shipment_id: str = "SHIP-001"

    # conveyor thermal model (dt per tick is TICK_MS / 1000)
    k_heat: float = 0.02  # degC/s per mm/s of belt speed
    k_cool: float = 0.05  # 1/s
    t_safe: float = 70.0
    hysteresis: float = 5.0
    s_safe: float = 50.0  # mm/s cap while in safety mode
    ambient: float = 25.0
    commanded_speed: float = 100.0

    # robot process profile (one counter shared by all robots, offset per robot)
    cycle_ticks: int = 80
    grip_window: tuple = (0.45, 0.60)  # fraction of cycle where gripper holds
    pot_amplitude: float = 100.0
    load_idle: float = 5.0
    load_grip: float = 400.0
    pressure_idle: float = 0.5
    pressure_grip: float = 3.0
    vib_per_speed: float = 0.02  # mm/s vibration per mm/s belt speed

    # container environment
    container_temp: float = 5.0
    container_humidity: float = 45.0
    gyro_baseline: float = 1.0

    # scripted GPS path: (tick, lat, lon) waypoints, linear in between
    waypoints: tuple = ((0, 34.0, -81.0), (18000, 34.3, -80.7))

    def to_dict(self) -> dict:
        return {
            "start_epoch_ms": self.start_epoch_ms,
            "shipment_id": self.shipment_id,
            "k_heat": self.k_heat,
            "k_cool": self.k_cool,
            "t_safe": self.t_safe,
            "hysteresis": self.hysteresis,
            "s_safe": self.s_safe,
            "ambient": self.ambient,
            "commanded_speed": self.commanded_speed,
            "cycle_ticks": self.cycle_ticks,
            "grip_window": list(self.grip_window),
            "pot_amplitude": self.pot_amplitude,
            "load_idle": self.load_idle,
            "load_grip": self.load_grip,
            "pressure_idle": self.pressure_idle,
            "pressure_grip": self.pressure_grip,
            "vib_per_speed": self.vib_per_speed,
            "container_temp": self.container_temp,
            "container_humidity": self.container_humidity,
            "gyro_baseline": self.gyro_baseline,
            "waypoints": [list(w) for w in self.waypoints],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConstants":
        kwargs = dict(data)
        if "grip_window" in kwargs:
            kwargs["grip_window"] = tuple(kwargs["grip_window"])
        if "waypoints" in kwargs:
            kwargs["waypoints"] = tuple(tuple(w) for w in kwargs["waypoints"])
        return cls(**kwargs)

    def override(self, **kwargs) -> "SimConstants":
        return replace(self, **kwargs)


# default per-kind sample periods (ticks) and noise sigmas
_SAMPLE_PERIODS = {
    SensorKind.POTENTIOMETER: 5,
    SensorKind.LOAD_CELL: 5,
    SensorKind.PRESSURE_GAUGE: 5,
    SensorKind.TEMPERATURE: 10,
    SensorKind.SPEED: 10,
    SensorKind.VIBRATION: 5,
    SensorKind.ESTOP: 1,
    SensorKind.HUMIDITY: 10,
    SensorKind.GYROSCOPE: 5,
    SensorKind.GPS: 10,
}

_NOISE_SIGMAS = {
    SensorKind.POTENTIOMETER: 0.5,
    SensorKind.LOAD_CELL: 2.0,
    SensorKind.PRESSURE_GAUGE: 0.05,
    SensorKind.TEMPERATURE: 0.2,
    SensorKind.SPEED: 0.5,
    SensorKind.VIBRATION: 0.1,
    SensorKind.ESTOP: 0.0,
    SensorKind.HUMIDITY: 0.5,
    SensorKind.GYROSCOPE: 0.05,
    SensorKind.GPS: 0.0,
}

_CONTAINER_TEMP_SIGMA = 0.1


def _spec(asset: AssetId, kind: SensorKind, suffix: str = "", **kwargs) -> SensorSpec:
    sensor_id = f"{asset.label}_{kind.value}{suffix}"
    sigma = kwargs.pop("noise_sigma", _NOISE_SIGMAS[kind])
    return SensorSpec(
        sensor_id=sensor_id,
        asset=asset,
        kind=kind,
        unit=UNITS[kind],
        sample_period=_SAMPLE_PERIODS[kind],
        noise_sigma=sigma,
        **kwargs,
    )


def default_roster() -> list[SensorSpec]:
    """The cell's full sensor placement: 33 sensors.

    Potentiometer + load cell on R01-R04, pressure gauge on R05,
    temperature/speed/vibration on each conveyor, e-stops on all five
    robots plus HMI and control panel, and temperature/humidity/gyro/GPS
    (two channels) on the container.
    """
    robots = [AssetId(AssetKind.ROBOT, label) for label in ROBOT_LABELS]
    conveyors = [AssetId(AssetKind.CONVEYOR, label) for label in CONVEYOR_LABELS]
    container = AssetId(AssetKind.CONTAINER, "Container1")
    hmi = AssetId(AssetKind.HMI, "HMI")
    panel = AssetId(AssetKind.CONTROL_PANEL, "ControlPanel")

    specs: list[SensorSpec] = []
    for robot in robots[:4]:
        specs.append(_spec(robot, SensorKind.POTENTIOMETER))
        specs.append(_spec(robot, SensorKind.LOAD_CELL))
    specs.append(_spec(robots[4], SensorKind.PRESSURE_GAUGE))
    for conv in conveyors:
        specs.append(_spec(conv, SensorKind.TEMPERATURE))
        specs.append(_spec(conv, SensorKind.SPEED))
        specs.append(_spec(conv, SensorKind.VIBRATION))
    for asset in robots + [hmi, panel]:
        specs.append(_spec(asset, SensorKind.ESTOP))
    specs.append(
        _spec(container, SensorKind.TEMPERATURE, noise_sigma=_CONTAINER_TEMP_SIGMA)
    )
    specs.append(_spec(container, SensorKind.HUMIDITY))
    specs.append(_spec(container, SensorKind.GYROSCOPE))
    specs.append(_spec(container, SensorKind.GPS, suffix="Lat", gps_channel="lat"))
    specs.append(_spec(container, SensorKind.GPS, suffix="Lon", gps_channel="lon"))

    ids = [s.sensor_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate sensor ids in roster")
    return specs
