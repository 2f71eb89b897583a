from .specs import (
    AssetId,
    AssetKind,
    FaultInjection,
    InjectionMode,
    SensorKind,
    SensorReading,
    SensorSpec,
    SimConstants,
    default_roster,
)
from .thermal import ConveyorState, conveyor_thermal_step
from .world import SimWorld, build_default_world, inject, step

__all__ = [
    "AssetId",
    "AssetKind",
    "ConveyorState",
    "FaultInjection",
    "InjectionMode",
    "SensorKind",
    "SensorReading",
    "SensorSpec",
    "SimConstants",
    "SimWorld",
    "build_default_world",
    "conveyor_thermal_step",
    "default_roster",
    "inject",
    "step",
]
