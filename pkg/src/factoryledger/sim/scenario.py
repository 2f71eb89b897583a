"""World scenario files: {seed, duration_ticks, constants{...}, injections[...]}.

Constants not present in the file keep their defaults. Injections are
applied in file order (order matters: overlaps are last-writer-wins).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .specs import FaultInjection, InjectionMode, SimConstants
from .world import SimWorld, build_default_world, inject


@dataclass
class WorldScenario:
    seed: int
    duration_ticks: int
    constants: SimConstants = field(default_factory=SimConstants)
    injections: list[FaultInjection] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> "WorldScenario":
        seed = int(data["seed"])
        duration = int(data["duration_ticks"])
        if duration < 1:
            raise ValueError("duration_ticks must be >= 1")
        constants = SimConstants()
        overrides = data.get("constants") or {}
        if overrides:
            merged = constants.to_dict()
            unknown = set(overrides) - set(merged)
            if unknown:
                raise ValueError(f"unknown constants: {sorted(unknown)}")
            merged.update(overrides)
            constants = SimConstants.from_dict(merged)
        injections = [
            FaultInjection(
                at_tick=int(item["at_tick"]),
                sensor_id=item["sensor_id"],
                mode=InjectionMode(item["mode"]),
                magnitude=float(item.get("magnitude", 0.0)),
                duration_ticks=int(item["duration_ticks"]),
            )
            for item in data.get("injections", [])
        ]
        return cls(
            seed=seed,
            duration_ticks=duration,
            constants=constants,
            injections=injections,
        )

    @classmethod
    def load(cls, path: str | Path) -> "WorldScenario":
        with open(path, "r", encoding="utf-8") as fp:
            return cls.from_dict(json.load(fp))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "duration_ticks": self.duration_ticks,
            "constants": self.constants.to_dict(),
            "injections": [inj.to_dict() for inj in self.injections],
        }

    def build_world(self) -> SimWorld:
        world = build_default_world(self.seed, self.constants)
        for injection in self.injections:
            inject(world, injection)
        return world
