"""Threshold rules: which sensor values count as defects, and how severe.

A rule maps one sensor to a fault type, an importance class and a
debounce window. Importance follows the process-disruption criterion:
a fault that halts the process is an Alert, one the process survives is
a Warning. Rule files are validated fail-fast at load; an unknown fault
type is an error, never a silent default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from ..records import Importance


class Predicate(str, Enum):
    GREATER_THAN = "GreaterThan"
    LESS_THAN = "LessThan"
    OUTSIDE_RANGE = "OutsideRange"
    EQUALS = "Equals"


class UnknownFaultType(KeyError):
    pass


class RuleValidationError(ValueError):
    pass


# Does the fault halt the process (Alert) or does production continue
# (Warning)? E-stops and stalled conveyors stop the line; everything else
# degrades quality but keeps running.
DEFAULT_IMPORTANCE: dict[str, Importance] = {
    "EmergencyStop": Importance.ALERT,
    "Stall": Importance.ALERT,
    "GripperRange": Importance.WARNING,
    "OverPressure": Importance.WARNING,
    "OverTemperature": Importance.WARNING,
    "ExcessVibration": Importance.WARNING,
    "ColdChainBreach": Importance.WARNING,
    "ExcessHumidity": Importance.WARNING,
    "ExcessTilt": Importance.WARNING,
}


def classify_importance(
    fault_type: str, mapping: Mapping[str, Importance]
) -> Importance:
    try:
        return mapping[fault_type]
    except KeyError:
        raise UnknownFaultType(fault_type) from None


@dataclass(frozen=True)
class ThresholdRule:
    rule_id: str
    sensor_id: str
    predicate: Predicate
    bound_low: Optional[float]
    bound_high: Optional[float]
    fault_type: str
    importance: Importance
    debounce_ticks: int = 0

    def violated_by(self, value: float) -> bool:
        if self.predicate == Predicate.GREATER_THAN:
            return value > self.bound_high
        if self.predicate == Predicate.LESS_THAN:
            return value < self.bound_low
        if self.predicate == Predicate.OUTSIDE_RANGE:
            return value < self.bound_low or value > self.bound_high
        return value == self.bound_high  # Equals

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "sensor_id": self.sensor_id,
            "predicate": self.predicate.value,
            "bound_low": self.bound_low,
            "bound_high": self.bound_high,
            "fault_type": self.fault_type,
            "importance": self.importance.value,
            "debounce_ticks": self.debounce_ticks,
        }


def _validate(rule: ThresholdRule, importance_table: Mapping[str, Importance]) -> None:
    rid = rule.rule_id
    if rule.debounce_ticks < 0:
        raise RuleValidationError(f"{rid}: debounce_ticks must be >= 0")
    p = rule.predicate
    if p == Predicate.OUTSIDE_RANGE:
        if rule.bound_low is None or rule.bound_high is None:
            raise RuleValidationError(f"{rid}: OutsideRange needs both bounds")
        if not rule.bound_low < rule.bound_high:
            raise RuleValidationError(f"{rid}: bound_low must be < bound_high")
    elif p == Predicate.GREATER_THAN:
        if rule.bound_high is None:
            raise RuleValidationError(f"{rid}: GreaterThan needs bound_high")
    elif p == Predicate.LESS_THAN:
        if rule.bound_low is None:
            raise RuleValidationError(f"{rid}: LessThan needs bound_low")
    elif p == Predicate.EQUALS:
        if rule.bound_high is None:
            raise RuleValidationError(f"{rid}: Equals needs bound_high as match value")
    expected = classify_importance(rule.fault_type, importance_table)
    if rule.importance != expected:
        raise RuleValidationError(
            f"{rid}: importance {rule.importance.value} contradicts the"
            f" {rule.fault_type} classification ({expected.value})"
        )
    if rule.sensor_id.endswith("_EStop") and rule.importance != Importance.ALERT:
        raise RuleValidationError(f"{rid}: e-stop rules must be Alert")


def validate_rules(
    rules: list[ThresholdRule],
    importance_table: Mapping[str, Importance] = DEFAULT_IMPORTANCE,
) -> list[ThresholdRule]:
    seen = set()
    for rule in rules:
        if rule.rule_id in seen:
            raise RuleValidationError(f"duplicate rule_id {rule.rule_id}")
        seen.add(rule.rule_id)
        _validate(rule, importance_table)
    return rules


def rule_from_dict(data: dict) -> ThresholdRule:
    try:
        return ThresholdRule(
            rule_id=data["rule_id"],
            sensor_id=data["sensor_id"],
            predicate=Predicate(data["predicate"]),
            bound_low=data.get("bound_low"),
            bound_high=data.get("bound_high"),
            fault_type=data["fault_type"],
            importance=Importance(data["importance"]),
            debounce_ticks=int(data.get("debounce_ticks", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise RuleValidationError(f"malformed rule {data!r}: {exc}") from exc


def load_rules(
    path: str | Path,
    importance_table: Mapping[str, Importance] = DEFAULT_IMPORTANCE,
) -> list[ThresholdRule]:
    """Load and validate a rule file (JSON array of rule objects)."""
    with open(path, "r", encoding="utf-8") as fp:
        raw = json.load(fp)
    if not isinstance(raw, list):
        raise RuleValidationError("rule file must be a JSON array")
    return validate_rules([rule_from_dict(item) for item in raw], importance_table)


def save_rules(rules: list[ThresholdRule], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump([r.to_dict() for r in rules], fp, indent=2, sort_keys=True)
        fp.write("\n")


def default_rules() -> list[ThresholdRule]:
    """The stock rule table for the default roster."""

    def rule(sensor_id, predicate, fault_type, low=None, high=None, debounce=0):
        return ThresholdRule(
            rule_id=f"{sensor_id}.{fault_type}",
            sensor_id=sensor_id,
            predicate=predicate,
            bound_low=low,
            bound_high=high,
            fault_type=fault_type,
            importance=DEFAULT_IMPORTANCE[fault_type],
            debounce_ticks=debounce,
        )

    rules = []
    for i in range(1, 5):
        rules.append(
            rule(
                f"R0{i}_Potentiometer",
                Predicate.OUTSIDE_RANGE,
                "GripperRange",
                low=-5.0,
                high=105.0,
            )
        )
        rules.append(
            rule(f"R0{i}_LoadCell", Predicate.GREATER_THAN, "OverPressure", high=800.0)
        )
    rules.append(
        rule("R05_PressureGauge", Predicate.GREATER_THAN, "OverPressure", high=6.0)
    )
    for i in range(1, 5):
        rules.append(
            rule(
                f"Conv{i}_Temperature",
                Predicate.GREATER_THAN,
                "OverTemperature",
                high=70.0,
            )
        )
        rules.append(
            rule(
                f"Conv{i}_Vibration",
                Predicate.GREATER_THAN,
                "ExcessVibration",
                high=5.0,
            )
        )
        rules.append(
            rule(f"Conv{i}_Speed", Predicate.LESS_THAN, "Stall", low=10.0, debounce=15)
        )
    for label in ("R01", "R02", "R03", "R04", "R05", "HMI", "ControlPanel"):
        rules.append(
            rule(f"{label}_EStop", Predicate.EQUALS, "EmergencyStop", high=1.0)
        )
    rules.append(
        rule(
            "Container1_Temperature",
            Predicate.OUTSIDE_RANGE,
            "ColdChainBreach",
            low=2.0,
            high=8.0,
        )
    )
    rules.append(
        rule("Container1_Humidity", Predicate.GREATER_THAN, "ExcessHumidity", high=60.0)
    )
    rules.append(
        rule("Container1_Gyroscope", Predicate.GREATER_THAN, "ExcessTilt", high=10.0)
    )
    return validate_rules(rules)
