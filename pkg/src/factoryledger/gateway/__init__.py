from .detector import ContainerSnapshot, DebounceState, Gateway, enrich_shipment, evaluate
from .rules import (
    DEFAULT_IMPORTANCE,
    Predicate,
    RuleValidationError,
    ThresholdRule,
    UnknownFaultType,
    classify_importance,
    default_rules,
    load_rules,
)

__all__ = [
    "ContainerSnapshot",
    "DEFAULT_IMPORTANCE",
    "DebounceState",
    "Gateway",
    "Predicate",
    "RuleValidationError",
    "ThresholdRule",
    "UnknownFaultType",
    "classify_importance",
    "default_rules",
    "enrich_shipment",
    "evaluate",
    "load_rules",
]
