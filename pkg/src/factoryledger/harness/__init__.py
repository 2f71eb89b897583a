from .report import ScenarioReport, render_report
from .runner import PipelineFailure, Scenario, run_scenario

__all__ = [
    "PipelineFailure",
    "Scenario",
    "ScenarioReport",
    "render_report",
    "run_scenario",
]
