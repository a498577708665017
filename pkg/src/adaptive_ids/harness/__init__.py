"""Scenario runner, metrics, and the command-line interface."""

from .metrics import (
    AttackRow,
    EvaluationOutcome,
    MetricsReport,
    compute_metrics,
    emit_report,
    evaluate_records,
    evaluate_report,
    parse_csv,
    render_csv,
    render_text,
)

__all__ = [
    "AttackRow",
    "EvaluationOutcome",
    "MetricsReport",
    "compute_metrics",
    "emit_report",
    "evaluate_records",
    "evaluate_report",
    "parse_csv",
    "render_csv",
    "render_text",
]
