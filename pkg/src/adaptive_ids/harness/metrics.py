"""Detection-rate and false-alarm accounting, plus report rendering.

A report carries one row per attack name (count of vectors and how many
were classified as attacks) and aggregates split between known names
(present in the training corpus) and new names (absent from it). Rates
are undefined, not zero, when their denominator is empty.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..classifier import ClassifierArtifact, predict_batch
from ..kdd.records import ConnectionRecord


@dataclass(frozen=True)
class EvaluationOutcome:
    """Ground truth and model output for one streamed record."""

    attack_name: str | None  # None for normal traffic
    predicted_attack: bool

    @property
    def is_attack(self) -> bool:
        return self.attack_name is not None


@dataclass(frozen=True)
class AttackRow:
    name: str
    vectors: int
    detected: int

    @property
    def detection_rate(self) -> float | None:
        if self.vectors == 0:
            return None
        return self.detected / self.vectors


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[AttackRow, ...]
    new_attack_names: tuple[str, ...]
    known_vectors: int
    known_detected: int
    new_vectors: int
    new_detected: int
    normal_vectors: int
    false_alarm_count: int
    model_version: int

    @property
    def known_attack_detection_rate(self) -> float | None:
        return self.known_detected / self.known_vectors if self.known_vectors else None

    @property
    def new_attack_detection_rate(self) -> float | None:
        return self.new_detected / self.new_vectors if self.new_vectors else None

    @property
    def false_alarm_rate(self) -> float | None:
        return self.false_alarm_count / self.normal_vectors if self.normal_vectors else None

    @property
    def not_detected_attacks(self) -> int:
        return sum(row.vectors - row.detected for row in self.rows)

    @property
    def total_detected_attacks(self) -> int:
        return self.known_detected + self.new_detected

    def row_for(self, name: str) -> AttackRow | None:
        for row in self.rows:
            if row.name == name:
                return row
        return None


def compute_metrics(
    outcomes: Iterable[EvaluationOutcome],
    training_names: set[str],
    model_version: int,
) -> MetricsReport:
    per_name: dict[str, list[int]] = {}
    normal_vectors = 0
    false_alarms = 0
    for outcome in outcomes:
        if outcome.is_attack:
            tally = per_name.setdefault(outcome.attack_name, [0, 0])
            tally[0] += 1
            tally[1] += int(outcome.predicted_attack)
        else:
            normal_vectors += 1
            false_alarms += int(outcome.predicted_attack)

    rows = tuple(
        AttackRow(name=name, vectors=v, detected=d)
        for name, (v, d) in sorted(per_name.items())
    )
    new_names = tuple(sorted(n for n in per_name if n not in training_names))
    known_vectors = sum(r.vectors for r in rows if r.name not in new_names)
    known_detected = sum(r.detected for r in rows if r.name not in new_names)
    new_vectors = sum(r.vectors for r in rows if r.name in new_names)
    new_detected = sum(r.detected for r in rows if r.name in new_names)
    return MetricsReport(
        rows=rows,
        new_attack_names=new_names,
        known_vectors=known_vectors,
        known_detected=known_detected,
        new_vectors=new_vectors,
        new_detected=new_detected,
        normal_vectors=normal_vectors,
        false_alarm_count=false_alarms,
        model_version=model_version,
    )


def evaluate_records(
    artifact: ClassifierArtifact,
    records: Sequence[ConnectionRecord],
    chunk: int = 2048,
) -> list[EvaluationOutcome]:
    """Classify a stream and pair each record's truth with the prediction."""
    outcomes: list[EvaluationOutcome] = []
    for start in range(0, len(records), chunk):
        batch = records[start : start + chunk]
        for record, prediction in zip(batch, predict_batch(artifact, batch)):
            outcomes.append(
                EvaluationOutcome(
                    attack_name=record.label.attack_name,
                    predicted_attack=prediction.is_attack,
                )
            )
    return outcomes


def evaluate_report(
    artifact: ClassifierArtifact,
    records: Sequence[ConnectionRecord],
    training_names: set[str] | None = None,
) -> MetricsReport:
    if training_names is None:
        training_names = set(artifact.manifest.training_attack_names)
    return compute_metrics(
        evaluate_records(artifact, records), training_names, artifact.version
    )


def _pct(rate: float | None) -> str:
    return "-" if rate is None else f"{rate * 100:.1f}%"


SUM_NEW_LABEL = "Sum of new attacks"


def render_text(report: MetricsReport) -> str:
    """Aligned per-name table plus aggregate lines; byte-stable."""
    lines = [f"Attack detection by name (model version {report.model_version})"]
    width = max([len(SUM_NEW_LABEL)] + [len(r.name) for r in report.rows]) + 2
    header = f"{'name':<{width}}{'vectors':>9}{'detected':>10}{'rate':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for row in report.rows:
        marker = " (new)" if row.name in report.new_attack_names else ""
        lines.append(
            f"{row.name + marker:<{width}}{row.vectors:>9}{row.detected:>10}"
            f"{_pct(row.detection_rate):>9}"
        )
    lines.append(
        f"{SUM_NEW_LABEL:<{width}}{report.new_vectors:>9}{report.new_detected:>10}"
        f"{_pct(report.new_attack_detection_rate):>9}"
    )
    lines.append("")
    lines.append(
        f"known attacks detected: {report.known_detected}/{report.known_vectors}"
        f" ({_pct(report.known_attack_detection_rate)})"
    )
    lines.append(
        f"new attacks detected: {report.new_detected}/{report.new_vectors}"
        f" ({_pct(report.new_attack_detection_rate)})"
    )
    lines.append(
        f"false alarms: {report.false_alarm_count}/{report.normal_vectors}"
        f" normal records ({_pct(report.false_alarm_rate)})"
    )
    lines.append(f"not detected attacks: {report.not_detected_attacks}")
    return "\n".join(lines) + "\n"


def render_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "name", "vectors", "detected", "new"])
    for row in report.rows:
        writer.writerow(
            [
                "attack",
                row.name,
                row.vectors,
                row.detected,
                int(row.name in report.new_attack_names),
            ]
        )
    writer.writerow(["aggregate", "normal_vectors", report.normal_vectors, "", ""])
    writer.writerow(["aggregate", "false_alarm_count", report.false_alarm_count, "", ""])
    writer.writerow(["aggregate", "model_version", report.model_version, "", ""])
    return buf.getvalue()


def parse_csv(text: str) -> MetricsReport:
    """Inverse of render_csv; reconstructs the full report."""
    rows: list[AttackRow] = []
    new_names: list[str] = []
    aggregates: dict[str, int] = {}
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[:2] != ["kind", "name"]:
        raise ValueError("not a metrics CSV")
    for fields in reader:
        if not fields:
            continue
        if fields[0] == "attack":
            _, name, vectors, detected, new = fields
            rows.append(AttackRow(name=name, vectors=int(vectors), detected=int(detected)))
            if int(new):
                new_names.append(name)
        elif fields[0] == "aggregate":
            aggregates[fields[1]] = int(fields[2])
    new_set = set(new_names)
    return MetricsReport(
        rows=tuple(sorted(rows, key=lambda r: r.name)),
        new_attack_names=tuple(sorted(new_names)),
        known_vectors=sum(r.vectors for r in rows if r.name not in new_set),
        known_detected=sum(r.detected for r in rows if r.name not in new_set),
        new_vectors=sum(r.vectors for r in rows if r.name in new_set),
        new_detected=sum(r.detected for r in rows if r.name in new_set),
        normal_vectors=aggregates["normal_vectors"],
        false_alarm_count=aggregates["false_alarm_count"],
        model_version=aggregates["model_version"],
    )


def emit_report(report: MetricsReport, path: str | Path, fmt: str = "text") -> Path:
    """Write the report as aligned text or CSV; output is byte-stable."""
    if fmt == "text":
        content = render_text(report)
    elif fmt == "csv":
        content = render_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    path.write_text(content, encoding="utf-8")
    return path


def report_to_dict(report: MetricsReport) -> dict:
    """JSON-friendly form served by the central API."""
    return {
        "rows": [
            {
                "name": r.name,
                "vectors": r.vectors,
                "detected": r.detected,
                "detection_rate": r.detection_rate,
                "new": r.name in report.new_attack_names,
            }
            for r in report.rows
        ],
        "new_attack_names": list(report.new_attack_names),
        "known_vectors": report.known_vectors,
        "known_detected": report.known_detected,
        "new_vectors": report.new_vectors,
        "new_detected": report.new_detected,
        "known_attack_detection_rate": report.known_attack_detection_rate,
        "new_attack_detection_rate": report.new_attack_detection_rate,
        "normal_vectors": report.normal_vectors,
        "false_alarm_count": report.false_alarm_count,
        "false_alarm_rate": report.false_alarm_rate,
        "not_detected_attacks": report.not_detected_attacks,
        "model_version": report.model_version,
    }
