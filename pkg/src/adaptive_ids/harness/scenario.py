"""Deterministic end-to-end scenario runner.

A scenario trains a base model, measures the whole test stream against
it, then replays the stream through the monitor/honeypot/central loop
(alarms, verdicts, threshold-triggered retrains, broadcasts) and measures
the stream again with the final model. Everything is driven by seeded
generators and a logical clock, so one (config, seed) pair always yields
byte-identical traces and reports.

New-traffic scenarios are synthesized by holding whole attack names (or
whole service symbols) out of training while leaving them in the stream.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..classifier import TrainSpec, predict_batch
from ..exceptions import ScenarioConfigError
from ..kdd.records import ConnectionRecord, attack_names, load_kdd_file
from ..kdd.sampling import stratified_sample
from ..mlp import LmConfig, RpropConfig
from ..nodes.central import Central, LOG_FILENAME, OFFICER_POLICIES
from ..nodes.monitors import HoneypotMonitor, NetLanMonitor
from ..protocol import (
    STATUS_CONFIRMED_ATTACK,
    Envelope,
    ModelUpdate,
    ack_envelope,
    alarm_envelope,
    encode_message,
    model_update_envelope,
    register_envelope,
)
from ..svm import SmoConfig
from .metrics import MetricsReport, evaluate_report

TRACE_FILENAME = "trace.log"


class LogicalClock:
    """Monotone event counter standing in for wall time."""

    def __init__(self) -> None:
        self.t = 0

    def __call__(self) -> float:
        self.t += 1
        return float(self.t)


@dataclass
class ScenarioConfig:
    train_path: Path
    stream_path: Path
    spec: TrainSpec
    seed: int = 0
    train_sample: int | None = None
    stream_sample: int | None = None
    hold_out_attacks: tuple[str, ...] = ()
    hold_out_services: tuple[str, ...] = ()
    monitors: int = 2
    f_hp: float = 0.0
    p_detect: float = 1.0
    officer_policy: str = "oracle"
    retrain_threshold: int = 8
    phase: int = 1
    workdir: Path = field(default_factory=lambda: Path("runs") / "scenario")

    def __post_init__(self):
        self.train_path = Path(self.train_path)
        self.stream_path = Path(self.stream_path)
        self.workdir = Path(self.workdir)
        if not self.train_path.exists():
            raise ScenarioConfigError("corpus.train", f"no such file: {self.train_path}")
        if not self.stream_path.exists():
            raise ScenarioConfigError("corpus.stream", f"no such file: {self.stream_path}")
        if not 0.0 <= self.f_hp <= 1.0:
            raise ScenarioConfigError("scenario.f_hp", "must be in [0, 1]")
        if not 0.0 <= self.p_detect <= 1.0:
            raise ScenarioConfigError("scenario.p_detect", "must be in [0, 1]")
        if self.monitors < 1:
            raise ScenarioConfigError("scenario.monitors", "need at least one monitor")
        if self.officer_policy not in OFFICER_POLICIES:
            raise ScenarioConfigError(
                "scenario.officer", f"must be one of {', '.join(OFFICER_POLICIES)}"
            )
        if self.retrain_threshold < 1:
            raise ScenarioConfigError("scenario.retrain_threshold", "must be >= 1")
        if self.phase not in (1, 2):
            raise ScenarioConfigError("scenario.phase", "must be 1 or 2")


def _spec_from_table(table: dict) -> TrainSpec:
    kwargs: dict = {}
    for key in ("kind", "trainer", "svm_kernel", "svm_gamma", "validation_fraction", "seed"):
        if key in table:
            kwargs[key] = table[key]
    if "hidden_size_grid" in table:
        kwargs["hidden_size_grid"] = tuple(table["hidden_size_grid"])
    if "rprop" in table:
        kwargs["rprop"] = RpropConfig(**table["rprop"])
    if "lm" in table:
        kwargs["lm"] = LmConfig(**table["lm"])
    if "smo" in table:
        kwargs["smo"] = SmoConfig(**table["smo"])
    return TrainSpec(**kwargs)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a scenario TOML file; unknown or bad fields fail fast by name."""
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    try:
        corpus = data["corpus"]
        scenario = data.get("scenario", {})
        classifier_table = data.get("classifier", {})
    except KeyError as exc:
        raise ScenarioConfigError(str(exc), "missing section") from None

    def need(table: dict, section: str, key: str):
        if key not in table:
            raise ScenarioConfigError(f"{section}.{key}", "missing required field")
        return table[key]

    base = path.parent
    try:
        spec = _spec_from_table(classifier_table)
    except (TypeError, ValueError) as exc:
        raise ScenarioConfigError("classifier", str(exc)) from None
    workdir = scenario.get("workdir")
    return ScenarioConfig(
        train_path=base / need(corpus, "corpus", "train"),
        stream_path=base / need(corpus, "corpus", "stream"),
        spec=spec,
        seed=corpus.get("seed", 0),
        train_sample=corpus.get("train_sample"),
        stream_sample=corpus.get("stream_sample"),
        hold_out_attacks=tuple(corpus.get("hold_out_attacks", ())),
        hold_out_services=tuple(corpus.get("hold_out_services", ())),
        monitors=scenario.get("monitors", 2),
        f_hp=scenario.get("f_hp", 0.0),
        p_detect=scenario.get("p_detect", 1.0),
        officer_policy=scenario.get("officer", "oracle"),
        retrain_threshold=scenario.get("retrain_threshold", 8),
        phase=scenario.get("phase", 1),
        workdir=base / workdir if workdir else Path("runs") / path.stem,
    )


@dataclass
class ScenarioResult:
    before: MetricsReport
    after: MetricsReport
    trace_path: Path
    log_path: Path
    violations: list[str]
    central: Central
    monitors: list[NetLanMonitor]
    honeypot: HoneypotMonitor
    training_names: set[str]
    stream: list[ConnectionRecord]
    retrain_count: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _training_corpus(config: ScenarioConfig) -> list[ConnectionRecord]:
    records = load_kdd_file(config.train_path)
    if config.train_sample is not None:
        records = stratified_sample(records, config.train_sample, config.seed)
    held_names = set(config.hold_out_attacks)
    held_services = set(config.hold_out_services)
    kept = []
    for record in records:
        if record.label.is_attack and record.label.attack_name in held_names:
            continue
        if record.service in held_services:
            continue
        kept.append(record)
    return kept


def _stream_records(config: ScenarioConfig) -> list[ConnectionRecord]:
    records = load_kdd_file(config.stream_path)
    if config.stream_sample is not None:
        records = stratified_sample(records, config.stream_sample, config.seed + 1)
    return records


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    config.workdir.mkdir(parents=True, exist_ok=True)
    clock = LogicalClock()
    training = _training_corpus(config)
    training_names = attack_names(training)
    stream = _stream_records(config)

    log_path = config.workdir / LOG_FILENAME
    central = Central(
        config.spec,
        training,
        officer_policy=config.officer_policy,
        retrain_threshold=config.retrain_threshold,
        log_path=log_path,
        clock=clock,
    )
    trace: list[Envelope] = []

    def deliver(envelope: Envelope) -> list[Envelope]:
        trace.append(envelope)
        responses = central.handle_envelope(envelope)
        trace.extend(responses)
        return responses

    base_update = central.train_base()
    trace.append(model_update_envelope(base_update, central.node_id))
    before = evaluate_report(central.base_artifact, stream, training_names)

    monitors = [NetLanMonitor(f"netlan-{i + 1}") for i in range(config.monitors)]
    honeypot = HoneypotMonitor("honeypot-1", config.p_detect, seed=config.seed + 2)
    version_history: dict[str, list[int]] = {m.node_id: [] for m in monitors}

    def push_update_to_monitors(update) -> None:
        for monitor in monitors:
            applied, drained = monitor.apply_update(update)
            if applied:
                version_history[monitor.node_id].append(update.version)
                deliver(ack_envelope(monitor.node_id, ref=f"model:{update.version}"))
                for alarm in drained:
                    deliver(alarm_envelope(alarm, monitor.node_id))

    for monitor in monitors:
        responses = deliver(register_envelope(monitor.node_id, "netlan"))
        for response in responses:
            if response.msg_type == "ModelUpdate":
                applied, _ = monitor.apply_update(ModelUpdate.from_payload(response.payload))
                if applied:
                    version_history[monitor.node_id].append(monitor.applied_version)
                    deliver(ack_envelope(monitor.node_id, ref=f"model:{monitor.applied_version}"))
    deliver(register_envelope(honeypot.node_id, "honeypot"))

    routing_rng = random.Random(config.seed + 3)
    retrain_count = 0
    violations: list[str] = []

    for index, record in enumerate(stream):
        monitor = monitors[index % len(monitors)]
        alarm = monitor.process(record, now=clock())
        if alarm is not None:
            threshold_ok = alarm.score >= (0.5 if central.spec.kind == "mlp" else 0.0)
            if not threshold_ok:
                violations.append(
                    f"alarm {alarm.alarm_id} carries a below-threshold score {alarm.score}"
                )
            deliver(alarm_envelope(alarm, monitor.node_id))
        if record.label.is_attack and routing_rng.random() < config.f_hp:
            hp_alarm = honeypot.process(record, now=clock())
            if hp_alarm is not None:
                deliver(alarm_envelope(hp_alarm, honeypot.node_id))
        update = central.maybe_retrain()
        if update is not None:
            retrain_count += 1
            trace.append(model_update_envelope(update, central.node_id))
            push_update_to_monitors(update)

    after = evaluate_report(central.base_artifact, stream, training_names)

    # In-run invariants.
    for node_id, history in version_history.items():
        if any(b <= a for a, b in zip(history, history[1:])):
            violations.append(f"{node_id} applied versions out of order: {history}")
    confirmed_records = [
        central.alarms[i].record
        for i in central.alarm_order
        if central.alarms[i].status == STATUS_CONFIRMED_ATTACK
    ]
    if confirmed_records:
        predictions = predict_batch(central.base_artifact, confirmed_records)
        for record, prediction in zip(confirmed_records, predictions):
            if not prediction.is_attack:
                violations.append(
                    f"confirmed-attack record {record.label.name!r} predicted normal after retrain"
                )
    probe = stream[: min(100, len(stream))]
    base_predictions = predict_batch(central.base_artifact, probe)
    for monitor in monitors:
        if monitor.applied_version != central.base_version:
            violations.append(
                f"{monitor.node_id} stuck at version {monitor.applied_version}, "
                f"central at {central.base_version}"
            )
            continue
        for i, (ours, theirs) in enumerate(zip(base_predictions, monitor.probe(probe))):
            if ours != theirs:
                violations.append(
                    f"{monitor.node_id} diverges from central on probe record {i}"
                )
                break

    trace_path = config.workdir / TRACE_FILENAME
    with open(trace_path, "w", encoding="utf-8") as fh:
        for envelope in trace:
            fh.write(encode_message(envelope) + "\n")

    return ScenarioResult(
        before=before,
        after=after,
        trace_path=trace_path,
        log_path=log_path,
        violations=violations,
        central=central,
        monitors=monitors,
        honeypot=honeypot,
        training_names=training_names,
        stream=stream,
        retrain_count=retrain_count,
    )
