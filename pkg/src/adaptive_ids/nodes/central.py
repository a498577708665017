"""Central module: collects alarms, drives triage, retrains, broadcasts.

All state changes flow through handle_envelope / apply_verdict /
retrain wrappers and are appended to an event log (one wire-format line
per event), so replaying the log rebuilds the exact final state. The
officer can be a human (manual policy, decisions arrive via the HTTP API)
or an automatic policy that decides pending alarms synchronously.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Callable, Sequence

from .. import classifier as clf
from ..exceptions import (
    AlarmAlreadyDecided,
    AlarmNotFound,
    IntegrityError,
    NoNewEvidence,
    ProtocolError,
    RetrainInProgress,
    UnknownMessage,
)
from ..harness.metrics import AttackRow, MetricsReport
from ..kdd.records import ConnectionRecord, corpus_digest, render_kdd_line
from ..protocol import (
    MSG_ACK,
    MSG_ALARM,
    MSG_ERROR,
    MSG_MODEL_UPDATE,
    MSG_REGISTER,
    MSG_VERDICT,
    PROTOCOL_VERSION,
    STATUS_CONFIRMED_ATTACK,
    STATUS_FALSE_ALARM,
    STATUS_PENDING,
    AlarmReport,
    Envelope,
    ModelUpdate,
    Verdict,
    ack_envelope,
    alarm_envelope,
    decode_message,
    encode_message,
    error_envelope,
    make_model_update,
    model_update_envelope,
    register_envelope,
    verdict_envelope,
)

OFFICER_ORACLE = "oracle"
OFFICER_ALWAYS_ATTACK = "always_attack"
OFFICER_ALWAYS_FALSE_ALARM = "always_false_alarm"
OFFICER_MANUAL = "manual"
OFFICER_POLICIES = (
    OFFICER_ORACLE,
    OFFICER_ALWAYS_ATTACK,
    OFFICER_ALWAYS_FALSE_ALARM,
    OFFICER_MANUAL,
)

LOG_FILENAME = "central.log"


class Central:
    """Single-threaded event core; callers serialize access externally."""

    def __init__(
        self,
        spec: clf.TrainSpec,
        corpus: Sequence[ConnectionRecord],
        officer_policy: str = OFFICER_ORACLE,
        retrain_threshold: int = 8,
        log_path: str | Path | None = None,
        clock: Callable[[], float] | None = None,
        node_id: str = "central",
    ):
        if officer_policy not in OFFICER_POLICIES:
            raise ValueError(f"unknown officer policy {officer_policy!r}")
        if retrain_threshold < 1:
            raise ValueError("retrain threshold must be at least 1")
        self.spec = spec
        self.corpus: list[ConnectionRecord] = list(corpus)
        self.officer_policy = officer_policy
        self.retrain_threshold = retrain_threshold
        self.node_id = node_id
        self.clock = clock if clock is not None else _wall_clock

        self.alarms: dict[str, AlarmReport] = {}
        self.alarm_order: list[str] = []
        self.evidence: list[tuple[ConnectionRecord, str]] = []
        self.evidence_since_retrain = 0
        self.retrain_scheduled = False
        self.base_artifact: clf.ClassifierArtifact | None = None
        self.base_bytes: bytes | None = None
        self.monitors: dict[str, dict] = {}

        self._retrain_in_flight = False
        self._replaying = False
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            # Truncate: a Central instance owns its log from birth; replay
            # uses the classmethod below instead of appending here.
            self._log_path.write_text("")

    # -- event log -------------------------------------------------------

    def _log(self, envelope: Envelope) -> None:
        if self._replaying or self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(encode_message(envelope) + "\n")

    @property
    def base_version(self) -> int:
        return self.base_artifact.version if self.base_artifact is not None else 0

    @property
    def retrain_in_flight(self) -> bool:
        return self._retrain_in_flight

    def now(self) -> float:
        return float(self.clock())

    # -- model lifecycle ---------------------------------------------------

    def train_base(self, created_at: float | None = None) -> ModelUpdate:
        """Train the first artifact from the persistent corpus and log it."""
        artifact = clf.train(
            self.spec,
            self.corpus,
            created_at=self.now() if created_at is None else created_at,
        )
        update = make_model_update(artifact.version, clf.serialize(artifact))
        self._apply_model_update(update, artifact)
        return update

    def install_artifact(self, artifact: clf.ClassifierArtifact) -> ModelUpdate:
        """Adopt an externally trained artifact as the base model."""
        update = make_model_update(artifact.version, clf.serialize(artifact))
        self._apply_model_update(update, artifact)
        return update

    def _apply_model_update(
        self, update: ModelUpdate, artifact: clf.ClassifierArtifact | None = None
    ) -> None:
        """The state transition shared by live retrains and log replay:
        fold decided evidence into the persistent corpus, clear it, and
        adopt the new artifact."""
        if artifact is None:
            artifact = clf.deserialize(update.artifact_bytes)
        self.corpus.extend(clf.relabel_evidence(self.evidence))
        self.evidence.clear()
        self.evidence_since_retrain = 0
        self.retrain_scheduled = False
        self.base_artifact = artifact
        self.base_bytes = update.artifact_bytes
        self._log(model_update_envelope(update, self.node_id))

    def retrain_and_broadcast(self, force: bool = False) -> ModelUpdate:
        """Retrain on corpus plus evidence and emit the resulting update.

        Evidence survives a failed retrain untouched; the failure is
        recorded in the log as an Error event and re-raised.
        """
        if self._retrain_in_flight:
            raise RetrainInProgress("a retrain is already running")
        if not self.evidence and not force:
            raise NoNewEvidence("no confirmed evidence to retrain on")
        assert self.base_artifact is not None, "train_base must run first"
        self._retrain_in_flight = True
        try:
            artifact = clf.retrain(
                self.base_artifact,
                self.corpus,
                self.evidence,
                self.spec,
                force=force,
                created_at=self.now(),
            )
            update = make_model_update(artifact.version, clf.serialize(artifact))
        except Exception as exc:
            self._log(
                error_envelope(self.node_id, code="retrain_failed", detail=str(exc))
            )
            raise
        finally:
            self._retrain_in_flight = False
        self._apply_model_update(update, artifact)
        return update

    def maybe_retrain(self) -> ModelUpdate | None:
        """Run the scheduled retrain, if any; the simulator polls this."""
        if not self.retrain_scheduled or self._retrain_in_flight:
            return None
        return self.retrain_and_broadcast()

    def current_update(self) -> ModelUpdate | None:
        if self.base_bytes is None or self.base_artifact is None:
            return None
        return make_model_update(self.base_artifact.version, self.base_bytes)

    # -- alarm intake and triage ------------------------------------------

    def _add_evidence(self, record: ConnectionRecord, decision: str) -> None:
        self.evidence.append((record, decision))
        self.evidence_since_retrain += 1
        if self.evidence_since_retrain >= self.retrain_threshold:
            self.retrain_scheduled = True

    def handle_alarm(self, alarm: AlarmReport) -> str:
        """Store one alarm (idempotently) and run automatic triage.

        Returns the stored status. Duplicates change nothing.
        """
        if alarm.alarm_id in self.alarms:
            return "duplicate"
        self.alarms[alarm.alarm_id] = alarm
        self.alarm_order.append(alarm.alarm_id)
        self._log(alarm_envelope(alarm, alarm.node_id))
        if alarm.status == STATUS_CONFIRMED_ATTACK:
            # Honeypot evidence needs no officer.
            self._add_evidence(alarm.record, clf.CONFIRMED_ATTACK)
        elif alarm.status == STATUS_PENDING and not self._replaying:
            decision = self._automatic_decision(alarm)
            if decision is not None:
                verdict = Verdict(
                    alarm_id=alarm.alarm_id,
                    decision=decision,
                    decided_by="oracle" if self.officer_policy == OFFICER_ORACLE else "policy",
                    timestamp=self.now(),
                )
                self.apply_verdict(verdict)
        return self.alarms[alarm.alarm_id].status

    def _automatic_decision(self, alarm: AlarmReport) -> str | None:
        if self.officer_policy == OFFICER_ORACLE:
            return (
                STATUS_CONFIRMED_ATTACK
                if alarm.record.label.is_attack
                else STATUS_FALSE_ALARM
            )
        if self.officer_policy == OFFICER_ALWAYS_ATTACK:
            return STATUS_CONFIRMED_ATTACK
        if self.officer_policy == OFFICER_ALWAYS_FALSE_ALARM:
            return STATUS_FALSE_ALARM
        return None

    def apply_verdict(self, verdict: Verdict) -> AlarmReport:
        """Decide a pending alarm; the record joins the evidence set."""
        alarm = self.alarms.get(verdict.alarm_id)
        if alarm is None:
            raise AlarmNotFound(f"no alarm {verdict.alarm_id!r}")
        if alarm.status != STATUS_PENDING:
            raise AlarmAlreadyDecided(
                f"alarm {verdict.alarm_id!r} is already {alarm.status}"
            )
        updated = alarm.with_status(verdict.decision)
        self.alarms[verdict.alarm_id] = updated
        self._log(verdict_envelope(verdict, self.node_id))
        evidence_kind = (
            clf.CONFIRMED_ATTACK
            if verdict.decision == STATUS_CONFIRMED_ATTACK
            else clf.FALSE_ALARM
        )
        self._add_evidence(alarm.record, evidence_kind)
        return updated

    def register_monitor(self, node_id: str, source: str) -> ModelUpdate | None:
        """Track a monitor; returns the current model for immediate sync."""
        self.monitors[node_id] = {"node_id": node_id, "source": source, "applied_version": 0}
        self._log(register_envelope(node_id, source))
        return self.current_update()

    def record_applied_version(self, node_id: str, version: int) -> None:
        entry = self.monitors.get(node_id)
        if entry is None:
            entry = {"node_id": node_id, "source": "netlan", "applied_version": 0}
            self.monitors[node_id] = entry
        entry["applied_version"] = version
        self._log(ack_envelope(node_id, ref=f"model:{version}"))

    # -- wire dispatch ------------------------------------------------------

    def handle_envelope(self, envelope: Envelope) -> list[Envelope]:
        """Event-loop entry: apply one message, return response envelopes."""
        if envelope.protocol_version != PROTOCOL_VERSION:
            return [
                error_envelope(
                    self.node_id,
                    code="bad_protocol_version",
                    detail=f"expected {PROTOCOL_VERSION}, got {envelope.protocol_version}",
                )
            ]
        try:
            if envelope.msg_type == MSG_REGISTER:
                update = self.register_monitor(
                    envelope.payload["node_id"], envelope.payload["source"]
                )
                responses = [ack_envelope(self.node_id, ref=envelope.payload["node_id"])]
                if update is not None:
                    responses.append(model_update_envelope(update, self.node_id))
                return responses
            if envelope.msg_type == MSG_ALARM:
                alarm = AlarmReport.from_payload(envelope.payload)
                self.handle_alarm(alarm)
                return [ack_envelope(self.node_id, ref=alarm.alarm_id)]
            if envelope.msg_type == MSG_VERDICT:
                verdict = Verdict.from_payload(envelope.payload)
                self.apply_verdict(verdict)
                return [ack_envelope(self.node_id, ref=verdict.alarm_id)]
            if envelope.msg_type == MSG_ACK:
                ref = envelope.payload.get("ref", "")
                if ref.startswith("model:"):
                    self.record_applied_version(envelope.sender_id, int(ref[6:]))
                return []
            if envelope.msg_type == MSG_MODEL_UPDATE:
                return [
                    error_envelope(
                        self.node_id,
                        code="not_accepted",
                        detail="central does not accept model updates",
                    )
                ]
            if envelope.msg_type == MSG_ERROR:
                return []
        except AlarmNotFound as exc:
            return [error_envelope(self.node_id, code="not_found", detail=str(exc))]
        except AlarmAlreadyDecided as exc:
            return [error_envelope(self.node_id, code="conflict", detail=str(exc))]
        except (ProtocolError, KeyError, TypeError, ValueError) as exc:
            return [error_envelope(self.node_id, code="protocol_error", detail=str(exc))]
        raise UnknownMessage(f"unhandled msg_type {envelope.msg_type!r}")

    # -- replay -------------------------------------------------------------

    @classmethod
    def replay(
        cls,
        log_path: str | Path,
        spec: clf.TrainSpec,
        corpus: Sequence[ConnectionRecord],
        officer_policy: str = OFFICER_ORACLE,
        retrain_threshold: int = 8,
        clock: Callable[[], float] | None = None,
        node_id: str = "central",
    ) -> "Central":
        """Rebuild central state purely from the event log.

        ``corpus`` must be the same initial corpus the live run started
        with; everything else is reconstructed from logged events.
        """
        central = cls(
            spec,
            corpus,
            officer_policy=officer_policy,
            retrain_threshold=retrain_threshold,
            log_path=None,
            clock=clock,
            node_id=node_id,
        )
        central._replaying = True
        try:
            with open(log_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    envelope = decode_message(line)
                    central._replay_envelope(envelope)
        finally:
            central._replaying = False
        return central

    def _replay_envelope(self, envelope: Envelope) -> None:
        if envelope.msg_type == MSG_ALARM:
            self.handle_alarm(AlarmReport.from_payload(envelope.payload))
        elif envelope.msg_type == MSG_VERDICT:
            self.apply_verdict(Verdict.from_payload(envelope.payload))
        elif envelope.msg_type == MSG_MODEL_UPDATE:
            update = ModelUpdate.from_payload(envelope.payload)
            actual = hashlib.sha256(update.artifact_bytes).hexdigest()
            if actual != update.digest:
                raise IntegrityError("logged model update fails its digest")
            self._apply_model_update(update)
        elif envelope.msg_type == MSG_REGISTER:
            self.monitors[envelope.payload["node_id"]] = {
                "node_id": envelope.payload["node_id"],
                "source": envelope.payload["source"],
                "applied_version": 0,
            }
        elif envelope.msg_type == MSG_ACK:
            ref = envelope.payload.get("ref", "")
            if ref.startswith("model:"):
                self.record_applied_version(envelope.sender_id, int(ref[6:]))
        # Error events carry no state.

    # -- inspection -----------------------------------------------------------

    def list_alarms(self, status: str | None = None) -> list[AlarmReport]:
        alarms = [self.alarms[i] for i in self.alarm_order]
        if status is not None:
            alarms = [a for a in alarms if a.status == status]
        return alarms

    def metrics_report(self) -> MetricsReport:
        """Alarm-flow metrics: what central has actually seen and decided.

        Stream-level denominators (records each monitor scanned) are not
        visible here, so the false-alarm rate is reported without a
        normal-traffic denominator.
        """
        training_names = (
            set(self.base_artifact.manifest.training_attack_names)
            if self.base_artifact is not None
            else set()
        )
        per_name: dict[str, list[int]] = {}
        false_alarms = 0
        for alarm_id in self.alarm_order:
            alarm = self.alarms[alarm_id]
            label = alarm.record.label
            if alarm.status == STATUS_FALSE_ALARM:
                false_alarms += 1
            if label.is_attack:
                tally = per_name.setdefault(label.attack_name, [0, 0])
                tally[0] += 1
                tally[1] += int(alarm.status == STATUS_CONFIRMED_ATTACK)
        rows = tuple(
            AttackRow(name=n, vectors=v, detected=d)
            for n, (v, d) in sorted(per_name.items())
        )
        new_names = tuple(sorted(n for n in per_name if n not in training_names))
        return MetricsReport(
            rows=rows,
            new_attack_names=new_names,
            known_vectors=sum(r.vectors for r in rows if r.name not in new_names),
            known_detected=sum(r.detected for r in rows if r.name not in new_names),
            new_vectors=sum(r.vectors for r in rows if r.name in new_names),
            new_detected=sum(r.detected for r in rows if r.name in new_names),
            normal_vectors=0,
            false_alarm_count=false_alarms,
            model_version=self.base_version,
        )

    def state_snapshot(self) -> dict:
        """Comparable digest of everything replay must reproduce."""
        return {
            "alarms": [(i, self.alarms[i].status) for i in self.alarm_order],
            "alarm_records": [render_kdd_line(self.alarms[i].record) for i in self.alarm_order],
            "evidence": [(render_kdd_line(r), d) for r, d in self.evidence],
            "evidence_since_retrain": self.evidence_since_retrain,
            "retrain_scheduled": self.retrain_scheduled,
            "corpus_size": len(self.corpus),
            "corpus_digest": corpus_digest(self.corpus),
            "base_version": self.base_version,
            "artifact_digest": (
                hashlib.sha256(self.base_bytes).hexdigest() if self.base_bytes else None
            ),
            "monitors": {k: dict(v) for k, v in self.monitors.items()},
        }


def _wall_clock() -> float:
    import time

    return time.time()
