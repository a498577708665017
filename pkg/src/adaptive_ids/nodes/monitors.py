"""The two edge roles: traffic-classifying monitors and the honeypot monitor."""

from __future__ import annotations

import random
from typing import Sequence

from ..classifier import ClassifierArtifact, Prediction, deserialize, predict, predict_batch
from ..exceptions import IntegrityError
from ..kdd.records import ConnectionRecord
from ..protocol import (
    AlarmReport,
    ModelUpdate,
    SOURCE_HONEYPOT,
    SOURCE_NETLAN,
    STATUS_CONFIRMED_ATTACK,
    STATUS_PENDING,
    accepts_update,
)


class NetLanMonitor:
    """Classifies its subnet's records with the centrally distributed model.

    Records arriving before any model is applied are buffered up to a cap
    and re-examined when a model lands; past the cap they are dropped and
    counted.
    """

    def __init__(self, node_id: str, buffer_cap: int = 1000):
        self.node_id = node_id
        self.buffer_cap = buffer_cap
        self.artifact: ClassifierArtifact | None = None
        self.applied_version = 0
        self.records_seen = 0
        self.alarms_raised = 0
        self.dropped_no_model = 0
        self._pending: list[tuple[ConnectionRecord, float]] = []
        self._alarm_seq = 0

    def _next_alarm_id(self) -> str:
        self._alarm_seq += 1
        return f"{self.node_id}-{self._alarm_seq:06d}"

    def _classify(self, record: ConnectionRecord, now: float) -> AlarmReport | None:
        assert self.artifact is not None
        result = predict(self.artifact, record)
        if not result.is_attack:
            return None
        self.alarms_raised += 1
        return AlarmReport(
            alarm_id=self._next_alarm_id(),
            source=SOURCE_NETLAN,
            node_id=self.node_id,
            record=record,
            score=result.score,
            model_version_used=self.applied_version,
            timestamp=now,
            status=STATUS_PENDING,
        )

    def process(self, record: ConnectionRecord, now: float = 0.0) -> AlarmReport | None:
        self.records_seen += 1
        if self.artifact is None:
            if len(self._pending) < self.buffer_cap:
                self._pending.append((record, now))
            else:
                self.dropped_no_model += 1
            return None
        return self._classify(record, now)

    def apply_update(self, update: ModelUpdate) -> tuple[bool, list[AlarmReport]]:
        """Apply a model update if it is new; returns alarms from drained buffer.

        Raises IntegrityError (and changes nothing) on digest mismatch.
        """
        try:
            if not accepts_update(self.applied_version, update):
                return False, []
        except IntegrityError:
            raise
        self.artifact = deserialize(update.artifact_bytes)
        self.applied_version = update.version
        drained = self._pending
        self._pending = []
        alarms = []
        for record, seen_at in drained:
            alarm = self._classify(record, seen_at)
            if alarm is not None:
                alarms.append(alarm)
        return True, alarms

    def probe(self, records: Sequence[ConnectionRecord]) -> list[Prediction]:
        """Predictions on a probe set, for cross-node convergence checks."""
        if self.artifact is None:
            raise RuntimeError("monitor has no applied model")
        return predict_batch(self.artifact, records)


class HoneypotMonitor:
    """Audit-log detector stand-in on the decoy host.

    Only sees records the scenario routes to the honeypot; ground-truth
    attacks raise an already-confirmed alarm with the configured detection
    probability, legitimate records never alarm.
    """

    def __init__(self, node_id: str, p_detect: float, seed: int = 0):
        if not 0.0 <= p_detect <= 1.0:
            raise ValueError("p_detect must be in [0, 1]")
        self.node_id = node_id
        self.p_detect = p_detect
        self.records_seen = 0
        self.alarms_raised = 0
        self._rng = random.Random(seed)
        self._alarm_seq = 0

    def process(self, record: ConnectionRecord, now: float = 0.0) -> AlarmReport | None:
        self.records_seen += 1
        if not record.label.is_attack:
            return None
        if self._rng.random() >= self.p_detect:
            return None
        self._alarm_seq += 1
        self.alarms_raised += 1
        return AlarmReport(
            alarm_id=f"{self.node_id}-{self._alarm_seq:06d}",
            source=SOURCE_HONEYPOT,
            node_id=self.node_id,
            record=record,
            score=1.0,
            model_version_used=0,
            timestamp=now,
            status=STATUS_CONFIRMED_ATTACK,
        )
