"""Line-framed message schema for monitor <-> central communication.

One UTF-8 JSON object per line; binary payloads travel base64-encoded, so
a frame never contains a raw newline. The same encoding serves the wire,
the in-process simulator queues, and the append-only event log.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .exceptions import IntegrityError, ProtocolError, UnknownMessage
from .kdd.records import ConnectionRecord

PROTOCOL_VERSION = 1

MSG_REGISTER = "Register"
MSG_ALARM = "Alarm"
MSG_VERDICT = "Verdict"
MSG_MODEL_UPDATE = "ModelUpdate"
MSG_ACK = "Ack"
MSG_ERROR = "Error"
MESSAGE_TYPES = (
    MSG_REGISTER,
    MSG_ALARM,
    MSG_VERDICT,
    MSG_MODEL_UPDATE,
    MSG_ACK,
    MSG_ERROR,
)

SOURCE_NETLAN = "netlan"
SOURCE_HONEYPOT = "honeypot"

STATUS_PENDING = "pending"
STATUS_CONFIRMED_ATTACK = "confirmed_attack"
STATUS_FALSE_ALARM = "false_alarm"
ALARM_STATUSES = (STATUS_PENDING, STATUS_CONFIRMED_ATTACK, STATUS_FALSE_ALARM)

DECIDED_BY_OFFICER = "officer"
DECIDED_BY_ORACLE = "oracle"
DECIDED_BY_POLICY = "policy"


@dataclass(frozen=True)
class AlarmReport:
    """One attack alarm plus the raw record that triggered it."""

    alarm_id: str
    source: str
    node_id: str
    record: ConnectionRecord
    score: float
    model_version_used: int
    timestamp: float
    status: str

    def __post_init__(self):
        if self.source not in (SOURCE_NETLAN, SOURCE_HONEYPOT):
            raise ValueError(f"unknown alarm source {self.source!r}")
        if self.status not in ALARM_STATUSES:
            raise ValueError(f"unknown alarm status {self.status!r}")
        if self.source == SOURCE_HONEYPOT and self.status != STATUS_CONFIRMED_ATTACK:
            raise ValueError("honeypot alarms are created already confirmed")

    def with_status(self, status: str) -> "AlarmReport":
        return AlarmReport(
            alarm_id=self.alarm_id,
            source=self.source,
            node_id=self.node_id,
            record=self.record,
            score=self.score,
            model_version_used=self.model_version_used,
            timestamp=self.timestamp,
            status=status,
        )

    def to_payload(self) -> dict:
        return {
            "alarm_id": self.alarm_id,
            "source": self.source,
            "node_id": self.node_id,
            "record": self.record.to_dict(),
            "score": self.score,
            "model_version_used": self.model_version_used,
            "timestamp": self.timestamp,
            "status": self.status,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "AlarmReport":
        return cls(
            alarm_id=payload["alarm_id"],
            source=payload["source"],
            node_id=payload["node_id"],
            record=ConnectionRecord.from_dict(payload["record"]),
            score=payload["score"],
            model_version_used=payload["model_version_used"],
            timestamp=payload["timestamp"],
            status=payload["status"],
        )


@dataclass(frozen=True)
class Verdict:
    """Officer/policy decision on a pending alarm."""

    alarm_id: str
    decision: str
    decided_by: str
    timestamp: float

    def __post_init__(self):
        if self.decision not in (STATUS_CONFIRMED_ATTACK, STATUS_FALSE_ALARM):
            raise ValueError(f"verdict decision must be a final status, got {self.decision!r}")
        if self.decided_by not in (DECIDED_BY_OFFICER, DECIDED_BY_ORACLE, DECIDED_BY_POLICY):
            raise ValueError(f"unknown decider {self.decided_by!r}")

    def to_payload(self) -> dict:
        return {
            "alarm_id": self.alarm_id,
            "decision": self.decision,
            "decided_by": self.decided_by,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Verdict":
        return cls(
            alarm_id=payload["alarm_id"],
            decision=payload["decision"],
            decided_by=payload["decided_by"],
            timestamp=payload["timestamp"],
        )


@dataclass(frozen=True)
class ModelUpdate:
    """Versioned artifact broadcast; digest guards the bytes."""

    version: int
    artifact_bytes: bytes
    digest: str

    def to_payload(self) -> dict:
        return {
            "version": self.version,
            "artifact_bytes": base64.b64encode(self.artifact_bytes).decode("ascii"),
            "digest": self.digest,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "ModelUpdate":
        return cls(
            version=payload["version"],
            artifact_bytes=base64.b64decode(payload["artifact_bytes"]),
            digest=payload["digest"],
        )


def make_model_update(version: int, artifact_bytes: bytes) -> ModelUpdate:
    return ModelUpdate(
        version=version,
        artifact_bytes=artifact_bytes,
        digest=hashlib.sha256(artifact_bytes).hexdigest(),
    )


@dataclass(frozen=True)
class Envelope:
    """One wire message; msg_type determines the payload schema."""

    msg_type: str
    sender_id: str
    payload: dict
    protocol_version: int = PROTOCOL_VERSION


def alarm_envelope(alarm: AlarmReport, sender_id: str) -> Envelope:
    return Envelope(MSG_ALARM, sender_id, alarm.to_payload())


def verdict_envelope(verdict: Verdict, sender_id: str) -> Envelope:
    return Envelope(MSG_VERDICT, sender_id, verdict.to_payload())


def model_update_envelope(update: ModelUpdate, sender_id: str) -> Envelope:
    return Envelope(MSG_MODEL_UPDATE, sender_id, update.to_payload())


def register_envelope(node_id: str, source: str) -> Envelope:
    return Envelope(MSG_REGISTER, node_id, {"node_id": node_id, "source": source})


def ack_envelope(sender_id: str, ref: str = "") -> Envelope:
    return Envelope(MSG_ACK, sender_id, {"ref": ref})


def error_envelope(sender_id: str, code: str, detail: str, ref: str = "") -> Envelope:
    return Envelope(MSG_ERROR, sender_id, {"code": code, "detail": detail, "ref": ref})


def encode_message(envelope: Envelope) -> str:
    """One newline-free JSON line per envelope.

    Frames are pure ASCII (non-ASCII text travels escaped), so no Unicode
    line separator can ever split a frame.
    """
    line = json.dumps(
        {
            "msg_type": envelope.msg_type,
            "sender_id": envelope.sender_id,
            "protocol_version": envelope.protocol_version,
            "payload": envelope.payload,
        },
        sort_keys=True,
        ensure_ascii=True,
        separators=(",", ":"),
    )
    assert "\n" not in line
    return line


def decode_message(line: str) -> Envelope:
    """Parse one frame; UnknownMessage / ProtocolError on schema trouble."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError("frame is not a JSON object")
    try:
        msg_type = obj["msg_type"]
        sender_id = obj["sender_id"]
        protocol_version = obj["protocol_version"]
        payload = obj["payload"]
    except KeyError as exc:
        raise ProtocolError(f"frame is missing field {exc}") from None
    if msg_type not in MESSAGE_TYPES:
        raise UnknownMessage(f"unknown msg_type {msg_type!r}")
    if not isinstance(payload, dict):
        raise ProtocolError("payload must be an object")
    # Payload schemas round-trip through their dataclasses to catch damage early.
    try:
        if msg_type == MSG_ALARM:
            AlarmReport.from_payload(payload)
        elif msg_type == MSG_VERDICT:
            Verdict.from_payload(payload)
        elif msg_type == MSG_MODEL_UPDATE:
            ModelUpdate.from_payload(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad {msg_type} payload: {exc}") from None
    return Envelope(
        msg_type=msg_type,
        sender_id=sender_id,
        payload=payload,
        protocol_version=protocol_version,
    )


def encode_stream(envelopes: Iterable[Envelope]) -> str:
    return "".join(encode_message(e) + "\n" for e in envelopes)


def decode_stream(text: str) -> Iterator[Envelope]:
    # Split strictly on the framing delimiter, never on other Unicode
    # line boundaries.
    for line in text.split("\n"):
        if line.strip():
            yield decode_message(line)


def accepts_update(current_version: int, update: ModelUpdate) -> bool:
    """True iff the update is newer and its digest verifies.

    A stale or duplicate version returns False (idempotent re-delivery);
    a digest mismatch raises IntegrityError so the caller can discard it
    and answer with an Error envelope.
    """
    actual = hashlib.sha256(update.artifact_bytes).hexdigest()
    if actual != update.digest:
        raise IntegrityError(
            f"model update digest mismatch (version {update.version})"
        )
    return update.version > current_version
