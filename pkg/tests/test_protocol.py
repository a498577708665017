"""Wire format: framing, roundtrips, version/digest gating."""

import pytest
from hypothesis import given, settings, strategies as st

from adaptive_ids.exceptions import IntegrityError, ProtocolError, UnknownMessage
from adaptive_ids.kdd.records import FEATURE_SCHEMA, ConnectionRecord, Label
from adaptive_ids.kdd.synthetic import synth_records
from adaptive_ids.protocol import (
    AlarmReport,
    Envelope,
    ModelUpdate,
    SOURCE_HONEYPOT,
    SOURCE_NETLAN,
    STATUS_CONFIRMED_ATTACK,
    STATUS_PENDING,
    Verdict,
    accepts_update,
    ack_envelope,
    alarm_envelope,
    decode_message,
    decode_stream,
    encode_message,
    encode_stream,
    error_envelope,
    make_model_update,
    model_update_envelope,
    register_envelope,
    verdict_envelope,
)

RECORDS = synth_records({"normal": 4, "neptune": 4}, seed=8)


def _alarm(alarm_id="n1-000001", source=SOURCE_NETLAN, status=STATUS_PENDING, record=None):
    return AlarmReport(
        alarm_id=alarm_id,
        source=source,
        node_id="n1",
        record=record if record is not None else RECORDS[0],
        score=0.75,
        model_version_used=1,
        timestamp=42.0,
        status=status,
    )


def test_ack_roundtrip_is_identity():
    envelope = ack_envelope("central", ref="abc")
    assert decode_message(encode_message(envelope)) == envelope


def test_alarm_roundtrip_preserves_record():
    envelope = alarm_envelope(_alarm(), "n1")
    decoded = decode_message(encode_message(envelope))
    assert AlarmReport.from_payload(decoded.payload) == _alarm()


def test_awkward_symbols_survive_the_frame():
    values = {}
    for name, kind in FEATURE_SCHEMA:
        values[name] = 0 if kind == "int" else (0.0 if kind == "float" else "x")
    values["service"] = 'comma,bearing "service"\nwith newline'
    record = ConnectionRecord(label=Label.attack("smurf"), **values)
    envelope = alarm_envelope(_alarm(record=record), "n1")
    line = encode_message(envelope)
    assert "\n" not in line
    decoded = decode_message(line)
    assert AlarmReport.from_payload(decoded.payload).record == record


def test_unknown_message_type_rejected():
    with pytest.raises(UnknownMessage):
        decode_message(
            '{"msg_type":"Bogus","payload":{},"protocol_version":1,"sender_id":"x"}'
        )


def test_schema_violations_rejected():
    with pytest.raises(ProtocolError):
        decode_message("not json at all")
    with pytest.raises(ProtocolError):
        decode_message('{"msg_type":"Ack","sender_id":"x"}')  # missing fields
    with pytest.raises(ProtocolError):
        decode_message('{"msg_type":"Alarm","payload":{},"protocol_version":1,"sender_id":"x"}')
    with pytest.raises(ProtocolError):
        decode_message('[1,2,3]')


def test_verdict_validation():
    with pytest.raises(ValueError):
        Verdict(alarm_id="a", decision="pending", decided_by="oracle", timestamp=0.0)
    with pytest.raises(ValueError):
        Verdict(alarm_id="a", decision=STATUS_CONFIRMED_ATTACK, decided_by="robot", timestamp=0.0)
    envelope = verdict_envelope(
        Verdict("a", STATUS_CONFIRMED_ATTACK, "officer", 3.0), "central"
    )
    assert decode_message(encode_message(envelope)) == envelope


def test_honeypot_alarms_must_arrive_confirmed():
    with pytest.raises(ValueError):
        _alarm(source=SOURCE_HONEYPOT, status=STATUS_PENDING)


def test_model_update_roundtrip_binary_payload():
    payload = bytes(range(256)) * 3 + b"\n\r\x00tail"
    update = make_model_update(4, payload)
    envelope = model_update_envelope(update, "central")
    line = encode_message(envelope)
    assert "\n" not in line
    decoded = ModelUpdate.from_payload(decode_message(line).payload)
    assert decoded == update
    assert decoded.artifact_bytes == payload


def test_accepts_update_version_gate():
    update = make_model_update(3, b"model-bytes")
    assert accepts_update(2, update) is True
    assert accepts_update(3, update) is False  # idempotent re-delivery
    assert accepts_update(4, update) is False


def test_accepts_update_digest_gate():
    update = make_model_update(3, b"model-bytes")
    tampered = ModelUpdate(version=3, artifact_bytes=b"other-bytes", digest=update.digest)
    with pytest.raises(IntegrityError):
        accepts_update(0, tampered)


_envelopes = st.one_of(
    st.builds(ack_envelope, st.text(max_size=8), st.text(max_size=12)),
    st.builds(
        error_envelope,
        st.text(max_size=8),
        st.sampled_from(["conflict", "not_found", "protocol_error"]),
        st.text(max_size=30),
    ),
    st.builds(register_envelope, st.text(max_size=8), st.sampled_from(["netlan", "honeypot"])),
    st.builds(
        lambda record, score, ts, n: alarm_envelope(
            AlarmReport(
                alarm_id=f"n{n}",
                source=SOURCE_NETLAN,
                node_id="n",
                record=record,
                score=score,
                model_version_used=1,
                timestamp=ts,
                status=STATUS_PENDING,
            ),
            "n",
        ),
        st.sampled_from(RECORDS),
        st.floats(allow_nan=False, allow_infinity=False, width=32),
        st.floats(min_value=0, max_value=1e9),
        st.integers(0, 999),
    ),
    st.builds(
        lambda version, blob: model_update_envelope(make_model_update(version, blob), "c"),
        st.integers(1, 99),
        st.binary(max_size=64),
    ),
)


@settings(max_examples=80, deadline=None)
@given(st.lists(_envelopes, max_size=8))
def test_framing_concat_split_roundtrip(envelopes):
    stream = encode_stream(envelopes)
    assert list(decode_stream(stream)) == envelopes


def test_protocol_version_carried():
    envelope = Envelope("Ack", "n1", {"ref": ""}, protocol_version=2)
    decoded = decode_message(encode_message(envelope))
    assert decoded.protocol_version == 2
