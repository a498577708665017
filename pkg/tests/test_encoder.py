"""Encoder contracts: ranges, one-hot blocks, clamping, determinism."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.exceptions import NotFittedError

from adaptive_ids.exceptions import EmptyDataset
from adaptive_ids.kdd.encoder import KddEncoder, fit_encoder
from adaptive_ids.kdd.records import (
    FEATURE_SCHEMA,
    NUMERIC_FEATURES,
    SYMBOLIC_FEATURES,
    ConnectionRecord,
    Label,
)
from adaptive_ids.kdd.synthetic import synth_records


def _record(**overrides) -> ConnectionRecord:
    values = {}
    for name, kind in FEATURE_SCHEMA:
        if kind == "symbol":
            values[name] = {"protocol_type": "tcp", "service": "http", "flag": "SF"}[name]
        elif kind == "float":
            values[name] = 0.0
        else:
            values[name] = 0
    values.update(overrides)
    return ConnectionRecord(label=Label.normal(), **values)


def test_empty_fit_rejected():
    with pytest.raises(EmptyDataset):
        KddEncoder().fit([])


def test_unfitted_transform_rejected():
    with pytest.raises(NotFittedError):
        KddEncoder().transform([_record()])


def test_single_record_fit_is_degenerate_but_total():
    record = _record(src_bytes=100, serror_rate=0.25)
    encoder = fit_encoder([record])
    assert np.array_equal(encoder.low_, encoder.high_)
    vec = encoder.encode_record(record)
    # Constant features encode to zero; the one-hot blocks still fire.
    assert np.all(vec[: len(NUMERIC_FEATURES)] == 0.0)
    assert vec.sum() == len(SYMBOLIC_FEATURES)


def test_width_formula():
    # 3 protocols, 66 services, 11 flags -> 38 + 4 + 67 + 12.
    records = []
    for i in range(66):
        records.append(
            _record(
                protocol_type=f"proto{i % 3}",
                service=f"svc{i}",
                flag=f"flag{i % 11}",
            )
        )
    encoder = fit_encoder(records)
    assert len(encoder.vocabularies_["protocol_type"]) == 3
    assert len(encoder.vocabularies_["service"]) == 66
    assert len(encoder.vocabularies_["flag"]) == 11
    assert encoder.width_ == 38 + 4 + 67 + 12 == 121


def test_refit_is_identical():
    records = synth_records({"normal": 30, "neptune": 10}, seed=2)
    first = fit_encoder(records)
    second = fit_encoder(records)
    assert first.same_as(second)
    assert first.vocabularies_ == second.vocabularies_


def test_min_encodes_to_zero_and_clamping():
    low = _record(src_bytes=100)
    high = _record(src_bytes=200)
    encoder = fit_encoder([low, high])
    i = NUMERIC_FEATURES.index("src_bytes")
    assert encoder.encode_record(low)[i] == 0.0
    assert encoder.encode_record(high)[i] == 1.0
    above = _record(src_bytes=1000)
    assert encoder.encode_record(above)[i] == 1.0
    below_probe = _record(src_bytes=0)
    assert encoder.encode_record(below_probe)[i] == 0.0


def test_unknown_symbol_hits_reserved_slot():
    encoder = fit_encoder([_record(service="http"), _record(service="smtp")])
    unseen = _record(service="telnet")
    vec = encoder.encode_record(unseen)
    offset = len(NUMERIC_FEATURES)
    proto_block = len(encoder.vocabularies_["protocol_type"]) + 1
    service_block = len(encoder.vocabularies_["service"]) + 1
    block = vec[offset + proto_block : offset + proto_block + service_block]
    assert block[-1] == 1.0
    assert block.sum() == 1.0
    info = encoder.symbol_slots(unseen)
    assert info["service"] == {"symbol": "telnet", "in_vocabulary": False}
    assert info["protocol_type"]["in_vocabulary"] is True


_rates = st.integers(min_value=0, max_value=100).map(lambda n: n / 100)


@st.composite
def _random_records(draw):
    return _record(
        duration=draw(st.integers(0, 10_000)),
        protocol_type=draw(st.sampled_from(["tcp", "udp", "icmp", "sctp"])),
        service=draw(st.sampled_from(["http", "smtp", "ftp", "dns", "ntp_u", "weird"])),
        flag=draw(st.sampled_from(["SF", "S0", "REJ", "RSTO"])),
        src_bytes=draw(st.integers(0, 10**8)),
        dst_bytes=draw(st.integers(0, 10**8)),
        count=draw(st.integers(0, 511)),
        srv_count=draw(st.integers(0, 511)),
        serror_rate=draw(_rates),
        same_srv_rate=draw(_rates),
        dst_host_count=draw(st.integers(0, 255)),
        logged_in=draw(st.integers(0, 1)),
    )


@settings(max_examples=60, deadline=None)
@given(st.lists(_random_records(), min_size=1, max_size=12), _random_records())
def test_encoded_vectors_stay_in_unit_box(training, probe):
    encoder = fit_encoder(training)
    vec = encoder.encode_record(probe)
    assert vec.shape == (encoder.width_,)
    assert np.all(vec >= 0.0) and np.all(vec <= 1.0)
    offset = len(NUMERIC_FEATURES)
    for name in SYMBOLIC_FEATURES:
        block = len(encoder.vocabularies_[name]) + 1
        assert vec[offset : offset + block].sum() == 1.0
        offset += block


def test_transform_stacks_rows():
    records = synth_records({"normal": 5, "neptune": 5}, seed=1)
    encoder = fit_encoder(records)
    matrix = encoder.transform(records)
    assert matrix.shape == (10, encoder.width_)
    assert matrix.dtype == np.float64
    empty = encoder.transform([])
    assert empty.shape == (0, encoder.width_)
