"""Monitor and central behavior: alarms, triage, retrain loop, replay."""

import pytest

from adaptive_ids import classifier as clf
from adaptive_ids.exceptions import (
    AlarmAlreadyDecided,
    AlarmNotFound,
    IntegrityError,
    NoNewEvidence,
)
from adaptive_ids.nodes.central import (
    Central,
    OFFICER_ALWAYS_FALSE_ALARM,
    OFFICER_MANUAL,
    OFFICER_ORACLE,
)
from adaptive_ids.nodes.monitors import HoneypotMonitor, NetLanMonitor
from adaptive_ids.protocol import (
    ModelUpdate,
    STATUS_CONFIRMED_ATTACK,
    STATUS_FALSE_ALARM,
    STATUS_PENDING,
    Verdict,
    alarm_envelope,
    make_model_update,
    register_envelope,
)


@pytest.fixture(scope="module")
def base_artifact(toy_spec, toy_train):
    corpus = [r for r in toy_train if r.label.name != "mailbomb"]
    return clf.train(toy_spec, corpus, created_at=0.0), corpus


def fresh_monitor(artifact=None) -> NetLanMonitor:
    monitor = NetLanMonitor("netlan-1", buffer_cap=3)
    if artifact is not None:
        update = make_model_update(artifact.version, clf.serialize(artifact))
        monitor.apply_update(update)
    return monitor


def test_monitor_silent_on_normal(base_artifact, toy_stream):
    artifact, _ = base_artifact
    monitor = fresh_monitor(artifact)
    normal = next(r for r in toy_stream if not r.label.is_attack)
    assert monitor.process(normal) is None
    assert monitor.records_seen == 1
    assert monitor.alarms_raised == 0


def test_monitor_alarm_carries_full_record(base_artifact, toy_stream):
    artifact, _ = base_artifact
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    alarm = monitor.process(attack, now=5.0)
    assert alarm is not None
    assert alarm.record == attack
    assert alarm.status == STATUS_PENDING
    assert alarm.model_version_used == 1
    assert alarm.timestamp == 5.0
    assert alarm.score >= 0.0


def test_three_identical_attacks_three_alarm_ids(base_artifact, toy_stream):
    artifact, _ = base_artifact
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    ids = {monitor.process(attack).alarm_id for _ in range(3)}
    assert len(ids) == 3


def test_monitor_buffers_then_drops_without_model(base_artifact, toy_stream):
    artifact, _ = base_artifact
    monitor = fresh_monitor()  # no model applied
    attacks = [r for r in toy_stream if r.label.name == "neptune"][:5]
    for record in attacks:
        assert monitor.process(record) is None
    assert monitor.dropped_no_model == 2  # cap is 3
    update = make_model_update(artifact.version, clf.serialize(artifact))
    applied, drained = monitor.apply_update(update)
    assert applied
    assert len(drained) == 3
    assert all(a.status == STATUS_PENDING for a in drained)


def test_monitor_ignores_stale_and_corrupt_updates(base_artifact):
    artifact, _ = base_artifact
    monitor = fresh_monitor(artifact)
    stale = make_model_update(artifact.version, clf.serialize(artifact))
    applied, _ = monitor.apply_update(stale)
    assert not applied
    blob = clf.serialize(artifact)
    corrupt = ModelUpdate(version=99, artifact_bytes=blob[:-1], digest=stale.digest)
    with pytest.raises(IntegrityError):
        monitor.apply_update(corrupt)
    assert monitor.applied_version == artifact.version


def test_honeypot_detection_probabilities(toy_stream):
    attack = next(r for r in toy_stream if r.label.is_attack)
    normal = next(r for r in toy_stream if not r.label.is_attack)

    always = HoneypotMonitor("hp", p_detect=1.0, seed=0)
    alarm = always.process(attack)
    assert alarm is not None
    assert alarm.status == STATUS_CONFIRMED_ATTACK
    assert always.process(normal) is None

    never = HoneypotMonitor("hp", p_detect=0.0, seed=0)
    assert never.process(attack) is None
    with pytest.raises(ValueError):
        HoneypotMonitor("hp", p_detect=1.5)


def _central(spec, corpus, **kwargs):
    central = Central(spec, corpus, **kwargs)
    central.train_base(created_at=0.0)
    return central


def _netlan_alarm(monitor, record):
    alarm = monitor.process(record)
    assert alarm is not None
    return alarm


def test_honeypot_alarm_becomes_evidence_immediately(base_artifact, toy_spec, toy_stream):
    _, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_MANUAL)
    honeypot = HoneypotMonitor("hp", p_detect=1.0, seed=1)
    attack = next(r for r in toy_stream if r.label.name == "mailbomb")
    central.handle_alarm(honeypot.process(attack))
    assert len(central.evidence) == 1
    assert central.evidence[0][1] == clf.CONFIRMED_ATTACK


def test_duplicate_alarm_changes_state_once(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_MANUAL)
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    alarm = _netlan_alarm(monitor, attack)
    assert central.handle_alarm(alarm) == STATUS_PENDING
    snapshot = central.state_snapshot()
    assert central.handle_alarm(alarm) == "duplicate"
    assert central.state_snapshot() == snapshot


def test_manual_policy_keeps_alarm_pending(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_MANUAL)
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    central.handle_alarm(_netlan_alarm(monitor, attack))
    assert [a.status for a in central.list_alarms()] == [STATUS_PENDING]
    assert central.evidence == []


def test_oracle_policy_marks_ground_truth_normal_as_false_alarm(toy_spec, toy_train):
    corpus = [r for r in toy_train if r.label.name != "mailbomb"]
    central = _central(toy_spec, corpus, officer_policy=OFFICER_ORACLE)
    # Force an alarm for a ground-truth normal record via a handcrafted report.
    monitor = fresh_monitor(central.base_artifact)
    normal = next(r for r in corpus if not r.label.is_attack)
    alarm = monitor._classify(normal, now=1.0)  # bypass prediction gate
    if alarm is None:
        from adaptive_ids.protocol import AlarmReport, SOURCE_NETLAN

        alarm = AlarmReport(
            alarm_id="netlan-1-900000",
            source=SOURCE_NETLAN,
            node_id="netlan-1",
            record=normal,
            score=0.9,
            model_version_used=1,
            timestamp=1.0,
            status=STATUS_PENDING,
        )
    status = central.handle_alarm(alarm)
    assert status == STATUS_FALSE_ALARM
    assert central.evidence[-1][1] == clf.FALSE_ALARM


def test_always_false_alarm_policy(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_ALWAYS_FALSE_ALARM)
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    assert central.handle_alarm(_netlan_alarm(monitor, attack)) == STATUS_FALSE_ALARM


def test_verdict_flow_and_conflicts(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_MANUAL)
    monitor = fresh_monitor(artifact)
    attack = next(r for r in toy_stream if r.label.name == "neptune")
    alarm = _netlan_alarm(monitor, attack)
    central.handle_alarm(alarm)

    verdict = Verdict(alarm.alarm_id, STATUS_CONFIRMED_ATTACK, "officer", 2.0)
    updated = central.apply_verdict(verdict)
    assert updated.status == STATUS_CONFIRMED_ATTACK
    assert len(central.evidence) == 1

    with pytest.raises(AlarmAlreadyDecided):
        central.apply_verdict(verdict)
    with pytest.raises(AlarmNotFound):
        central.apply_verdict(Verdict("missing", STATUS_FALSE_ALARM, "officer", 3.0))


def test_threshold_schedules_retrain_exactly_once(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(
        toy_spec, corpus, officer_policy=OFFICER_MANUAL, retrain_threshold=2
    )
    monitor = fresh_monitor(artifact)
    attacks = [r for r in toy_stream if r.label.name == "neptune"][:3]
    ids = []
    for record in attacks:
        alarm = _netlan_alarm(monitor, record)
        central.handle_alarm(alarm)
        ids.append(alarm.alarm_id)

    central.apply_verdict(Verdict(ids[0], STATUS_CONFIRMED_ATTACK, "officer", 1.0))
    assert not central.retrain_scheduled
    central.apply_verdict(Verdict(ids[1], STATUS_CONFIRMED_ATTACK, "officer", 2.0))
    assert central.retrain_scheduled

    update = central.maybe_retrain()
    assert update is not None and update.version == 2
    assert central.maybe_retrain() is None  # consumed; not scheduled twice
    assert central.evidence == []
    # The third pending alarm decides after the retrain: counter restarted.
    central.apply_verdict(Verdict(ids[2], STATUS_CONFIRMED_ATTACK, "officer", 3.0))
    assert not central.retrain_scheduled


def test_forced_retrain_with_empty_evidence(base_artifact, toy_spec):
    _, corpus = base_artifact
    central = _central(toy_spec, corpus)
    with pytest.raises(NoNewEvidence):
        central.retrain_and_broadcast()
    before_corpus = len(central.corpus)
    update = central.retrain_and_broadcast(force=True)
    assert update.version == 2
    assert len(central.corpus) == before_corpus


def test_broadcast_converges_monitors_to_base(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_ORACLE, retrain_threshold=1)
    monitors = [fresh_monitor(central.base_artifact) for _ in range(3)]
    honeypot = HoneypotMonitor("hp", p_detect=1.0, seed=2)
    mailbomb = next(r for r in toy_stream if r.label.name == "mailbomb")
    central.handle_alarm(honeypot.process(mailbomb))
    update = central.maybe_retrain()
    assert update is not None
    for monitor in monitors:
        applied, _ = monitor.apply_update(update)
        assert applied
        assert monitor.applied_version == central.base_version

    probe = toy_stream[:100]
    base_predictions = clf.predict_batch(central.base_artifact, probe)
    for monitor in monitors:
        theirs = monitor.probe(probe)
        assert theirs == base_predictions  # bit-identical scores


def test_handle_envelope_register_and_bad_version(base_artifact, toy_spec):
    _, corpus = base_artifact
    central = _central(toy_spec, corpus)
    responses = central.handle_envelope(register_envelope("netlan-9", "netlan"))
    assert [r.msg_type for r in responses] == ["Ack", "ModelUpdate"]
    assert "netlan-9" in central.monitors

    from adaptive_ids.protocol import Envelope

    bad = Envelope("Ack", "x", {"ref": ""}, protocol_version=2)
    responses = central.handle_envelope(bad)
    assert [r.msg_type for r in responses] == ["Error"]


def test_handle_envelope_verdict_errors(base_artifact, toy_spec):
    _, corpus = base_artifact
    central = _central(toy_spec, corpus)
    from adaptive_ids.protocol import verdict_envelope

    envelope = verdict_envelope(Verdict("ghost", STATUS_FALSE_ALARM, "officer", 0.0), "console")
    responses = central.handle_envelope(envelope)
    assert responses[0].msg_type == "Error"
    assert responses[0].payload["code"] == "not_found"


def test_replay_reconstructs_live_state(tmp_path, toy_spec, toy_train, toy_stream):
    corpus = [r for r in toy_train if r.label.name != "mailbomb"]
    log_path = tmp_path / "central.log"
    live = Central(
        toy_spec,
        corpus,
        officer_policy=OFFICER_ORACLE,
        retrain_threshold=1,
        log_path=log_path,
        clock=iter(range(1, 10_000)).__next__,
    )
    live.train_base()
    monitor = fresh_monitor(live.base_artifact)
    live.handle_envelope(register_envelope(monitor.node_id, "netlan"))
    honeypot = HoneypotMonitor("hp", p_detect=1.0, seed=3)
    for record in toy_stream[:40]:
        alarm = monitor.process(record)
        if alarm is not None:
            live.handle_envelope(alarm_envelope(alarm, monitor.node_id))
        if record.label.is_attack:
            hp_alarm = honeypot.process(record)
            if hp_alarm is not None:
                live.handle_envelope(alarm_envelope(hp_alarm, honeypot.node_id))
        update = live.maybe_retrain()
        if update is not None:
            applied, _ = monitor.apply_update(update)
            if applied:
                live.record_applied_version(monitor.node_id, update.version)

    assert live.base_version > 1  # at least one retrain happened
    replayed = Central.replay(
        log_path, toy_spec, corpus, officer_policy=OFFICER_ORACLE, retrain_threshold=1
    )
    assert replayed.state_snapshot() == live.state_snapshot()
    # The replayed base model predicts identically.
    probe = toy_stream[:50]
    assert clf.predict_batch(replayed.base_artifact, probe) == clf.predict_batch(
        live.base_artifact, probe
    )


def test_central_metrics_report_shape(base_artifact, toy_spec, toy_stream):
    artifact, corpus = base_artifact
    central = _central(toy_spec, corpus, officer_policy=OFFICER_ORACLE)
    monitor = fresh_monitor(artifact)
    honeypot = HoneypotMonitor("hp", p_detect=1.0, seed=4)
    neptune = next(r for r in toy_stream if r.label.name == "neptune")
    mailbomb = next(r for r in toy_stream if r.label.name == "mailbomb")
    central.handle_alarm(_netlan_alarm(monitor, neptune))
    central.handle_alarm(honeypot.process(mailbomb))
    report = central.metrics_report()
    assert report.row_for("neptune").detected == 1
    assert report.row_for("mailbomb").detected == 1
    assert report.new_attack_names == ("mailbomb",)
    assert report.false_alarm_rate is None  # denominator unknown at central
    assert report.model_version == central.base_version


def test_central_validates_configuration(toy_spec, toy_train):
    with pytest.raises(ValueError):
        Central(toy_spec, toy_train, officer_policy="coin_flip")
    with pytest.raises(ValueError):
        Central(toy_spec, toy_train, retrain_threshold=0)
