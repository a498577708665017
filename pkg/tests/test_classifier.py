"""Artifact lifecycle: train, predict, retrain, serialize."""

import numpy as np
import pytest

from adaptive_ids import classifier as clf
from adaptive_ids.exceptions import CorruptArtifact, DegenerateLabels, NoNewEvidence
from adaptive_ids.kdd.records import FEATURE_SCHEMA, ConnectionRecord, Label
from adaptive_ids.kdd.synthetic import synth_records
from adaptive_ids.mlp import RpropConfig
from adaptive_ids.svm import SmoConfig


def _record(label: Label, **overrides) -> ConnectionRecord:
    values = {}
    for name, kind in FEATURE_SCHEMA:
        if kind == "symbol":
            values[name] = {"protocol_type": "tcp", "service": "http", "flag": "SF"}[name]
        elif kind == "float":
            values[name] = 0.0
        else:
            values[name] = 0
    values.update(overrides)
    return ConnectionRecord(label=label, **values)


def pair_corpus():
    """Two records whose encodings differ in exactly one scaled feature."""
    attack = _record(Label.attack("neptune"), src_bytes=0)
    normal = _record(Label.normal(), src_bytes=100)
    return [attack, normal]


def mlp_spec(grid=(4,), epochs=300):
    return clf.TrainSpec(
        kind="mlp",
        hidden_size_grid=grid,
        trainer="rprop",
        rprop=RpropConfig(max_epochs=epochs, target_mse=1e-3),
        seed=3,
    )


SVM_PAIR_SPEC = clf.TrainSpec(
    kind="svm",
    smo=SmoConfig(C=10.0, seed=0),
    svm_kernel="linear",
    seed=0,
)


def test_single_class_corpus_rejected():
    records = synth_records({"normal": 10}, seed=0)
    with pytest.raises(DegenerateLabels):
        clf.train(SVM_PAIR_SPEC, records)


def test_single_grid_entry_trains_one_candidate(toy_train):
    spec = mlp_spec(grid=(10,), epochs=60)
    artifact = clf.train(spec, toy_train[:60], created_at=0.0)
    assert len(artifact.manifest.candidates) == 1
    assert artifact.manifest.chosen_hidden_size == 10
    assert artifact.version == 1


def test_training_is_deterministic(toy_train):
    spec = mlp_spec(epochs=80)
    corpus = toy_train[:80]
    first = clf.train(spec, corpus, created_at=123.0)
    second = clf.train(spec, corpus, created_at=123.0)
    assert first.manifest == second.manifest
    assert clf.serialize(first) == clf.serialize(second)
    probe = synth_records({"normal": 10, "neptune": 10}, seed=99)
    assert clf.predict_batch(first, probe) == clf.predict_batch(second, probe)


def test_svm_pair_reproduces_analytic_decision_function():
    corpus = pair_corpus()
    artifact = clf.train(SVM_PAIR_SPEC, corpus, created_at=0.0)
    attack, normal = corpus
    is_attack, score = clf.predict(artifact, attack)
    assert is_attack and score == pytest.approx(1.0, abs=1e-6)
    is_attack, score = clf.predict(artifact, normal)
    assert not is_attack and score == pytest.approx(-1.0, abs=1e-6)
    # Midpoint of the two encodings sits on the boundary: ties go to attack.
    midpoint = _record(Label.normal(), src_bytes=50)
    is_attack, score = clf.predict(artifact, midpoint)
    assert score == pytest.approx(0.0, abs=1e-6)
    assert is_attack


def test_mlp_zero_weights_predict_attack_at_threshold(toy_train):
    artifact = clf.train(mlp_spec(grid=(3,), epochs=5), toy_train[:40], created_at=0.0)
    for w in artifact.model.weights:
        w[:] = 0.0
    for b in artifact.model.biases:
        b[:] = 0.0
    is_attack, score = clf.predict(artifact, toy_train[0])
    assert score == 0.5
    assert is_attack  # threshold is inclusive


def test_hidden_size_search_keeps_validation_minimizer(toy_train):
    spec = mlp_spec(grid=(2, 6, 12), epochs=120)
    artifact = clf.train(spec, toy_train[:100], created_at=0.0)
    candidates = artifact.manifest.candidates
    assert len(candidates) == 3
    best = min(c["validation_mse"] for c in candidates)
    chosen = next(
        c for c in candidates if c["hidden_size"] == artifact.manifest.chosen_hidden_size
    )
    assert chosen["validation_mse"] == best


def test_retrain_increments_version_and_learns_evidence(toy_spec, toy_train, toy_stream):
    base_corpus = [r for r in toy_train if r.label.name != "mailbomb"]
    artifact = clf.train(toy_spec, base_corpus, created_at=0.0)
    before_bytes = clf.serialize(artifact)

    evidence_record = next(r for r in toy_stream if r.label.name == "mailbomb")
    assert not clf.predict(artifact, evidence_record).is_attack

    retrained = clf.retrain(
        artifact, base_corpus, [(evidence_record, clf.CONFIRMED_ATTACK)], toy_spec,
        created_at=1.0,
    )
    assert retrained.version == artifact.version + 1
    assert clf.predict(retrained, evidence_record).is_attack
    assert clf.serialize(artifact) == before_bytes  # input artifact untouched
    # Encoder refit: the new service symbol earned a vocabulary slot.
    assert "smtp" in retrained.encoder.vocabularies_["service"]
    assert "smtp" not in artifact.encoder.vocabularies_["service"]


def test_retrain_with_duplicate_normal_still_bumps_version(toy_spec, toy_train):
    base_corpus = [r for r in toy_train if r.label.name != "mailbomb"]
    artifact = clf.train(toy_spec, base_corpus, created_at=0.0)
    duplicate_normal = next(r for r in base_corpus if not r.label.is_attack)
    retrained = clf.retrain(
        artifact, base_corpus, [(duplicate_normal, clf.FALSE_ALARM)], toy_spec,
        created_at=1.0,
    )
    assert retrained.version == 2
    assert retrained.manifest.record_count == len(base_corpus) + 1


def test_retrain_refuses_empty_evidence(toy_spec, toy_train):
    base_corpus = [r for r in toy_train if r.label.name != "mailbomb"][:60]
    artifact = clf.train(toy_spec, base_corpus, created_at=0.0)
    with pytest.raises(NoNewEvidence):
        clf.retrain(artifact, base_corpus, [], toy_spec)
    forced = clf.retrain(artifact, base_corpus, [], toy_spec, force=True, created_at=1.0)
    assert forced.version == 2
    assert forced.manifest.record_count == len(base_corpus)


def test_relabel_evidence_rules():
    attack = _record(Label.attack("neptune"))
    normal = _record(Label.normal())
    out = clf.relabel_evidence(
        [
            (attack, clf.CONFIRMED_ATTACK),
            (normal, clf.CONFIRMED_ATTACK),
            (attack, clf.FALSE_ALARM),
            (normal, clf.FALSE_ALARM),
        ]
    )
    assert out[0].label == Label.attack("neptune")
    assert out[1].label.is_attack and out[1].label.attack_name == clf.UNATTRIBUTED_ATTACK
    assert not out[2].label.is_attack
    assert out[3].label == Label.normal()
    with pytest.raises(ValueError):
        clf.relabel_evidence([(attack, "undecided")])


def test_serialize_roundtrip_mlp(toy_train):
    artifact = clf.train(mlp_spec(grid=(5,), epochs=40), toy_train[:60], created_at=7.0)
    blob = clf.serialize(artifact)
    restored = clf.deserialize(blob)
    assert restored.kind == "mlp"
    assert restored.version == artifact.version
    assert restored.manifest == artifact.manifest
    for w_a, w_b in zip(artifact.model.weights, restored.model.weights):
        assert np.array_equal(w_a, w_b)
    assert clf.serialize(restored) == blob  # canonical container


def test_serialize_roundtrip_svm_predictions(toy_spec, toy_train, toy_stream):
    artifact = clf.train(toy_spec, toy_train[:100], created_at=7.0)
    restored = clf.deserialize(clf.serialize(artifact))
    assert clf.predict_batch(restored, toy_stream) == clf.predict_batch(artifact, toy_stream)


def test_corrupt_containers_rejected(toy_spec, toy_train):
    artifact = clf.train(toy_spec, toy_train[:60], created_at=0.0)
    blob = clf.serialize(artifact)
    with pytest.raises(CorruptArtifact):
        clf.deserialize(blob[:10])
    with pytest.raises(CorruptArtifact):
        clf.deserialize(blob[:-5])
    with pytest.raises(CorruptArtifact):
        clf.deserialize(b"XIDS" + blob[4:])
    with pytest.raises(CorruptArtifact):
        clf.deserialize(blob + b"junk")
    with pytest.raises(CorruptArtifact):
        clf.deserialize(blob[:4] + b"\xff\xff" + blob[6:])


def test_artifact_files(tmp_path, toy_spec, toy_train):
    artifact = clf.train(toy_spec, toy_train[:60], created_at=0.0)
    path = tmp_path / ("model" + clf.ARTIFACT_EXTENSION)
    clf.save_artifact(artifact, path)
    restored = clf.load_artifact(path)
    assert clf.serialize(restored) == clf.serialize(artifact)


def test_predict_is_deterministic_and_pure(toy_spec, toy_train, toy_stream):
    artifact = clf.train(toy_spec, toy_train[:80], created_at=0.0)
    record = toy_stream[0]
    first = clf.predict(artifact, record)
    for _ in range(5):
        assert clf.predict(artifact, record) == first
    assert clf.predict_batch(artifact, toy_stream[:10]) == clf.predict_batch(
        artifact, toy_stream[:10]
    )


def test_trainspec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        clf.TrainSpec(kind="forest")
    with pytest.raises(ValueError):
        clf.TrainSpec(kind="mlp", hidden_size_grid=())
    with pytest.raises(ValueError):
        clf.TrainSpec(validation_fraction=1.5)
    spec = clf.TrainSpec(kind="svm", svm_gamma=0.25, seed=9)
    assert clf.TrainSpec.from_dict(spec.to_dict()) == spec
