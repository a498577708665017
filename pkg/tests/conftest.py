"""Shared fixtures: small deterministic corpora and classifier specs."""

from __future__ import annotations

import pytest

from adaptive_ids.classifier import TrainSpec
from adaptive_ids.kdd.records import write_kdd_file
from adaptive_ids.kdd.synthetic import synth_records
from adaptive_ids.svm import SmoConfig

# First line of the public 10% training file, kept verbatim as a parsing fixture.
PUBLIC_FIRST_LINE = (
    "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,"
    "0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal."
)


@pytest.fixture(scope="session")
def toy_train():
    return synth_records({"normal": 120, "neptune": 60, "mailbomb": 30}, seed=11)


@pytest.fixture(scope="session")
def toy_stream():
    return synth_records({"normal": 60, "neptune": 20, "mailbomb": 20}, seed=12)


@pytest.fixture(scope="session")
def toy_spec():
    # Tuned for the synthetic clusters: hard margins, kernel width that
    # separates one-hot service blocks.
    return TrainSpec(kind="svm", smo=SmoConfig(C=10.0, seed=0), svm_gamma=0.5, seed=5)


@pytest.fixture()
def corpus_files(tmp_path, toy_train, toy_stream):
    train_path = tmp_path / "train.csv"
    stream_path = tmp_path / "stream.csv"
    write_kdd_file(toy_train, train_path)
    write_kdd_file(toy_stream, stream_path)
    return train_path, stream_path
