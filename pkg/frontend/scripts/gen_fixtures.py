#!/usr/bin/env python3
"""Capture real central API responses as JSON fixtures for the TS tests.

Run from the repository root after installing the Python package:
    python3 frontend/scripts/gen_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from adaptive_ids import classifier as clf
from adaptive_ids.kdd.synthetic import synth_records
from adaptive_ids.nodes.api import create_app
from adaptive_ids.nodes.central import Central, OFFICER_MANUAL
from adaptive_ids.nodes.monitors import NetLanMonitor
from adaptive_ids.protocol import make_model_update
from adaptive_ids.svm import SmoConfig

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def main() -> None:
    train = synth_records({"normal": 120, "neptune": 60}, seed=11)
    stream = synth_records({"normal": 20, "neptune": 6, "mailbomb": 4}, seed=12)
    spec = clf.TrainSpec(kind="svm", smo=SmoConfig(C=10.0, seed=0), svm_gamma=0.5, seed=5)
    central = Central(spec, train, officer_policy=OFFICER_MANUAL, retrain_threshold=50,
                      clock=iter(range(1, 100_000)).__next__)
    central.train_base()
    central.register_monitor("netlan-1", "netlan")
    central.record_applied_version("netlan-1", 1)

    monitor = NetLanMonitor("netlan-1")
    monitor.apply_update(make_model_update(1, clf.serialize(central.base_artifact)))
    for record in stream:
        alarm = monitor.process(record, now=central.now())
        if alarm is not None:
            central.handle_alarm(alarm)

    client = TestClient(create_app(central))
    FIXTURES.mkdir(parents=True, exist_ok=True)

    listing = client.get("/alarms").json()
    first_id = listing["alarms"][0]["alarm_id"]
    fixtures = {
        "alarms.json": listing,
        "alarm_detail.json": client.get(f"/alarms/{first_id}").json(),
        "verdict.json": client.post(
            f"/alarms/{first_id}/verdict", json={"decision": "confirmed_attack"}
        ).json(),
        "metrics.json": client.get("/metrics").json(),
        "model.json": client.get("/model").json(),
        "nodes.json": client.get("/nodes").json(),
    }
    for name, payload in fixtures.items():
        (FIXTURES / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {FIXTURES / name}")


if __name__ == "__main__":
    main()
