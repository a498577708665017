"""HTTP API over a Central instance, consumed by the triage console.

Handlers serialize state access through one re-entrant lock. Retraining
runs in a worker thread that holds that lock; a separate non-blocking
gate makes a concurrent retrain request answer 409 instead of queueing.
"""

from __future__ import annotations

import threading
from typing import Callable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from ..exceptions import AlarmAlreadyDecided, AlarmNotFound
from ..harness.metrics import report_to_dict
from ..kdd.records import FEATURE_GROUPS
from ..protocol import (
    ALARM_STATUSES,
    STATUS_CONFIRMED_ATTACK,
    STATUS_FALSE_ALARM,
    AlarmReport,
    ModelUpdate,
    Verdict,
)
from .central import Central


class VerdictBody(BaseModel):
    decision: str


class RetrainBody(BaseModel):
    force: bool = False


def _alarm_row(alarm: AlarmReport) -> dict:
    return {
        "alarm_id": alarm.alarm_id,
        "source": alarm.source,
        "node_id": alarm.node_id,
        "timestamp": alarm.timestamp,
        "score": alarm.score,
        "model_version_used": alarm.model_version_used,
        "status": alarm.status,
    }


def create_app(
    central: Central,
    lock: threading.RLock | None = None,
    on_model_update: Callable[[ModelUpdate], None] | None = None,
) -> FastAPI:
    """Build the API; ``on_model_update`` is invoked after each retrain,
    with the lock released, so a transport layer can broadcast the model."""
    lock = lock if lock is not None else threading.RLock()
    retrain_gate = threading.Lock()
    app = FastAPI(title="adaptive-ids central")
    # The triage console is served statically from another origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.central = central
    app.state.lock = lock
    app.state.retrain_gate = retrain_gate

    def _alarm_detail(alarm: AlarmReport) -> dict:
        detail = _alarm_row(alarm)
        detail["record"] = alarm.record.to_dict()
        detail["feature_groups"] = {k: list(v) for k, v in FEATURE_GROUPS.items()}
        if central.base_artifact is not None:
            detail["encoded"] = central.base_artifact.encoder.symbol_slots(alarm.record)
        else:
            detail["encoded"] = {}
        return detail

    def _run_retrain_locked(force: bool) -> None:
        try:
            with lock:
                update = central.retrain_and_broadcast(force=force)
        except Exception:
            # Retrain failures are recorded in the event log; evidence is kept.
            return
        finally:
            retrain_gate.release()
        if on_model_update is not None:
            on_model_update(update)

    def _start_retrain(force: bool) -> bool:
        """Claim the gate and spawn the worker; False when one is running."""
        if not retrain_gate.acquire(blocking=False):
            return False
        threading.Thread(
            target=_run_retrain_locked, args=(force,), name="central-retrain", daemon=True
        ).start()
        return True

    @app.get("/alarms")
    def list_alarms(status: str | None = None) -> dict:
        if status is not None and status not in ALARM_STATUSES:
            raise HTTPException(status_code=400, detail=f"unknown status {status!r}")
        with lock:
            alarms = central.list_alarms(status)
            return {
                "alarms": [_alarm_row(a) for a in alarms],
                "evidence_count": len(central.evidence),
            }

    @app.get("/alarms/{alarm_id}")
    def get_alarm(alarm_id: str) -> dict:
        with lock:
            alarm = central.alarms.get(alarm_id)
            if alarm is None:
                raise HTTPException(status_code=404, detail=f"no alarm {alarm_id!r}")
            return _alarm_detail(alarm)

    @app.post("/alarms/{alarm_id}/verdict")
    def post_verdict(alarm_id: str, body: VerdictBody) -> dict:
        if body.decision not in (STATUS_CONFIRMED_ATTACK, STATUS_FALSE_ALARM):
            raise HTTPException(status_code=400, detail=f"bad decision {body.decision!r}")
        with lock:
            verdict = Verdict(
                alarm_id=alarm_id,
                decision=body.decision,
                decided_by="officer",
                timestamp=central.now(),
            )
            try:
                updated = central.apply_verdict(verdict)
            except AlarmNotFound as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from None
            except AlarmAlreadyDecided as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            row = _alarm_row(updated)
            row["evidence_count"] = len(central.evidence)
            scheduled = central.retrain_scheduled
        if scheduled:
            _start_retrain(force=False)
        return row

    @app.post("/retrain")
    def post_retrain(body: RetrainBody | None = None) -> dict:
        force = bool(body.force) if body is not None else False
        with lock:
            if not central.evidence and not force:
                raise HTTPException(
                    status_code=400,
                    detail="no confirmed evidence; pass force=true to override",
                )
            version_before = central.base_version
        if not _start_retrain(force=force):
            raise HTTPException(status_code=409, detail="retrain already running")
        return {"status": "started", "version_before": version_before}

    @app.get("/metrics")
    def get_metrics() -> dict:
        with lock:
            return report_to_dict(central.metrics_report())

    @app.get("/model")
    def get_model() -> dict:
        with lock:
            if central.base_artifact is None:
                raise HTTPException(status_code=404, detail="no model trained yet")
            return {
                "version": central.base_version,
                "kind": central.base_artifact.kind,
                "manifest": central.base_artifact.manifest.to_dict(),
                "retrain_running": retrain_gate.locked(),
            }

    @app.get("/nodes")
    def get_nodes() -> dict:
        with lock:
            return {
                "nodes": [dict(v) for v in central.monitors.values()],
                "base_version": central.base_version,
            }

    return app
