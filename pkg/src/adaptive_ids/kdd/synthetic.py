"""Small synthetic corpora for desk-scale runs, demos, and tests.

Each traffic profile is a tight, seeded cluster in feature space, so the
generated corpora behave predictably: profiles are separable once their
service symbol is in the encoder vocabulary, and the two "looks like
something else" profiles (a benign-looking attack, an attack-looking new
service) exercise the adaptation loop. Rates are quantized to two decimals
to match the text format exactly.
"""

from __future__ import annotations

import random
from typing import Sequence

from .records import ConnectionRecord, Label


def _benign_base(rng: random.Random) -> dict:
    count = rng.randint(2, 8)
    host_count = rng.randint(10, 40)
    return dict(
        duration=rng.randint(0, 2),
        protocol_type="tcp",
        service="http",
        flag="SF",
        src_bytes=rng.randint(180, 330),
        dst_bytes=rng.randint(300, 600),
        land=0,
        wrong_fragment=0,
        urgent=0,
        hot=0,
        num_failed_logins=0,
        logged_in=1,
        num_compromised=0,
        root_shell=0,
        su_attempted=0,
        num_root=0,
        num_file_creations=0,
        num_shells=0,
        num_access_files=0,
        num_outbound_cmds=0,
        is_host_login=0,
        is_guest_login=0,
        count=count,
        srv_count=count,
        serror_rate=0.0,
        srv_serror_rate=0.0,
        rerror_rate=0.0,
        srv_rerror_rate=0.0,
        same_srv_rate=1.0,
        diff_srv_rate=0.0,
        srv_diff_host_rate=0.0,
        dst_host_count=host_count,
        dst_host_srv_count=host_count,
        dst_host_same_srv_rate=1.0,
        dst_host_diff_srv_rate=0.0,
        dst_host_same_src_port_rate=round(rng.choice([0.0, 0.01, 0.02]), 2),
        dst_host_srv_diff_host_rate=0.0,
        dst_host_serror_rate=0.0,
        dst_host_srv_serror_rate=0.0,
        dst_host_rerror_rate=0.0,
        dst_host_srv_rerror_rate=0.0,
    )


def _syn_flood_overrides(rng: random.Random) -> dict:
    count = rng.randint(110, 170)
    return dict(
        service="private",
        flag="S0",
        src_bytes=0,
        dst_bytes=0,
        logged_in=0,
        count=count,
        srv_count=count,
        serror_rate=1.0,
        srv_serror_rate=1.0,
        same_srv_rate=0.05,
        diff_srv_rate=round(rng.choice([0.06, 0.07, 0.08]), 2),
        dst_host_count=255,
        dst_host_srv_count=rng.randint(10, 30),
        dst_host_same_srv_rate=0.04,
        dst_host_serror_rate=1.0,
        dst_host_srv_serror_rate=1.0,
    )


def _normal(rng: random.Random) -> ConnectionRecord:
    return ConnectionRecord(label=Label.normal(), **_benign_base(rng))


def _neptune(rng: random.Random) -> ConnectionRecord:
    values = _benign_base(rng)
    values.update(_syn_flood_overrides(rng))
    return ConnectionRecord(label=Label.attack("neptune"), **values)


def _smurf(rng: random.Random) -> ConnectionRecord:
    values = _benign_base(rng)
    count = rng.randint(400, 511)
    values.update(
        protocol_type="icmp",
        service="ecr_i",
        src_bytes=1032,
        dst_bytes=0,
        logged_in=0,
        count=count,
        srv_count=count,
        dst_host_count=255,
        dst_host_srv_count=255,
    )
    return ConnectionRecord(label=Label.attack("smurf"), **values)


def _mailbomb(rng: random.Random) -> ConnectionRecord:
    # Benign-looking except for the mail service symbol: invisible to a
    # model that never saw the symbol, trivially separable once it has.
    values = _benign_base(rng)
    values.update(
        service="smtp",
        src_bytes=rng.randint(280, 420),
        dst_bytes=rng.randint(300, 400),
        count=rng.randint(4, 10),
        srv_count=rng.randint(4, 10),
    )
    return ConnectionRecord(label=Label.attack("mailbomb"), **values)


def _new_service_normal(rng: random.Random) -> ConnectionRecord:
    # Legitimate traffic of a service absent from old corpora, with
    # flood-like volume numbers: a false-alarm magnet until retrained.
    values = _benign_base(rng)
    values.update(_syn_flood_overrides(rng))
    values.update(service="ntp_u", count=rng.randint(100, 160))
    values["srv_count"] = values["count"]
    return ConnectionRecord(label=Label.normal(), **values)


PROFILES = {
    "normal": _normal,
    "neptune": _neptune,
    "smurf": _smurf,
    "mailbomb": _mailbomb,
    "new_service_normal": _new_service_normal,
}


def synth_records(
    counts: dict[str, int] | Sequence[tuple[str, int]], seed: int
) -> list[ConnectionRecord]:
    """Generate profiled records, shuffled deterministically by ``seed``."""
    pairs = list(counts.items()) if isinstance(counts, dict) else list(counts)
    rng = random.Random(seed)
    records: list[ConnectionRecord] = []
    for profile, n in pairs:
        make = PROFILES[profile]
        records.extend(make(rng) for _ in range(n))
    rng.shuffle(records)
    return records
