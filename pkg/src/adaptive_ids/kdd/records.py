"""Connection records in the classic 41-feature KDD99 text format.

One line of input is 42 comma-separated fields: 41 features followed by a
label, the label usually terminated with a dot ("normal." / "smurf.").
Field order and typing follow the public kddcup.names schema; the three
symbolic features are protocol_type, service, and flag, everything else is
numeric (integer counts/bytes/0-1 flags, or rates in [0, 1]).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path
from typing import Iterable, Iterator

from ..exceptions import MalformedField, MalformedRecord
from .taxonomy import Category, category_of

# Field kinds, in canonical file order.
INT = "int"
FLOAT = "float"
SYMBOL = "symbol"

FEATURE_SCHEMA: tuple[tuple[str, str], ...] = (
    ("duration", INT),
    ("protocol_type", SYMBOL),
    ("service", SYMBOL),
    ("flag", SYMBOL),
    ("src_bytes", INT),
    ("dst_bytes", INT),
    ("land", INT),
    ("wrong_fragment", INT),
    ("urgent", INT),
    ("hot", INT),
    ("num_failed_logins", INT),
    ("logged_in", INT),
    ("num_compromised", INT),
    ("root_shell", INT),
    ("su_attempted", INT),
    ("num_root", INT),
    ("num_file_creations", INT),
    ("num_shells", INT),
    ("num_access_files", INT),
    ("num_outbound_cmds", INT),
    ("is_host_login", INT),
    ("is_guest_login", INT),
    ("count", INT),
    ("srv_count", INT),
    ("serror_rate", FLOAT),
    ("srv_serror_rate", FLOAT),
    ("rerror_rate", FLOAT),
    ("srv_rerror_rate", FLOAT),
    ("same_srv_rate", FLOAT),
    ("diff_srv_rate", FLOAT),
    ("srv_diff_host_rate", FLOAT),
    ("dst_host_count", INT),
    ("dst_host_srv_count", INT),
    ("dst_host_same_srv_rate", FLOAT),
    ("dst_host_diff_srv_rate", FLOAT),
    ("dst_host_same_src_port_rate", FLOAT),
    ("dst_host_srv_diff_host_rate", FLOAT),
    ("dst_host_serror_rate", FLOAT),
    ("dst_host_srv_serror_rate", FLOAT),
    ("dst_host_rerror_rate", FLOAT),
    ("dst_host_srv_rerror_rate", FLOAT),
)

FEATURE_NAMES: tuple[str, ...] = tuple(name for name, _ in FEATURE_SCHEMA)
SYMBOLIC_FEATURES: tuple[str, ...] = tuple(n for n, k in FEATURE_SCHEMA if k == SYMBOL)
NUMERIC_FEATURES: tuple[str, ...] = tuple(n for n, k in FEATURE_SCHEMA if k != SYMBOL)
NUM_FEATURES = len(FEATURE_SCHEMA)  # 41

# The conventional presentation grouping (basic / content / time-traffic /
# host-traffic); used by consumers that display records to a human.
FEATURE_GROUPS: dict[str, tuple[str, ...]] = {
    "basic": FEATURE_NAMES[0:9],
    "content": FEATURE_NAMES[9:22],
    "time_traffic": FEATURE_NAMES[22:31],
    "host_traffic": FEATURE_NAMES[31:41],
}

NORMAL_LABEL = "normal"


@dataclass(frozen=True, slots=True)
class Label:
    """Ground-truth label: normal traffic, or a named attack with a category."""

    attack_name: str | None = None
    category: Category | None = None

    def __post_init__(self):
        if self.attack_name is None and self.category is not None:
            raise ValueError("normal label cannot carry a category")
        if self.attack_name is not None and self.category is None:
            object.__setattr__(self, "category", category_of(self.attack_name))

    @property
    def is_attack(self) -> bool:
        return self.attack_name is not None

    @property
    def name(self) -> str:
        return self.attack_name if self.attack_name is not None else NORMAL_LABEL

    @classmethod
    def normal(cls) -> "Label":
        return cls()

    @classmethod
    def attack(cls, name: str) -> "Label":
        return cls(attack_name=name)

    @classmethod
    def from_text(cls, text: str) -> "Label":
        name = text.strip().rstrip(".")
        if name == NORMAL_LABEL:
            return cls.normal()
        return cls.attack(name)


@dataclass(frozen=True, slots=True)
class ConnectionRecord:
    """One summarized network connection: 41 features plus a label."""

    duration: int
    protocol_type: str
    service: str
    flag: str
    src_bytes: int
    dst_bytes: int
    land: int
    wrong_fragment: int
    urgent: int
    hot: int
    num_failed_logins: int
    logged_in: int
    num_compromised: int
    root_shell: int
    su_attempted: int
    num_root: int
    num_file_creations: int
    num_shells: int
    num_access_files: int
    num_outbound_cmds: int
    is_host_login: int
    is_guest_login: int
    count: int
    srv_count: int
    serror_rate: float
    srv_serror_rate: float
    rerror_rate: float
    srv_rerror_rate: float
    same_srv_rate: float
    diff_srv_rate: float
    srv_diff_host_rate: float
    dst_host_count: int
    dst_host_srv_count: int
    dst_host_same_srv_rate: float
    dst_host_diff_srv_rate: float
    dst_host_same_src_port_rate: float
    dst_host_srv_diff_host_rate: float
    dst_host_serror_rate: float
    dst_host_srv_serror_rate: float
    dst_host_rerror_rate: float
    dst_host_srv_rerror_rate: float
    label: Label

    def features(self) -> tuple:
        """Feature values in file order, label excluded."""
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def to_dict(self) -> dict:
        d = {name: getattr(self, name) for name in FEATURE_NAMES}
        if self.label.is_attack:
            d["label"] = {
                "kind": "attack",
                "name": self.label.attack_name,
                "category": self.label.category.value,
            }
        else:
            d["label"] = {"kind": "normal"}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ConnectionRecord":
        label_info = d["label"]
        if label_info["kind"] == "attack":
            label = Label.attack(label_info["name"])
        else:
            label = Label.normal()
        values = {name: d[name] for name in FEATURE_NAMES}
        return cls(label=label, **values)


assert tuple(f.name for f in dataclass_fields(ConnectionRecord))[:-1] == FEATURE_NAMES

_RATE_FIELDS = frozenset(n for n, k in FEATURE_SCHEMA if k == FLOAT)


def parse_kdd_line(line: str, lineno: int | None = None) -> ConnectionRecord:
    """Parse one 42-field KDD99 CSV line into a ConnectionRecord."""
    parts = line.rstrip("\r\n").split(",")
    if len(parts) != NUM_FEATURES + 1:
        raise MalformedRecord(
            f"expected {NUM_FEATURES + 1} comma-separated fields, got {len(parts)}",
            lineno,
        )
    values: dict[str, object] = {}
    for raw, (name, kind) in zip(parts, FEATURE_SCHEMA):
        if kind == SYMBOL:
            values[name] = raw
            continue
        try:
            if kind == INT:
                value: float | int = int(raw)
            else:
                value = float(raw)
        except ValueError:
            raise MalformedField(f"field {name!r}: not a number: {raw!r}", lineno) from None
        if kind == INT and value < 0:
            raise MalformedField(f"field {name!r}: negative count: {raw!r}", lineno)
        if name in _RATE_FIELDS and not 0.0 <= value <= 1.0:
            raise MalformedField(f"field {name!r}: rate outside [0,1]: {raw!r}", lineno)
        values[name] = value
    return ConnectionRecord(label=Label.from_text(parts[-1]), **values)  # type: ignore[arg-type]


def render_kdd_line(record: ConnectionRecord) -> str:
    """Render a record back to KDD99 CSV text (rates at two decimals, label dot-terminated)."""
    parts = []
    for name, kind in FEATURE_SCHEMA:
        value = getattr(record, name)
        parts.append(f"{value:.2f}" if kind == FLOAT else str(value))
    parts.append(record.label.name + ".")
    return ",".join(parts)


def iter_kdd_file(path: str | Path) -> Iterator[ConnectionRecord]:
    """Stream records from a KDD99 CSV file (transparently handles .gz)."""
    path = Path(path)
    if path.suffix == ".gz":
        import gzip

        opener = lambda: gzip.open(path, "rt", encoding="utf-8")  # noqa: E731
    else:
        opener = lambda: open(path, "r", encoding="utf-8")  # noqa: E731
    with opener() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            yield parse_kdd_line(line, lineno)


def load_kdd_file(path: str | Path) -> list[ConnectionRecord]:
    return list(iter_kdd_file(path))


def write_kdd_file(records: Iterable[ConnectionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(render_kdd_line(record) + "\n")


def count_by_category(records: Iterable[ConnectionRecord]) -> dict[str, int]:
    """Record counts keyed by 'normal' or the attack category name."""
    counts: dict[str, int] = {}
    for record in records:
        key = record.label.category.value if record.label.is_attack else NORMAL_LABEL
        counts[key] = counts.get(key, 0) + 1
    return counts


def attack_names(records: Iterable[ConnectionRecord]) -> set[str]:
    """Distinct attack names present in a collection."""
    return {r.label.attack_name for r in records if r.label.is_attack}


def corpus_digest(records: Iterable[ConnectionRecord]) -> str:
    """Stable SHA-256 over the rendered text of a corpus, order included."""
    h = hashlib.sha256()
    for record in records:
        h.update(render_kdd_line(record).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
