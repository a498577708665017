"""Unified train / retrain / predict / serialize facade over both model kinds.

An artifact bundles a fitted encoder, a trained model, a monotonically
increasing version, and a manifest describing exactly how it was built.
Serialized artifacts are self-describing binary containers that byte-for-
byte survive disk and wire transport, so every monitor reproduces the
central model's predictions exactly.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import CorruptArtifact, DegenerateLabels, NoNewEvidence
from .kdd.encoder import KddEncoder
from .kdd.records import ConnectionRecord, Label, attack_names, corpus_digest
from .kdd.sampling import split_records
from .mlp import (
    LmConfig,
    MlpNetwork,
    RpropConfig,
    forward,
    forward_batch,
    init_network,
    train_lm,
    train_rprop,
)
from .svm import Kernel, SmoConfig, SvmModel, decision_value, decision_values, smo_train

MAGIC = b"AIDS"
FORMAT_VERSION = 1
ARTIFACT_EXTENSION = ".aids"

KIND_MLP = "mlp"
KIND_SVM = "svm"

CONFIRMED_ATTACK = "confirmed_attack"
FALSE_ALARM = "false_alarm"

# Label attached to confirmed-attack evidence whose record arrived unlabeled.
UNATTRIBUTED_ATTACK = "unattributed"


@dataclass(frozen=True)
class TrainSpec:
    """Everything needed to (re)build a classifier from a corpus."""

    kind: str = KIND_SVM
    hidden_size_grid: tuple[int, ...] = (15, 25, 40)
    trainer: str = "rprop"
    rprop: RpropConfig = field(default_factory=RpropConfig)
    lm: LmConfig = field(default_factory=LmConfig)
    smo: SmoConfig = field(default_factory=SmoConfig)
    svm_kernel: str = "rbf"
    svm_gamma: float | None = None
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (KIND_MLP, KIND_SVM):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.kind == KIND_MLP and not self.hidden_size_grid:
            raise ValueError("hidden_size_grid must not be empty for the MLP kind")
        if self.trainer not in ("rprop", "lm"):
            raise ValueError(f"unknown trainer {self.trainer!r}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "hidden_size_grid": list(self.hidden_size_grid),
            "trainer": self.trainer,
            "rprop": vars(self.rprop).copy(),
            "lm": vars(self.lm).copy(),
            "smo": vars(self.smo).copy(),
            "svm_kernel": self.svm_kernel,
            "svm_gamma": self.svm_gamma,
            "validation_fraction": self.validation_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainSpec":
        return cls(
            kind=d["kind"],
            hidden_size_grid=tuple(d["hidden_size_grid"]),
            trainer=d["trainer"],
            rprop=RpropConfig(**d["rprop"]),
            lm=LmConfig(**d["lm"]),
            smo=SmoConfig(**d["smo"]),
            svm_kernel=d["svm_kernel"],
            svm_gamma=d.get("svm_gamma"),
            validation_fraction=d["validation_fraction"],
            seed=d["seed"],
        )


@dataclass(frozen=True)
class Manifest:
    """Provenance of one trained artifact."""

    corpus_digest: str
    record_count: int
    seed: int
    created_at: float
    spec: dict
    training_attack_names: tuple[str, ...]
    candidates: tuple[dict, ...]
    chosen_hidden_size: int | None = None
    support_vector_count: int | None = None

    def to_dict(self) -> dict:
        return {
            "corpus_digest": self.corpus_digest,
            "record_count": self.record_count,
            "seed": self.seed,
            "created_at": self.created_at,
            "spec": self.spec,
            "training_attack_names": list(self.training_attack_names),
            "candidates": [dict(c) for c in self.candidates],
            "chosen_hidden_size": self.chosen_hidden_size,
            "support_vector_count": self.support_vector_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Manifest":
        return cls(
            corpus_digest=d["corpus_digest"],
            record_count=d["record_count"],
            seed=d["seed"],
            created_at=d["created_at"],
            spec=d["spec"],
            training_attack_names=tuple(d["training_attack_names"]),
            candidates=tuple(d["candidates"]),
            chosen_hidden_size=d.get("chosen_hidden_size"),
            support_vector_count=d.get("support_vector_count"),
        )


class Prediction(NamedTuple):
    is_attack: bool
    score: float


@dataclass(frozen=True)
class ClassifierArtifact:
    kind: str
    encoder: KddEncoder
    model: MlpNetwork | SvmModel
    version: int
    manifest: Manifest

    def __post_init__(self):
        width = (
            self.model.input_width
            if isinstance(self.model, (MlpNetwork, SvmModel))
            else None
        )
        if width != self.encoder.width_:
            raise ValueError(
                f"encoder width {self.encoder.width_} does not match model width {width}"
            )
        if self.version < 1:
            raise ValueError("artifact version starts at 1")


def _binary_targets(records: Sequence[ConnectionRecord], kind: str) -> np.ndarray:
    attacks = np.array([r.label.is_attack for r in records], dtype=np.float64)
    if kind == KIND_MLP:
        return attacks
    return np.where(attacks > 0, 1.0, -1.0)


def _svm_kernel(spec: TrainSpec, width: int) -> Kernel:
    if spec.svm_kernel == "linear":
        return Kernel.linear()
    gamma = spec.svm_gamma if spec.svm_gamma is not None else 1.0 / width
    return Kernel.rbf(gamma)


def train(
    spec: TrainSpec,
    corpus: Sequence[ConnectionRecord],
    created_at: float | None = None,
    _pinned_train: Sequence[ConnectionRecord] = (),
    _version: int = 1,
) -> ClassifierArtifact:
    """Fit an encoder and train a version-1 artifact from a labeled corpus.

    ``_pinned_train`` records join the training partition unconditionally
    (they still count toward the corpus digest); the retrain path uses it
    to guarantee fresh evidence is actually trained on.
    """
    corpus = list(corpus)
    pinned = list(_pinned_train)
    full = corpus + pinned
    have_attack = any(r.label.is_attack for r in full)
    have_normal = any(not r.label.is_attack for r in full)
    if not (have_attack and have_normal):
        raise DegenerateLabels("training corpus must contain both classes")

    encoder = KddEncoder().fit(full)
    split = split_records(corpus, spec.validation_fraction, spec.seed)
    train_records = list(split.train) + pinned
    val_records = list(split.validation)

    x_train = encoder.transform(train_records)
    y_train = _binary_targets(train_records, spec.kind)
    x_val = encoder.transform(val_records)
    y_val = _binary_targets(val_records, spec.kind)

    candidates: list[dict] = []
    chosen_hidden: int | None = None
    support_count: int | None = None

    if spec.kind == KIND_MLP:
        best: tuple[float, int] | None = None
        best_model: MlpNetwork | None = None
        for hidden in spec.hidden_size_grid:
            net = init_network((encoder.width_, hidden, 1), spec.seed)
            if spec.trainer == "rprop":
                trained, log = train_rprop(net, x_train, y_train, spec.rprop)
            else:
                trained, log = train_lm(net, x_train, y_train, spec.lm)
            if len(val_records):
                val_mse = float(np.mean((forward_batch(trained, x_val) - y_val) ** 2))
            else:
                val_mse = float(np.mean((forward_batch(trained, x_train) - y_train) ** 2))
            candidates.append(
                {
                    "hidden_size": hidden,
                    "validation_mse": val_mse,
                    "epochs_run": len(log),
                    "final_train_mse": log[-1].mse if log else None,
                }
            )
            key = (val_mse, hidden)
            if best is None or key < best:
                best = key
                best_model = trained
        assert best_model is not None
        model: MlpNetwork | SvmModel = best_model
        chosen_hidden = best[1]
    else:
        kernel = _svm_kernel(spec, encoder.width_)
        model = smo_train(x_train, y_train, spec.smo, kernel)
        if len(val_records):
            val_pred = np.where(decision_values(model, x_val) >= 0, 1.0, -1.0)
            val_error = float(np.mean(val_pred != y_val))
        else:
            val_error = 0.0
        support_count = int(model.support_vectors.shape[0])
        candidates.append(
            {"support_vectors": support_count, "validation_error": val_error}
        )

    manifest = Manifest(
        corpus_digest=corpus_digest(full),
        record_count=len(full),
        seed=spec.seed,
        created_at=time.time() if created_at is None else created_at,
        spec=spec.to_dict(),
        training_attack_names=tuple(sorted(attack_names(full))),
        candidates=tuple(candidates),
        chosen_hidden_size=chosen_hidden,
        support_vector_count=support_count,
    )
    return ClassifierArtifact(
        kind=spec.kind,
        encoder=encoder,
        model=model,
        version=_version,
        manifest=manifest,
    )


def predict(artifact: ClassifierArtifact, record: ConnectionRecord) -> Prediction:
    """Encode and classify one record; total for any record."""
    x = artifact.encoder.encode_record(record)
    if artifact.kind == KIND_MLP:
        score = forward(artifact.model, x)
        return Prediction(is_attack=score >= 0.5, score=score)
    score = decision_value(artifact.model, x)
    return Prediction(is_attack=score >= 0.0, score=score)


def predict_batch(
    artifact: ClassifierArtifact, records: Sequence[ConnectionRecord]
) -> list[Prediction]:
    x = artifact.encoder.transform(records)
    if artifact.kind == KIND_MLP:
        scores = forward_batch(artifact.model, x)
        return [Prediction(bool(s >= 0.5), float(s)) for s in scores]
    scores = decision_values(artifact.model, x)
    return [Prediction(bool(s >= 0.0), float(s)) for s in scores]


def relabel_evidence(
    confirmed: Sequence[tuple[ConnectionRecord, str]]
) -> list[ConnectionRecord]:
    """Turn (record, verdict) pairs into retraining records.

    Confirmed attacks keep their own attack label when they carry one and
    get a reserved name otherwise; false alarms are relabeled normal.
    """
    out: list[ConnectionRecord] = []
    for record, verdict in confirmed:
        if verdict == CONFIRMED_ATTACK:
            if record.label.is_attack:
                out.append(record)
            else:
                values = {name: getattr(record, name) for name in record.__dataclass_fields__}
                values["label"] = Label.attack(UNATTRIBUTED_ATTACK)
                out.append(ConnectionRecord(**values))
        elif verdict == FALSE_ALARM:
            if record.label.is_attack:
                values = {name: getattr(record, name) for name in record.__dataclass_fields__}
                values["label"] = Label.normal()
                out.append(ConnectionRecord(**values))
            else:
                out.append(record)
        else:
            raise ValueError(f"verdict must be confirmed/false-alarm, got {verdict!r}")
    return out


def retrain(
    artifact: ClassifierArtifact,
    base_corpus: Sequence[ConnectionRecord],
    confirmed: Sequence[tuple[ConnectionRecord, str]],
    spec: TrainSpec,
    force: bool = False,
    created_at: float | None = None,
) -> ClassifierArtifact:
    """Train a successor artifact from scratch on base corpus plus evidence.

    The encoder is refitted (new symbols gain vocabulary slots) and the
    full training procedure reruns, hidden-size grid included. The version
    increments; the input artifact is never mutated.
    """
    if not confirmed and not force:
        raise NoNewEvidence("no confirmed records to retrain on")
    evidence = relabel_evidence(confirmed)
    return train(
        spec,
        base_corpus,
        created_at=created_at,
        _pinned_train=evidence,
        _version=artifact.version + 1,
    )


def _canonical_json(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def serialize(artifact: ClassifierArtifact) -> bytes:
    """Pack an artifact into the binary container (see deserialize)."""
    arrays: list[tuple[str, np.ndarray]] = [
        ("encoder.low", artifact.encoder.low_),
        ("encoder.high", artifact.encoder.high_),
    ]
    if artifact.kind == KIND_MLP:
        net: MlpNetwork = artifact.model
        model_meta: dict = {"type": KIND_MLP, "layer_sizes": list(net.layer_sizes)}
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            arrays.append((f"mlp.w{i}", w))
            arrays.append((f"mlp.b{i}", b))
    else:
        svm: SvmModel = artifact.model
        model_meta = {
            "type": KIND_SVM,
            "kernel": {"name": svm.kernel.name, "gamma": svm.kernel.gamma},
            "C": svm.C,
            "bias": svm.bias,
        }
        arrays.append(("svm.support_vectors", svm.support_vectors))
        arrays.append(("svm.coefficients", svm.coefficients))

    metadata = {
        "kind": artifact.kind,
        "version": artifact.version,
        "manifest": artifact.manifest.to_dict(),
        "encoder": {"vocabularies": artifact.encoder.vocabularies_},
        "model": model_meta,
        "arrays": [{"name": name, "shape": list(a.shape)} for name, a in arrays],
    }
    meta_bytes = _canonical_json(metadata)
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in arrays)
    return (
        MAGIC
        + struct.pack("<H", FORMAT_VERSION)
        + struct.pack("<I", len(meta_bytes))
        + meta_bytes
        + payload
    )


def deserialize(blob: bytes) -> ClassifierArtifact:
    """Unpack serialize()'s container; raises CorruptArtifact on any damage."""
    header = len(MAGIC) + 2 + 4
    if len(blob) < header:
        raise CorruptArtifact("container shorter than its header")
    if blob[: len(MAGIC)] != MAGIC:
        raise CorruptArtifact("bad magic")
    (fmt,) = struct.unpack_from("<H", blob, len(MAGIC))
    if fmt != FORMAT_VERSION:
        raise CorruptArtifact(f"unsupported container version {fmt}")
    (meta_len,) = struct.unpack_from("<I", blob, len(MAGIC) + 2)
    if len(blob) < header + meta_len:
        raise CorruptArtifact("truncated metadata section")
    try:
        metadata = json.loads(blob[header : header + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptArtifact(f"unreadable metadata: {exc}") from None

    offset = header + meta_len
    arrays: dict[str, np.ndarray] = {}
    try:
        array_specs = metadata["arrays"]
        for spec_entry in array_specs:
            shape = tuple(spec_entry["shape"])
            size = int(np.prod(shape)) if shape else 1
            nbytes = size * 8
            chunk = blob[offset : offset + nbytes]
            if len(chunk) != nbytes:
                raise CorruptArtifact("truncated array payload")
            arrays[spec_entry["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
            offset += nbytes
        if offset != len(blob):
            raise CorruptArtifact("trailing bytes after payload")

        encoder = KddEncoder()
        vocabularies = metadata["encoder"]["vocabularies"]
        encoder.vocabularies_ = {k: list(v) for k, v in vocabularies.items()}
        encoder.low_ = arrays["encoder.low"]
        encoder.high_ = arrays["encoder.high"]
        encoder._index_ = {
            name: {symbol: i for i, symbol in enumerate(vocab)}
            for name, vocab in encoder.vocabularies_.items()
        }
        from .kdd.records import NUMERIC_FEATURES, SYMBOLIC_FEATURES

        encoder.width_ = len(NUMERIC_FEATURES) + sum(
            len(v) + 1 for v in encoder.vocabularies_.values()
        )
        slots = list(NUMERIC_FEATURES)
        from .kdd.encoder import UNKNOWN_SLOT

        for name in SYMBOLIC_FEATURES:
            slots.extend(f"{name}={s}" for s in encoder.vocabularies_[name])
            slots.append(f"{name}={UNKNOWN_SLOT}")
        encoder.slot_names_ = tuple(slots)

        model_meta = metadata["model"]
        if model_meta["type"] == KIND_MLP:
            sizes = tuple(model_meta["layer_sizes"])
            weights = [arrays[f"mlp.w{i}"] for i in range(len(sizes) - 1)]
            biases = [arrays[f"mlp.b{i}"] for i in range(len(sizes) - 1)]
            model: MlpNetwork | SvmModel = MlpNetwork(sizes, weights, biases)
        else:
            kernel_meta = model_meta["kernel"]
            kernel = Kernel(kernel_meta["name"], kernel_meta.get("gamma"))
            model = SvmModel(
                support_vectors=arrays["svm.support_vectors"],
                coefficients=arrays["svm.coefficients"],
                bias=model_meta["bias"],
                kernel=kernel,
                C=model_meta["C"],
            )

        return ClassifierArtifact(
            kind=metadata["kind"],
            encoder=encoder,
            model=model,
            version=metadata["version"],
            manifest=Manifest.from_dict(metadata["manifest"]),
        )
    except CorruptArtifact:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"malformed container contents: {exc}") from None


def artifact_digest(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def save_artifact(artifact: ClassifierArtifact, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(artifact))


def load_artifact(path) -> ClassifierArtifact:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
