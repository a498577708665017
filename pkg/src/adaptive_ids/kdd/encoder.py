"""Record-to-vector encoding: min-max scaling plus one-hot symbol blocks.

The fitted transform is total: numeric features are scaled with the
training ranges and clamped into [0, 1] (a constant feature encodes to 0),
and each symbolic feature gets a one-hot block with one extra slot that
fires for symbols never seen during fitting. Encoded width is therefore
38 + sum over symbolic features of (vocabulary size + 1).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ..exceptions import EmptyDataset
from .records import ConnectionRecord, NUMERIC_FEATURES, SYMBOLIC_FEATURES

UNKNOWN_SLOT = "<unknown>"


class KddEncoder(TransformerMixin, BaseEstimator):
    """Fit symbol vocabularies and numeric ranges; transform records to [0,1] vectors.

    Fitted attributes:
        vocabularies_: dict of symbolic feature -> symbols in first-seen order
        low_, high_: per-numeric-feature training minima / maxima
        width_: encoded vector length
        slot_names_: one name per encoded component (for display / debugging)

    A fitted encoder is immutable by convention; refitting on the same
    records reproduces it exactly.
    """

    def fit(self, records: Sequence[ConnectionRecord], y=None) -> "KddEncoder":
        records = list(records)
        if not records:
            raise EmptyDataset("cannot fit an encoder on an empty record collection")
        vocabularies: dict[str, list[str]] = {name: [] for name in SYMBOLIC_FEATURES}
        seen: dict[str, set[str]] = {name: set() for name in SYMBOLIC_FEATURES}
        for record in records:
            for name in SYMBOLIC_FEATURES:
                symbol = getattr(record, name)
                if symbol not in seen[name]:
                    seen[name].add(symbol)
                    vocabularies[name].append(symbol)

        numeric = np.array(
            [[getattr(r, name) for name in NUMERIC_FEATURES] for r in records],
            dtype=np.float64,
        )
        self.vocabularies_ = vocabularies
        self.low_ = numeric.min(axis=0)
        self.high_ = numeric.max(axis=0)
        self._index_ = {
            name: {symbol: i for i, symbol in enumerate(vocab)}
            for name, vocab in vocabularies.items()
        }
        self.width_ = len(NUMERIC_FEATURES) + sum(
            len(vocab) + 1 for vocab in vocabularies.values()
        )
        slots = list(NUMERIC_FEATURES)
        for name in SYMBOLIC_FEATURES:
            slots.extend(f"{name}={symbol}" for symbol in vocabularies[name])
            slots.append(f"{name}={UNKNOWN_SLOT}")
        self.slot_names_ = tuple(slots)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "width_"):
            raise NotFittedError("encoder is not fitted; call fit() first")

    def encode_record(self, record: ConnectionRecord) -> np.ndarray:
        self._check_fitted()
        out = np.zeros(self.width_, dtype=np.float64)
        span = self.high_ - self.low_
        for i, name in enumerate(NUMERIC_FEATURES):
            if span[i] == 0.0:
                out[i] = 0.0
            else:
                scaled = (getattr(record, name) - self.low_[i]) / span[i]
                out[i] = min(max(scaled, 0.0), 1.0)
        offset = len(NUMERIC_FEATURES)
        for name in SYMBOLIC_FEATURES:
            vocab_index = self._index_[name]
            block = len(vocab_index) + 1
            slot = vocab_index.get(getattr(record, name), block - 1)
            out[offset + slot] = 1.0
            offset += block
        return out

    def transform(self, records: Iterable[ConnectionRecord]) -> np.ndarray:
        self._check_fitted()
        rows = [self.encode_record(r) for r in records]
        if not rows:
            return np.empty((0, self.width_), dtype=np.float64)
        return np.stack(rows)

    def symbol_slots(self, record: ConnectionRecord) -> dict[str, dict]:
        """Which one-hot slot fires for each symbolic feature of ``record``."""
        self._check_fitted()
        info = {}
        for name in SYMBOLIC_FEATURES:
            symbol = getattr(record, name)
            known = symbol in self._index_[name]
            info[name] = {"symbol": symbol, "in_vocabulary": known}
        return info

    def same_as(self, other: "KddEncoder") -> bool:
        """True when two fitted encoders produce identical vectors."""
        self._check_fitted()
        other._check_fitted()
        return (
            self.vocabularies_ == other.vocabularies_
            and np.array_equal(self.low_, other.low_)
            and np.array_equal(self.high_, other.high_)
        )


def fit_encoder(records: Sequence[ConnectionRecord]) -> KddEncoder:
    return KddEncoder().fit(records)
