"""KDD99-format records: parsing, labeling, encoding, sampling."""

from .encoder import KddEncoder, fit_encoder
from .records import (
    FEATURE_GROUPS,
    FEATURE_NAMES,
    FEATURE_SCHEMA,
    NUM_FEATURES,
    NUMERIC_FEATURES,
    SYMBOLIC_FEATURES,
    ConnectionRecord,
    Label,
    attack_names,
    corpus_digest,
    count_by_category,
    iter_kdd_file,
    load_kdd_file,
    parse_kdd_line,
    render_kdd_line,
    write_kdd_file,
)
from .sampling import DatasetSplit, split_records, stratified_sample
from .taxonomy import Category, category_of, default_taxonomy, load_taxonomy

__all__ = [
    "Category",
    "ConnectionRecord",
    "DatasetSplit",
    "FEATURE_GROUPS",
    "FEATURE_NAMES",
    "FEATURE_SCHEMA",
    "KddEncoder",
    "Label",
    "NUM_FEATURES",
    "NUMERIC_FEATURES",
    "SYMBOLIC_FEATURES",
    "attack_names",
    "category_of",
    "corpus_digest",
    "count_by_category",
    "default_taxonomy",
    "fit_encoder",
    "iter_kdd_file",
    "load_kdd_file",
    "load_taxonomy",
    "parse_kdd_line",
    "render_kdd_line",
    "split_records",
    "stratified_sample",
    "write_kdd_file",
]
