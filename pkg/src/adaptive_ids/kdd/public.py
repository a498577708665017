"""Locating (and, when the network allows, fetching) the public KDD99 files.

Resolution order for each dataset: an explicit path argument, the
``ADAPTIVE_IDS_DATA`` directory, then ``./data``. ``fetch`` downloads from
the canonical mirrors into the chosen data directory; environments without
general network access can drop the files in place by hand instead.
"""

from __future__ import annotations

import gzip
import os
import shutil
import urllib.request
from pathlib import Path

DATA_DIR_ENV = "ADAPTIVE_IDS_DATA"

PUBLIC_FILES: dict[str, dict[str, str]] = {
    "kdd10": {
        "filename": "kddcup.data_10_percent",
        "url": "http://kdd.ics.uci.edu/databases/kddcup99/kddcup99.data_10_percent.gz",
    },
    "corrected": {
        "filename": "corrected",
        "url": "http://kdd.ics.uci.edu/databases/kddcup99/corrected.gz",
    },
}


def data_dir() -> Path:
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path("data")


def resolve(name: str, directory: str | Path | None = None) -> Path | None:
    """Path of a public dataset file if present locally, else None."""
    info = PUBLIC_FILES[name]
    base = Path(directory) if directory is not None else data_dir()
    for candidate in (base / info["filename"], base / (info["filename"] + ".gz")):
        if candidate.exists():
            return candidate
    return None


def fetch(name: str, directory: str | Path | None = None, timeout: float = 120.0) -> Path:
    """Download and decompress a public dataset file into the data directory."""
    info = PUBLIC_FILES[name]
    base = Path(directory) if directory is not None else data_dir()
    base.mkdir(parents=True, exist_ok=True)
    target = base / info["filename"]
    if target.exists():
        return target
    archive = base / (info["filename"] + ".gz")
    if not archive.exists():
        with urllib.request.urlopen(info["url"], timeout=timeout) as response:
            with open(archive, "wb") as fh:
                shutil.copyfileobj(response, fh)
    with gzip.open(archive, "rb") as src, open(target, "wb") as dst:
        shutil.copyfileobj(src, dst)
    return target


def available(name: str, directory: str | Path | None = None) -> bool:
    return resolve(name, directory) is not None
