"""Attack-name to attack-category mapping.

The mapping ships as a plain data file (one ``name,category`` pair per
line) so new names can be added without touching code. Names missing from
the table map to UNKNOWN rather than erroring.
"""

from __future__ import annotations

import enum
from importlib import resources
from pathlib import Path


class Category(enum.Enum):
    DOS = "dos"
    PROBE = "probe"
    U2R = "u2r"
    R2L = "r2l"
    UNKNOWN = "unknown"


_TAXONOMY_RESOURCE = "attack_categories.txt"
_default_table: dict[str, Category] | None = None


def load_taxonomy(path: str | Path | None = None) -> dict[str, Category]:
    """Load a taxonomy table from ``path`` or from the shipped data file."""
    if path is None:
        text = resources.files(__package__).joinpath(_TAXONOMY_RESOURCE).read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    table: dict[str, Category] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            name, category = (part.strip() for part in line.split(",", 1))
            table[name] = Category(category)
        except ValueError as exc:
            raise ValueError(f"taxonomy line {lineno}: {line!r}") from exc
    return table


def default_taxonomy() -> dict[str, Category]:
    global _default_table
    if _default_table is None:
        _default_table = load_taxonomy()
    return _default_table


def category_of(attack_name: str, table: dict[str, Category] | None = None) -> Category:
    """Category for an attack name; names absent from the table are UNKNOWN."""
    if table is None:
        table = default_taxonomy()
    return table.get(attack_name, Category.UNKNOWN)
