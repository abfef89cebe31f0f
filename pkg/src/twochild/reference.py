"""Published numeric tables for the named-girl puzzle, kept verbatim so the
computed values can be checked against them (including where they disagree)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ratfunc import format_decimal

# r, P(two girls | one girl known by name), shared names allowed; 5 places
TABLE3_ROWS = [
    ("0.3", "0.45946"),
    ("0.2", "0.47368"),
    ("0.1", "0.48718"),
    ("0.02", "0.49749"),
    ("0.01", "0.49875"),
    ("0.001", "0.49988"),
    ("0.0001", "0.49999"),
]
TABLE3_R_ONE = Fraction(1, 3)

LABELS = ("m", "fN", "f!N")

# shared-name table at r = 1/50, 4 places: rows, then column totals
FOOTNOTE_R = Fraction(1, 50)
FOOTNOTE_PROBABILITIES = {
    "rows": [
        ["0.2500", "0.0050", "0.2450", "0.5000"],
        ["0.0050", "0.0001", "0.0049", "0.0100"],
        ["0.2450", "0.0049", "0.2401", "0.4900"],
    ],
    "totals": ["0.5000", "0.1000", "0.4900", "1.0000"],
}
FOOTNOTE_SCALE = 10000
FOOTNOTE_COUNTS = {
    "rows": [
        [2500, 50, 2450, 5000],
        [50, 1, 49, 100],
        [2450, 49, 2401, 4900],
    ],
    "totals": [5000, 100, 4900, 10000],
}


@dataclass(frozen=True)
class Mismatch:
    where: str
    published: str
    computed: str

    def __str__(self):
        return f"{self.where}: published {self.published}, computed {self.computed}"


def _where(i: int, j: int) -> str:
    row = LABELS[i] if i < 3 else "total"
    col = LABELS[j] if j < 3 else "total"
    return f"row {row}, column {col}"


def compare_grid(published: dict, computed_grid: list[list[str]]) -> list[Mismatch]:
    """Compare a rendered grid (3 rows + totals row, 4 columns) cell by cell."""
    out = []
    rows = published["rows"] + [published["totals"]]
    for i, (pub_row, comp_row) in enumerate(zip(rows, computed_grid)):
        for j, (p, c) in enumerate(zip(pub_row, comp_row)):
            if str(p) != str(c):
                out.append(Mismatch(_where(i, j), str(p), str(c)))
    return out


def compare_table3(value_at, digits: int = 5) -> list[Mismatch]:
    """``value_at(r)`` returns an exact Fraction."""
    out = []
    for r, printed in TABLE3_ROWS:
        got = format_decimal(value_at(Fraction(r)), digits)
        if got != printed:
            out.append(Mismatch(f"r = {r} (exact {value_at(Fraction(r))})", printed, got))
    return out
