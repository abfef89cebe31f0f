"""Two-child outcome spaces and their joint distributions.

Three background regimes are modelled:

* ``I0`` -- gender only, four equiprobable outcomes;
* ``I1`` -- girls additionally carry the name N with prevalence ``r``, two
  sisters may share it;
* ``I2`` -- as ``I1`` but names are unique within a family.

A regime may also name the boys instead of the girls (``named=Gender.MALE``);
the construction is the same with the genders swapped.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterator, Mapping, Optional

from .ratfunc import ONE, R, ZERO, RationalFunction, as_rational, format_decimal

HALF = RationalFunction(Fraction(1, 2))
QUARTER = RationalFunction(Fraction(1, 4))


class Gender(enum.Enum):
    MALE = "m"
    FEMALE = "f"

    @property
    def other(self) -> "Gender":
        return Gender.FEMALE if self is Gender.MALE else Gender.MALE


class NameClass(enum.Enum):
    THE_NAME = "N"
    OTHER_NAME = "!N"
    NOT_APPLICABLE = ""


class Slot(enum.Enum):
    ELDEST = "E"
    YOUNGEST = "Y"

    @property
    def other(self) -> "Slot":
        return Slot.YOUNGEST if self is Slot.ELDEST else Slot.ELDEST


@dataclass(frozen=True)
class Child:
    gender: Gender
    name_class: NameClass = NameClass.NOT_APPLICABLE

    @property
    def label(self) -> str:
        """Short descriptor: ``m``, ``f``, ``fN``, ``f!N`` (or ``mN``...)."""
        return self.gender.value + self.name_class.value

    @property
    def has_name(self) -> bool:
        return self.name_class is not NameClass.NOT_APPLICABLE

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class FamilyOutcome:
    eldest: Child
    youngest: Child

    def child(self, slot: Slot) -> Child:
        return self.eldest if slot is Slot.ELDEST else self.youngest

    def swapped(self) -> "FamilyOutcome":
        return FamilyOutcome(self.youngest, self.eldest)

    def __str__(self):
        return f"({self.eldest.label}, {self.youngest.label})"


class RegimeKind(enum.Enum):
    I0 = "i0"
    I1 = "i1"
    I2 = "i2"


class InadmissibleParameter(ValueError):
    """A numeric ``r`` outside the regime's admissible interval."""


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    alias_label: Optional[str] = None  # "name" or "identification"
    named: Gender = Gender.FEMALE

    @classmethod
    def parse(cls, text: str, named: Gender = Gender.FEMALE) -> "Regime":
        try:
            return cls(RegimeKind(text.strip().lower()), named=named)
        except ValueError:
            raise ValueError(f"unknown regime {text!r} (expected i0, i1 or i2)") from None

    @property
    def uses_names(self) -> bool:
        return self.kind is not RegimeKind.I0

    @property
    def code(self) -> str:
        return self.kind.value

    def admits(self, r0) -> bool:
        r0 = as_rational(r0)
        if self.kind is RegimeKind.I2:
            return 0 <= r0 < Fraction(1, 2)
        return 0 <= r0 <= 1

    def check_r(self, r0) -> Fraction:
        r0 = as_rational(r0)
        if not self.admits(r0):
            interval = "[0, 1/2)" if self.kind is RegimeKind.I2 else "[0, 1]"
            raise InadmissibleParameter(
                f"r = {r0} is outside the admissible interval {interval} for regime {self.code}"
            )
        return r0

    def children(self) -> tuple[Child, ...]:
        """Per-slot child categories in table order."""
        if not self.uses_names:
            return (Child(Gender.MALE), Child(Gender.FEMALE))
        n = self.named
        named = (Child(n, NameClass.THE_NAME), Child(n, NameClass.OTHER_NAME))
        plain = (Child(n.other),)
        # male row first, as in the printed tables
        return plain + named if n is Gender.FEMALE else named + plain

    def __str__(self):
        s = self.code
        if self.named is Gender.MALE:
            s += " (named boys)"
        if self.alias_label:
            s += f" [{self.alias_label}]"
        return s


I0 = Regime(RegimeKind.I0)
I1 = Regime(RegimeKind.I1)
I2 = Regime(RegimeKind.I2)


class _CellTable:
    """Shared storage for a map from outcomes to rational functions."""

    kind = "table"

    def __init__(self, regime: Regime, cells: Mapping[FamilyOutcome, RationalFunction]):
        self.regime = regime
        self.children = regime.children()
        full = {}
        for e in self.children:
            for y in self.children:
                o = FamilyOutcome(e, y)
                full[o] = RationalFunction.coerce(cells.get(o, ZERO))
        self._cells = MappingProxyType(full)

    @property
    def cells(self) -> Mapping[FamilyOutcome, RationalFunction]:
        return self._cells

    def cell(self, eldest, youngest) -> RationalFunction:
        return self._cells[FamilyOutcome(_child(eldest, self.regime), _child(youngest, self.regime))]

    def outcomes(self) -> Iterator[FamilyOutcome]:
        return iter(self._cells)

    def support(self) -> list[FamilyOutcome]:
        """Outcomes whose cell is not identically zero."""
        return [o for o, v in self._cells.items() if not v.is_zero()]

    def total(self) -> RationalFunction:
        return sum(self._cells.values(), ZERO)

    def marginal(self, slot: Slot) -> dict[Child, RationalFunction]:
        out = {c: ZERO for c in self.children}
        for o, v in self._cells.items():
            out[o.child(slot)] = out[o.child(slot)] + v
        return out

    def __eq__(self, other):
        return type(self) is type(other) and self.regime == other.regime and dict(self._cells) == dict(other._cells)

    def __hash__(self):
        return hash((type(self).__name__, self.regime, tuple(self._cells.items())))

    def __repr__(self):
        return f"{type(self).__name__}({self.regime})"


class JointDistribution(_CellTable):
    """A valid joint distribution over (eldest, youngest) outcomes."""

    kind = "joint"


class PitfallTable(_CellTable):
    """Deliberately wrong table from the naive chain-rule assumption.

    Not a :class:`JointDistribution`: inference entry points refuse it.
    """

    kind = "pitfall"
    banner = "WRONG REASONING: not a valid joint distribution (asymmetric under eldest/youngest swap)"


def _child(spec, regime: Regime) -> Child:
    if isinstance(spec, Child):
        return spec
    for c in regime.children():
        if c.label == spec:
            return c
    raise KeyError(f"no child category {spec!r} in regime {regime.code}")


# ---------------------------------------------------------------------------
# construction

def child_prior(regime: Regime) -> dict[Child, RationalFunction]:
    """Single-child probabilities: 1/2 for the unnamed gender, r/2 and (1-r)/2."""
    if not regime.uses_names:
        return {c: HALF for c in regime.children()}
    out = {}
    for c in regime.children():
        if not c.has_name:
            out[c] = HALF
        elif c.name_class is NameClass.THE_NAME:
            out[c] = R / 2
        else:
            out[c] = (1 - R) / 2
    return out


def _independent_cells(regime: Regime) -> dict[FamilyOutcome, RationalFunction]:
    p = child_prior(regime)
    return {FamilyOutcome(e, y): p[e] * p[y] for e in p for y in p}


def _repair_unique_names(regime: Regime) -> dict[FamilyOutcome, RationalFunction]:
    """Zero the shared-name cell of the independent table, keep the margins."""
    cells = _independent_cells(regime)
    prior = child_prior(regime)
    plain, = [c for c in regime.children() if not c.has_name]
    n = Child(regime.named, NameClass.THE_NAME)
    nbar = Child(regime.named, NameClass.OTHER_NAME)
    cells[FamilyOutcome(n, n)] = ZERO
    # row n: prior[n] = cell(n, plain) + cell(n, n) + cell(n, nbar)
    cells[FamilyOutcome(n, nbar)] = prior[n] - cells[FamilyOutcome(n, plain)]
    cells[FamilyOutcome(nbar, n)] = prior[n] - cells[FamilyOutcome(plain, n)]
    cells[FamilyOutcome(nbar, nbar)] = (
        prior[nbar] - cells[FamilyOutcome(nbar, plain)] - cells[FamilyOutcome(nbar, n)]
    )
    return cells


def _chain_rule_unique_names(regime: Regime) -> dict[FamilyOutcome, RationalFunction]:
    """Direct eldest-first products with the unique-name conditionals."""
    cells = {}
    for e in regime.children():
        p_e = HALF if not e.has_name else HALF * (R if e.name_class is NameClass.THE_NAME else 1 - R)
        for y in regime.children():
            p_y_gender = HALF
            if not y.has_name:
                p_y_name = ONE
            elif not e.has_name:
                p_y_name = R if y.name_class is NameClass.THE_NAME else 1 - R
            elif e.name_class is NameClass.THE_NAME:
                # N is taken by the eldest
                p_y_name = ZERO if y.name_class is NameClass.THE_NAME else ONE
            else:
                # eldest carries another name: N is one of the (1 - r) remaining choices
                p_y_name = R / (1 - R) if y.name_class is NameClass.THE_NAME else (1 - 2 * R) / (1 - R)
            cells[FamilyOutcome(e, y)] = p_e * p_y_gender * p_y_name
    return cells


class ConstructionMismatch(AssertionError):
    pass


@functools.lru_cache(maxsize=None)
def build_distribution(regime: Regime) -> JointDistribution:
    """Joint distribution for ``regime`` (symbolic in ``r``); tables are
    immutable, so each regime is built once."""
    if regime.kind is RegimeKind.I0:
        cells = {FamilyOutcome(e, y): QUARTER for e in regime.children() for y in regime.children()}
    elif regime.kind is RegimeKind.I1:
        cells = _independent_cells(regime)
    else:
        cells = _repair_unique_names(regime)
        direct = _chain_rule_unique_names(regime)
        for o, v in cells.items():
            if not v.equals(direct[o]):
                raise ConstructionMismatch(f"unique-name cell {o}: {v} != {direct[o]}")
    return JointDistribution(regime, cells)


def build_pitfall_table(named: Gender = Gender.FEMALE) -> PitfallTable:
    """Unique-name table recomputed eldest-first with the naive assumption
    that the eldest girl's other name leaves the youngest girl's name odds at
    ``r`` and ``1 - r``."""
    regime = Regime(RegimeKind.I2, named=named)
    cells = dict(build_distribution(regime).cells)
    n = Child(named, NameClass.THE_NAME)
    nbar = Child(named, NameClass.OTHER_NAME)
    # P(E nbar) * P(Y named gender | ...) * naive P(Y name | ...)
    head = HALF * (1 - R) * HALF
    cells[FamilyOutcome(nbar, n)] = head * R
    cells[FamilyOutcome(nbar, nbar)] = head * (1 - R)
    return PitfallTable(regime, cells)


def marginals(d: _CellTable, slot: Slot) -> dict[Child, RationalFunction]:
    return d.marginal(slot)


# ---------------------------------------------------------------------------
# numeric tables

@dataclass
class NumericTable:
    """Cells of a table evaluated at ``r``; ``scale`` turns them into counts."""

    regime: Regime
    r: Fraction
    labels: tuple[str, ...]
    values: dict[tuple[str, str], Fraction]
    scale: Optional[int] = None
    digits: int = 4
    table_kind: str = "joint"

    def row_totals(self) -> dict[str, Fraction]:
        return {a: sum(self.values[(a, b)] for b in self.labels) for a in self.labels}

    def column_totals(self) -> dict[str, Fraction]:
        return {b: sum(self.values[(a, b)] for a in self.labels) for b in self.labels}

    def total(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))

    def render_value(self, v: Fraction) -> str:
        if self.scale is not None:
            return str(round(v * self.scale))
        return format_decimal(v, self.digits)

    def grid(self) -> list[list[str]]:
        """Rows of rendered cells with row totals, then the column-total row."""
        rows = []
        rt, ct = self.row_totals(), self.column_totals()
        for a in self.labels:
            rows.append([self.render_value(self.values[(a, b)]) for b in self.labels] + [self.render_value(rt[a])])
        rows.append([self.render_value(ct[b]) for b in self.labels] + [self.render_value(self.total())])
        return rows

    def counts(self) -> dict[tuple[str, str], int]:
        if self.scale is None:
            raise ValueError("table has no scale")
        return {k: round(v * self.scale) for k, v in self.values.items()}


def evaluate_table(d: _CellTable, r0, digits: int = 4, scale: Optional[int] = None) -> NumericTable:
    r0 = d.regime.check_r(r0)
    labels = tuple(c.label for c in d.children)
    values = {(o.eldest.label, o.youngest.label): v.eval_at(r0) for o, v in d.cells.items()}
    if scale is not None and scale < 1:
        raise ValueError("scale must be a positive integer")
    return NumericTable(d.regime, r0, labels, values, scale=scale, digits=digits, table_kind=d.kind)


# ---------------------------------------------------------------------------
# export

_ALIAS_DISPLAY = {
    "identification": {"N": "ID", "!N": "!ID"},
}


def display_label(child: Child, alias_label: Optional[str]) -> str:
    sub = _ALIAS_DISPLAY.get(alias_label or "", {})
    return child.gender.value + sub.get(child.name_class.value, child.name_class.value)


def caption(d: _CellTable, title: Optional[str] = None) -> dict:
    out = {
        "regime": d.regime.code,
        "alias_label": d.regime.alias_label,
        "named": d.regime.named.value,
        "kind": d.kind,
    }
    if title:
        out["title"] = title
    if isinstance(d, PitfallTable):
        out["banner"] = PitfallTable.banner
    return out


def table_to_json(d: _CellTable, r0=None, digits: int = 4, title: Optional[str] = None) -> dict:
    """JSON-ready record; exact values as strings, decimals when ``r0`` is given."""
    labels = [c.label for c in d.children]
    rows = {}
    numeric = evaluate_table(d, r0, digits=digits) if r0 is not None else None
    for e in d.children:
        row = {}
        for y in d.children:
            v = d.cells[FamilyOutcome(e, y)]
            entry = {"exact": str(v)}
            if numeric is not None:
                entry["decimal"] = format_decimal(numeric.values[(e.label, y.label)], digits)
            row[y.label] = entry
        rows[e.label] = row
    mr = d.marginal(Slot.ELDEST)
    mc = d.marginal(Slot.YOUNGEST)
    return {
        "caption": caption(d, title),
        "labels": labels,
        "display_labels": [display_label(c, d.regime.alias_label) for c in d.children],
        "r": None if r0 is None else str(as_rational(r0)),
        "cells": rows,
        "row_totals": {c.label: str(mr[c]) for c in d.children},
        "column_totals": {c.label: str(mc[c]) for c in d.children},
        "total": str(d.total()),
    }


def table_to_csv(d: _CellTable, r0=None, digits: int = 4) -> str:
    """Long-format CSV: one line per cell."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["regime", "alias_label", "kind", "eldest", "youngest", "exact"]
    if r0 is not None:
        header += ["r", "decimal"]
    w.writerow(header)
    for o, v in d.cells.items():
        row = [d.regime.code, d.regime.alias_label or "", d.kind, o.eldest.label, o.youngest.label, str(v)]
        if r0 is not None:
            r0q = d.regime.check_r(r0)
            row += [str(r0q), format_decimal(v.eval_at(r0q), digits)]
        w.writerow(row)
    return buf.getvalue()


def numeric_to_json(t: NumericTable) -> dict:
    out = {
        "regime": t.regime.code,
        "alias_label": t.regime.alias_label,
        "kind": t.table_kind,
        "r": str(t.r),
        "labels": list(t.labels),
        "cells": {a: {b: str(t.values[(a, b)]) for b in t.labels} for a in t.labels},
        "rendered": t.grid(),
    }
    if t.scale is not None:
        out["scale"] = t.scale
        out["counts"] = {a: {b: round(t.values[(a, b)] * t.scale) for b in t.labels} for a in t.labels}
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
