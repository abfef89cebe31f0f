"""Boolean event expressions over the attributes of the two children.

Events are evaluated extensionally: an expression denotes the set of
outcomes of a table on which it holds.  The outcome spaces have at most
nine cells, so nothing cleverer is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .samplespace import Child, FamilyOutcome, Gender, NameClass, Regime, Slot


class EventError(ValueError):
    """An event that does not make sense in the chosen regime."""


class EventExpr:
    """Base class; supports ``&``, ``|`` and ``~`` for convenience."""

    def __and__(self, other: "EventExpr") -> "EventExpr":
        return And(self, other)

    def __or__(self, other: "EventExpr") -> "EventExpr":
        return Or(self, other)

    def __invert__(self) -> "EventExpr":
        return Not(self)


_ATOM_SUFFIX = {
    (Gender.MALE, None): "m",
    (Gender.FEMALE, None): "f",
    (Gender.FEMALE, NameClass.THE_NAME): "fN",
    (Gender.FEMALE, NameClass.OTHER_NAME): "f!N",
    (Gender.MALE, NameClass.THE_NAME): "mN",
    (Gender.MALE, NameClass.OTHER_NAME): "m!N",
    (None, NameClass.THE_NAME): "N",
    (None, NameClass.OTHER_NAME): "!N",
}
_SUFFIX_ATOM = {v: k for k, v in _ATOM_SUFFIX.items()}


@dataclass(frozen=True)
class Atom(EventExpr):
    """A predicate on one child.

    ``gender`` and ``name`` may each be omitted (``None``) but not both.
    A name-only atom (``E.N``) implicitly refers to the named gender, since
    only that gender carries a name class.
    """

    slot: Slot
    gender: Optional[Gender] = None
    name: Optional[NameClass] = None

    def __post_init__(self):
        if (self.gender, self.name) not in _ATOM_SUFFIX:
            raise EventError(f"ill-formed atom {self.slot}, {self.gender}, {self.name}")

    @classmethod
    def parse(cls, text: str) -> "Atom":
        slot, dot, suffix = text.partition(".")
        if not dot or slot not in ("E", "Y") or suffix not in _SUFFIX_ATOM:
            raise EventError(f"unknown atom {text!r}")
        g, n = _SUFFIX_ATOM[suffix]
        return cls(Slot(slot), g, n)

    @property
    def text(self) -> str:
        return f"{self.slot.value}.{_ATOM_SUFFIX[(self.gender, self.name)]}"

    def __str__(self):
        return self.text

    def check(self, regime: Regime) -> None:
        if self.name is None:
            return
        if not regime.uses_names:
            raise EventError(f"{self.text}: regime {regime.code} has no name attribute")
        if self.gender is not None and self.gender is not regime.named:
            raise EventError(
                f"{self.text}: names classify {'boys' if regime.named is Gender.MALE else 'girls'} in this regime"
            )

    def holds(self, child: Child) -> bool:
        if self.gender is not None and child.gender is not self.gender:
            return False
        if self.name is not None and child.name_class is not self.name:
            return False
        return True


@dataclass(frozen=True)
class And(EventExpr):
    left: EventExpr
    right: EventExpr


@dataclass(frozen=True)
class Or(EventExpr):
    left: EventExpr
    right: EventExpr


@dataclass(frozen=True)
class Not(EventExpr):
    operand: EventExpr


@dataclass(frozen=True)
class Const(EventExpr):
    value: bool


@dataclass(frozen=True)
class Ref(EventExpr):
    """Reference to a ``let``-bound event label."""

    label: str


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class NamedEvent:
    label: str
    expr: EventExpr


Env = Mapping[str, EventExpr]


def resolve(e: EventExpr, env: Optional[Env] = None) -> EventExpr:
    """Substitute every :class:`Ref` by its binding."""
    if isinstance(e, Ref):
        if env is None or e.label not in env:
            raise EventError(f"unresolved label {e.label!r}")
        return resolve(env[e.label], env)
    if isinstance(e, And):
        return And(resolve(e.left, env), resolve(e.right, env))
    if isinstance(e, Or):
        return Or(resolve(e.left, env), resolve(e.right, env))
    if isinstance(e, Not):
        return Not(resolve(e.operand, env))
    return e


def atoms_of(e: EventExpr) -> list[Atom]:
    if isinstance(e, Atom):
        return [e]
    if isinstance(e, (And, Or)):
        return atoms_of(e.left) + atoms_of(e.right)
    if isinstance(e, Not):
        return atoms_of(e.operand)
    return []


def holds(e: EventExpr, o: FamilyOutcome, env: Optional[Env] = None) -> bool:
    if isinstance(e, Atom):
        return e.holds(o.child(e.slot))
    if isinstance(e, And):
        return holds(e.left, o, env) and holds(e.right, o, env)
    if isinstance(e, Or):
        return holds(e.left, o, env) or holds(e.right, o, env)
    if isinstance(e, Not):
        return not holds(e.operand, o, env)
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Ref):
        return holds(resolve(e, env), o, env)
    raise TypeError(f"not an event expression: {e!r}")


def check(e: EventExpr, regime: Regime, env: Optional[Env] = None) -> None:
    for a in atoms_of(resolve(e, env)):
        a.check(regime)


def denotation(e: EventExpr, outcomes, regime: Regime, env: Optional[Env] = None) -> frozenset:
    """Subset of ``outcomes`` on which ``e`` holds."""
    e = resolve(e, env)
    check(e, regime)
    return frozenset(o for o in outcomes if holds(e, o))


def conjunction(atoms) -> EventExpr:
    atoms = list(atoms)
    if not atoms:
        return TRUE
    out = atoms[0]
    for a in atoms[1:]:
        out = And(out, a)
    return out


def atom(text: str) -> Atom:
    return Atom.parse(text)


def swap_slots(e: EventExpr) -> EventExpr:
    """Exchange the roles of eldest and youngest."""
    if isinstance(e, Atom):
        return Atom(e.slot.other, e.gender, e.name)
    if isinstance(e, And):
        return And(swap_slots(e.left), swap_slots(e.right))
    if isinstance(e, Or):
        return Or(swap_slots(e.left), swap_slots(e.right))
    if isinstance(e, Not):
        return Not(swap_slots(e.operand))
    return e


