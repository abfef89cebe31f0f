"""Exact conditioning, odds updates and chain-rule factorization."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import events as ev
from .events import Atom, EventExpr
from .ratfunc import ONE, ZERO, RationalFunction
from .samplespace import (
    FamilyOutcome,
    JointDistribution,
    PitfallTable,
    Slot,
    _CellTable,
    child_prior,
)

# interior point of every admissible interval, used only to orient defects
PROBE_R = Fraction(1, 4)


class InferenceError(ValueError):
    pass


class ImpossibleCondition(InferenceError):
    """Conditioning on an event whose probability is identically zero."""


def _require_joint(d) -> JointDistribution:
    if isinstance(d, PitfallTable):
        raise TypeError("the pitfall table is not a valid joint distribution; use pitfall_conditional")
    if not isinstance(d, JointDistribution):
        raise TypeError(f"expected JointDistribution, got {type(d).__name__}")
    return d


def _mass(t: _CellTable, e: EventExpr, env=None) -> RationalFunction:
    total = ZERO
    for o in ev.denotation(e, t.outcomes(), t.regime, env):
        total = total + t.cells[o]
    return total


def _ratio(t: _CellTable, a: EventExpr, b: EventExpr, env=None) -> RationalFunction:
    pb = _mass(t, b, env)
    if pb.is_zero():
        raise ImpossibleCondition(f"cannot condition on an impossible event ({_show(b)} has probability 0)")
    return _mass(t, ev.And(a, b), env) / pb


def _show(e: EventExpr) -> str:
    # deferred import: querylang depends on this module
    from .querylang import format_expr

    return format_expr(e)


def probability(d: JointDistribution, e: EventExpr, env=None) -> RationalFunction:
    return _mass(_require_joint(d), e, env)


def conditional(d: JointDistribution, a: EventExpr, b: EventExpr, env=None) -> RationalFunction:
    """P(a | b) = P(a & b) / P(b)."""
    return _ratio(_require_joint(d), a, b, env)


@dataclass(frozen=True)
class Recondition:
    prior: RationalFunction
    likelihood: RationalFunction
    evidence: RationalFunction
    posterior: RationalFunction

    def to_json(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("prior", "likelihood", "evidence", "posterior")}


def recondition(d: JointDistribution, a: EventExpr, b: EventExpr, env=None) -> Recondition:
    """Bayes' rule ingredients for updating ``a`` by ``b``."""
    d = _require_joint(d)
    prior = probability(d, a, env)
    evidence = probability(d, b, env)
    if evidence.is_zero():
        raise ImpossibleCondition("zero evidence")
    if prior.is_zero():
        raise ImpossibleCondition("likelihood undefined: hypothesis has probability 0")
    likelihood = conditional(d, b, a, env)
    return Recondition(prior, likelihood, evidence, likelihood / evidence * prior)


@dataclass(frozen=True)
class OddsReport:
    initial_odds: RationalFunction
    bayes_factor: RationalFunction
    updated_odds: RationalFunction

    def to_json(self) -> dict:
        return {
            "initial_odds": str(self.initial_odds),
            "bayes_factor": str(self.bayes_factor),
            "updated_odds": str(self.updated_odds),
        }


def odds_update(d: JointDistribution, a: EventExpr, c: EventExpr, b: EventExpr, env=None) -> OddsReport:
    """Odds of ``a`` against ``c``, before and after learning ``b``."""
    d = _require_joint(d)
    pa, pc = probability(d, a, env), probability(d, c, env)
    if pc.is_zero() or pa.is_zero():
        raise ImpossibleCondition("both hypotheses need nonzero probability")
    lik_a = conditional(d, b, a, env)
    lik_c = conditional(d, b, c, env)
    if lik_c.is_zero():
        raise ImpossibleCondition("the evidence is impossible under the alternative hypothesis")
    initial = pa / pc
    factor = lik_a / lik_c
    return OddsReport(initial, factor, factor * initial)


@dataclass(frozen=True)
class FactorizationStep:
    conditioned_atom: Atom
    given: tuple[Atom, ...]
    value: RationalFunction

    def to_json(self) -> dict:
        return {
            "atom": self.conditioned_atom.text,
            "given": [a.text for a in self.given],
            "value": str(self.value),
        }

    def __str__(self):
        ctx = ", ".join(a.text for a in self.given)
        return f"P({self.conditioned_atom.text}{' | ' + ctx if ctx else ''}) = {self.value}"


def chain_factorize(d: JointDistribution, conjunction: Sequence[Atom]) -> list[FactorizationStep]:
    """One conditional per atom, each computed from the full joint.

    Raises if a step conditions on a zero-probability prefix.
    """
    d = _require_joint(d)
    steps = []
    given: list[Atom] = []
    for a in conjunction:
        if not isinstance(a, Atom):
            raise TypeError(f"chain_factorize takes atoms, got {a!r}")
        ctx = ev.conjunction(given)
        pctx = probability(d, ctx)
        if pctx.is_zero():
            raise ImpossibleCondition(
                f"step for {a.text} conditions on a zero-probability context ({', '.join(g.text for g in given)})"
            )
        steps.append(FactorizationStep(a, tuple(given), probability(d, ev.And(a, ctx)) / pctx))
        given.append(a)
    return steps


def product(steps: Sequence[FactorizationStep]) -> RationalFunction:
    out = ONE
    for s in steps:
        out = out * s.value
    return out


def conditional_name(d: JointDistribution, target: Atom, context: Sequence[Atom]) -> RationalFunction:
    return conditional(d, target, ev.conjunction(context))


def pitfall_conditional(t: PitfallTable, a: EventExpr, b: EventExpr, env=None) -> RationalFunction:
    """Conditional read off the pitfall table, to show what the mistake implies."""
    if not isinstance(t, PitfallTable):
        raise TypeError("pitfall_conditional only accepts a PitfallTable")
    return _ratio(t, a, b, env)


@dataclass
class SymmetryReport:
    passed: bool
    max_defect: RationalFunction
    offending_pair: Optional[tuple[FamilyOutcome, FamilyOutcome]] = None
    defects: list[tuple[FamilyOutcome, FamilyOutcome, RationalFunction]] = field(default_factory=list)
    marginal_violations: list[tuple[Slot, str, RationalFunction]] = field(default_factory=list)

    @property
    def symmetric(self) -> bool:
        return not self.defects

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "max_defect": str(self.max_defect),
            "offending_pair": None
            if self.offending_pair is None
            else [str(self.offending_pair[0]), str(self.offending_pair[1])],
            "defects": [[str(p), str(q), str(v)] for p, q, v in self.defects],
            "marginal_violations": [
                {"slot": s.value, "child": c, "shortfall": str(v)} for s, c, v in self.marginal_violations
            ],
        }


def check_symmetry(t: _CellTable) -> SymmetryReport:
    """Compare every cell with its eldest/youngest mirror and every per-slot
    marginal with the single-child prior.

    Each defect is oriented so that it is positive at ``r = 1/4``; the
    largest there is reported as ``max_defect``.
    """
    defects = []
    kids = t.children
    for i, a in enumerate(kids):
        for b in kids[i + 1 :]:
            p, q = FamilyOutcome(a, b), FamilyOutcome(b, a)
            diff = t.cells[p] - t.cells[q]
            if diff.is_zero():
                continue
            if not diff.has_pole_at(PROBE_R) and diff.eval_at(PROBE_R) < 0:
                p, q, diff = q, p, -diff
            defects.append((p, q, diff))

    violations = []
    prior = child_prior(t.regime)
    for slot in Slot:
        m = t.marginal(slot)
        for c in kids:
            gap = prior[c] - m[c]
            if not gap.is_zero():
                violations.append((slot, c.label, gap))

    if defects:
        worst = max(defects, key=lambda x: x[2].eval_at(PROBE_R) if not x[2].has_pole_at(PROBE_R) else 0)
        return SymmetryReport(False, worst[2], (worst[0], worst[1]), defects, violations)
    return SymmetryReport(not violations, ZERO, None, [], violations)


def factorization_to_json(steps: Sequence[FactorizationStep]) -> dict:
    return {"steps": [s.to_json() for s in steps], "product": str(product(steps))}
