"""A small query language over the two-child outcome space.

Grammar (``!`` binds tighter than ``&``, which binds tighter than ``+``)::

    program   := prefix* query
    prefix    := '@regime(' ('i0'|'i1'|'i2') ')'
               | '@r(' RATIONAL ')'
               | '@named(' ('m'|'f') ')'
               | 'let' LABEL '=' expr ';'
    query     := 'P(' expr ')' | 'P(' expr '|' expr ')'
               | 'odds(' expr ':' expr '|' expr ')'
               | 'bf(' expr ':' expr '|' expr ')'
               | 'factor(' ATOM (',' ATOM)* ')'
               | 'table'
    expr      := term ('+' term)*          # OR
    term      := unary ('&' unary)*        # AND
    unary     := '!' unary | primary       # NOT
    primary   := ATOM | LABEL | 'true' | 'false' | '(' expr ')'

Atoms are ``E.m E.f E.fN E.f!N E.N E.!N`` and the same with ``Y``
(plus ``E.mN``/``E.m!N`` when boys are the named gender).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from . import events as ev
from . import inference as inf
from .events import And, Atom, Const, EventExpr, NamedEvent, Not, Or, Ref
from .ratfunc import RationalFunction, format_decimal, parse_rational
from .samplespace import (
    I2,
    Gender,
    InadmissibleParameter,
    JointDistribution,
    Regime,
    RegimeKind,
    build_distribution,
    table_to_json,
)

MAX_DEPTH = 200
RESERVED = {"P", "odds", "bf", "let", "table", "factor", "true", "false", "E", "Y"}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def __str__(self):
        return f"{self.start}..{self.end}"


class QueryError(Exception):
    """Base for query failures; ``span`` is set for parse errors."""

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        if self.span is None:
            return self.message
        return f"{self.message} at bytes {self.span}"


class ParseError(QueryError):
    pass


class EvaluationError(QueryError):
    pass


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Prob:
    expr: EventExpr


@dataclass(frozen=True)
class Cond:
    a: EventExpr
    b: EventExpr


@dataclass(frozen=True)
class Odds:
    a: EventExpr
    c: EventExpr
    b: EventExpr


@dataclass(frozen=True)
class BayesFactor:
    a: EventExpr
    c: EventExpr
    b: EventExpr


@dataclass(frozen=True)
class Factorize:
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class TableQuery:
    pass


Body = Union[Prob, Cond, Odds, BayesFactor, Factorize, TableQuery]


@dataclass(frozen=True)
class Query:
    body: Body
    regime: Regime = I2
    r_value: Optional[Fraction] = None
    bindings: tuple[NamedEvent, ...] = ()

    @property
    def env(self) -> dict[str, EventExpr]:
        return {b.label: b.expr for b in self.bindings}


# ---------------------------------------------------------------------------
# lexer

@dataclass(frozen=True)
class Token:
    kind: str  # 'atom' 'ident' 'num' or the punctuation itself, 'end'
    text: str
    start: int
    end: int


_PUNCT = set("()&+!|:;=,/@")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"\d+(?:\.\d+)?")
_SUFFIX_RE = re.compile(r"[A-Za-z!]*")


class _Lexer:
    def __init__(self, text: str):
        self.text = text

    def error(self, msg: str, start: int, end: int) -> ParseError:
        return ParseError(msg, _byte_span(self.text, start, end))

    def tokens(self) -> list[Token]:
        text, i, out = self.text, 0, []
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            m = _IDENT_RE.match(text, i)
            if m:
                word = m.group()
                if word in ("E", "Y") and text.startswith(".", m.end()):
                    s = _SUFFIX_RE.match(text, m.end() + 1)
                    end = s.end()
                    raw = text[i:end]
                    try:
                        ev.Atom.parse(raw)
                    except ev.EventError:
                        raise self.error(f"unknown atom {raw!r}", i, max(end, i + 2)) from None
                    out.append(Token("atom", raw, i, end))
                    i = end
                    continue
                out.append(Token("ident", word, i, m.end()))
                i = m.end()
                continue
            m = _NUM_RE.match(text, i)
            if m:
                out.append(Token("num", m.group(), i, m.end()))
                i = m.end()
                continue
            if ch in _PUNCT:
                out.append(Token(ch, ch, i, i + 1))
                i += 1
                continue
            raise self.error(f"unexpected character {ch!r}", i, i + 1)
        out.append(Token("end", "", len(text), len(text)))
        return out


def _byte_span(text: str, start: int, end: int) -> SourceSpan:
    start = max(0, min(start, len(text)))
    end = max(start, min(end, len(text)))
    b0 = len(text[:start].encode("utf-8", "surrogatepass"))
    b1 = b0 + len(text[start:end].encode("utf-8", "surrogatepass"))
    return SourceSpan(b0, b1)


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _Lexer(text).tokens()
        self.i = 0
        self.depth = 0
        self.regime_kind: Optional[RegimeKind] = None
        self.named = Gender.FEMALE
        self.r_value: Optional[Fraction] = None
        self.bindings: list[NamedEvent] = []
        self.labels: dict[str, EventExpr] = {}
        self.atom_tokens: list[tuple[Atom, Token]] = []
        self.seen_directives: set[str] = set()

    # -- helpers ------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "end":
            self.i += 1
        return t

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, _byte_span(self.text, tok.start, tok.end))

    def describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "end" else repr(tok.text)

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        if self.tok.kind != kind:
            if kind == ")" and self.tok.kind == "|":
                raise self.error("duplicate '|': the bar may appear only once, as the conditional separator")
            if kind == ")" and self.tok.kind == "end":
                raise self.error("unbalanced parentheses: missing ')'")
            raise self.error(f"expected {what or repr(kind)}, found {self.describe(self.tok)}")
        return self.advance()

    def is_word(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    # -- program ------------------------------------------------------
    def parse(self) -> Query:
        while True:
            if self.tok.kind == "@":
                self.directive()
            elif self.is_word("let"):
                self.binding()
            else:
                break
        body = self.query()
        if self.tok.kind != "end":
            if self.tok.kind == ")":
                raise self.error("unbalanced parentheses: unexpected ')'")
            if self.tok.kind == "|":
                raise self.error("duplicate '|': the bar may appear only once, as the conditional separator")
            raise self.error(f"unexpected {self.describe(self.tok)} after the query")
        regime = Regime(self.regime_kind or RegimeKind.I2, named=self.named)
        for a, t in self.atom_tokens:
            try:
                a.check(regime)
            except ev.EventError as exc:
                raise self.error(str(exc), t) from None
        return Query(body, regime, self.r_value, tuple(self.bindings))

    def directive(self):
        at = self.advance()
        name = self.tok
        if name.kind != "ident" or name.text not in ("regime", "r", "named"):
            raise self.error("unknown directive (expected @regime, @r or @named)", name if name.kind != "end" else at)
        if name.text in self.seen_directives:
            raise self.error(f"duplicate @{name.text} directive", name)
        self.seen_directives.add(name.text)
        self.advance()
        self.expect("(")
        if name.text == "regime":
            t = self.tok
            if t.kind != "ident" or t.text.lower() not in ("i0", "i1", "i2"):
                raise self.error("expected a regime: i0, i1 or i2", t)
            self.advance()
            self.regime_kind = RegimeKind(t.text.lower())
        elif name.text == "named":
            t = self.tok
            if t.kind != "ident" or t.text not in ("m", "f"):
                raise self.error("expected m or f", t)
            self.advance()
            self.named = Gender(t.text)
        else:
            start = self.tok
            if start.kind != "num":
                raise self.error("expected a rational such as 1/50 or 0.02", start)
            self.advance()
            text = start.text
            end = start
            if self.tok.kind == "/":
                self.advance()
                den = self.tok
                if den.kind != "num" or "." in den.text:
                    raise self.error("expected an integer denominator", den)
                self.advance()
                text += "/" + den.text
                end = den
            try:
                self.r_value = parse_rational(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), _byte_span(self.text, start.start, end.end)) from None
        self.expect(")")

    def binding(self):
        self.advance()  # let
        t = self.tok
        if t.kind != "ident":
            raise self.error("expected a label after 'let'", t)
        if t.text in RESERVED:
            raise self.error(f"{t.text!r} is reserved and cannot be used as a label", t)
        if t.text in self.labels:
            raise self.error(f"label {t.text!r} is already bound", t)
        self.advance()
        self.expect("=")
        e = self.expr()
        self.expect(";")
        self.labels[t.text] = e
        self.bindings.append(NamedEvent(t.text, e))

    def query(self) -> Body:
        t = self.tok
        if t.kind != "ident" or t.text not in ("P", "odds", "bf", "factor", "table"):
            raise self.error("expected a query: P(...), odds(...), bf(...), factor(...) or table")
        self.advance()
        if t.text == "table":
            return TableQuery()
        self.expect("(")
        if t.text == "P":
            a = self.expr()
            if self.tok.kind == "|":
                self.advance()
                b = self.expr()
                self.expect(")")
                return Cond(a, b)
            self.expect(")")
            return Prob(a)
        if t.text in ("odds", "bf"):
            a = self.expr()
            self.expect(":", "':' between the two hypotheses")
            c = self.expr()
            self.expect("|", "'|' before the evidence")
            b = self.expr()
            self.expect(")")
            return Odds(a, c, b) if t.text == "odds" else BayesFactor(a, c, b)
        atoms = [self.atom_only()]
        while self.tok.kind == ",":
            self.advance()
            atoms.append(self.atom_only())
        self.expect(")")
        return Factorize(tuple(atoms))

    def atom_only(self) -> Atom:
        t = self.tok
        if t.kind != "atom":
            raise self.error("factor(...) takes a comma-separated list of atoms", t)
        self.advance()
        a = Atom.parse(t.text)
        self.atom_tokens.append((a, t))
        return a

    # -- expressions --------------------------------------------------
    def expr(self) -> EventExpr:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")
        left = self.term()
        while self.tok.kind == "+":
            self.advance()
            left = Or(left, self.term())
        self.depth -= 1
        return left

    def term(self) -> EventExpr:
        left = self.unary()
        while self.tok.kind == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> EventExpr:
        if self.tok.kind == "!":
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise self.error("expression nested too deeply")
            self.advance()
            e = Not(self.unary())
            self.depth -= 1
            return e
        return self.primary()

    def primary(self) -> EventExpr:
        t = self.tok
        if t.kind == "atom":
            self.advance()
            a = Atom.parse(t.text)
            self.atom_tokens.append((a, t))
            return a
        if t.kind == "ident":
            if t.text == "true":
                self.advance()
                return Const(True)
            if t.text == "false":
                self.advance()
                return Const(False)
            if t.text in RESERVED:
                raise self.error(f"unexpected keyword {t.text!r} inside an event", t)
            if t.text not in self.labels:
                raise self.error(f"unresolved label {t.text!r}", t)
            self.advance()
            return Ref(t.text)
        if t.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "|":
            raise self.error("duplicate '|': the bar may appear only once, as the conditional separator")
        if t.kind == ")":
            raise self.error("unbalanced parentheses: unexpected ')'")
        raise self.error(f"expected an event, found {self.describe(t)}")


def parse(text: str) -> Query:
    """Parse query text; raises :class:`ParseError` with a byte span."""
    if not isinstance(text, str):
        raise TypeError("query text must be str")
    return _Parser(text).parse()


def parse_expr(text: str, env: Optional[dict] = None) -> EventExpr:
    """Parse a bare event expression (labels from ``env`` are allowed)."""
    p = _Parser(text)
    if env:
        p.labels.update(env)
    e = p.expr()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.describe(p.tok)}")
    return e


# ---------------------------------------------------------------------------
# formatting

def _prec(e: EventExpr) -> int:
    if isinstance(e, Or):
        return 1
    if isinstance(e, And):
        return 2
    if isinstance(e, Not):
        return 3
    return 4


def format_expr(e: EventExpr, min_prec: int = 1) -> str:
    """Minimal-parenthesis rendering; left-nested chains need no parens."""
    if isinstance(e, Atom):
        s = e.text
    elif isinstance(e, Ref):
        s = e.label
    elif isinstance(e, Const):
        s = "true" if e.value else "false"
    elif isinstance(e, Or):
        s = f"{format_expr(e.left, 1)} + {format_expr(e.right, 2)}"
    elif isinstance(e, And):
        s = f"{format_expr(e.left, 2)} & {format_expr(e.right, 3)}"
    elif isinstance(e, Not):
        s = "!" + format_expr(e.operand, 3)
    else:
        raise TypeError(f"not an event expression: {e!r}")
    return f"({s})" if _prec(e) < min_prec else s


def format_body(body: Body) -> str:
    f = format_expr
    if isinstance(body, Prob):
        return f"P({f(body.expr)})"
    if isinstance(body, Cond):
        return f"P({f(body.a)} | {f(body.b)})"
    if isinstance(body, Odds):
        return f"odds({f(body.a)} : {f(body.c)} | {f(body.b)})"
    if isinstance(body, BayesFactor):
        return f"bf({f(body.a)} : {f(body.c)} | {f(body.b)})"
    if isinstance(body, Factorize):
        return "factor(" + ", ".join(a.text for a in body.atoms) + ")"
    if isinstance(body, TableQuery):
        return "table"
    raise TypeError(f"unknown query body {body!r}")


def format(q: Query) -> str:  # noqa: A001 - mirrors parse()
    """Canonical text: directives, then bindings, then the query."""
    parts = [f"@regime({q.regime.code})"]
    if q.regime.named is Gender.MALE:
        parts.append("@named(m)")
    if q.r_value is not None:
        parts.append(f"@r({q.r_value})")
    for b in q.bindings:
        parts.append(f"let {b.label} = {format_expr(b.expr)};")
    parts.append(format_body(q.body))
    return " ".join(parts)


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class EvalResult:
    query: str
    regime: Regime
    r: Optional[Fraction]
    exact: object  # RationalFunction, or a JointDistribution for `table`
    decimal: Optional[str] = None
    trace: Optional[dict] = None

    def to_json(self) -> dict:
        exact = self.exact
        if isinstance(exact, JointDistribution):
            exact_out = self.trace
        else:
            exact_out = str(exact)
        return {
            "query": self.query,
            "regime": self.regime.code,
            "r": None if self.r is None else str(self.r),
            "exact": exact_out,
            "decimal": self.decimal,
            "trace": self.trace,
        }


def _numeric(value: RationalFunction, r0: Optional[Fraction], digits: int) -> Optional[str]:
    if r0 is None:
        return format_decimal(value.constant_value(), digits) if value.is_constant() else None
    return format_decimal(value.eval_at(r0), digits)


def _nonzero_at(d: JointDistribution, e: EventExpr, r0: Optional[Fraction], env, what: str):
    if r0 is None:
        return
    if inf.probability(d, e, env).eval_at(r0) == 0:
        raise EvaluationError(f"{what} has probability 0 at r = {r0}")


def evaluate(q: Query, digits: int = 5, distribution: Optional[JointDistribution] = None) -> EvalResult:
    """Evaluate a parsed query exactly, plus a decimal when ``r`` is known."""
    regime = q.regime
    r0 = q.r_value
    if r0 is not None:
        try:
            regime.check_r(r0)
        except InadmissibleParameter as exc:
            raise EvaluationError(str(exc)) from None
    d = distribution if distribution is not None else build_distribution(regime)
    env = q.env
    body = q.body
    text = format(q)
    try:
        if isinstance(body, Prob):
            v = inf.probability(d, body.expr, env)
            return EvalResult(text, regime, r0, v, _numeric(v, r0, digits))
        if isinstance(body, Cond):
            v = inf.conditional(d, body.a, body.b, env)
            _nonzero_at(d, body.b, r0, env, "the condition")
            return EvalResult(text, regime, r0, v, _numeric(v, r0, digits))
        if isinstance(body, (Odds, BayesFactor)):
            rep = inf.odds_update(d, body.a, body.c, body.b, env)
            _nonzero_at(d, body.a, r0, env, "the hypothesis")
            _nonzero_at(d, body.c, r0, env, "the alternative hypothesis")
            _nonzero_at(d, ev.And(body.b, body.c), r0, env, "the evidence under the alternative")
            v = rep.updated_odds if isinstance(body, Odds) else rep.bayes_factor
            trace = rep.to_json()
            if r0 is not None:
                trace["decimal"] = {
                    k: format_decimal(getattr(rep, k).eval_at(r0), digits)
                    for k in ("initial_odds", "bayes_factor", "updated_odds")
                }
            return EvalResult(text, regime, r0, v, _numeric(v, r0, digits), trace)
        if isinstance(body, Factorize):
            steps = inf.chain_factorize(d, body.atoms)
            v = inf.product(steps)
            if r0 is not None:
                ctx = []
                for a in body.atoms:
                    _nonzero_at(d, ev.conjunction(ctx), r0, env, "a factorization context")
                    ctx.append(a)
            return EvalResult(text, regime, r0, v, _numeric(v, r0, digits), inf.factorization_to_json(steps))
        if isinstance(body, TableQuery):
            trace = table_to_json(d, r0)
            return EvalResult(text, regime, r0, d, None, trace)
    except inf.InferenceError as exc:
        raise EvaluationError(str(exc)) from None
    except ev.EventError as exc:
        raise EvaluationError(str(exc)) from None
    except ZeroDivisionError as exc:
        raise EvaluationError(str(exc)) from None
    raise TypeError(f"unknown query body {body!r}")


def run(text: str, digits: int = 5) -> EvalResult:
    return evaluate(parse(text), digits=digits)
