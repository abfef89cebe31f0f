"""Command line front end: ``twochild {eval,table,sweep,pitfall,verify,demo}``.

Exit status is 0 on success, 1 on a domain error (impossible condition,
inadmissible ``r``, failed verification) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional

from . import inference as inf
from . import montecarlo as mc
from . import querylang as ql
from . import reference
from .events import TRUE
from .ratfunc import RationalFunction, format_decimal, parse_rational
from .samplespace import (
    I0,
    I1,
    I2,
    InadmissibleParameter,
    PitfallTable,
    Regime,
    RegimeKind,
    Slot,
    build_distribution,
    build_pitfall_table,
    display_label,
    evaluate_table,
    numeric_to_json,
    table_to_csv,
    table_to_json,
)

TABLE_TITLES = {
    1: "gender only (i0)",
    2: "names may be shared within a family (i1)",
    3: "P(two girls | one girl known by name) as a function of r (i1)",
    4: "names unique within a family (i2)",
    5: "as table 4, with the name replaced by a unique identification",
    6: "as table 2, with the name replaced by a non-unique identification",
    7: "as table 4, but computed with the naive chain-rule assumption",
}

TWO_GIRLS = "E.f & Y.f"
NAMED_GIRL = "E.fN + Y.fN"


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _digits(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v <= 50:
        raise argparse.ArgumentTypeError("digits must be between 0 and 50")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--digits", type=_digits, default=argparse.SUPPRESS, help="decimal places (default 5)")

    p = _Parser(prog="twochild", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    e = sub.add_parser("eval", parents=[common], help="evaluate a query")
    e.add_argument("query", nargs="?", help="query text; read from stdin if omitted or '-'")

    t = sub.add_parser("table", parents=[common], help="render table 1..7")
    t.add_argument("id", type=int, choices=range(1, 8), metavar="ID")
    t.add_argument("--r", type=_rational, help="evaluate at this r (p/q or decimal)")
    t.add_argument("--scale", type=_positive_int, help="expected counts in this many families")
    t.add_argument("--csv", metavar="PATH", help="also write CSV")

    s = sub.add_parser("sweep", parents=[common], help="evaluate a query over several r")
    s.add_argument("query")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--r-list", help="comma-separated r values")
    g.add_argument("--range", help="start:stop:step (inclusive)")
    s.add_argument("--csv", metavar="PATH", help="also write CSV")

    pf = sub.add_parser("pitfall", parents=[common], help="correct vs naive unique-name tables")
    pf.add_argument("--r", type=_rational)

    v = sub.add_parser("verify", parents=[common], help="Monte Carlo check of a conditional")
    v.add_argument("query", help="P(a | b) or P(a)")
    v.add_argument("--n", type=_positive_int, default=1_000_000)
    v.add_argument("--seed", type=int, default=2024)
    v.add_argument("--r", type=_rational)
    v.add_argument("--regime", choices=["i0", "i1", "i2"])
    v.add_argument("--mode", choices=list(mc.MODES), default="direct")
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--sigmas", type=float, default=4.0)

    sub.add_parser("demo", parents=[common], help="walk through Q1 to Q4")
    return p


# ---------------------------------------------------------------------------
# rendering helpers

def _align(rows: list[list[str]], footer: bool = True) -> str:
    """Header, body and (optionally) a footer row split off by rules."""
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(rows):
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))))
        if k == 0 or (footer and k == len(rows) - 2):
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _symbolic_grid(d) -> str:
    kids = d.children
    alias = d.regime.alias_label
    head = ["E \\ Y"] + [display_label(c, alias) for c in kids] + ["total"]
    rows = [head]
    mr = d.marginal(Slot.ELDEST)
    mcol = d.marginal(Slot.YOUNGEST)
    for e in kids:
        row = [display_label(e, alias)]
        for y in kids:
            v = d.cell(e, y)
            excluded = v.is_zero() and d.regime.kind is RegimeKind.I2
            row.append("-" if excluded else str(v))
        row.append(str(mr[e]))
        rows.append(row)
    rows.append(["total"] + [str(mcol[c]) for c in kids] + [str(d.total())])
    return _align(rows)


def _numeric_grid(nt) -> str:
    labels = list(nt.labels)
    rows = [["E \\ Y"] + labels + ["total"]]
    grid = nt.grid()
    for lab, g in zip(labels, grid[:-1]):
        rows.append([lab] + g)
    rows.append(["total"] + grid[-1])
    return _align(rows)


def _write_csv(path: str, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _emit(out, payload: dict, text: str, as_json: bool):
    if as_json:
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def _table_distribution(tid: int):
    if tid == 1:
        return build_distribution(I0)
    if tid == 2:
        return build_distribution(I1)
    if tid == 4:
        return build_distribution(I2)
    if tid == 5:
        return build_distribution(Regime(RegimeKind.I2, alias_label="identification"))
    if tid == 6:
        return build_distribution(Regime(RegimeKind.I1, alias_label="identification"))
    if tid == 7:
        return build_pitfall_table()
    raise ValueError(tid)


def _p_i1():
    d = build_distribution(I1)
    return inf.conditional(d, ql.parse_expr(TWO_GIRLS), ql.parse_expr(NAMED_GIRL))


# ---------------------------------------------------------------------------
# commands

def cmd_eval(args, out) -> int:
    text = args.query
    if text is None or text == "-":
        text = sys.stdin.read()
    res = ql.evaluate(ql.parse(text), digits=args.digits)
    lines = [f"query:   {res.query}"]
    if isinstance(res.exact, RationalFunction):
        lines.append(f"exact:   {res.exact}")
    else:
        lines.append(_symbolic_grid(res.exact))
    if res.decimal is not None:
        lines.append(f"decimal: {res.decimal}" + (f"  (r = {res.r})" if res.r is not None else ""))
    if res.trace and "steps" in res.trace:
        for st in res.trace["steps"]:
            given = ", ".join(st["given"])
            lines.append(f"  P({st['atom']}{' | ' + given if given else ''}) = {st['value']}")
    elif res.trace and "bayes_factor" in res.trace:
        for k in ("initial_odds", "bayes_factor", "updated_odds"):
            lines.append(f"  {k.replace('_', ' ')}: {res.trace[k]}")
    _emit(out, res.to_json(), "\n".join(lines), args.json)
    return 0


def _table3(args, out) -> int:
    p = _p_i1()
    digits = args.digits
    rows = [(r, format_decimal(p.eval_at(Fraction(r)), digits)) for r, _ in reference.TABLE3_ROWS]
    at_one = p.eval_at(1)
    mism = reference.compare_table3(p.eval_at, digits) if digits == 5 else []
    text = [f"Table 3: {TABLE_TITLES[3]}", f"P(r) = {p}", ""]
    text.append(_align([["r", "P"]] + [[r, v] for r, v in rows] + [["1", str(at_one)]]))
    for m in mism:
        text.append(f"note: {m}")
    payload = {
        "table": 3,
        "title": TABLE_TITLES[3],
        "exact": str(p),
        "rows": [{"r": r, "decimal": v, "exact": str(p.eval_at(Fraction(r)))} for r, v in rows],
        "r_one": str(at_one),
        "mismatches_with_published": [m.__dict__ for m in mism],
    }
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "exact", "decimal"])
        for r, v in rows:
            w.writerow([r, str(p.eval_at(Fraction(r))), v])
        _write_csv(args.csv, buf.getvalue())
    _emit(out, payload, "\n".join(text), args.json)
    return 0


def cmd_table(args, out) -> int:
    if args.id == 3:
        return _table3(args, out)
    d = _table_distribution(args.id)
    title = f"Table {args.id}: {TABLE_TITLES[args.id]}"
    lines = []
    if isinstance(d, PitfallTable):
        lines.append(f"*** {PitfallTable.banner} ***")
    lines.append(title)
    if args.scale is not None and args.r is None:
        raise UsageError("--scale needs --r")
    digits = args.digits_table
    if args.r is None:
        lines.append(_symbolic_grid(d))
        payload = table_to_json(d, title=title)
        csv_text = table_to_csv(d)
    else:
        nt = evaluate_table(d, args.r, digits=digits, scale=args.scale)
        lines.append(f"r = {nt.r}" + (f", expected counts in {args.scale} families" if args.scale else ""))
        lines.append(_numeric_grid(nt))
        payload = {"caption": table_to_json(d, title=title)["caption"], **numeric_to_json(nt)}
        csv_text = table_to_csv(d, args.r, digits)
        notes = _footnote_notes(args.id, nt)
        if notes:
            payload["mismatches_with_published"] = [m.__dict__ for m in notes]
            for m in notes:
                lines.append(f"note: {m} (published value inconsistent with its own cells)")
    if args.csv:
        _write_csv(args.csv, csv_text)
    _emit(out, payload, "\n".join(lines), args.json)
    return 0


def _footnote_notes(tid: int, nt):
    if tid != 2 or nt.r != reference.FOOTNOTE_R:
        return []
    if nt.scale == reference.FOOTNOTE_SCALE:
        return reference.compare_grid(reference.FOOTNOTE_COUNTS, nt.grid())
    if nt.scale is None and nt.digits == 4:
        return reference.compare_grid(reference.FOOTNOTE_PROBABILITIES, nt.grid())
    return []


def _r_values(args) -> list[Fraction]:
    if args.r_list:
        try:
            return [parse_rational(x) for x in args.r_list.split(",") if x.strip()]
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None
    parts = args.range.split(":")
    if len(parts) != 3:
        raise UsageError("--range expects start:stop:step")
    try:
        a, b, step = (parse_rational(x) for x in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    if step <= 0:
        raise UsageError("--range step must be positive")
    if (b - a) / step > 10_000:
        raise UsageError("--range would produce more than 10000 rows")
    vals = []
    x = a
    while x <= b:
        vals.append(x)
        x += step
    return vals


def cmd_sweep(args, out) -> int:
    q = ql.parse(args.query)
    rs = _r_values(args)
    if isinstance(q.body, (ql.TableQuery, ql.Factorize)):
        raise UsageError("sweep takes P(...), odds(...) or bf(...)")
    for r0 in rs:
        q.regime.check_r(r0)
    exact = ql.evaluate(q, digits=args.digits).exact
    rows = []  # (r, exact value or None where the condition is impossible, decimal)
    for r0 in rs:
        try:
            res = ql.evaluate(ql.Query(q.body, q.regime, r0, q.bindings), digits=args.digits)
            rows.append((r0, res.exact.eval_at(r0), res.decimal))
        except ql.EvaluationError:
            rows.append((r0, None, None))
    text = [f"query: {ql.format(q)}", f"exact: {exact}"]
    text.append(_align([["r", "value"]] + [[str(r0), dec or "undefined"] for r0, _, dec in rows], footer=False))
    payload = {
        "query": ql.format(q),
        "regime": q.regime.code,
        "exact": str(exact),
        "rows": [{"r": str(r0), "exact": None if v is None else str(v), "decimal": dec} for r0, v, dec in rows],
    }
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "exact", "decimal"])
        for r0, v, dec in rows:
            w.writerow([str(r0), "" if v is None else str(v), dec or ""])
        _write_csv(args.csv, buf.getvalue())
    _emit(out, payload, "\n".join(text), args.json)
    return 0


def cmd_pitfall(args, out) -> int:
    good = build_distribution(I2)
    bad = build_pitfall_table()
    a, b = ql.parse_expr(TWO_GIRLS), ql.parse_expr(NAMED_GIRL)
    p_good = inf.conditional(good, a, b)
    p_bad = inf.pitfall_conditional(bad, a, b)
    rep = inf.check_symmetry(bad)
    cell_good = good.cell("f!N", "fN")
    cell_bad = bad.cell("f!N", "fN")
    digits = args.digits
    lines = ["Table 4 (correct, unique names)", _symbolic_grid(good), ""]
    lines += [f"*** {PitfallTable.banner} ***", "Table 7 (naive chain rule)", _symbolic_grid(bad), ""]
    lines.append(f"cell (E f!N, Y fN): correct {cell_good}, naive {cell_bad}")
    lines.append(f"symmetry defect: {rep.max_defect}  between {rep.offending_pair[0]} and {rep.offending_pair[1]}")
    for slot, child, gap in rep.marginal_violations:
        lines.append(f"marginal violation: slot {slot.value}, {child}: prior minus table = {gap}")
    lines.append(f"P(two girls | named girl): correct {p_good}, naive {p_bad}")
    payload = {
        "banner": PitfallTable.banner,
        "correct": table_to_json(good, args.r),
        "pitfall": table_to_json(bad, args.r),
        "symmetry": rep.to_json(),
        "cell": {"correct": str(cell_good), "pitfall": str(cell_bad)},
        "conditional": {"correct": str(p_good), "pitfall": str(p_bad)},
    }
    if args.r is not None:
        r0 = I2.check_r(args.r)
        lines.append("")
        lines.append(f"at r = {r0}:")
        lines.append(f"  cell (E f!N, Y fN): correct {cell_good.eval_at(r0)}, naive {cell_bad.eval_at(r0)}")
        lines.append(f"  symmetry defect: {rep.max_defect.eval_at(r0)}")
        lines.append(
            f"  P(two girls | named girl): correct {format_decimal(p_good.eval_at(r0), digits)}, "
            f"naive {format_decimal(p_bad.eval_at(r0), digits)}"
        )
        payload["at_r"] = {
            "r": str(r0),
            "cell": {"correct": str(cell_good.eval_at(r0)), "pitfall": str(cell_bad.eval_at(r0))},
            "defect": str(rep.max_defect.eval_at(r0)),
            "conditional": {
                "correct": str(p_good.eval_at(r0)),
                "pitfall": str(p_bad.eval_at(r0)),
                "correct_decimal": format_decimal(p_good.eval_at(r0), digits),
                "pitfall_decimal": format_decimal(p_bad.eval_at(r0), digits),
            },
        }
    _emit(out, payload, "\n".join(lines), args.json)
    return 0


def cmd_verify(args, out) -> int:
    q = ql.parse(args.query)
    if isinstance(q.body, ql.Cond):
        a, b = q.body.a, q.body.b
    elif isinstance(q.body, ql.Prob):
        a, b = q.body.expr, TRUE
    else:
        raise UsageError("verify takes P(a | b) or P(a)")
    regime = q.regime
    if args.regime:
        regime = Regime(RegimeKind(args.regime), named=regime.named)
    r0 = args.r if args.r is not None else q.r_value
    if r0 is None:
        if regime.uses_names:
            raise UsageError("verify needs --r (or @r(...) in the query)")
        r0 = Fraction(0)
    cfg = mc.SimConfig(regime, r0, args.n, args.seed, args.mode)
    est = mc.estimate_conditional(cfg, a, b, q.env, workers=args.workers)
    ok = est.within(args.sigmas)
    payload = est.to_json(cfg)
    payload["query"] = ql.format(q)
    payload["sigmas"] = args.sigmas
    payload["pass"] = ok
    lines = [
        f"query:    {ql.format(q)}",
        f"config:   regime {regime.code}, r = {cfg.r}, n = {cfg.n_families}, seed = {cfg.seed}, mode = {cfg.mode}",
        f"analytic: {est.analytic} ({format_decimal(est.analytic, args.digits)})",
        f"estimate: {est.p_hat:.{args.digits}f} +- {est.stderr:.{args.digits}f} ({est.successes}/{est.trials})",
        f"z:        {est.z_score:+.3f}",
        f"result:   {'PASS' if ok else 'FAIL'} at {args.sigmas:g} sigma",
    ]
    _emit(out, payload, "\n".join(lines), args.json)
    return 0 if ok else 1


DEMO = [
    ("Q1", "What is the probability of two boys?", "@regime(i0) P(E.m & Y.m)",
     "Each of the four gender sequences is equally likely, so two boys has probability {exact}."),
    ("Q2", "Two boys, if the eldest child is a boy?", "@regime(i0) P(E.m & Y.m | E.m)",
     "Only the row with an eldest boy survives; of its two cells one is m-m: {exact}."),
    ("Q3", "Two boys, if at least one child is a boy?", "@regime(i0) P(E.m & Y.m | E.m + Y.m)",
     "Three equiprobable cells contain a boy and one of them is m-m: {exact}."),
    ("Q4", "Two boys, if one of the children is a boy called Mark (names unique)?",
     "@regime(i2) @named(m) P(E.m & Y.m | E.mN + Y.mN)",
     "Knowing the name singles out one child, exactly like knowing the eldest: {exact}."),
    ("Q4'", "Same, if two brothers could share a name?",
     "@regime(i1) @named(m) P(E.m & Y.m | E.mN + Y.mN)",
     "Allowing shared names gives {exact}: 1/3 at r = 1 and close to 1/2 for rare names."),
]


def cmd_demo(args, out) -> int:
    lines, items = [], []
    for tag, question, query, prose in DEMO:
        res = ql.evaluate(ql.parse(query), digits=args.digits)
        lines += [f"{tag}: {question}", f"    {res.query}", f"    {prose.format(exact=res.exact)}", ""]
        items.append({"id": tag, "question": question, **res.to_json()})
    _emit(out, {"demo": items}, "\n".join(lines), args.json)
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "table": cmd_table,
    "sweep": cmd_sweep,
    "pitfall": cmd_pitfall,
    "verify": cmd_verify,
    "demo": cmd_demo,
}


def main(argv: Optional[list[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, 2, None) else 2
    args.json = getattr(args, "json", False)
    explicit_digits = getattr(args, "digits", None)
    args.digits = 5 if explicit_digits is None else explicit_digits
    args.digits_table = 4 if explicit_digits is None else explicit_digits
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ql.ParseError) as exc:
        err.write(f"twochild: usage error: {exc}\n")
        if isinstance(exc, ql.ParseError) and exc.span is not None:
            text = getattr(args, "query", None)
            if isinstance(text, str) and text.isascii():
                err.write(f"  {text}\n  {' ' * exc.span.start}{'^' * max(1, exc.span.end - exc.span.start)}\n")
        return 2
    except (ql.EvaluationError, InadmissibleParameter, mc.SimulationError, inf.InferenceError, DomainError) as exc:
        err.write(f"twochild: {exc}\n")
        return 1
    except OSError as exc:
        err.write(f"twochild: {exc}\n")
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
