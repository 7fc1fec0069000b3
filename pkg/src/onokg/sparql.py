"""Parser and evaluator for the SPARQL subset used by the query pack.

Supported: PREFIX headers, SELECT [DISTINCT], basic graph patterns,
`a` for rdf:type, one VALUES clause (single variable), FILTER with
regex / numeric comparisons / && || ! / parentheses, bare GROUP BY, and
one level of nested SELECT inside WHERE.

Filter semantics: a filter leaf that cannot be evaluated (regex against a
non-literal, comparison on a non-numeric value, unbound variable) counts
as false for that row; the logical operators are then plain boolean. A
bare GROUP BY with no aggregates collapses each group to one row of its
grouping key. Result rows are sorted by term, so evaluation output is
deterministic across runs and insertion orders.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .kg import (Graph, KgError, PrefixTable, Term, UnknownPrefixError,
                 iri, literal)
from .ontology import RDF, default_prefixes

RDF_TYPE = iri(RDF + "type")


class SparqlError(KgError):
    pass


class SparqlParseError(SparqlError):
    def __init__(self, message: str, line: int, col: int,
                 expected: Optional[str] = None):
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")
        self.line = line
        self.col = col
        self.expected = expected


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return f"?{self.name}"


Node = Union[Var, Term]


@dataclass(frozen=True)
class TriplePattern:
    s: Node
    p: Node
    o: Node

    def variables(self) -> set[str]:
        return {n.name for n in (self.s, self.p, self.o)
                if isinstance(n, Var)}


@dataclass(frozen=True)
class Values:
    var: Var
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class Regex:
    var: Var
    pattern: str


@dataclass(frozen=True)
class Comparison:
    op: str
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class NotExpr:
    operand: "FilterNode"


@dataclass(frozen=True)
class AndExpr:
    parts: tuple


@dataclass(frozen=True)
class OrExpr:
    parts: tuple


FilterNode = Union[Regex, Comparison, NotExpr, AndExpr, OrExpr]


@dataclass
class SubSelect:
    query: "SelectQuery"


@dataclass
class SelectQuery:
    prefixes: PrefixTable
    projection: list[Var]
    distinct: bool
    pattern: list[Union[TriplePattern, SubSelect]]
    values: Optional[Values] = None
    filters: list[FilterNode] = field(default_factory=list)
    group_by: list[Var] = field(default_factory=list)

    def in_scope_variables(self) -> set[str]:
        out: set[str] = set()
        for elem in self.pattern:
            if isinstance(elem, TriplePattern):
                out |= elem.variables()
            else:
                out |= {v.name for v in elem.query.projection}
        if self.values is not None:
            out.add(self.values.var.name)
        return out


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<op>&&|\|\||>=|<=|!=|[><=!])
  | (?P<punct>[{}().;,])
  | (?P<pname>[A-Za-z_][A-Za-z0-9_\-]*:[A-Za-z0-9_\-.]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*)
""", re.VERBOSE)

_STRING_ESCAPES = {'\\"': '"', "\\\\": "\\", "\\n": "\n", "\\t": "\t"}

KEYWORDS = {"prefix", "select", "distinct", "where", "filter", "values",
            "group", "by", "regex"}


@dataclass
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SparqlParseError(f"unexpected character {text[pos]!r}",
                                   line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    return tokens


def _unescape(raw: str, line: int, col: int) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\":
            pair = body[i:i + 2]
            if pair not in _STRING_ESCAPES:
                raise SparqlParseError(f"unsupported escape {pair!r}",
                                       line, col)
            out.append(_STRING_ESCAPES[pair])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, text: str, prefixes: Optional[PrefixTable] = None):
        self.tokens = _tokenize(text)
        self.index = 0
        self.prefixes = prefixes.copy() if prefixes else PrefixTable()

    def error(self, message: str, expected: Optional[str] = None):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise SparqlParseError(message, last.line, last.col, expected)
        raise SparqlParseError(message, tok.line, tok.col, expected)

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) \
            else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of query")
        self.index += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return (tok is not None and tok.kind == "name"
                and tok.value.casefold() == word)

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            self.error(f"expected {word.upper()}", expected=word.upper())
        return self.next()

    def expect_punct(self, value: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.kind not in ("punct", "op") \
                or tok.value != value:
            self.error(f"expected {value!r}", expected=value)
        return self.next()

    # grammar

    def parse_query(self) -> SelectQuery:
        while self.at_keyword("prefix"):
            self.next()
            tok = self.next()
            if tok.kind != "pname" or not tok.value.endswith(":"):
                raise SparqlParseError("expected a prefix declaration like "
                                       "'ono:'", tok.line, tok.col)
            prefix = tok.value[:-1]
            iri_tok = self.next()
            if iri_tok.kind != "iri":
                raise SparqlParseError("expected a namespace IRI",
                                       iri_tok.line, iri_tok.col)
            self.prefixes.bind(prefix, iri_tok.value[1:-1])
        query = self.parse_select()
        if self.peek() is not None:
            self.error("trailing content after query")
        return query

    def parse_select(self) -> SelectQuery:
        self.expect_keyword("select")
        distinct = False
        if self.at_keyword("distinct"):
            self.next()
            distinct = True
        projection: list[Var] = []
        while self.peek() is not None and self.peek().kind == "var":
            projection.append(Var(self.next().value[1:]))
        if not projection:
            self.error("expected at least one projected variable",
                       expected="?variable")
        self.expect_keyword("where")
        pattern, values, filters = self.parse_group()
        group_by: list[Var] = []
        if self.at_keyword("group"):
            self.next()
            self.expect_keyword("by")
            while self.peek() is not None and self.peek().kind == "var":
                group_by.append(Var(self.next().value[1:]))
            if not group_by:
                self.error("expected grouping variables", expected="?variable")
        query = SelectQuery(self.prefixes, projection, distinct, pattern,
                            values, filters, group_by)
        self.validate(query)
        return query

    def parse_group(self):
        self.expect_punct("{")
        pattern: list[Union[TriplePattern, SubSelect]] = []
        values: Optional[Values] = None
        filters: list[FilterNode] = []
        while True:
            tok = self.peek()
            if tok is None:
                self.error("unterminated group, expected '}'", expected="}")
            if tok.kind == "punct" and tok.value == "}":
                self.next()
                break
            if tok.kind == "punct" and tok.value == "{":
                self.next()
                sub = self.parse_select()
                self.expect_punct("}")
                pattern.append(SubSelect(sub))
                continue
            if self.at_keyword("select"):
                pattern.append(SubSelect(self.parse_select()))
                continue
            if self.at_keyword("values"):
                if values is not None:
                    self.error("only one VALUES clause is supported")
                values = self.parse_values()
                continue
            if self.at_keyword("filter"):
                self.next()
                self.expect_punct("(")
                filters.append(self.parse_or_expr())
                self.expect_punct(")")
                continue
            pattern.append(self.parse_triple_pattern())
        return pattern, values, filters

    def parse_values(self) -> Values:
        self.expect_keyword("values")
        tok = self.next()
        if tok.kind != "var":
            raise SparqlParseError("VALUES needs a variable",
                                   tok.line, tok.col)
        var = Var(tok.value[1:])
        self.expect_punct("{")
        terms: list[Term] = []
        while True:
            nxt = self.peek()
            if nxt is None:
                self.error("unterminated VALUES block", expected="}")
            if nxt.kind == "punct" and nxt.value == "}":
                self.next()
                break
            node = self.parse_node(allow_var=False)
            terms.append(node)
        return Values(var, tuple(terms))

    def parse_triple_pattern(self) -> TriplePattern:
        s = self.parse_node()
        p = self.parse_node(predicate=True)
        o = self.parse_node()
        tok = self.peek()
        if tok is not None and tok.kind == "punct" and tok.value == ".":
            self.next()
        elif tok is not None and tok.kind == "punct" and tok.value in (";", ","):
            raise SparqlParseError("predicate/object lists are not part of "
                                   "the subset; write full triples",
                                   tok.line, tok.col)
        elif tok is None or tok.value != "}":
            # '.' is optional only before the closing brace
            self.error("expected '.' after triple pattern", expected=".")
        return TriplePattern(s, p, o)

    def parse_node(self, predicate: bool = False,
                   allow_var: bool = True) -> Node:
        tok = self.next()
        if tok.kind == "var":
            if not allow_var:
                raise SparqlParseError("variable not allowed here",
                                       tok.line, tok.col)
            return Var(tok.value[1:])
        if tok.kind == "iri":
            value = tok.value[1:-1]
            if ":" not in value:
                raise SparqlParseError(f"relative IRI <{value}>",
                                       tok.line, tok.col)
            return iri(value)
        if tok.kind == "pname":
            prefix, _, local = tok.value.partition(":")
            try:
                return iri(self.prefixes.namespace(prefix) + local)
            except UnknownPrefixError:
                raise SparqlParseError(f"unknown prefix {prefix!r}",
                                       tok.line, tok.col) from None
        if tok.kind == "name" and tok.value == "a" and predicate:
            return RDF_TYPE
        if tok.kind == "string":
            return literal(_unescape(tok.value, tok.line, tok.col))
        if tok.kind == "number":
            return literal(tok.value)
        raise SparqlParseError(f"unexpected token {tok.value!r} in pattern",
                               tok.line, tok.col)

    # filter expressions

    def parse_or_expr(self) -> FilterNode:
        parts = [self.parse_and_expr()]
        while self.peek() is not None and self.peek().value == "||":
            self.next()
            parts.append(self.parse_and_expr())
        return parts[0] if len(parts) == 1 else OrExpr(tuple(parts))

    def parse_and_expr(self) -> FilterNode:
        parts = [self.parse_unary_expr()]
        while self.peek() is not None and self.peek().value == "&&":
            self.next()
            parts.append(self.parse_unary_expr())
        return parts[0] if len(parts) == 1 else AndExpr(tuple(parts))

    def parse_unary_expr(self) -> FilterNode:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.value == "!":
            self.next()
            return NotExpr(self.parse_unary_expr())
        if tok is not None and tok.kind == "punct" and tok.value == "(":
            self.next()
            inner = self.parse_or_expr()
            self.expect_punct(")")
            return inner
        if tok is not None and tok.kind == "name" \
                and tok.value.casefold() == "regex":
            return self.parse_regex()
        return self.parse_comparison()

    def parse_regex(self) -> Regex:
        self.expect_keyword("regex")
        self.expect_punct("(")
        tok = self.next()
        if tok.kind != "var":
            raise SparqlParseError("regex takes a variable first",
                                   tok.line, tok.col)
        var = Var(tok.value[1:])
        self.expect_punct(",")
        pat = self.next()
        if pat.kind != "string":
            raise SparqlParseError("regex takes a quoted pattern",
                                   pat.line, pat.col)
        pattern = _unescape(pat.value, pat.line, pat.col)
        _compile_regex(pattern, pat.line, pat.col)
        self.expect_punct(")")
        return Regex(var, pattern)

    def parse_comparison(self) -> Comparison:
        lhs = self.parse_operand()
        tok = self.peek()
        if tok is None or tok.kind != "op" \
                or tok.value not in (">=", "<=", ">", "<", "="):
            self.error("expected a comparison operator",
                       expected=">= <= > < =")
        op = self.next().value
        rhs = self.parse_operand()
        return Comparison(op, lhs, rhs)

    def parse_operand(self) -> Node:
        tok = self.next()
        if tok.kind == "var":
            return Var(tok.value[1:])
        if tok.kind == "number":
            return literal(tok.value)
        if tok.kind == "string":
            return literal(_unescape(tok.value, tok.line, tok.col))
        raise SparqlParseError(f"unexpected operand {tok.value!r}",
                               tok.line, tok.col)

    def validate(self, query: SelectQuery) -> None:
        scope = query.in_scope_variables()
        for var in query.projection:
            if var.name not in scope:
                raise SparqlParseError(
                    f"projected variable ?{var.name} is unbound", 1, 1)
        for var in query.group_by:
            if var.name not in scope:
                raise SparqlParseError(
                    f"grouping variable ?{var.name} is unbound", 1, 1)
        if query.group_by:
            keys = {v.name for v in query.group_by}
            for var in query.projection:
                if var.name not in keys:
                    raise SparqlParseError(
                        f"?{var.name} is projected but not grouped", 1, 1)


def parse_select(text: str,
                 prefixes: Optional[PrefixTable] = None) -> SelectQuery:
    return _Parser(text, prefixes).parse_query()


# ---------------------------------------------------------------------------
# regex dialect: anchors, character classes, alternation, * + ?, grouping.
# '.' is a literal character; everything else unsupported is rejected.

_REGEX_ALLOWED = re.compile(r"^[A-Za-z0-9 _\-^$\[\]|*+?()@#/,.:']*$")


def _compile_regex(pattern: str, line: int = 1, col: int = 1):
    if not _REGEX_ALLOWED.match(pattern):
        raise SparqlParseError(f"regex pattern {pattern!r} uses characters "
                               "outside the supported dialect", line, col)
    escaped = pattern.replace(".", r"\.")
    try:
        return re.compile(escaped)
    except re.error as exc:
        raise SparqlParseError(f"bad regex pattern {pattern!r}: {exc}",
                               line, col) from None


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class SolutionTable:
    header: list[str]
    rows: list[tuple[Term, ...]]

    def as_set(self) -> set[tuple[Term, ...]]:
        return set(self.rows)

    def to_json(self) -> str:
        return json.dumps({
            "header": self.header,
            "rows": [[t.n3() for t in row] for row in self.rows],
        }, indent=2)

    def to_csv(self) -> str:
        import csv as _csv
        import io
        buf = io.StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([t.n3() for t in row])
        return buf.getvalue()

    def render(self) -> str:
        cells = [[t.n3() for t in row] for row in self.rows]
        widths = [len(h) for h in self.header]
        for row in cells:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
        lines = ["  ".join(h.ljust(widths[i])
                           for i, h in enumerate(self.header)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        for row in cells:
            lines.append("  ".join(cell.ljust(widths[i])
                                   for i, cell in enumerate(row)).rstrip())
        lines.append(f"({len(self.rows)} rows)")
        return "\n".join(lines)


def _term_sort_key(term: Term):
    return (term.kind, term.lexical, term.datatype or "", term.language or "")


def _numeric(term: Term) -> float:
    if term.kind != "literal":
        raise ValueError("not a literal")
    return float(term.lexical)


def _eval_filter(node: FilterNode, row: dict[str, Term]) -> bool:
    if isinstance(node, OrExpr):
        return any(_eval_filter(p, row) for p in node.parts)
    if isinstance(node, AndExpr):
        return all(_eval_filter(p, row) for p in node.parts)
    if isinstance(node, NotExpr):
        return not _eval_filter(node.operand, row)
    if isinstance(node, Regex):
        value = row.get(node.var.name)
        if value is None or value.kind != "literal":
            return False
        return _compile_regex(node.pattern).search(value.lexical) is not None
    if isinstance(node, Comparison):
        try:
            lhs = _operand_value(node.lhs, row)
            rhs = _operand_value(node.rhs, row)
        except (ValueError, KeyError):
            return False
        return {
            ">=": lhs >= rhs, "<=": lhs <= rhs,
            ">": lhs > rhs, "<": lhs < rhs, "=": lhs == rhs,
        }[node.op]
    raise SparqlError(f"unknown filter node {node!r}")


def _operand_value(node: Node, row: dict[str, Term]) -> float:
    term = row[node.name] if isinstance(node, Var) else node
    return _numeric(term)


def _match_pattern(graph: Graph, pattern: TriplePattern,
                   row: dict[str, Term]) -> list[dict[str, Term]]:
    def concrete(node: Node) -> Optional[Term]:
        if isinstance(node, Var):
            return row.get(node.name)
        return node

    s, p, o = concrete(pattern.s), concrete(pattern.p), concrete(pattern.o)
    out = []
    for t in graph.match(s, p, o):
        new = dict(row)
        ok = True
        for node, value in ((pattern.s, t.subject), (pattern.p, t.predicate),
                            (pattern.o, t.object)):
            if isinstance(node, Var):
                bound = new.get(node.name)
                if bound is None:
                    new[node.name] = value
                elif bound != value:
                    ok = False
                    break
        if ok:
            out.append(new)
    return out


def evaluate(graph: Graph, query: SelectQuery) -> SolutionTable:
    """Natural join of pattern matches, cross-joined with VALUES, filtered,
    projected, deduplicated, grouped."""
    if query.values is not None:
        rows: list[dict[str, Term]] = [{query.values.var.name: t}
                                       for t in query.values.terms]
    else:
        rows = [{}]
    for elem in query.pattern:
        next_rows: list[dict[str, Term]] = []
        if isinstance(elem, TriplePattern):
            for row in rows:
                next_rows.extend(_match_pattern(graph, elem, row))
        else:
            sub = evaluate(graph, elem.query)
            for row in rows:
                for sub_row in sub.rows:
                    merged = dict(row)
                    ok = True
                    for name, value in zip(sub.header, sub_row):
                        bound = merged.get(name)
                        if bound is None:
                            merged[name] = value
                        elif bound != value:
                            ok = False
                            break
                    if ok:
                        next_rows.append(merged)
        rows = next_rows
        if not rows:
            break
    for filt in query.filters:
        rows = [row for row in rows if _eval_filter(filt, row)]
    if query.group_by:
        seen = set()
        grouped = []
        for row in rows:
            key = tuple(row[v.name] for v in query.group_by)
            if key not in seen:
                seen.add(key)
                grouped.append(row)
        rows = grouped
    header = [v.name for v in query.projection]
    projected = [tuple(row[v.name] for v in query.projection) for row in rows]
    if query.distinct:
        unique = []
        seen_rows = set()
        for row in projected:
            if row not in seen_rows:
                seen_rows.add(row)
                unique.append(row)
        projected = unique
    projected.sort(key=lambda r: tuple(_term_sort_key(t) for t in r))
    return SolutionTable(header, projected)


def run_query(graph: Graph, text: str,
              prefixes: Optional[PrefixTable] = None) -> SolutionTable:
    return evaluate(graph, parse_select(text, prefixes or default_prefixes()))


# ---------------------------------------------------------------------------
# bundled query pack

@dataclass
class PackResult:
    name: str
    text: str
    table: SolutionTable
    seconds: float


def pack_dir() -> Path:
    return Path(str(resources.files("onokg").joinpath("data", "sparql_pack")))


def load_query_pack(directory: Optional[Path] = None) -> list[tuple[str, str]]:
    directory = Path(directory) if directory else pack_dir()
    queries = []
    for path in sorted(directory.glob("*.rq")):
        queries.append((path.stem, path.read_text(encoding="utf-8")))
    if not queries:
        raise SparqlError(f"no .rq files in {directory}")
    return queries


def run_query_pack(graph: Graph,
                   directory: Optional[Path] = None) -> list[PackResult]:
    results = []
    for name, text in load_query_pack(directory):
        query = parse_select(text, default_prefixes())
        start = time.perf_counter()
        table = evaluate(graph, query)
        elapsed = time.perf_counter() - start
        results.append(PackResult(name, text, table, elapsed))
    return results
