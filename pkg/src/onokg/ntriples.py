"""Line-oriented N-Triples subset parser and serializer.

Subset: IRIs in angle brackets, quoted literals with the escape set
\\" \\\\ \\n \\t, optional ^^<datatype> or @lang suffix, blank nodes
`_:label`, one `.`-terminated triple per line, `#` comment lines.
Files are UTF-8 with LF line endings.

The parser recovers at line granularity: every malformed line produces one
issue (with its line number) and parsing continues, so a single call
reports all problems. Blank-node labels are renamed on load to fresh
sequential labels (b0, b1, ...), so labels are not stable across a load.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kg import BLANK, Graph, Term, Triple, ValidationError, blank, iri, literal

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass
class ParseIssue:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


@dataclass
class ParseResult:
    graph: Graph
    issues: list[ParseIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


class NTriplesParseError(Exception):
    def __init__(self, issues: list[ParseIssue]):
        super().__init__("; ".join(str(i) for i in issues))
        self.issues = issues


class _LineScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def read_term(self) -> Term:
        self.skip_ws()
        ch = self.peek()
        if ch == "<":
            return self._read_iri()
        if ch == '"':
            return self._read_literal()
        if ch == "_" and self.text[self.pos:self.pos + 2] == "_:":
            return self._read_blank()
        if ch == "":
            raise ValidationError("unexpected end of line, expected a term")
        raise ValidationError(f"unexpected character {ch!r}, expected a term")

    def _read_iri(self) -> Term:
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            raise ValidationError("unterminated IRI (missing '>')")
        value = self.text[self.pos + 1:end]
        self.pos = end + 1
        if ":" not in value:
            raise ValidationError(f"relative IRI not allowed: <{value}>")
        if any(c in value for c in ' "<'):
            raise ValidationError(f"invalid character in IRI: <{value}>")
        return iri(value)

    def _read_blank(self) -> Term:
        self.pos += 2
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in "_-"):
            self.pos += 1
        label = self.text[start:self.pos]
        if not label:
            raise ValidationError("blank node with empty label")
        return blank(label)

    def _read_literal(self) -> Term:
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                raise ValidationError("unterminated literal")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                break
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise ValidationError("unterminated literal")
                esc = self.text[self.pos + 1]
                if esc not in _ESCAPES:
                    raise ValidationError(f"unsupported escape \\{esc}")
                out.append(_ESCAPES[esc])
                self.pos += 2
                continue
            out.append(ch)
            self.pos += 1
        value = "".join(out)
        if self.text[self.pos:self.pos + 2] == "^^":
            self.pos += 2
            if self.peek() != "<":
                raise ValidationError("datatype must be an IRI in angle brackets")
            dt = self._read_iri()
            return literal(value, datatype=dt.lexical)
        if self.peek() == "@":
            self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                                 or self.text[self.pos] == "-"):
                self.pos += 1
            tag = self.text[start:self.pos]
            if not tag:
                raise ValidationError("empty language tag")
            return literal(value, language=tag)
        return literal(value)

    def read_terminator(self):
        self.skip_ws()
        if self.peek() != ".":
            raise ValidationError("missing '.' terminator")
        self.pos += 1
        self.skip_ws()
        rest = self.text[self.pos:]
        if rest and not rest.startswith("#"):
            raise ValidationError(f"unexpected trailing content {rest!r}")


def parse_ntriples(text: str, graph: Graph | None = None) -> ParseResult:
    """Parse N-Triples subset text, recovering per line.

    Returns the (possibly partial) graph together with all issues found.
    """
    graph = graph if graph is not None else Graph()
    issues: list[ParseIssue] = []
    blank_map: dict[str, Term] = {}
    counter = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        scanner = _LineScanner(raw)
        try:
            s = scanner.read_term()
            p = scanner.read_term()
            o = scanner.read_term()
            scanner.read_terminator()
            if s.kind == BLANK:
                if s.lexical not in blank_map:
                    blank_map[s.lexical] = blank(f"b{counter}")
                    counter += 1
                s = blank_map[s.lexical]
            if o.kind == BLANK:
                if o.lexical not in blank_map:
                    blank_map[o.lexical] = blank(f"b{counter}")
                    counter += 1
                o = blank_map[o.lexical]
            graph.insert(Triple(s, p, o))
        except ValidationError as exc:
            issues.append(ParseIssue(lineno, str(exc)))
    return ParseResult(graph, issues)


def parse_ntriples_strict(text: str) -> Graph:
    """Parse, raising NTriplesParseError if any line is malformed."""
    result = parse_ntriples(text)
    if not result.ok:
        raise NTriplesParseError(result.issues)
    return result.graph


def serialize_ntriples(graph: Graph) -> str:
    """One line per triple, sorted by term ids for determinism."""
    return "".join(f"{t.subject.n3()} {t.predicate.n3()} {t.object.n3()} .\n"
                   for t in graph)


def load_file(path) -> ParseResult:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_ntriples(fh.read())


def save_file(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_ntriples(graph))
