"""Class-expression query language over the ABox.

Grammar (keywords case-insensitive, `and` binds tighter than `or`):

    expr        := conj ('or' conj)*
    conj        := unit ('and' unit)*
    unit        := '(' expr ')' | restriction | NAME
    restriction := ['inverse'] NAME ('some' unit | 'only' unit
                                     | 'min' INT | 'max' INT)

Evaluation is closed-world instance retrieval: an atomic name denotes the
instances of the class it resolves to (through the asserted subclass
hierarchy) plus the resolved node itself when that node is also used as an
individual. The nominal half is what makes fillers like `some BRCA` or
`some High` work, since cohorts, significance levels, and evidence sources
are individuals in the graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .kg import Graph, KgError, Term, Triple
from .ontology import (OWL, RDF, RDF_TYPE, RDFS, RDFS_SUBCLASS, SCHEMA,
                       OnoSchema, iri)

_META_TYPES = {
    iri(OWL + "Class"), iri(RDFS + "Class"), iri(RDF + "Property"),
    iri(OWL + "ObjectProperty"), iri(OWL + "DatatypeProperty"),
}

KEYWORDS = {"and", "or", "some", "only", "min", "max", "inverse"}

# The query tables use both have-/has- spellings for these properties.
_PROPERTY_ALIASES = {
    "haveevidence": "hasEvidence",
    "havecitations": "hasCitations",
    "havesignificance": "hasSignificance",
    "instanceof": "type",
}


class DlxError(KgError):
    pass


class DlxParseError(DlxError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownNameError(DlxError):
    def __init__(self, name: str):
        super().__init__(f"unknown class or property name {name!r}")
        self.name = name


class HierarchyCycleError(DlxError):
    def __init__(self, cycle: list[Term]):
        names = " -> ".join(t.local_name() for t in cycle)
        super().__init__(f"subclass hierarchy contains a cycle: {names}")
        self.cycle = cycle


# ---------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class PropRef:
    term: Term
    inverse: bool = False

    def __repr__(self):
        mark = "inverse " if self.inverse else ""
        return f"{mark}{self.term.local_name()}"


@dataclass(frozen=True)
class Atomic:
    term: Term

    def __repr__(self):
        return self.term.local_name()


@dataclass(frozen=True)
class And:
    parts: tuple

    def __repr__(self):
        return "(" + " and ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __repr__(self):
        return "(" + " or ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True)
class Some:
    prop: PropRef
    filler: "ClassExpression"

    def __repr__(self):
        return f"({self.prop!r} some {self.filler!r})"


@dataclass(frozen=True)
class Only:
    prop: PropRef
    filler: "ClassExpression"

    def __repr__(self):
        return f"({self.prop!r} only {self.filler!r})"


@dataclass(frozen=True)
class MinCard:
    prop: PropRef
    n: int

    def __repr__(self):
        return f"({self.prop!r} min {self.n})"


@dataclass(frozen=True)
class MaxCard:
    prop: PropRef
    n: int

    def __repr__(self):
        return f"({self.prop!r} max {self.n})"


ClassExpression = Union[Atomic, And, Or, Some, Only, MinCard, MaxCard]


# ---------------------------------------------------------------------------
# name resolution

class NameResolver:
    """Resolve atomic names against the graph's IRIs and labels.

    Lookup order: exact local-name or label match, then unique
    case-insensitive match. Property names additionally normalize the
    have-/has- alias spellings.
    """

    def __init__(self, graph: Optional[Graph], schema: OnoSchema = SCHEMA):
        self._exact: dict[str, set[Term]] = {}
        self._folded: dict[str, set[Term]] = {}
        for term in schema.classes() + schema.properties():
            self._register(term.local_name(), term)
        if graph is not None:
            from .ontology import RDFS_LABEL
            for term in graph.terms():
                if term.kind == "iri":
                    self._register(term.local_name(), term)
            for t in graph.match(None, RDFS_LABEL, None):
                if t.object.kind == "literal":
                    self._register(t.object.lexical, t.subject)

    def _register(self, name: str, term: Term) -> None:
        self._exact.setdefault(name, set()).add(term)
        self._folded.setdefault(name.casefold(), set()).add(term)

    def resolve(self, name: str) -> Term:
        found = self._exact.get(name) or self._folded.get(name.casefold())
        if not found:
            raise UnknownNameError(name)
        if len(found) > 1:
            options = ", ".join(sorted(t.lexical for t in found))
            raise DlxError(f"ambiguous name {name!r}: {options}")
        return next(iter(found))

    def resolve_property(self, name: str) -> Term:
        alias = _PROPERTY_ALIASES.get(name.casefold())
        if alias == "type":
            return RDF_TYPE
        return self.resolve(alias or name)


# ---------------------------------------------------------------------------
# parser

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyz"
                  "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            ch = text[pos]
            if ch.isspace():
                pos += 1
                continue
            if ch in "()":
                self.items.append(("punct", ch, pos))
                pos += 1
                continue
            if ch in _NAME_CHARS:
                start = pos
                while pos < len(text) and text[pos] in _NAME_CHARS:
                    pos += 1
                word = text[start:pos]
                if word.isdigit():
                    self.items.append(("int", word, start))
                elif word.casefold() in KEYWORDS:
                    self.items.append(("kw", word.casefold(), start))
                else:
                    self.items.append(("name", word, start))
                continue
            raise DlxParseError(f"unexpected character {ch!r}", pos)
        self.index = 0

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.items[self.index] if self.index < len(self.items) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise DlxParseError("unexpected end of expression", len(self.text))
        self.index += 1
        return tok


def parse_dlx(text: str, graph: Optional[Graph] = None,
              schema: OnoSchema = SCHEMA,
              resolver: Optional[NameResolver] = None) -> ClassExpression:
    """Parse a class expression, resolving names against graph and schema."""
    if not text.strip():
        raise DlxParseError("empty expression", 0)
    resolver = resolver or NameResolver(graph, schema)
    tokens = _Tokens(text)
    expr = _parse_or(tokens, resolver)
    trailing = tokens.peek()
    if trailing is not None:
        raise DlxParseError(f"unexpected token {trailing[1]!r}", trailing[2])
    return expr


def _parse_or(tokens: _Tokens, resolver: NameResolver) -> ClassExpression:
    parts = [_parse_and(tokens, resolver)]
    while True:
        tok = tokens.peek()
        if tok and tok[0] == "kw" and tok[1] == "or":
            tokens.next()
            parts.append(_parse_and(tokens, resolver))
        else:
            break
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_and(tokens: _Tokens, resolver: NameResolver) -> ClassExpression:
    parts = [_parse_unit(tokens, resolver)]
    while True:
        tok = tokens.peek()
        if tok and tok[0] == "kw" and tok[1] == "and":
            tokens.next()
            parts.append(_parse_unit(tokens, resolver))
        else:
            break
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_unit(tokens: _Tokens, resolver: NameResolver) -> ClassExpression:
    tok = tokens.next()
    kind, value, pos = tok
    if kind == "punct" and value == "(":
        inner = _parse_or(tokens, resolver)
        closing = tokens.next()
        if closing[0] != "punct" or closing[1] != ")":
            raise DlxParseError("expected ')'", closing[2])
        return inner
    if kind == "kw" and value == "inverse":
        name_tok = tokens.next()
        if name_tok[0] != "name":
            raise DlxParseError("expected a property name after 'inverse'",
                                name_tok[2])
        return _parse_restriction(tokens, resolver, name_tok[1],
                                  inverse=True, pos=name_tok[2])
    if kind == "name":
        nxt = tokens.peek()
        if nxt and nxt[0] == "kw" and nxt[1] in ("some", "only", "min", "max"):
            return _parse_restriction(tokens, resolver, value,
                                      inverse=False, pos=pos)
        return Atomic(resolver.resolve(value))
    raise DlxParseError(f"unexpected token {value!r}", pos)


def _parse_restriction(tokens: _Tokens, resolver: NameResolver, name: str,
                       inverse: bool, pos: int) -> ClassExpression:
    prop = PropRef(resolver.resolve_property(name), inverse)
    op = tokens.next()
    if op[0] != "kw" or op[1] not in ("some", "only", "min", "max"):
        raise DlxParseError("expected some/only/min/max after a property",
                            op[2])
    if op[1] in ("min", "max"):
        num = tokens.next()
        if num[0] != "int":
            raise DlxParseError(f"expected a nonnegative integer after "
                                f"'{op[1]}'", num[2])
        n = int(num[1])
        return MinCard(prop, n) if op[1] == "min" else MaxCard(prop, n)
    filler = _parse_unit(tokens, resolver)
    return Some(prop, filler) if op[1] == "some" else Only(prop, filler)


# ---------------------------------------------------------------------------
# subclass closure

def subclass_closure(graph: Graph) -> dict[Term, frozenset[Term]]:
    """Reflexive-transitive closure of asserted subClassOf.

    Maps every class mentioned in the hierarchy to its ancestor set
    (including itself). Raises HierarchyCycleError on a cycle.
    """
    parents: dict[Term, set[Term]] = {}
    for t in graph.match(None, RDFS_SUBCLASS, None):
        parents.setdefault(t.subject, set()).add(t.object)
        parents.setdefault(t.object, set())
    closure: dict[Term, frozenset[Term]] = {}
    visiting: list[Term] = []
    on_path: set[Term] = set()

    def ancestors(node: Term) -> frozenset[Term]:
        if node in closure:
            return closure[node]
        if node in on_path:
            cycle = visiting[visiting.index(node):] + [node]
            raise HierarchyCycleError(cycle)
        visiting.append(node)
        on_path.add(node)
        out = {node}
        for parent in parents.get(node, ()):
            out |= ancestors(parent)
        visiting.pop()
        on_path.discard(node)
        closure[node] = frozenset(out)
        return closure[node]

    for node in sorted(parents, key=lambda t: t.lexical):
        ancestors(node)
    return closure


# ---------------------------------------------------------------------------
# evaluation

class AboxIndex:
    """Per-graph evaluation index: typed instances with subclass closure,
    per-property successor maps, and the queried universe.

    Built once per graph version; read-only afterwards, so it can be shared
    across threads.
    """

    def __init__(self, graph: Graph, schema: OnoSchema = SCHEMA):
        self.graph = graph
        self.schema = schema
        self._closure = subclass_closure(graph)
        self._direct: dict[Term, set[Term]] = {}
        self._individuals: set[Term] = set()
        for t in graph.match(None, RDF_TYPE, None):
            self._direct.setdefault(t.object, set()).add(t.subject)
            if t.object not in _META_TYPES:
                self._individuals.add(t.subject)
        self._descendants: dict[Term, set[Term]] = {}
        for child, ancestors in self._closure.items():
            for parent in ancestors:
                self._descendants.setdefault(parent, set()).add(child)
        self._succ: dict[tuple[Term, bool], dict[Term, set[Term]]] = {}
        self.universe: frozenset[Term] = frozenset(graph.nodes())

    def class_instances(self, cls: Term) -> set[Term]:
        out: set[Term] = set()
        for sub in self._descendants.get(cls, {cls}):
            out |= self._direct.get(sub, set())
        return out

    def is_individual(self, term: Term) -> bool:
        return term in self._individuals

    def successors(self, prop: PropRef) -> dict[Term, set[Term]]:
        key = (prop.term, prop.inverse)
        cached = self._succ.get(key)
        if cached is None:
            cached = {}
            for t in self.graph.match(None, prop.term, None):
                src, dst = (t.object, t.subject) if prop.inverse \
                    else (t.subject, t.object)
                if src.kind == "literal":
                    continue
                cached.setdefault(src, set()).add(dst)
            self._succ[key] = cached
        return cached

    def evaluate(self, expr: ClassExpression) -> set[Term]:
        if isinstance(expr, Atomic):
            out = self.class_instances(expr.term)
            if self.is_individual(expr.term):
                out = out | {expr.term}
            return out
        if isinstance(expr, And):
            parts = [self.evaluate(p) for p in expr.parts]
            out = parts[0]
            for p in parts[1:]:
                out = out & p
            return out
        if isinstance(expr, Or):
            out: set[Term] = set()
            for p in expr.parts:
                out |= self.evaluate(p)
            return out
        if isinstance(expr, Some):
            filler = self.evaluate(expr.filler)
            succ = self.successors(expr.prop)
            return {x for x, targets in succ.items() if targets & filler}
        if isinstance(expr, Only):
            filler = self.evaluate(expr.filler)
            succ = self.successors(expr.prop)
            return {x for x in self.universe
                    if succ.get(x, set()) <= filler}
        if isinstance(expr, MinCard):
            if expr.n == 0:
                return set(self.universe)
            succ = self.successors(expr.prop)
            return {x for x, targets in succ.items() if len(targets) >= expr.n}
        if isinstance(expr, MaxCard):
            succ = self.successors(expr.prop)
            return {x for x in self.universe
                    if len(succ.get(x, ())) <= expr.n}
        raise DlxError(f"unknown expression node {expr!r}")


def instances(graph: Graph, expr: ClassExpression,
              index: Optional[AboxIndex] = None,
              schema: OnoSchema = SCHEMA) -> list[Term]:
    """Members of the class expression, sorted for deterministic output."""
    index = index or AboxIndex(graph, schema)
    return sorted(index.evaluate(expr), key=lambda t: (t.kind, t.lexical))


def query(graph: Graph, text: str, index: Optional[AboxIndex] = None,
          schema: OnoSchema = SCHEMA) -> list[Term]:
    return instances(graph, parse_dlx(text, graph, schema), index, schema)


# ---------------------------------------------------------------------------
# syllogistic deduction

@dataclass
class Deduction:
    derived: Optional[Triple]
    trace: list[str] = field(default_factory=list)
    derived_provenance: str = "syllogism"

    @property
    def holds(self) -> bool:
        return self.derived is not None


SYLLOGISM_RULES = {
    # every member of Oncogene causes (a representative of) Cancer
    "oncogene-rule": (SCHEMA.oncogene, SCHEMA.causes, SCHEMA.cancer),
}


def deduce_syllogism(graph: Graph, rule: tuple[Term, Term, Term],
                     instance: Term, persist: bool = False,
                     schema: OnoSchema = SCHEMA,
                     index: Optional[AboxIndex] = None) -> Deduction:
    """Apply `every A <property> B` to an asserted member of A.

    Returns the derived triple plus a two-premise proof trace; with no
    membership premise the deduction is empty. Derived triples stay out of
    the graph unless persist is requested.
    """
    class_a, prop, class_b = rule
    index = index or AboxIndex(graph, schema)
    if instance not in index.class_instances(class_a):
        return Deduction(derived=None, trace=[])
    derived = Triple(instance, prop, class_b)
    trace = [
        f"premise: {instance.local_name()} is a {class_a.local_name()}",
        f"premise: every {class_a.local_name()} {prop.local_name()} "
        f"{class_b.local_name()}",
        f"conclusion: {instance.local_name()} {prop.local_name()} "
        f"{class_b.local_name()}",
    ]
    if persist:
        graph.insert(derived)
    return Deduction(derived=derived, trace=trace)
