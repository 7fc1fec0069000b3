"""Dictionary-encoded in-memory triple store.

Terms are interned to integer ids in first-insertion order, which makes id
ordering (and everything sorted by it, such as serialization and query
output) deterministic for a deterministic build sequence. Triples are kept
as a set of id-triples plus three nested indexes (SPO, POS, OSP) so any
combination of bound/unbound pattern positions is answered from an index.

Concurrency contract: many concurrent readers or one writer. The store
takes no locks itself; Graph values can be handed between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

IRI = "iri"
LITERAL = "literal"
BLANK = "blank"


class KgError(Exception):
    """Base class for store errors."""


class ValidationError(KgError):
    """A term or triple violates the data model."""


class UnknownPrefixError(KgError):
    def __init__(self, prefix: str):
        super().__init__(f"unknown prefix {prefix!r}")
        self.prefix = prefix


@dataclass(frozen=True)
class Term:
    """An RDF-style term: IRI, literal, or blank node.

    Equality and hashing are structural over all four fields; lexical
    comparison is exact code-point equality (no Unicode normalization).
    """

    kind: str
    lexical: str
    datatype: Optional[str] = None
    language: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL, BLANK):
            raise ValidationError(f"unknown term kind {self.kind!r}")
        if self.kind == IRI and ":" not in self.lexical:
            raise ValidationError(f"IRI must be absolute: {self.lexical!r}")
        if self.kind != LITERAL and (self.datatype or self.language):
            raise ValidationError("datatype/language are only valid on literals")
        if self.datatype is not None and self.language is not None:
            raise ValidationError("a literal has at most one of datatype, language")
        if self.datatype is not None and ":" not in self.datatype:
            raise ValidationError(f"datatype IRI must be absolute: {self.datatype!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == IRI

    @property
    def is_literal(self) -> bool:
        return self.kind == LITERAL

    @property
    def is_blank(self) -> bool:
        return self.kind == BLANK

    def local_name(self) -> str:
        """Last path/fragment segment of an IRI (the name after '#' or '/')."""
        if self.kind != IRI:
            return self.lexical
        lex = self.lexical
        for sep in ("#", "/", ":"):
            idx = lex.rfind(sep)
            if idx >= 0 and idx < len(lex) - 1:
                return lex[idx + 1:]
        return lex

    def n3(self) -> str:
        """N-Triples rendering of the term."""
        if self.kind == IRI:
            return f"<{self.lexical}>"
        if self.kind == BLANK:
            return f"_:{self.lexical}"
        out = '"' + escape_literal(self.lexical) + '"'
        if self.datatype is not None:
            out += f"^^<{self.datatype}>"
        elif self.language is not None:
            out += f"@{self.language}"
        return out

    def __repr__(self):
        return self.n3()


def iri(value: str) -> Term:
    return Term(IRI, value)


def literal(value: str, datatype: Optional[str] = None,
            language: Optional[str] = None) -> Term:
    return Term(LITERAL, value, datatype, language)


def blank(label: str) -> Term:
    return Term(BLANK, label)


XSD = "http://www.w3.org/2001/XMLSchema#"


def typed_int(value: int) -> Term:
    return Term(LITERAL, str(int(value)), datatype=XSD + "integer")


def escape_literal(text: str) -> str:
    # Normative escape set for the N-Triples subset: \" \\ \n \t
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t"))


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if self.subject.kind == LITERAL:
            raise ValidationError("triple subject must not be a literal")
        if self.predicate.kind != IRI:
            raise ValidationError("triple predicate must be an IRI")

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def __repr__(self):
        return f"({self.subject!r} {self.predicate!r} {self.object!r})"


class PrefixTable:
    """prefix -> namespace IRI mapping, mirroring PREFIX headers."""

    def __init__(self, mapping: Optional[dict[str, str]] = None):
        self._ns: dict[str, str] = dict(mapping or {})

    def bind(self, prefix: str, namespace: str) -> None:
        self._ns[prefix] = namespace

    def namespace(self, prefix: str) -> str:
        try:
            return self._ns[prefix]
        except KeyError:
            raise UnknownPrefixError(prefix) from None

    def expand(self, qname: str) -> Term:
        """Expand 'prefix:local' to an IRI term."""
        prefix, sep, local = qname.partition(":")
        if not sep:
            raise ValidationError(f"not a prefixed name: {qname!r}")
        return iri(self.namespace(prefix) + local)

    def compact(self, term: Term) -> str:
        """Shorten an IRI with the longest matching namespace, for display."""
        if term.kind != IRI:
            return term.n3()
        best = None
        for prefix, ns in self._ns.items():
            if term.lexical.startswith(ns):
                if best is None or len(ns) > len(self._ns[best]):
                    best = prefix
        if best is None:
            return term.n3()
        return f"{best}:{term.lexical[len(self._ns[best]):]}"

    def items(self):
        return self._ns.items()

    def copy(self) -> "PrefixTable":
        return PrefixTable(self._ns)

    def __contains__(self, prefix: str) -> bool:
        return prefix in self._ns


def expand_prefixed(prefixes: PrefixTable, qname: str) -> Term:
    return prefixes.expand(qname)


class Graph:
    """Set of triples over a term dictionary, with SPO/POS/OSP indexes."""

    def __init__(self):
        self._term_ids: dict[Term, int] = {}
        self._terms: list[Term] = []
        self._triples: set[tuple[int, int, int]] = set()
        self._spo: dict[int, dict[int, set[int]]] = {}
        self._pos: dict[int, dict[int, set[int]]] = {}
        self._osp: dict[int, dict[int, set[int]]] = {}

    # dictionary

    def intern(self, term: Term) -> int:
        tid = self._term_ids.get(term)
        if tid is None:
            tid = len(self._terms)
            self._term_ids[term] = tid
            self._terms.append(term)
        return tid

    def term_id(self, term: Term) -> Optional[int]:
        return self._term_ids.get(term)

    def term(self, tid: int) -> Term:
        return self._terms[tid]

    def terms(self) -> Iterator[Term]:
        return iter(self._terms)

    # mutation

    def insert(self, t: Triple) -> bool:
        """Insert a triple; True iff it was not already present."""
        key = (self.intern(t.subject), self.intern(t.predicate),
               self.intern(t.object))
        if key in self._triples:
            return False
        self._triples.add(key)
        s, p, o = key
        self._spo.setdefault(s, {}).setdefault(p, set()).add(o)
        self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
        self._osp.setdefault(o, {}).setdefault(s, set()).add(p)
        return True

    def add(self, subject: Term, predicate: Term, object: Term) -> bool:
        return self.insert(Triple(subject, predicate, object))

    def remove(self, t: Triple) -> bool:
        """Remove a triple; False (and no change) if absent."""
        ids = (self.term_id(t.subject), self.term_id(t.predicate),
               self.term_id(t.object))
        if None in ids or ids not in self._triples:
            return False
        s, p, o = ids
        self._triples.discard((s, p, o))
        self._spo[s][p].discard(o)
        self._pos[p][o].discard(s)
        self._osp[o][s].discard(p)
        return True

    # access

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        ids = (self.term_id(t.subject), self.term_id(t.predicate),
               self.term_id(t.object))
        return None not in ids and ids in self._triples

    def __iter__(self) -> Iterator[Triple]:
        for s, p, o in sorted(self._triples):
            yield Triple(self._terms[s], self._terms[p], self._terms[o])

    def id_triples(self) -> set[tuple[int, int, int]]:
        return set(self._triples)

    def match(self, s: Optional[Term] = None, p: Optional[Term] = None,
              o: Optional[Term] = None) -> list[Triple]:
        """Triples matching all bound positions, in id-sorted order."""
        keys = self._match_ids(s, p, o)
        return [Triple(self._terms[a], self._terms[b], self._terms[c])
                for a, b, c in sorted(keys)]

    def _match_ids(self, s, p, o):
        sid = pid = oid = None
        if s is not None:
            sid = self.term_id(s)
            if sid is None:
                return []
        if p is not None:
            pid = self.term_id(p)
            if pid is None:
                return []
        if o is not None:
            oid = self.term_id(o)
            if oid is None:
                return []
        if sid is not None and pid is not None and oid is not None:
            return [(sid, pid, oid)] if (sid, pid, oid) in self._triples else []
        if sid is not None and pid is not None:
            return [(sid, pid, x) for x in self._spo.get(sid, {}).get(pid, ())]
        if sid is not None and oid is not None:
            return [(sid, x, oid) for x in self._osp.get(oid, {}).get(sid, ())]
        if pid is not None and oid is not None:
            return [(x, pid, oid) for x in self._pos.get(pid, {}).get(oid, ())]
        if sid is not None:
            return [(sid, a, b) for a, objs in self._spo.get(sid, {}).items()
                    for b in objs]
        if pid is not None:
            return [(b, pid, a) for a, subjs in self._pos.get(pid, {}).items()
                    for b in subjs]
        if oid is not None:
            return [(a, b, oid) for a, preds in self._osp.get(oid, {}).items()
                    for b in preds]
        return list(self._triples)

    def subjects(self) -> list[Term]:
        """Distinct subject terms, id-sorted."""
        return [self._terms[i] for i in sorted(self._spo)
                if self._spo[i] and any(self._spo[i].values())]

    def objects(self) -> list[Term]:
        return [self._terms[i] for i in sorted(self._osp)
                if self._osp[i] and any(self._osp[i].values())]

    def predicates(self) -> list[Term]:
        return [self._terms[i] for i in sorted(self._pos)
                if self._pos[i] and any(self._pos[i].values())]

    def nodes(self) -> list[Term]:
        """Distinct non-literal terms used in subject or object position."""
        ids = set()
        for s, _, o in self._triples:
            ids.add(s)
            if self._terms[o].kind != LITERAL:
                ids.add(o)
        return [self._terms[i] for i in sorted(ids)]

    def copy(self) -> "Graph":
        g = Graph()
        for t in self:
            g.insert(t)
        return g

    def check_indexes(self) -> bool:
        """All three indexes hold exactly the stored triple set."""
        spo = {(s, p, o) for s, ps in self._spo.items()
               for p, os_ in ps.items() for o in os_}
        pos = {(s, p, o) for p, os_ in self._pos.items()
               for o, ss in os_.items() for s in ss}
        osp = {(s, p, o) for o, ss in self._osp.items()
               for s, ps in ss.items() for p in ps}
        return spo == pos == osp == self._triples


def insert_triple(graph: Graph, t: Triple) -> bool:
    return graph.insert(t)


def match_pattern(graph: Graph, s: Optional[Term] = None,
                  p: Optional[Term] = None,
                  o: Optional[Term] = None) -> list[Triple]:
    return graph.match(s, p, o)
