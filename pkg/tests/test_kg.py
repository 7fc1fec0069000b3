import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onokg.kg import (Graph, PrefixTable, Term, Triple, UnknownPrefixError,
                      ValidationError, blank, expand_prefixed, iri, literal)
from onokg.ontology import ONO, ono


def t(s, p, o):
    return Triple(s, p, o)


class TestTerm:
    def test_iri_requires_scheme(self):
        with pytest.raises(ValidationError):
            iri("relative")

    def test_literal_datatype_language_exclusive(self):
        with pytest.raises(ValidationError):
            Term("literal", "x", datatype="a:b", language="en")

    def test_language_only_on_literals(self):
        with pytest.raises(ValidationError):
            Term("iri", "a:b", language="en")

    def test_equality_is_structural(self):
        assert literal("5") != literal("5", datatype="a:int")
        assert literal("x", language="en") != literal("x", language="de")
        assert iri("a:b") == iri("a:b")

    def test_local_name(self):
        assert ono("TP53").local_name() == "TP53"
        assert iri("http://x.org/a/b").local_name() == "b"
        assert iri("urn:x").local_name() == "x"


class TestTriple:
    def test_literal_subject_rejected(self):
        with pytest.raises(ValidationError, match="subject"):
            t(literal("v"), iri("a:p"), iri("a:o"))

    def test_non_iri_predicate_rejected(self):
        with pytest.raises(ValidationError, match="predicate"):
            t(iri("a:s"), blank("b"), iri("a:o"))

    def test_blank_subject_allowed(self):
        t(blank("b0"), iri("a:p"), literal("v"))


class TestGraph:
    def test_insert_reports_novelty(self):
        g = Graph()
        triple = t(ono("TP53"), ono("causes"), ono("BRCA"))
        assert g.insert(triple) is True
        assert g.insert(triple) is False
        assert len(g) == 1

    def test_remove_nonexistent_is_noop(self):
        g = Graph()
        triple = t(iri("a:s"), iri("a:p"), iri("a:o"))
        assert g.remove(triple) is False
        assert len(g) == 0
        g.insert(triple)
        assert g.remove(triple) is True
        assert triple not in g

    def test_match_bound_positions(self):
        g = Graph()
        g.insert(t(ono("TP53"), ono("causes"), ono("BRCA")))
        g.insert(t(ono("TP53"), ono("hasType"), ono("POTSF")))
        g.insert(t(ono("RB1"), ono("causes"), ono("BLCA")))
        subject_hits = g.match(ono("TP53"), None, None)
        assert {(x.predicate, x.object) for x in subject_hits} == {
            (ono("causes"), ono("BRCA")), (ono("hasType"), ono("POTSF"))}
        assert len(g.match(None, ono("causes"), None)) == 2
        assert g.match(None, None, ono("BLCA"))[0].subject == ono("RB1")
        assert g.match(iri("a:absent"), None, None) == []

    def test_match_empty_graph(self):
        assert Graph().match() == []

    def test_match_is_id_sorted_and_deterministic(self):
        g = Graph()
        triples = [t(iri(f"a:s{i}"), iri("a:p"), iri(f"a:o{i}"))
                   for i in range(10)]
        for trip in reversed(triples):
            g.insert(trip)
        assert g.match(None, iri("a:p"), None) == \
            g.match(None, iri("a:p"), None)

    def test_dictionary_bijection(self):
        g = Graph()
        terms = [ono("TP53"), literal("x"), blank("b"),
                 literal("5", datatype="a:int")]
        for term in terms:
            tid = g.intern(term)
            assert g.term(tid) == term
            assert g.term_id(term) == tid

    def test_index_coherence_on_seed(self, seed_graph):
        assert seed_graph.check_indexes()


# pools kept tiny so patterns actually overlap
_SUBJECTS = [iri("a:s1"), iri("a:s2"), blank("n1")]
_PREDICATES = [iri("a:p1"), iri("a:p2")]
_OBJECTS = [iri("a:o1"), literal("v"), literal("5", datatype="a:int"),
            blank("n1")]

triples_strategy = st.lists(
    st.builds(Triple,
              st.sampled_from(_SUBJECTS),
              st.sampled_from(_PREDICATES),
              st.sampled_from(_OBJECTS)),
    max_size=30)


@settings(max_examples=100, deadline=None)
@given(triples_strategy)
def test_match_equals_linear_scan(triples):
    g = Graph()
    for triple in triples:
        g.insert(triple)
    assert g.check_indexes()
    patterns = itertools.product([None] + _SUBJECTS, [None] + _PREDICATES,
                                 [None] + _OBJECTS)
    all_triples = list(g)
    for s, p, o in patterns:
        expected = [x for x in all_triples
                    if (s is None or x.subject == s)
                    and (p is None or x.predicate == p)
                    and (o is None or x.object == o)]
        assert sorted(g.match(s, p, o), key=repr) == \
            sorted(expected, key=repr)


@settings(max_examples=60, deadline=None)
@given(triples_strategy)
def test_insert_remove_idempotence(triples):
    g = Graph()
    for triple in triples:
        g.insert(triple)
    count = len(g)
    for triple in triples:
        assert g.insert(triple) is False
    assert len(g) == count
    for triple in set(triples):
        assert g.remove(triple) is True
        assert g.remove(triple) is False
    assert len(g) == 0


class TestPrefixTable:
    def test_expand(self):
        table = PrefixTable({"ono": ONO})
        assert expand_prefixed(table, "ono:TP53") == ono("TP53")

    def test_unknown_prefix_names_it(self):
        table = PrefixTable()
        with pytest.raises(UnknownPrefixError, match="xyz"):
            table.expand("xyz:Foo")

    def test_empty_local_part(self):
        table = PrefixTable({"ono": ONO})
        assert table.expand("ono:") == iri(ONO)

    def test_compact_prefers_longest_namespace(self):
        table = PrefixTable({"a": "http://x.org/", "b": "http://x.org/y/"})
        assert table.compact(iri("http://x.org/y/z")) == "b:z"


def test_concurrent_readers_see_consistent_results(seed_graph):
    # reader-or-writer contract: many readers may share one graph value
    import threading
    from onokg.ontology import SCHEMA

    outputs = [None] * 8

    def read(slot):
        outputs[slot] = [t.subject for t in
                         seed_graph.match(None, SCHEMA.has_type,
                                          SCHEMA.potsf)]

    threads = [threading.Thread(target=read, args=(i,)) for i in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert all(out == outputs[0] for out in outputs)
    assert len(outputs[0]) == 83
