import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onokg.kg import Graph, Triple, blank, iri, literal
from onokg.ntriples import (NTriplesParseError, parse_ntriples,
                            parse_ntriples_strict, serialize_ntriples)


class TestParse:
    def test_minimal_line(self):
        result = parse_ntriples('<a:s> <a:p> "v" .')
        assert result.ok
        (triple,) = list(result.graph)
        assert triple.object == literal("v")

    def test_datatype_and_language(self):
        g = parse_ntriples_strict(
            '<a:s> <a:p> "5"^^<a:int> .\n<a:s> <a:p> "x"@en .')
        objects = {t.object for t in g}
        assert literal("5", datatype="a:int") in objects
        assert literal("x", language="en") in objects

    def test_escapes(self):
        g = parse_ntriples_strict('<a:s> <a:p> "a\\"b\\\\c\\nd\\te" .')
        (triple,) = list(g)
        assert triple.object.lexical == 'a"b\\c\nd\te'

    def test_comments_and_blank_lines(self):
        g = parse_ntriples_strict('# header\n\n<a:s> <a:p> <a:o> .\n')
        assert len(g) == 1

    def test_blank_nodes_renamed_fresh(self):
        g = parse_ntriples_strict('_:x <a:p> _:y .\n_:y <a:p> _:x .')
        labels = {t.subject.lexical for t in g}
        assert labels == {"b0", "b1"}
        assert len(g) == 2

    def test_missing_terminator_reports_line(self):
        result = parse_ntriples('<a:s> <a:p> <a:o> .\n<a:s> <a:p> <a:o>')
        assert len(result.issues) == 1
        assert result.issues[0].line == 2
        assert "terminator" in result.issues[0].message

    def test_arity_violation_recovers(self):
        text = '<a:s> <a:p> .\n<a:s> <a:p> "kept" .'
        result = parse_ntriples(text)
        assert len(result.issues) == 1
        assert result.issues[0].line == 1
        assert len(result.graph) == 1

    def test_unterminated_literal(self):
        result = parse_ntriples('<a:s> <a:p> "never ends .')
        assert "unterminated literal" in result.issues[0].message

    def test_relative_iri(self):
        result = parse_ntriples('<relative> <a:p> <a:o> .')
        assert "relative IRI" in result.issues[0].message

    def test_literal_subject(self):
        result = parse_ntriples('"v" <a:p> <a:o> .')
        assert result.issues and len(result.graph) == 0

    def test_non_iri_predicate(self):
        result = parse_ntriples('<a:s> "p" <a:o> .')
        assert result.issues

    def test_all_errors_reported(self):
        text = "\n".join(['<a:s> <a:p> .',
                          '<a:s> <a:p> <a:o> .',
                          '<bad> <a:p> <a:o> .',
                          '<a:s> <a:p> "v" .'])
        result = parse_ntriples(text)
        assert [i.line for i in result.issues] == [1, 3]
        assert len(result.graph) == 2

    def test_strict_raises(self):
        with pytest.raises(NTriplesParseError):
            parse_ntriples_strict('<a:s> <a:p> .')


class TestSerialize:
    def test_empty_graph(self):
        assert serialize_ntriples(Graph()) == ""

    def test_single_triple_single_line(self):
        g = Graph()
        g.insert(Triple(iri("a:s"), iri("a:p"), literal("v")))
        text = serialize_ntriples(g)
        assert text == '<a:s> <a:p> "v" .\n'

    def test_seed_round_trip(self, seed_graph):
        text = serialize_ntriples(seed_graph)
        reparsed = parse_ntriples_strict(text)
        assert len(reparsed) == len(seed_graph)
        assert set(reparsed) == set(seed_graph)

    def test_serialization_deterministic(self, seed_graph):
        assert serialize_ntriples(seed_graph) == \
            serialize_ntriples(seed_graph)


_terms = st.one_of(
    st.sampled_from([iri("a:s"), iri("a:o"), iri("b:x")]),
    st.builds(literal,
              st.text(alphabet='ab"\\\n\t Z', max_size=6),
              st.sampled_from([None, "a:int"])),
)
_subjects = st.sampled_from([iri("a:s"), iri("b:x")])
_predicates = st.sampled_from([iri("a:p"), iri("a:q")])


@settings(max_examples=120, deadline=None)
@given(st.lists(st.builds(Triple, _subjects, _predicates, _terms),
                max_size=25))
def test_round_trip_identity(triples):
    g = Graph()
    for triple in triples:
        g.insert(triple)
    reparsed = parse_ntriples_strict(serialize_ntriples(g))
    assert set(reparsed) == set(g)
    assert len(reparsed) == len(g)
