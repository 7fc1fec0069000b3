"""onokg: a cancer-biomarker knowledge graph engine and extraction toolkit.

Submodules: kg (triple store), ntriples (persistence), ontology (seed KG
and pitfall checks), dlx (class-expression queries), sparql (query
subset), ie (extraction pipeline), explain (relevance explanations),
quality (linked-data metrics), cli (command line).
"""

from .kg import Graph, PrefixTable, Term, Triple, blank, iri, literal

__version__ = "0.1.0"

__all__ = ["Graph", "PrefixTable", "Term", "Triple", "blank", "iri",
           "literal", "__version__"]
