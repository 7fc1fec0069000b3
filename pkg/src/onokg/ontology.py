"""ONO seed knowledge graph: schema, cohorts, biomarkers, associations.

The seed holds the Cancer/Biomarker/Feature class structure, the 33 cancer
cohorts (plus medulloblastoma, which appears in the curated associations
but not in the cohort table), 83 POTSF-typed biomarkers, and reified
gene-disease association features carrying significance, evidence source,
and citation counts. Everything is built in a fixed order so term ids, and
therefore serialized output, are reproducible.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .kg import (Graph, KgError, PrefixTable, Term, Triple, iri, literal,
                 typed_int)

ONO = "http://www.example.com/ontologies/ono/ono.owl#"
ASSOC = "http://www.example.com/ontologies/ono/assoc#"
NORM = "http://www.example.com/ontologies/ono/norm/"
DOID = "http://purl.obolibrary.org/obo/doid#"
OBO = "http://purl.obolibrary.org/obo/"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = iri(RDF + "type")
RDFS_SUBCLASS = iri(RDFS + "subClassOf")
RDFS_LABEL = iri(RDFS + "label")
RDFS_DOMAIN = iri(RDFS + "domain")
RDFS_RANGE = iri(RDFS + "range")
OWL_SAMEAS = iri(OWL + "sameAs")

SIGNIFICANCE_LEVELS = ("HIGH", "MEDIUM", "LOW")
GENE_TYPES = ("Oncogene", "ProteinCoding", "POTSF")
EVIDENCE_SOURCES = ("PubMed", "MeSH", "CancerIndex")


class DataFileError(KgError):
    """A bundled or user-supplied data file is missing or malformed."""


class ReferentialError(KgError):
    """An asserted fact refers to a node that is not in the graph."""


def ono(local: str) -> Term:
    return iri(ONO + local)


@dataclass(frozen=True)
class OnoSchema:
    """IRIs of the ONO classes and properties."""

    # classes
    disease: Term = ono("Disease")
    disease_of_cellular_proliferation: Term = ono("DiseaseOfCellularProliferation")
    cancer: Term = ono("Cancer")
    biomarker: Term = ono("Biomarker")
    feature: Term = ono("Feature")
    biomarker_type: Term = ono("BiomarkerType")
    oncogene: Term = ono("Oncogene")
    protein_coding: Term = ono("ProteinCoding")
    potsf: Term = ono("POTSF")
    significance: Term = ono("Significance")
    high: Term = ono("HIGH")
    medium: Term = ono("MEDIUM")
    low: Term = ono("LOW")
    evidence: Term = ono("Evidence")
    pubmed: Term = ono("PubMed")
    mesh: Term = ono("MeSH")
    cancer_index: Term = ono("CancerIndex")
    # properties
    causes: Term = ono("causes")
    is_a: Term = ono("isA")
    has_type: Term = ono("hasType")
    has_significance: Term = ono("hasSignificance")
    has_evidence: Term = ono("hasEvidence")
    has_citations: Term = ono("hasCitations")
    cross_responsibility: Term = ono("crossResponsibility")
    has_go_association: Term = ono("hasGOAssociation")
    instance_of: Term = RDF_TYPE
    feature_gene: Term = ono("featureGene")
    feature_cancer: Term = ono("featureCancer")
    full_name: Term = ono("fullName")
    source_document: Term = ono("sourceDocument")

    def classes(self) -> list[Term]:
        return [self.disease, self.disease_of_cellular_proliferation,
                self.cancer, self.biomarker, self.feature,
                self.biomarker_type, self.oncogene, self.protein_coding,
                self.potsf, self.significance, self.high, self.medium,
                self.low, self.evidence, self.pubmed, self.mesh,
                self.cancer_index]

    def properties(self) -> list[Term]:
        return [self.causes, self.is_a, self.has_type,
                self.has_significance, self.has_evidence,
                self.has_citations, self.cross_responsibility,
                self.has_go_association, self.instance_of,
                self.feature_gene, self.feature_cancer, self.full_name]

    def significance_term(self, level: str) -> Term:
        if level not in SIGNIFICANCE_LEVELS:
            raise KgError(f"unknown significance level {level!r}")
        return {"HIGH": self.high, "MEDIUM": self.medium,
                "LOW": self.low}[level]

    def gene_type_term(self, gene_type: str) -> Term:
        name = gene_type.replace("-", "").replace("Proteincoding", "ProteinCoding")
        if name.lower() == "protein-coding" or name.lower() == "proteincoding":
            return self.protein_coding
        if name not in GENE_TYPES:
            raise KgError(f"unknown gene type {gene_type!r}")
        return {"Oncogene": self.oncogene, "ProteinCoding": self.protein_coding,
                "POTSF": self.potsf}[name]

    def evidence_term(self, source: str) -> Term:
        if source not in EVIDENCE_SOURCES:
            raise KgError(f"unknown evidence source {source!r}")
        return {"PubMed": self.pubmed, "MeSH": self.mesh,
                "CancerIndex": self.cancer_index}[source]


SCHEMA = OnoSchema()


def default_prefixes() -> PrefixTable:
    return PrefixTable({
        "ono": ONO,
        "assoc": ASSOC,
        "norm": NORM,
        "doid": DOID,
        "obo": OBO,
        "rdf": RDF,
        "rdfs": RDFS,
        "owl": OWL,
        "xsd": XSD,
    })


@dataclass(frozen=True)
class BiomarkerRecord:
    symbol: str
    gene_type: str
    evidence_types: frozenset[str] = frozenset()
    citations: int = 0

    def __post_init__(self):
        if self.gene_type not in GENE_TYPES:
            raise KgError(f"unknown gene type {self.gene_type!r}")
        if self.evidence_types and self.citations < 1:
            raise KgError("a biomarker with evidence needs at least 1 citation")


@dataclass(frozen=True)
class AssociationFeature:
    gene: Term
    cancer: Term
    significance: str
    evidence: Term
    citations: int

    def __post_init__(self):
        if self.significance not in SIGNIFICANCE_LEVELS:
            raise KgError(f"unknown significance level {self.significance!r}")
        if self.citations < 0:
            raise KgError("citations must be nonnegative")


# ---------------------------------------------------------------------------
# bundled data files

def data_path(name: str) -> Path:
    return Path(str(resources.files("onokg").joinpath("data", name)))


def _open_data(name: str, data_dir: Optional[Path]):
    path = Path(data_dir, name) if data_dir else data_path(name)
    if not path.exists():
        raise DataFileError(f"missing data file: {path}")
    return path


def load_cohorts(data_dir: Optional[Path] = None) -> list[tuple[str, str]]:
    """The 33 (code, carcinoma name) cohort pairs."""
    path = _open_data("cohorts.csv", data_dir)
    rows = _read_csv(path, ("code", "name"))
    pairs = [(r["code"], r["name"]) for r in rows]
    codes = [c for c, _ in pairs]
    if len(pairs) != 33 or len(set(codes)) != 33:
        raise DataFileError(f"{path}: expected 33 unique cohort codes, "
                            f"got {len(pairs)}")
    return pairs


def load_potsf_genes(data_dir: Optional[Path] = None) -> list[str]:
    path = _open_data("potsf_genes.txt", data_dir)
    symbols = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()
               if line.strip() and not line.startswith("#")]
    if len(symbols) != 83 or len(set(symbols)) != 83:
        raise DataFileError(f"{path}: expected 83 unique gene symbols, "
                            f"got {len(symbols)}")
    return symbols


def _read_csv(path: Path, columns: tuple[str, ...]) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(reader.fieldnames) != columns:
        raise DataFileError(f"{path}: expected header {','.join(columns)}")
    return list(reader)


def load_associations(name: str, data_dir: Optional[Path] = None
                      ) -> list[dict]:
    path = _open_data(name, data_dir)
    rows = _read_csv(path, ("gene", "cohort", "significance", "evidence",
                            "citations"))
    for row in rows:
        try:
            row["citations"] = int(row["citations"])
        except ValueError:
            raise DataFileError(f"{path}: bad citations value "
                                f"{row['citations']!r}") from None
    return rows


def load_gene_list(name: str, data_dir: Optional[Path] = None
                   ) -> list[tuple[str, str]]:
    path = _open_data(name, data_dir)
    rows = _read_csv(path, ("symbol", "geneType"))
    return [(r["symbol"], r["geneType"]) for r in rows]


# ---------------------------------------------------------------------------
# graph construction

def add_schema(graph: Graph, schema: OnoSchema = SCHEMA) -> None:
    """Class hierarchy, enum members, property declarations, labels."""
    s = schema
    hierarchy = [
        (s.disease_of_cellular_proliferation, s.disease),
        (s.cancer, s.disease_of_cellular_proliferation),
        (s.oncogene, s.biomarker_type),
        (s.protein_coding, s.biomarker_type),
        (s.potsf, s.biomarker_type),
        (s.high, s.significance),
        (s.medium, s.significance),
        (s.low, s.significance),
        (s.pubmed, s.evidence),
        (s.mesh, s.evidence),
        (s.cancer_index, s.evidence),
    ]
    for child, parent in hierarchy:
        graph.add(child, RDFS_SUBCLASS, parent)
    # Enum members double as individuals so they can appear as objects of
    # hasType/hasSignificance/hasEvidence and be retrieved by queries.
    for member, parent in hierarchy[2:]:
        graph.add(member, RDF_TYPE, parent)
    labels = {
        s.disease: "Disease",
        s.disease_of_cellular_proliferation: "DiseaseOfCellularProliferation",
        s.cancer: "Cancer",
        s.biomarker: "Biomarker",
        s.feature: "Feature",
        s.biomarker_type: "BiomarkerType",
        s.oncogene: "Oncogene",
        s.protein_coding: "ProteinCoding",
        s.potsf: "POTSF",
        s.significance: "Significance",
        s.high: "High",
        s.medium: "Medium",
        s.low: "Low",
        s.evidence: "Evidence",
        s.pubmed: "PubMed",
        s.mesh: "MeSH",
        s.cancer_index: "CancerIndex",
    }
    for term, text in labels.items():
        graph.add(term, RDFS_LABEL, literal(text))
    for prop in (s.causes, s.is_a, s.has_type, s.has_significance,
                 s.has_evidence, s.has_citations, s.cross_responsibility,
                 s.has_go_association, s.feature_gene, s.feature_cancer,
                 s.full_name):
        graph.add(prop, RDFS_LABEL, literal(prop.local_name()))
    declarations = [
        (s.causes, s.biomarker, s.disease),
        (s.cross_responsibility, s.biomarker, s.cancer),
        (s.is_a, s.biomarker, s.biomarker_type),
        (s.has_type, s.biomarker, s.biomarker_type),
        (s.has_significance, None, s.significance),
        (s.has_evidence, None, s.evidence),
        (s.has_citations, None, None),
        (s.has_go_association, s.biomarker, None),
        (s.feature_gene, s.feature, s.biomarker),
        (s.feature_cancer, s.feature, s.cancer),
        (s.full_name, s.cancer, None),
    ]
    for prop, domain, range_ in declarations:
        if domain is not None:
            graph.add(prop, RDFS_DOMAIN, domain)
        if range_ is not None:
            graph.add(prop, RDFS_RANGE, range_)


def add_cancer(graph: Graph, code: str, name: str,
               schema: OnoSchema = SCHEMA) -> Term:
    node = ono(code)
    graph.add(node, RDF_TYPE, schema.cancer)
    graph.add(node, RDFS_LABEL, literal(code))
    graph.add(node, schema.full_name, literal(name))
    return node


def add_biomarker(graph: Graph, symbol: str, gene_type: str,
                  schema: OnoSchema = SCHEMA) -> Term:
    node = ono(symbol)
    type_term = schema.gene_type_term(gene_type)
    graph.add(node, RDF_TYPE, schema.biomarker)
    graph.add(node, RDFS_LABEL, literal(symbol))
    graph.add(node, schema.is_a, type_term)
    graph.add(node, schema.has_type, type_term)
    return node


def assert_association(graph: Graph, f: AssociationFeature,
                       schema: OnoSchema = SCHEMA) -> Term:
    """Reify a gene-disease association as a Feature node.

    The node IRI is a deterministic function of the whole association
    tuple, so re-asserting an identical association is a no-op that
    returns the existing node.
    """
    if not graph.match(f.gene, RDF_TYPE, schema.biomarker):
        raise ReferentialError(f"unknown gene {f.gene.n3()}")
    if not graph.match(f.cancer, RDF_TYPE, schema.cancer):
        raise ReferentialError(f"unknown cancer {f.cancer.n3()}")
    slug = "_".join([f.gene.local_name(), f.cancer.local_name(),
                     f.significance, f.evidence.local_name(),
                     str(f.citations)])
    node = iri(ASSOC + slug)
    sig = schema.significance_term(f.significance)
    cites = typed_int(f.citations)
    graph.add(node, RDF_TYPE, schema.feature)
    graph.add(node, schema.feature_gene, f.gene)
    graph.add(node, schema.feature_cancer, f.cancer)
    graph.add(node, schema.has_significance, sig)
    graph.add(node, schema.has_evidence, f.evidence)
    graph.add(node, schema.has_citations, cites)
    graph.add(f.gene, schema.causes, f.cancer)
    graph.add(f.gene, schema.cross_responsibility, f.cancer)
    graph.add(f.gene, schema.has_significance, sig)
    graph.add(f.gene, schema.has_evidence, f.evidence)
    graph.add(f.gene, schema.has_citations, cites)
    return node


def _assert_association_rows(graph: Graph, rows: list[dict],
                             schema: OnoSchema) -> None:
    for row in rows:
        assert_association(graph, AssociationFeature(
            gene=ono(row["gene"]),
            cancer=ono(row["cohort"]),
            significance=row["significance"],
            evidence=schema.evidence_term(row["evidence"]),
            citations=row["citations"],
        ), schema)


def build_seed_ontology(data_dir: Optional[Path] = None,
                        schema: OnoSchema = SCHEMA) -> Graph:
    """Assemble the seed KG from the bundled data files."""
    graph = Graph()
    add_schema(graph, schema)
    for code, name in load_cohorts(data_dir):
        add_cancer(graph, code, name, schema)
    # Medulloblastoma is referenced by the curated associations but is not
    # one of the 33 cohort codes; it is carried as a 34th Cancer instance.
    add_cancer(graph, "MED", "Medulloblastoma", schema)
    for symbol in load_potsf_genes(data_dir):
        add_biomarker(graph, symbol, "POTSF", schema)
    for symbol, gene_type in load_gene_list("extension_genes.csv", data_dir):
        add_biomarker(graph, symbol, gene_type, schema)
    # TP53 is additionally asserted as an Oncogene instance; the deduction
    # examples rely on that membership premise.
    graph.add(ono("TP53"), RDF_TYPE, schema.oncogene)
    # Example GO annotation on AKT1, kept for the hasGOAssociation pattern.
    go_node = iri(ASSOC + "AKT1_GO_0000060")
    graph.add(ono("AKT1"), schema.has_go_association, go_node)
    graph.add(go_node, RDF_TYPE, iri(OBO + "GO_0000060"))
    _assert_association_rows(graph, load_associations("associations.csv",
                                                      data_dir), schema)
    _assert_association_rows(
        graph, load_associations("extension_associations.csv", data_dir),
        schema)
    return graph


def load_extension(graph: Graph, cancers_csv: Optional[Path] = None,
                   genes_csv: Optional[Path] = None,
                   associations_csv: Optional[Path] = None,
                   schema: OnoSchema = SCHEMA) -> None:
    """Extend a graph with additional cancers, genes, and associations."""
    if cancers_csv is not None:
        for row in _read_csv(Path(cancers_csv), ("code", "name")):
            add_cancer(graph, row["code"], row["name"], schema)
    if genes_csv is not None:
        for row in _read_csv(Path(genes_csv), ("symbol", "geneType")):
            add_biomarker(graph, row["symbol"], row["geneType"], schema)
    if associations_csv is not None:
        path = Path(associations_csv)
        rows = _read_csv(path, ("gene", "cohort", "significance", "evidence",
                                "citations"))
        for row in rows:
            row["citations"] = int(row["citations"])
        _assert_association_rows(graph, rows, schema)


def apply_query_fixtures(graph: Graph, data_dir: Optional[Path] = None,
                         schema: OnoSchema = SCHEMA) -> None:
    """Demo cancers/genes used by the bundled query packs (not seed data)."""
    load_extension(graph,
                   cancers_csv=_open_data("fixture_cancers.csv", data_dir),
                   genes_csv=_open_data("fixture_genes.csv", data_dir),
                   associations_csv=_open_data("fixture_associations.csv",
                                               data_dir),
                   schema=schema)


def seed_statistics(graph: Graph, schema: OnoSchema = SCHEMA) -> dict:
    cancers = {t.subject for t in graph.match(None, RDF_TYPE, schema.cancer)}
    biomarkers = {t.subject for t in graph.match(None, RDF_TYPE,
                                                 schema.biomarker)}
    potsf = {t.subject for t in graph.match(None, schema.has_type,
                                            schema.potsf)}
    features = {t.subject for t in graph.match(None, RDF_TYPE,
                                               schema.feature)}
    return {
        "triples": len(graph),
        "cancers": len(cancers),
        "biomarkers": len(biomarkers),
        "potsf_biomarkers": len(potsf),
        "features": len(features),
    }


# ---------------------------------------------------------------------------
# ontology pitfall checks

CLASS_NAME_PATTERN = re.compile(r"^[A-Z][A-Za-z0-9]*$")
PROPERTY_NAME_PATTERN = re.compile(r"^[a-z][A-Za-z0-9]*$")


@dataclass
class PitfallReport:
    cycles: list[list[Term]] = field(default_factory=list)
    naming_violations: list[tuple[Term, str]] = field(default_factory=list)
    intersection_conflicts: list[tuple[Term, str, list[Term]]] = \
        field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.cycles or self.naming_violations
                    or self.intersection_conflicts)

    def summary(self) -> str:
        lines = [f"hierarchy cycles: {len(self.cycles)}"]
        for cycle in self.cycles:
            lines.append("  cycle: " + " -> ".join(t.local_name()
                                                   for t in cycle))
        lines.append(f"naming violations: {len(self.naming_violations)}")
        for term, why in self.naming_violations:
            lines.append(f"  {term.local_name()}: {why}")
        lines.append("disjoint intersection domains/ranges: "
                     f"{len(self.intersection_conflicts)}")
        for prop, position, classes in self.intersection_conflicts:
            names = ", ".join(c.local_name() for c in classes)
            lines.append(f"  {prop.local_name()} ({position}): {names}")
        return "\n".join(lines)


def _subclass_edges(graph: Graph) -> dict[Term, set[Term]]:
    edges: dict[Term, set[Term]] = {}
    for t in graph.match(None, RDFS_SUBCLASS, None):
        edges.setdefault(t.subject, set()).add(t.object)
        edges.setdefault(t.object, set())
    return edges


def _hierarchy_cycles(graph: Graph) -> list[list[Term]]:
    """Cycles in the subclass relation, one entry per strongly connected
    component of size > 1 (or with a self-loop)."""
    edges = _subclass_edges(graph)
    index: dict[Term, int] = {}
    low: dict[Term, int] = {}
    on_stack: set[Term] = set()
    stack: list[Term] = []
    counter = [0]
    cycles: list[list[Term]] = []

    def strongconnect(root: Term):
        work = [(root, iter(sorted(edges.get(root, ()),
                                   key=lambda t: t.lexical)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(edges.get(succ, ()),
                                                   key=lambda t: t.lexical))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in edges.get(node, ()):
                    cycles.append(sorted(component, key=lambda t: t.lexical))

    for node in sorted(edges, key=lambda t: t.lexical):
        if node not in index:
            strongconnect(node)
    return cycles


def _classes_and_properties(graph: Graph) -> tuple[set[Term], set[Term]]:
    classes: set[Term] = set()
    properties: set[Term] = set()
    for t in graph.match(None, RDFS_SUBCLASS, None):
        classes.add(t.subject)
        classes.add(t.object)
    for t in graph.match(None, RDF_TYPE, None):
        classes.add(t.object)
    properties.update(graph.predicates())
    for prop in (RDFS_DOMAIN, RDFS_RANGE):
        for t in graph.match(None, prop, None):
            properties.add(t.subject)
    return classes, properties


def _type_instances(graph: Graph) -> dict[Term, set[Term]]:
    direct: dict[Term, set[Term]] = {}
    for t in graph.match(None, RDF_TYPE, None):
        direct.setdefault(t.object, set()).add(t.subject)
    return direct


def _instances_with_closure(graph: Graph, cls: Term,
                            direct: dict[Term, set[Term]]) -> set[Term]:
    # cycle-tolerant downward reachability over subClassOf
    children: dict[Term, set[Term]] = {}
    for t in graph.match(None, RDFS_SUBCLASS, None):
        children.setdefault(t.object, set()).add(t.subject)
    seen = {cls}
    queue = [cls]
    out: set[Term] = set()
    while queue:
        node = queue.pop()
        out |= direct.get(node, set())
        for child in children.get(node, ()):
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return out


def check_ontology_pitfalls(graph: Graph,
                            home_namespaces: tuple[str, ...] = (ONO,),
                            ) -> PitfallReport:
    """Local versions of the three scanner findings: hierarchy cycles,
    identifier naming, and domains/ranges declared as an intersection of
    classes with no common instances."""
    report = PitfallReport(cycles=_hierarchy_cycles(graph))

    classes, properties = _classes_and_properties(graph)
    builtin = (RDF, RDFS, OWL, XSD)

    def in_scope(term: Term) -> bool:
        return (term.kind == "iri"
                and any(term.lexical.startswith(ns) for ns in home_namespaces)
                and not any(term.lexical.startswith(ns) for ns in builtin))

    for cls in sorted(classes, key=lambda t: t.lexical):
        if in_scope(cls) and not CLASS_NAME_PATTERN.match(cls.local_name()):
            report.naming_violations.append(
                (cls, "class names use UpperCamelCase"))
    for prop in sorted(properties, key=lambda t: t.lexical):
        if prop in classes:
            continue
        if in_scope(prop) and not PROPERTY_NAME_PATTERN.match(
                prop.local_name()):
            report.naming_violations.append(
                (prop, "property names use lowerCamelCase"))

    direct = _type_instances(graph)
    for position, pred in (("domain", RDFS_DOMAIN), ("range", RDFS_RANGE)):
        declared: dict[Term, list[Term]] = {}
        for t in graph.match(None, pred, None):
            declared.setdefault(t.subject, []).append(t.object)
        for prop in sorted(declared, key=lambda t: t.lexical):
            targets = declared[prop]
            if len(targets) < 2:
                continue
            shared = _instances_with_closure(graph, targets[0], direct)
            for cls in targets[1:]:
                shared &= _instances_with_closure(graph, cls, direct)
            if not shared:
                report.intersection_conflicts.append(
                    (prop, position, sorted(targets, key=lambda t: t.lexical)))
    return report
