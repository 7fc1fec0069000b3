import pytest

from onokg.kg import Graph, Triple, iri, literal, typed_int
from onokg.ontology import OWL_SAMEAS, RDF_TYPE, RDFS_LABEL, SCHEMA, XSD
from onokg.quality import (MetricResult, QualityConfig, assess, resolve_uri)

EX = "http://example.org/q#"
EXT = "http://elsewhere.org/r#"


def ex(name):
    return iri(EX + name)


def planted_defect_graph() -> Graph:
    """Ten subjects: one duplicate pair, one negative citation count, one
    bad typed literal, three unlabeled, two outward links."""
    g = Graph()
    thing = ex("Thing")

    def subject(name, *, label=True):
        node = ex(name)
        g.insert(Triple(node, RDF_TYPE, thing))
        if label:
            g.insert(Triple(node, RDFS_LABEL, literal(name)))
        return node

    s1 = subject("s1")
    g.insert(Triple(s1, ex("hasCitations"), typed_int(10)))
    s2 = subject("s2")
    g.insert(Triple(s2, ex("hasCitations"),
                    literal("-5", datatype=XSD + "integer")))
    s3 = subject("s3")
    g.insert(Triple(s3, ex("link"), iri(EXT + "r1")))
    s4 = subject("s4")
    g.insert(Triple(s4, OWL_SAMEAS, iri(EXT + "r2")))
    s5 = subject("s5")
    g.insert(Triple(s5, ex("value"), literal("abc",
                                             datatype=XSD + "integer")))
    s6 = subject("s6")
    g.insert(Triple(s6, ex("value"), typed_int(7)))
    subject("s7")
    s8 = subject("s8", label=False)
    g.insert(Triple(s8, ex("note"), literal("same")))
    s9 = subject("s9", label=False)
    g.insert(Triple(s9, ex("note"), literal("same")))
    subject("s10", label=False)
    return g


def fixture_config() -> QualityConfig:
    return QualityConfig(
        gold_classes=(ex("Thing"), ex("Missing")),
        gold_properties=(ex("hasCitations"), ex("link")),
        home_namespaces=(EX,),
        completeness_class=ex("Thing"),
        completeness_predicate=RDFS_LABEL,
        range_predicate=ex("hasCitations"),
        range_lower=0, range_upper=1000,
        allowlist=(EX,),
    )


@pytest.fixture(scope="module")
def report():
    return assess(planted_defect_graph(), fixture_config())


class TestPlantedDefectFixture:
    @pytest.mark.parametrize("metric,numerator,denominator", [
        ("schema_completeness", 3, 4),
        ("interlinking_completeness", 2, 10),
        ("property_completeness", 7, 10),
        ("extensional_conciseness", 9, 10),
        ("datatype_compatibility", 3, 4),
        ("dereferenceable_uris", 15, 20),
        ("dereferenceable_back_links", 1, 15),
        ("dereferenceable_forward_links", 10, 10),
        ("labeled_resources", 7, 10),
    ])
    def test_exact_ratios(self, report, metric, numerator, denominator):
        result = report[metric]
        assert (result.numerator, result.denominator) == \
            (numerator, denominator)
        assert result.value == numerator / denominator

    def test_numeric_range_violations(self, report):
        result = report["numeric_range_violations"]
        assert result.numerator == 1
        assert result.denominator == 2

    def test_external_sameas(self, report):
        assert report["external_sameas_links"].numerator == 1

    def test_coverage(self, report):
        assert report["coverage_detail"].numerator == 7
        assert report["coverage_scope"].numerator == 10

    def test_all_thirteen_present(self, report):
        assert len(report.metrics) == 13

    def test_ratios_bounded(self, report):
        for metric in report.metrics.values():
            if metric.kind == "ratio" and metric.status == "ok":
                assert 0.0 <= metric.value <= 1.0
                assert metric.numerator <= metric.denominator

    def test_determinism(self, report):
        again = assess(planted_defect_graph(), fixture_config())
        assert again.to_json() == report.to_json()


class TestSeedQuality:
    def test_schema_completeness_is_one(self, seed_graph):
        report = assess(seed_graph, QualityConfig.for_ono_seed())
        result = report["schema_completeness"]
        assert result.value == 1.0
        assert result.denominator == len(SCHEMA.classes()) + \
            len(SCHEMA.properties())

    def test_empty_graph_zero_completeness(self):
        report = assess(Graph(), QualityConfig.for_ono_seed())
        assert report["schema_completeness"].value == 0.0
        assert report["coverage_detail"].numerator == 0


class TestMonotonicity:
    def test_adding_label_never_decreases(self):
        g = planted_defect_graph()
        before = assess(g, fixture_config())["labeled_resources"].value
        g.insert(Triple(ex("s10"), RDFS_LABEL, literal("s10")))
        after = assess(g, fixture_config())["labeled_resources"].value
        assert after >= before

    def test_adding_duplicate_never_increases_conciseness(self):
        g = planted_defect_graph()
        before = assess(g, fixture_config())["extensional_conciseness"].value
        s11 = ex("s11")
        g.insert(Triple(s11, RDF_TYPE, ex("Thing")))
        g.insert(Triple(s11, ex("note"), literal("same")))
        after = assess(g, fixture_config())["extensional_conciseness"].value
        assert after <= before


class TestConfigHandling:
    def test_unconfigured_metrics_skipped(self):
        report = assess(planted_defect_graph(),
                        QualityConfig(home_namespaces=(EX,)))
        assert report["schema_completeness"].status == "skipped"
        assert report["property_completeness"].status == "skipped"
        assert report["numeric_range_violations"].status == "skipped"
        # the rest still computes
        assert report["coverage_scope"].numerator == 10

    def test_vacuous_ratio_flagged(self):
        report = assess(Graph(), QualityConfig(home_namespaces=(EX,)))
        assert report["labeled_resources"].status == "vacuous"
        assert report["labeled_resources"].value == 1.0

    def test_bad_range_rejected(self):
        with pytest.raises(ValueError, match="lower"):
            QualityConfig(range_predicate=ex("p"), range_lower=5,
                          range_upper=1)

    def test_config_json_round_trip(self, tmp_path):
        path = tmp_path / "q.json"
        path.write_text('{"gold_classes": ["%sThing"], '
                        '"home_namespaces": ["%s"], '
                        '"range_predicate": "%shasCitations", '
                        '"range_lower": 0, "range_upper": 10}'
                        % (EX, EX, EX), encoding="utf-8")
        cfg = QualityConfig.from_json(path)
        assert cfg.gold_classes == (ex("Thing"),)
        assert cfg.range_upper == 10


class TestResolveUri:
    def test_allowlist_mode(self):
        assert resolve_uri("offline-allowlist", EX + "TP53",
                           allowlist=(EX,))
        assert not resolve_uri("offline-allowlist", EXT + "x",
                               allowlist=(EX,))

    def test_empty_allowlist_rejects_all(self, seed_graph):
        cfg = QualityConfig.for_ono_seed()
        cfg = QualityConfig(gold_classes=cfg.gold_classes,
                            gold_properties=cfg.gold_properties,
                            allowlist=())
        report = assess(seed_graph, cfg)
        assert report["dereferenceable_uris"].numerator == 0

    def test_syntactic_mode(self):
        assert resolve_uri("syntactic", "urn:x")
        assert not resolve_uri("syntactic", "no-scheme")

    def test_live_mode_failure_counts_unresolved(self):
        def failing(_uri):
            raise OSError("network down")
        assert resolve_uri("live", "http://x.org/", fetch=failing) is False

    def test_live_mode_uses_fetcher(self):
        assert resolve_uri("live", "http://x.org/", fetch=lambda u: True)


def test_metric_result_vacuous_constructor():
    result = MetricResult.ratio("m", 0, 0)
    assert result.status == "vacuous"
    assert result.value == 1.0
