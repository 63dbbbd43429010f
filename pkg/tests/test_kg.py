import io
import json

import pytest

from nsplan import kg
from nsplan.kg import IngestError, KnowledgeGraph, Triplet

from conftest import fixture_path


def tsv_line(head, relation, tail, weight, lang="en"):
    return (
        f"/a/[/r/{relation}/,/c/{lang}/{head}/,/c/{lang}/{tail}/]\t/r/{relation}"
        f"\t/c/{lang}/{head}\t/c/{lang}/{tail}\t" + json.dumps({"weight": weight})
    )


class TestTriplet:
    def test_rejects_empty_head(self):
        with pytest.raises(ValueError):
            Triplet("", "UsedFor", "soap")

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            Triplet("soap", "UsedFor", "washing", weight=0.0)

    def test_key(self):
        t = Triplet("soap", "UsedFor", "washing", 2.0)
        assert t.key == ("soap", "UsedFor", "washing")


class TestIngest:
    def test_whitelist_keeps_the_nine_relations(self):
        lines = [
            tsv_line("a", rel, "b", 1.0)
            for rel in sorted(kg.HOUSEHOLD_RELATIONS)
        ]
        graph = kg.ingest(lines)
        assert graph.edge_count == 9
        assert graph.stats.dropped_relation == 0

    @pytest.mark.parametrize(
        "relation",
        [
            "DistinctFrom",
            "DerivedFrom",
            "SymbolOf",
            "EtymologicallyRelatedTo",
            "EtymologicallyDerivedFrom",
        ],
    )
    def test_blacklisted_relations_are_dropped(self, relation):
        graph = kg.ingest([tsv_line("a", relation, "b", 1.0)])
        assert graph.edge_count == 0
        assert graph.stats.dropped_relation == 1

    def test_relation_filter_can_be_disabled(self):
        graph = kg.ingest([tsv_line("a", "DistinctFrom", "b", 1.0)], filter_relations=False)
        assert graph.edge_count == 1

    def test_language_filter(self):
        lines = [
            tsv_line("soap", "UsedFor", "washing", 1.0),
            tsv_line("seife", "UsedFor", "waschen", 1.0, lang="de"),
        ]
        graph = kg.ingest(lines)
        assert graph.edge_count == 1
        assert graph.stats.dropped_language == 1

    def test_malformed_line_lenient_vs_strict(self):
        lines = [tsv_line("a", "UsedFor", "b", 1.0), "only\ttwo"]
        graph = kg.ingest(lines)
        assert graph.edge_count == 1
        assert graph.stats.dropped_malformed == 1
        with pytest.raises(IngestError) as err:
            kg.ingest(lines, strict=True)
        assert err.value.line_no == 2

    def test_metadata_without_weight_is_malformed(self):
        line = "/a/x\t/r/UsedFor\t/c/en/a\t/c/en/b\t{}"
        with pytest.raises(IngestError):
            kg.ingest([line], strict=True)

    def test_duplicate_keeps_max_weight(self):
        lines = [
            tsv_line("a", "UsedFor", "b", 1.0),
            tsv_line("a", "UsedFor", "b", 3.0),
            tsv_line("a", "UsedFor", "b", 2.0),
        ]
        graph = kg.ingest(lines)
        assert graph.edge_count == 1
        assert graph.stats.duplicates == 2
        assert graph.triplets[0].weight == 3.0

    def test_jsonl_format(self):
        lines = [json.dumps({"head": "a", "relation": "Causes", "tail": "b", "weight": 2.0})]
        graph = kg.ingest(lines, fmt="jsonl")
        assert graph.edge_count == 1

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError):
            kg.ingest([], fmt="csv")

    def test_empty_input_warns_not_raises(self):
        graph = kg.ingest([])
        assert graph.edge_count == 0

    def test_byte_stream(self):
        stream = io.BytesIO(tsv_line("a", "UsedFor", "b", 1.0).encode("utf-8"))
        assert kg.ingest(stream).edge_count == 1


class TestShowerFixture:
    def test_counts(self, shower_graph):
        # 30 lines: one MotivatedByGoal filtered, one duplicate collapsed
        assert shower_graph.stats.kept == 28
        assert shower_graph.stats.duplicates == 1
        assert shower_graph.stats.dropped_relation == 1
        assert shower_graph.edge_count == 28

    def test_weights_survive_verbatim(self, shower_graph):
        t = next(
            t for t in shower_graph.triplets
            if t.key == ("take_a_shower", "HasPrerequisite", "take_out_your_clothes")
        )
        assert t.weight == 4.47


class TestNeighbors:
    def build(self):
        return KnowledgeGraph(
            [
                Triplet("a", "Causes", "b", 3.0),
                Triplet("b", "Causes", "c", 2.0),
                Triplet("x", "UsedFor", "a", 5.0),
                Triplet("a", "AtLocation", "d", 3.0),
            ]
        )

    def test_both_directions(self):
        graph = self.build()
        keys = [t.key for t in graph.neighbors("a")]
        assert ("x", "UsedFor", "a") in keys and ("a", "Causes", "b") in keys

    def test_ordering_weight_then_lex(self):
        graph = self.build()
        assert [t.weight for t in graph.neighbors("a")] == [5.0, 3.0, 3.0]
        tied = [t for t in graph.neighbors("a") if t.weight == 3.0]
        assert [t.relation for t in tied] == ["AtLocation", "Causes"]

    def test_relation_restriction(self):
        graph = self.build()
        assert all(t.relation == "Causes" for t in graph.neighbors("a", relations={"Causes"}))

    def test_unknown_node_empty(self):
        assert self.build().neighbors("zzz") == []


class TestSampleSubgraph:
    def chain(self, length=5):
        return KnowledgeGraph(
            [Triplet(f"n{i}", "Causes", f"n{i+1}", 1.0) for i in range(length)]
        )

    def test_hop_bound(self):
        graph = self.chain()
        sub = kg.sample_subgraph(graph, ["n0"], hops=2)
        heads = {t.head for t in sub.triplets}
        assert heads == {"n0", "n1"}  # n2 sits at the boundary, not expanded

    def test_hop_annotation_is_min_endpoint_distance(self):
        sub = kg.sample_subgraph(self.chain(), ["n0"], hops=3)
        by_head = {t.head: t.hop for t in sub.triplets}
        assert by_head == {"n0": 0, "n1": 1, "n2": 2}

    def test_zero_hops_empty(self):
        assert len(kg.sample_subgraph(self.chain(), ["n0"], hops=0)) == 0

    def test_unknown_anchor_ignored(self):
        sub = kg.sample_subgraph(self.chain(), ["n0", "ghost"], hops=1)
        assert len(sub) == 1
        assert sub.anchors == ("ghost", "n0")

    def test_fanout_cap_prefers_heavier_edges(self):
        graph = KnowledgeGraph(
            [Triplet("hub", "Causes", f"t{i}", float(i + 1)) for i in range(6)]
        )
        sub = kg.sample_subgraph(graph, ["hub"], hops=1, per_node_fanout_cap=3)
        assert sorted(t.weight for t in sub.triplets) == [4.0, 5.0, 6.0]

    def test_non_whitelisted_edges_never_traversed(self):
        graph = KnowledgeGraph(
            [Triplet("a", "RelatedTo", "b", 9.0), Triplet("a", "Causes", "c", 1.0)]
        )
        sub = kg.sample_subgraph(graph, ["a"], hops=2)
        assert [t.key for t in sub.triplets] == [("a", "Causes", "c")]

    def test_adapted_weight_starts_at_weight(self, shower_graph):
        sub = kg.sample_subgraph(shower_graph, ["take_a_shower"], hops=3)
        assert all(t.adapted_weight == t.weight for t in sub.triplets)

    def test_deterministic(self, shower_graph):
        a = kg.sample_subgraph(shower_graph, ["take_a_shower"], hops=3)
        b = kg.sample_subgraph(shower_graph, ["take_a_shower"], hops=3)
        assert a == b

    def test_output_sorted_by_weight_then_lex(self, shower_graph):
        sub = kg.sample_subgraph(shower_graph, ["take_a_shower"], hops=3)
        keys = [(-t.weight, t.head, t.relation, t.tail) for t in sub.triplets]
        assert keys == sorted(keys)


def test_load_graph_roundtrip(tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text(
        json.dumps({"head": "a", "relation": "Causes", "tail": "b", "weight": 1.5}) + "\n"
    )
    graph = kg.load_graph(str(path), fmt="jsonl")
    assert graph.triplets[0].key == ("a", "Causes", "b")


def test_shower_fixture_loads_fast(shower_graph):
    assert "take_a_shower" in shower_graph
