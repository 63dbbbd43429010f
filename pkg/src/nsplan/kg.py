"""Commonsense knowledge-graph store.

Ingests weighted (head, relation, tail) triplets from ConceptNet-style TSV
or from JSONL, indexes them for neighbor queries, and samples hop-bounded
task-relevant subgraphs.

Relations are plain strings. The nine household relations below form the
ingestion whitelist; anything else is dropped when filtering is enabled.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field, replace

log = logging.getLogger(__name__)

HOUSEHOLD_RELATIONS = frozenset(
    {
        "Synonym",
        "AtLocation",
        "CapableOf",
        "Causes",
        "CausesDesire",
        "HasPrerequisite",
        "HasSubevent",
        "HasLastSubevent",
        "UsedFor",
    }
)

DEFAULT_FANOUT_CAP = 100


class IngestError(ValueError):
    """A malformed input line, with its 1-based line number."""

    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Triplet:
    head: str
    relation: str
    tail: str
    weight: float = 1.0

    def __post_init__(self):
        if not self.head or not self.tail:
            raise ValueError("triplet head and tail must be nonempty")
        if not self.weight > 0:
            raise ValueError(f"triplet weight must be positive, got {self.weight}")

    @property
    def key(self):
        return (self.head, self.relation, self.tail)


@dataclass(frozen=True)
class AdaptedTriplet:
    """A triplet inside a sampled subgraph: original weight plus the
    task-adapted weight and the hop distance at which it was reached."""

    head: str
    relation: str
    tail: str
    weight: float
    adapted_weight: float
    hop: int

    @property
    def key(self):
        return (self.head, self.relation, self.tail)

    @property
    def cosine(self):
        """Task-relevance cosine recovered from the adaption identity."""
        return self.adapted_weight - self.weight


@dataclass(frozen=True)
class Subgraph:
    triplets: tuple[AdaptedTriplet, ...]
    anchors: tuple[str, ...]

    def __len__(self):
        return len(self.triplets)


@dataclass
class IngestStats:
    kept: int = 0
    dropped_relation: int = 0
    dropped_language: int = 0
    dropped_malformed: int = 0
    duplicates: int = 0

    @property
    def dropped(self):
        return self.dropped_relation + self.dropped_language + self.dropped_malformed


def _triplet_sort_key(t):
    # weight descending, then lexicographic; used everywhere a
    # deterministic triplet order is promised
    return (-t.weight, t.head, t.relation, t.tail)


class KnowledgeGraph:
    """Immutable after construction; all queries are read-only."""

    def __init__(self, triplets=(), stats=None):
        self._by_key = {}
        self._incident = {}  # node -> list of triplets touching it, either direction
        self.stats = stats if stats is not None else IngestStats()
        for t in triplets:
            self._add(t)
        for lst in self._incident.values():
            lst.sort(key=_triplet_sort_key)

    def _add(self, t: Triplet):
        prior = self._by_key.get(t.key)
        if prior is not None:
            # duplicate (head, relation, tail): keep the maximum weight
            if t.weight > prior.weight:
                self._replace(prior, t)
            return
        self._by_key[t.key] = t
        self._incident.setdefault(t.head, []).append(t)
        if t.tail != t.head:
            self._incident.setdefault(t.tail, []).append(t)

    def _replace(self, old, new):
        self._by_key[new.key] = new
        for node in {old.head, old.tail}:
            lst = self._incident[node]
            lst[lst.index(old)] = new

    @property
    def triplets(self):
        return tuple(sorted(self._by_key.values(), key=_triplet_sort_key))

    @property
    def edge_count(self):
        return len(self._by_key)

    @property
    def node_count(self):
        return len(self._incident)

    def __contains__(self, node):
        return node in self._incident

    def __len__(self):
        return self.edge_count

    def neighbors(self, node, relations=None):
        """All triplets incident to ``node`` (either direction), optionally
        restricted to a relation subset, in (weight desc, lexicographic)
        order. Unknown nodes yield an empty list."""
        found = self._incident.get(node, [])
        if relations is not None:
            relations = set(relations)
            found = [t for t in found if t.relation in relations]
        return list(found)


def _parse_conceptnet_uri(uri, column, line_no):
    parts = uri.split("/")
    # /c/<lang>/<term>[/...optional sense parts]
    if len(parts) < 4 or parts[0] != "" or parts[1] != "c" or not parts[3]:
        raise IngestError(f"bad concept URI in column {column}: {uri!r}", line_no)
    return parts[2], parts[3]


def _parse_tsv_line(line, line_no, language):
    cols = line.split("\t")
    if len(cols) != 5:
        raise IngestError(f"expected 5 tab-separated columns, got {len(cols)}", line_no)
    _, rel_uri, start_uri, end_uri, meta_json = cols
    if not rel_uri.startswith("/r/") or len(rel_uri) <= 3:
        raise IngestError(f"bad relation URI: {rel_uri!r}", line_no)
    relation = rel_uri[3:].split("/")[0]
    start_lang, head = _parse_conceptnet_uri(start_uri, 3, line_no)
    end_lang, tail = _parse_conceptnet_uri(end_uri, 4, line_no)
    try:
        meta = json.loads(meta_json)
        weight = float(meta["weight"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise IngestError(f"metadata JSON lacks a numeric weight: {meta_json!r}", line_no)
    if start_lang != language or end_lang != language:
        return None  # language-filtered, not malformed
    return Triplet(head, relation, tail, weight)


def _parse_jsonl_line(line, line_no, language):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise IngestError(f"bad JSON: {e}", line_no)
    try:
        head, relation = obj["head"], obj["relation"]
        tail, weight = obj["tail"], float(obj["weight"])
    except (KeyError, TypeError, ValueError):
        raise IngestError(f"object missing head/relation/tail/weight: {line!r}", line_no)
    return Triplet(head, relation, tail, weight)


def ingest(source, fmt="conceptnet-tsv", language="en", filter_relations=True, strict=False):
    """Build a KnowledgeGraph from a byte/text stream or an iterable of lines.

    ``fmt`` is "conceptnet-tsv" (5 tab-separated columns, JSON metadata with a
    weight field) or "jsonl" (one object per line, fields head/relation/tail/
    weight). Malformed lines raise IngestError in strict mode and are counted
    and skipped otherwise. The returned graph carries an ``stats`` record of
    kept and dropped line counts.
    """
    if fmt not in ("conceptnet-tsv", "jsonl"):
        raise ValueError(f"unknown ingest format: {fmt!r}")
    parse = _parse_tsv_line if fmt == "conceptnet-tsv" else _parse_jsonl_line

    stats = IngestStats()
    triplets = []
    seen_keys = {}
    for line_no, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        try:
            t = parse(line, line_no, language)
        except IngestError as err:
            if strict:
                raise
            stats.dropped_malformed += 1
            log.debug("skipping malformed line: %s", err)
            continue
        if t is None:
            stats.dropped_language += 1
            continue
        if filter_relations and t.relation not in HOUSEHOLD_RELATIONS:
            stats.dropped_relation += 1
            continue
        if t.key in seen_keys:
            stats.duplicates += 1
        else:
            stats.kept += 1
        seen_keys[t.key] = True
        triplets.append(t)

    graph = KnowledgeGraph(triplets, stats=stats)
    if graph.edge_count == 0:
        log.warning("ingestion produced an empty graph (%d lines dropped)", stats.dropped)
    return graph


def load_graph(path, fmt="conceptnet-tsv", **kwargs):
    with open(path, "r", encoding="utf-8") as fh:
        return ingest(fh, fmt=fmt, **kwargs)


def sample_subgraph(graph, anchors, hops, per_node_fanout_cap=DEFAULT_FANOUT_CAP):
    """Breadth-first sample of the hop-bounded ball around the anchor nodes.

    Traversal is undirected. Only nodes strictly closer than ``hops`` are
    expanded; at each expanded node only its top ``per_node_fanout_cap``
    incident whitelisted triplets by weight (ties lexicographic) are
    followed. Each included triplet is annotated with the smaller of its two
    endpoints' final BFS distances.
    """
    if hops < 0:
        raise ValueError("hops must be >= 0")
    if per_node_fanout_cap < 1:
        raise ValueError("per_node_fanout_cap must be >= 1")

    anchors = tuple(sorted(set(anchors)))
    dist = {a: 0 for a in anchors if a in graph}
    included = {}
    queue = deque(sorted(dist))
    while queue:
        node = queue.popleft()
        d = dist[node]
        if d >= hops:
            continue
        incident = [t for t in graph.neighbors(node) if t.relation in HOUSEHOLD_RELATIONS]
        for t in incident[:per_node_fanout_cap]:
            included.setdefault(t.key, t)
            other = t.tail if t.head == node else t.head
            if other not in dist:
                dist[other] = d + 1
                queue.append(other)

    adapted = []
    for t in included.values():
        hop = min(dist.get(t.head, hops), dist.get(t.tail, hops))
        adapted.append(
            AdaptedTriplet(t.head, t.relation, t.tail, t.weight, adapted_weight=t.weight, hop=hop)
        )
    adapted.sort(key=lambda a: (-a.weight, a.head, a.relation, a.tail))
    return Subgraph(tuple(adapted), anchors=anchors)
