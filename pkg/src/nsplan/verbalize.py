"""Verbalization of adapted triplets into the knowledge prompt.

Each relation owns one template rule with a phase. Lines come out grouped
by phase (Prerequisite, Body, Subevent, LastSubevent) and ordered by
adapted weight within a phase. Rules marked recursive additionally expand
the tail node's own prerequisite/subevent triplets depth-first.

Traversal contract, frozen here because it fixes every downstream golden:
every phase-ordered triplet is a DFS root at depth 0; a triplet's line is
emitted only while its depth is below max_depth; the walk always descends
through recursive tails (bounded by a visited set), so a depth-blocked
triplet is consumed and never re-emitted later as a root. Duplicate line
texts are suppressed globally. With max_depth equal to the sampling radius
this verbalizes exactly the sampled ball on chain graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

PHASES = ("Prerequisite", "Body", "Subevent", "LastSubevent")


class UnmappedRelationError(KeyError):
    def __init__(self, relation):
        super().__init__(f"no symbolic rule for relation {relation!r}")
        self.relation = relation


@dataclass(frozen=True)
class SymbolicRule:
    relation: str
    template: str
    recursive: bool
    phase: str

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")


def _rules(*specs):
    return {r[0]: SymbolicRule(*r) for r in specs}


# The UsedFor template reads reversed against the usual head-UsedFor-tail
# direction; it is kept as-is deliberately. See the project notes.
DEFAULT_RULES = _rules(
    ("Synonym", "{head}, also known as {tail}", False, "Body"),
    ("AtLocation", "go to the location of {head}", False, "Body"),
    ("CapableOf", "{head} can {tail}", False, "Body"),
    ("Causes", "{head} causes {tail}", False, "Body"),
    ("CausesDesire", "{head} makes you want to {tail}", False, "Body"),
    ("UsedFor", "go to find {tail} and use it for {head}", False, "Body"),
    ("HasPrerequisite", "{tail}", True, "Prerequisite"),
    ("HasSubevent", "{tail}", True, "Subevent"),
    ("HasLastSubevent", "{tail}", False, "LastSubevent"),
)

RECURSIVE_RELATIONS = tuple(r.relation for r in DEFAULT_RULES.values() if r.recursive)


def load_rules(path):
    """Read a rule-set override: a JSON list of objects with keys
    relation, template, recursive, phase."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    rules = {}
    for obj in raw:
        rule = SymbolicRule(obj["relation"], obj["template"], bool(obj["recursive"]), obj["phase"])
        rules[rule.relation] = rule
    return rules


@dataclass(frozen=True)
class ProceduralPrompt:
    """Ordered, duplicate-free knowledge lines. Stored bare; rendering adds
    the "Step: <text>." wrapper."""

    lines: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.lines)) != len(self.lines):
            raise ValueError("prompt lines must be unique")

    def rendered(self):
        return [f"Step: {line}." for line in self.lines]

    def __iter__(self):
        return iter(self.lines)

    def __len__(self):
        return len(self.lines)


def _surface(key):
    return key.replace("_", " ")


def verbalize_triplet(triplet, rules=None):
    rules = DEFAULT_RULES if rules is None else rules
    rule = rules.get(triplet.relation)
    if rule is None:
        raise UnmappedRelationError(triplet.relation)
    return rule.template.format(head=_surface(triplet.head), tail=_surface(triplet.tail))


def _order_key(t):
    return (-t.adapted_weight, t.head, t.relation, t.tail)


def build_knowledge_prompt(subgraph, rules=None, max_depth=3):
    """Linearize an adapted subgraph into knowledge lines (see the module
    docstring for the traversal contract)."""
    rules = DEFAULT_RULES if rules is None else rules
    ordered = sorted(subgraph.triplets, key=_order_key)
    for t in ordered:
        if t.relation not in rules:
            raise UnmappedRelationError(t.relation)

    children = {}
    for t in ordered:
        if rules[t.relation].recursive:
            children.setdefault(t.head, []).append(t)

    lines = []
    seen_lines = set()
    visited = set()

    def visit(t, depth):
        if t.key in visited:
            return
        visited.add(t.key)
        if depth < max_depth:
            line = verbalize_triplet(t, rules)
            if line not in seen_lines:
                seen_lines.add(line)
                lines.append(line)
        if rules[t.relation].recursive:
            for child in children.get(t.tail, ()):
                visit(child, depth + 1)

    for phase in PHASES:
        for t in ordered:
            if rules[t.relation].phase == phase:
                visit(t, 0)
    return ProceduralPrompt(tuple(lines))
