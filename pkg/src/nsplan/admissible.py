"""Admissible step sets and embedding-space translation into them.

Translation is an exhaustive cosine argmax over the set, so whatever the
upstream model produced, the output is always a member: the closed-world
guarantee the planner relies on. Ties break lexicographically on step text.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

import numpy as np

from . import embeddings
from .errors import ConfigError
from .programs import StructuredStep
from .verbalize import ProceduralPrompt

DEFAULT_TEMPLATE = "{action} {object}"


@dataclass(frozen=True)
class AdmissibleStep:
    text: str
    structured: StructuredStep | None = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("admissible step text must be nonempty")


class AdmissibleSet:
    """Fixed list of admissible steps plus a per-provider embedding cache.

    The cache is warmed lazily under a lock; once warm, lookups are
    read-only and safe to share across threads.
    """

    def __init__(self, steps):
        steps = tuple(steps)
        if not steps:
            raise ConfigError("admissible set is empty")
        seen = set()
        unique = []
        for s in steps:
            if s.text not in seen:
                seen.add(s.text)
                unique.append(s)
        self.steps = tuple(unique)
        self._vectors = None
        self._provider = None
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __contains__(self, text):
        return any(s.text == text for s in self.steps)

    def vectors(self, provider):
        with self._lock:
            if self._provider is not provider:
                self._vectors = [embeddings.embed(provider, s.text) for s in self.steps]
                self._provider = provider
            return self._vectors


def build_admissible_set(actions, objects, templates=None):
    """Render the action x object product through per-action templates
    (default "<action> <object>") and deduplicate."""
    actions = list(actions)
    objects = list(objects)
    if not actions or not objects:
        raise ConfigError("admissible set needs at least one action and one object")
    templates = templates or {}
    steps = []
    for action in actions:
        pattern = templates.get(action, DEFAULT_TEMPLATE)
        for obj in objects:
            text = pattern.format(action=action, object=obj)
            steps.append(AdmissibleStep(text=text, structured=StructuredStep(action, obj, 1)))
    return AdmissibleSet(steps)


def load_admissible_set(path):
    """Load either {"actions", "objects", "templates"?} or a flat
    {"steps": [strings]} JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "steps" in data:
        return AdmissibleSet(AdmissibleStep(text=s) for s in data["steps"])
    return build_admissible_set(data["actions"], data["objects"], data.get("templates"))


def translate(text, admissible, provider):
    """Map free text onto the closest admissible step.

    Returns (step, confidence) where confidence is the winning cosine.
    Deliberately a plain per-candidate np.dot scan: the argmax must be
    reproducible against an independent scan using the same arithmetic.
    """
    query = embeddings.embed(provider, text)
    vectors = admissible.vectors(provider)
    best_step = None
    best_cos = -2.0
    for step, vec in zip(admissible.steps, vectors):
        if query.any() and vec.any():
            cos = float(np.dot(query, vec))
            cos = max(-1.0, min(1.0, cos))
        else:
            cos = 0.0
        if cos > best_cos or (cos == best_cos and step.text < best_step.text):
            best_step, best_cos = step, cos
    return best_step, best_cos


def translate_prompt(prompt, admissible, provider):
    """Translate every knowledge line, preserving order and collapsing
    consecutive duplicates only (repeats further apart are meaningful)."""
    out = []
    for line in prompt:
        step, _ = translate(line, admissible, provider)
        if not out or out[-1] != step.text:
            out.append(step.text)
    # ProceduralPrompt forbids duplicate lines; the translated sequence may
    # legitimately repeat non-adjacent steps, so it is a plain tuple wrapped
    # in a prompt-like shim when needed.
    return TranslatedPrompt(tuple(out))


@dataclass(frozen=True)
class TranslatedPrompt:
    """Admissible knowledge lines: ordered, consecutive-duplicate free, but
    allowed to repeat non-adjacently (unlike ProceduralPrompt)."""

    lines: tuple[str, ...] = ()

    def rendered(self):
        return [f"Step: {line}." for line in self.lines]

    def __iter__(self):
        return iter(self.lines)

    def __len__(self):
        return len(self.lines)
