"""Rule-based parsing of task names into entity sets.

A small self-contained tagger (closed-class word lists embedded here, an
open-class lexicon shipped as a data file, suffix fallbacks) feeds a chunker
with the grammar

    NP := (DET)? (ADJ)* (NOUN)+
    VP := VERB NP?

Bare nouns, noun-phrase chunks and verb-phrase chunks become entities whose
keys are normalized node keys (lowercase, underscore-joined). Determiners
and prepositions never enter keys.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_WORD_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

DETERMINERS = frozenset(
    "the a an this that these those some any each every no another".split()
)
PREPOSITIONS = frozenset(
    (
        "in on at to from with of for by into onto under over behind near off up "
        "down out about around through inside outside before after during between "
        "without within against along across beside above below"
    ).split()
)
PRONOUNS = frozenset(
    (
        "i you he she it we they me him her them us my your his its our their "
        "mine yours hers ours theirs myself yourself himself herself itself "
        "ourselves themselves"
    ).split()
)
# Conjunctions are chunk boundaries. They are a code-level closed class
# because the lexicon file format has no tag for them.
CONJUNCTIONS = frozenset("and or but then".split())


@dataclass(frozen=True)
class Entity:
    surface: str
    key: str
    kind: str  # "Noun" | "NounPhrase" | "VerbPhrase"


@dataclass(frozen=True)
class EntitySet:
    task_text: str
    entities: tuple[Entity, ...]

    def keys(self):
        return [e.key for e in self.entities]

    def __iter__(self):
        return iter(self.entities)

    def __len__(self):
        return len(self.entities)


@lru_cache(maxsize=1)
def _lexicon():
    table = {}
    text = resources.files("nsplan.data").joinpath("lexicon.txt").read_text("utf-8")
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        word, _, tag = line.partition("\t")
        table[word.strip()] = tag.strip()
    return table


def tag_word(word):
    """POS tag for one lowercase word: closed classes, then the lexicon,
    then suffix rules, then the noun default."""
    if word in DETERMINERS:
        return "DET"
    if word in PREPOSITIONS:
        return "PREP"
    if word in PRONOUNS:
        return "PRON"
    if word in CONJUNCTIONS:
        return "CONJ"
    tag = _lexicon().get(word)
    if tag:
        return tag
    if word.endswith("ing") or word.endswith("ed"):
        return "VERB"
    if word.endswith("tion") or word.endswith("ness"):
        return "NOUN"
    return "NOUN"


def tokenize(text):
    return _WORD_RE.findall(text.lower())


def normalize_key(surface, graph=None):
    """Lowercase, strip punctuation, collapse whitespace to underscores.

    When ``graph`` is given and the normalized key is absent from it, a
    single trailing "s" is stripped and the stripped form is used only if
    the graph contains it.
    """
    words = tokenize(surface.replace("_", " ").replace("'", ""))
    key = "_".join(words)
    if graph is not None and key and key not in graph and key.endswith("s"):
        stripped = key[:-1]
        if stripped in graph:
            return stripped
    return key


def _read_np(tags, i):
    """Try to read an NP starting at position i; returns (next_i, content
    token positions) or (i, None) when no NP starts here."""
    j = i
    if j < len(tags) and tags[j] == "DET":
        j += 1
    content_start = j
    while j < len(tags) and tags[j] == "ADJ":
        j += 1
    noun_start = j
    while j < len(tags) and tags[j] == "NOUN":
        j += 1
    if j == noun_start:  # no noun: not an NP after all
        return i, None
    return j, list(range(content_start, j))


def parse_entities(task_text, graph=None):
    """Parse a task name into its ordered, deduplicated entity set.

    Single-noun chunks yield Noun entities; multi-word chunks yield
    NounPhrase entities; a verb plus its following noun phrase yields a
    VerbPhrase entity (the inner phrase is emitted as well). Entities are
    ordered by the position of their first content token; on duplicate keys
    the first occurrence wins. ``graph`` makes key normalization graph
    aware (see normalize_key).
    """
    tokens = tokenize(task_text)
    tags = [tag_word(w) for w in tokens]
    found = []  # (position, surface, kind)

    def note_np(positions):
        words = [tokens[p] for p in positions]
        kind = "Noun" if len(words) == 1 else "NounPhrase"
        found.append((positions[0], " ".join(words), kind))

    i = 0
    while i < len(tokens):
        tag = tags[i]
        if tag == "VERB":
            verb_at = i
            j, np_positions = _read_np(tags, i + 1)
            vp_words = [tokens[verb_at]]
            if np_positions:
                vp_words += [tokens[p] for p in np_positions]
                note_np(np_positions)
            found.append((verb_at, " ".join(vp_words), "VerbPhrase"))
            i = j if np_positions else i + 1
            continue
        j, np_positions = _read_np(tags, i)
        if np_positions:
            note_np(np_positions)
            i = j
            continue
        i += 1  # boundary token (PREP, CONJ, PRON, stray DET)

    found.sort(key=lambda item: item[0])
    entities, seen = [], set()
    for _, surface, kind in found:
        key = normalize_key(surface, graph=graph)
        if key and key not in seen:
            seen.add(key)
            entities.append(Entity(surface=surface, key=key, kind=kind))
    return EntitySet(task_text=task_text, entities=tuple(entities))
