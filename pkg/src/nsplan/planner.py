"""Plan assembly: knowledge retrieval, prompt aggregation, and the
generate/translate/accept loop.

The knowledge prompt for a task is computed once, before the first step.
Each iteration renders the aggregate prompt (task line, knowledge lines,
step history), asks the generator for a candidate, grounds the candidate
onto the admissible set, and accepts it only when the effective
confidence (generator confidence times translation cosine) clears the
threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import adaption, entities, kg, verbalize
from .admissible import translate, translate_prompt
from .errors import ConfigError, TransportError
from .generation import GenerationRequest, next_step

TERMINATIONS = ("MaxSteps", "BelowThreshold", "GeneratorExhausted")


@dataclass(frozen=True)
class PlannerConfig:
    theta: float = 0.7
    max_steps: int = 20
    hops: int = 3
    top_k: int = 10
    edge_threshold: float = 0.6
    concept_ratio: int = 3
    cos_keep_threshold: float = 0.4

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.hops < 1:
            raise ConfigError(f"hops must be >= 1, got {self.hops}")
        try:
            adaption.AdaptionConfig(
                top_k=self.top_k,
                edge_threshold=self.edge_threshold,
                concept_ratio=self.concept_ratio,
                cos_keep_threshold=self.cos_keep_threshold,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def adaption(self):
        return adaption.AdaptionConfig(
            top_k=self.top_k,
            edge_threshold=self.edge_threshold,
            concept_ratio=self.concept_ratio,
            cos_keep_threshold=self.cos_keep_threshold,
        )


@dataclass(frozen=True)
class Prompt:
    task: str
    knowledge: tuple[str, ...]
    history: tuple[str, ...] = ()

    def rendered(self):
        lines = [f"Task: {self.task}"]
        lines.extend(f"Step: {text}." for text in self.knowledge)
        lines.extend(f"Step {i}: {text}." for i, text in enumerate(self.history, 1))
        return "\n".join(lines)


def aggregate_prompt(task, knowledge, history=()):
    """Bundle the task text, translated knowledge lines, and the step
    history into one Prompt. ``knowledge`` may be a TranslatedPrompt or any
    iterable of strings."""
    lines = getattr(knowledge, "lines", None)
    if lines is None:
        lines = tuple(knowledge)
    return Prompt(task=task, knowledge=tuple(lines), history=tuple(history))


@dataclass(frozen=True)
class PlanStep:
    text: str
    confidence: float

    def to_json(self):
        return {"text": self.text, "confidence": self.confidence}


@dataclass(frozen=True)
class PlanResult:
    task: str
    steps: tuple
    termination: str
    trace: tuple = ()

    def __post_init__(self):
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.termination!r}")

    def __len__(self):
        return len(self.steps)

    def step_texts(self):
        return [s.text for s in self.steps]

    def to_json(self):
        return {
            "task": self.task,
            "steps": [s.to_json() for s in self.steps],
            "termination": self.termination,
            "trace": [dict(entry) for entry in self.trace],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        return cls(
            task=obj["task"],
            steps=tuple(PlanStep(s["text"], s["confidence"]) for s in obj["steps"]),
            termination=obj["termination"],
            trace=tuple(obj.get("trace", [])),
        )


def knowledge_for_task(task, graph, embedder, config, rules=None):
    """Stages 1 and 2: parse the task, pull the local subgraph, adapt and
    prune edge weights, verbalize. Returns the ungrounded knowledge prompt."""
    parsed = entities.parse_entities(task, graph=graph)
    anchors = [key for key in parsed.keys() if key in graph]
    sub = kg.sample_subgraph(graph, anchors, hops=config.hops)
    adapted = adaption.adapt_weights(sub, task, embedder)
    kept = adaption.select(adapted, config.adaption(), task)
    return verbalize.build_knowledge_prompt(kept, rules=rules, max_depth=config.hops)


def plan(task, graph, admissible, generator, embedder, config=None, rules=None):
    """Run the full loop for one task and return a PlanResult.

    A transport failure mid-plan propagates as TransportError with the
    partial trace attached (``err.partial_trace``) so callers can record
    how far the task got.
    """
    config = config or PlannerConfig()
    knowledge = knowledge_for_task(task, graph, embedder, config, rules=rules)
    grounded = translate_prompt(knowledge, admissible, embedder)

    steps = []
    trace = []
    termination = "MaxSteps"
    while len(steps) < config.max_steps:
        prompt = aggregate_prompt(task, grounded, [s.text for s in steps])
        request = GenerationRequest(prompt=prompt.rendered())
        try:
            result = next_step(generator, request)
        except TransportError as err:
            err.partial_trace = tuple(trace)
            raise
        if not result.text:
            termination = "GeneratorExhausted"
            break
        step, cos = translate(result.text, admissible, embedder)
        effective = result.confidence * max(cos, 0.0)
        entry = {
            "iteration": len(steps) + 1,
            "generated_text": result.text,
            "generation_confidence": result.confidence,
            "translated_text": step.text,
            "translation_cosine": cos,
            "effective_confidence": effective,
            "accepted": effective >= config.theta,
        }
        trace.append(entry)
        if effective < config.theta:
            termination = "BelowThreshold"
            break
        steps.append(PlanStep(text=step.text, confidence=effective))

    return PlanResult(
        task=task, steps=tuple(steps), termination=termination, trace=tuple(trace)
    )
