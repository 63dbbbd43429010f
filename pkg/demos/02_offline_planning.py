"""End-to-end plan generation without any network access.

The follower generator replays knowledge lines with a fixed confidence
schedule, which makes the loop's termination behavior easy to watch: the
third step comes back at confidence 0.5, below the 0.7 threshold, so the
plan stops at two steps.
"""

import io

from nsplan.admissible import build_admissible_set
from nsplan.embeddings import HashEmbedding
from nsplan.generation import KnowledgeFollowerGenerator
from nsplan.kg import ingest
from nsplan.planner import PlannerConfig, plan

graph = ingest(
    io.StringIO(
        "\n".join(
            [
                '{"head": "watch_tv", "relation": "HasPrerequisite", "tail": "find_remote_control", "weight": 3.0}',
                '{"head": "watch_tv", "relation": "HasPrerequisite", "tail": "switch_on_television", "weight": 2.5}',
                '{"head": "watch_tv", "relation": "HasSubevent", "tail": "sit_on_sofa", "weight": 2.0}',
            ]
        )
    ),
    fmt="jsonl",
)

admissible = build_admissible_set(
    actions=["find", "grab", "switch on", "sit on", "watch"],
    objects=["remote control", "television", "sofa"],
)
print(f"admissible steps: {len(admissible)}")

generator = KnowledgeFollowerGenerator(schedule=(1.0, 1.0, 0.5))
config = PlannerConfig(theta=0.7, cos_keep_threshold=-1.0, edge_threshold=0.0)

result = plan("Watch TV", graph, admissible, generator, HashEmbedding(), config=config)

print(f"termination: {result.termination}")
for i, step in enumerate(result.steps, 1):
    print(f"  Step {i}: {step.text}  (confidence {step.confidence:.2f})")

print()
print("trace (including the rejected step):")
for entry in result.trace:
    mark = "kept" if entry["accepted"] else "rejected"
    print(
        f"  {mark}: {entry['generated_text']!r} -> {entry['translated_text']!r}"
        f" conf={entry['effective_confidence']:.2f}"
    )

# The whole result serializes, so runs can be archived and diffed.
print()
print(result.dumps()[:120] + "...")
