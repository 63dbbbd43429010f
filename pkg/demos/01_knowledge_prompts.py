"""Build a small commonsense graph, zoom in around a task, and turn the
neighborhood into natural-language knowledge lines."""

import io

from nsplan.adaption import AdaptionConfig, adapt_weights, select
from nsplan.embeddings import HashEmbedding
from nsplan.kg import ingest, sample_subgraph
from nsplan.verbalize import build_knowledge_prompt

# A graph is just head/relation/tail/weight rows. JSONL keeps this demo
# self-contained; the same ingest() reads ConceptNet TSV dumps.
rows = io.StringIO(
    "\n".join(
        [
            '{"head": "take_a_shower", "relation": "HasPrerequisite", "tail": "take_off_clothes", "weight": 4.0}',
            '{"head": "take_a_shower", "relation": "HasPrerequisite", "tail": "turn_on_water", "weight": 3.1}',
            '{"head": "take_a_shower", "relation": "HasSubevent", "tail": "wash_hair", "weight": 2.8}',
            '{"head": "take_a_shower", "relation": "HasSubevent", "tail": "use_soap", "weight": 2.2}',
            '{"head": "take_a_shower", "relation": "HasLastSubevent", "tail": "dry_off", "weight": 3.4}',
            '{"head": "wash_hair", "relation": "HasPrerequisite", "tail": "wet_hair", "weight": 1.9}',
            '{"head": "use_soap", "relation": "MotivatedByGoal", "tail": "be_clean", "weight": 1.5}',
            '{"head": "dry_off", "relation": "UsedFor", "tail": "towel", "weight": 2.0}',
        ]
    )
)
graph = ingest(rows, fmt="jsonl")
print(f"graph: {graph.node_count} nodes, {graph.edge_count} edges")

sub = sample_subgraph(graph, ["take_a_shower"], hops=3)
print(f"subgraph around take_a_shower: {len(sub)} triplets")

# Edge-wise adaption nudges each weight by how well the tail concept
# matches the task text, then select() keeps the best-supported concepts.
provider = HashEmbedding()
task = "take a shower"
adapted = adapt_weights(sub, task, provider)
for t in adapted.triplets:
    print(f"  {t.head} -{t.relation}-> {t.tail}  {t.weight:.2f} -> {t.adapted_weight:.2f}")

kept = select(adapted, AdaptionConfig(edge_threshold=0.0, cos_keep_threshold=-1.0), task)
print(f"kept {len(kept)} of {len(adapted)} triplets after selection")

prompt = build_knowledge_prompt(kept, max_depth=3)
print()
print("knowledge prompt:")
for line in prompt.lines:
    print(" ", line)
