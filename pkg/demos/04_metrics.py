"""Score predicted plans against references with the automatic metrics."""

from nsplan.embeddings import HashEmbedding
from nsplan.metrics import (
    evaluate_corpus,
    pearson,
    rouge1_f1,
    sentence_bleu,
    wmd,
)

provider = HashEmbedding()

pred = "walk to bathroom"
ref = "walk to the bathroom"
print(f"pred: {pred!r}")
print(f"ref:  {ref!r}")
print(f"  S-BLEU   {sentence_bleu(pred, ref):.4f}")
print(f"  ROUGE-1  {rouge1_f1(pred, ref):.4f}")   # 6/7: one token of the reference unmatched
dist, sim = wmd(pred, ref, provider)
print(f"  WMD      distance {dist:.4f}, similarity {sim:.4f}")

# Corpus-level report: a few (prediction, reference) plan pairs.
samples = [
    ("watch-tv", "find remote control\nswitch on television", "find remote control\nswitch on television"),
    ("get-mug", "walk to kitchen\ngrab a mug", "go to the kitchen\npick up a cup"),
    ("sit-down", "sit on sofa", "walk to sofa\nsit on sofa\nwatch television"),
]
report = evaluate_corpus(samples, provider)
print()
print(report.to_table())

# Human-judgment correlation is reported as a Pearson coefficient.
metric_scores = [0.91, 0.55, 0.30]
human_scores = [4.8, 3.1, 1.9]
print(f"\npearson vs human ratings: {pearson(metric_scores, human_scores):+.4f}")
