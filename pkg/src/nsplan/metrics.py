"""Automatic plan-quality metrics.

Sentence-BLEU, ROUGE-1 F1, exact Word Mover's Distance (a transportation
LP, solved to optimality), an embedding-match F1 in the BERTScore style,
and Pearson correlation for comparing metric columns against human
scores. Plan-level inputs are step lists joined with ". " into one text.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .embeddings import cosine, embed

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

METRIC_NAMES = ("s_bleu", "rouge1_f1", "wmd_distance", "wmd_similarity", "embed_match_f1")


class UndefinedCorrelationError(ValueError):
    pass


def tokenize(text):
    return _TOKEN_RE.findall(text.lower())


def plan_text(steps):
    """Join plan steps into one evaluable text."""
    return ". ".join(steps)


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(pred, ref):
    """BLEU up to 4-grams with brevity penalty. Zero clipped counts are
    smoothed to 1e-9 so short near-misses stay comparable; the order is
    capped at the prediction length so one-word predictions do not zero out
    on missing 4-grams."""
    pred_tokens = tokenize(pred)
    ref_tokens = tokenize(ref)
    if not pred_tokens:
        return 0.0
    max_order = min(4, len(pred_tokens))
    log_sum = 0.0
    for n in range(1, max_order + 1):
        pred_counts = _ngram_counts(pred_tokens, n)
        ref_counts = _ngram_counts(ref_tokens, n)
        clipped = sum(min(c, ref_counts[g]) for g, c in pred_counts.items())
        total = max(len(pred_tokens) - n + 1, 1)
        log_sum += math.log(max(clipped, 1e-9) / total)
    geo_mean = math.exp(log_sum / max_order)
    if len(pred_tokens) >= len(ref_tokens) or not ref_tokens:
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(ref_tokens) / len(pred_tokens))
    return min(1.0, bp * geo_mean)


def rouge1_f1(pred, ref):
    pred_counts = Counter(tokenize(pred))
    ref_counts = Counter(tokenize(ref))
    overlap = sum(min(c, ref_counts[t]) for t, c in pred_counts.items())
    p_total = sum(pred_counts.values())
    r_total = sum(ref_counts.values())
    precision = overlap / p_total if p_total else 0.0
    recall = overlap / r_total if r_total else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class TransportPlan:
    tokens_pred: tuple
    tokens_ref: tuple
    weights_pred: np.ndarray
    weights_ref: np.ndarray
    cost: np.ndarray
    plan: np.ndarray
    distance: float


def _nbow(tokens):
    counts = Counter(tokens)
    vocab = sorted(counts)
    weights = np.array([counts[t] for t in vocab], dtype=np.float64)
    return vocab, weights / weights.sum()


def wmd_transport(pred, ref, provider):
    """Solve the transportation problem between the two normalized
    bag-of-words distributions with Euclidean ground cost. Returns the full
    plan so feasibility can be checked downstream."""
    pred_tokens = tokenize(pred)
    ref_tokens = tokenize(ref)
    if not pred_tokens or not ref_tokens:
        raise ValueError("word mover's distance needs nonempty texts on both sides")
    vocab_p, w_p = _nbow(pred_tokens)
    vocab_r, w_r = _nbow(ref_tokens)
    vec_p = np.stack([embed(provider, t) for t in vocab_p])
    vec_r = np.stack([embed(provider, t) for t in vocab_r])
    diff = vec_p[:, None, :] - vec_r[None, :, :]
    cost = np.sqrt((diff * diff).sum(axis=2))

    m, n = len(vocab_p), len(vocab_r)
    # Row-sum and column-sum equalities; the last row is redundant (both
    # marginals sum to one), so drop it to keep the system full-rank.
    a_eq = np.zeros((m + n, m * n))
    for i in range(m):
        a_eq[i, i * n : (i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([w_p, w_r])
    res = linprog(
        cost.ravel(),
        A_eq=a_eq[:-1],
        b_eq=b_eq[:-1],
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"transport solve failed: {res.message}")
    plan = res.x.reshape(m, n)
    distance = float((plan * cost).sum())
    return TransportPlan(
        tokens_pred=tuple(vocab_p),
        tokens_ref=tuple(vocab_r),
        weights_pred=w_p,
        weights_ref=w_r,
        cost=cost,
        plan=plan,
        distance=distance,
    )


def wmd(pred, ref, provider):
    """Exact Word Mover's Distance and the derived similarity 1/(1+d).

    Arguments are canonicalized by token-distribution order before the
    solve so wmd(a, b) and wmd(b, a) are bit-identical; identical
    distributions short-circuit to distance zero.
    """
    pred_tokens = tokenize(pred)
    ref_tokens = tokenize(ref)
    if not pred_tokens or not ref_tokens:
        raise ValueError("word mover's distance needs nonempty texts on both sides")
    vocab_p, w_p = _nbow(pred_tokens)
    vocab_r, w_r = _nbow(ref_tokens)
    key_p = (tuple(vocab_p), tuple(w_p))
    key_r = (tuple(vocab_r), tuple(w_r))
    if key_p == key_r:
        return 0.0, 1.0
    first, second = (pred, ref) if key_p <= key_r else (ref, pred)
    distance = wmd_transport(first, second, provider).distance
    distance = max(distance, 0.0)
    return distance, 1.0 / (1.0 + distance)


def embed_match_f1(pred, ref, provider):
    """Greedy-matching embedding F1. Precision averages, over prediction
    tokens, the best cosine against any reference token; recall mirrors it;
    both are mapped through (x+1)/2 before the harmonic mean so the result
    lands in [0, 1]."""
    pred_tokens = tokenize(pred)
    ref_tokens = tokenize(ref)
    if not pred_tokens or not ref_tokens:
        raise ValueError("embedding-match F1 needs nonempty texts on both sides")
    vec_p = [embed(provider, t) for t in pred_tokens]
    vec_r = [embed(provider, t) for t in ref_tokens]
    precision = sum(max(cosine(p, r) for r in vec_r) for p in vec_p) / len(vec_p)
    recall = sum(max(cosine(r, p) for p in vec_p) for r in vec_r) / len(vec_r)
    precision = (precision + 1.0) / 2.0
    recall = (recall + 1.0) / 2.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def pearson(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("pearson expects two equal-length 1-d sequences")
    if len(xs) < 2:
        raise ValueError("pearson needs at least two points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: an input has zero variance")
    r = float((dx * dy).sum()) / (sx * sy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class MetricReport:
    per_sample: tuple  # of dicts: {"id": ..., metric: value, ...}
    means: dict
    count: int

    def to_json(self):
        return {
            "count": self.count,
            "means": dict(self.means),
            "per_sample": [dict(row) for row in self.per_sample],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        return cls(
            per_sample=tuple(obj["per_sample"]),
            means=dict(obj["means"]),
            count=obj["count"],
        )

    def to_table(self):
        """Aligned plain-text table, one row per sample plus a mean row."""
        headers = ("id",) + METRIC_NAMES
        rows = []
        for row in self.per_sample:
            rows.append([str(row["id"])] + [f"{row[m]:.4f}" for m in METRIC_NAMES])
        rows.append(["mean"] + [f"{self.means[m]:.4f}" for m in METRIC_NAMES])
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
        lines.append("  ".join("-" * w for w in widths))
        for r in rows:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))))
        return "\n".join(lines)


def evaluate_pair(pred, ref, provider):
    distance, similarity = wmd(pred, ref, provider)
    return {
        "s_bleu": sentence_bleu(pred, ref),
        "rouge1_f1": rouge1_f1(pred, ref),
        "wmd_distance": distance,
        "wmd_similarity": similarity,
        "embed_match_f1": embed_match_f1(pred, ref, provider),
    }


def evaluate_corpus(samples, provider):
    """samples: iterable of (sample_id, predicted text, reference text)."""
    per_sample = []
    for sample_id, pred, ref in samples:
        row = {"id": sample_id}
        row.update(evaluate_pair(pred, ref, provider))
        per_sample.append(row)
    if not per_sample:
        raise ValueError("no samples to evaluate")
    means = {m: sum(r[m] for r in per_sample) / len(per_sample) for m in METRIC_NAMES}
    return MetricReport(per_sample=tuple(per_sample), means=means, count=len(per_sample))
