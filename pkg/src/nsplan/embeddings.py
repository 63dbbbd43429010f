"""Text embedding providers and cosine similarity.

Three providers share one small interface (``.dim``, ``.kind``,
``.embed(text) -> np.ndarray``):

* hash: seeded feature hashing of lowercase word unigrams and bigrams.
  Buckets and signs come from a blake2b digest of "<seed>|<feature>", so
  vectors are stable across processes (the builtin ``hash`` is salted and
  would not be).
* table: exact rows loaded from a JSONL file, L2-normalized at load; a
  missing text falls back to an internal hash provider and the miss is
  counted.
* remote: POST {"input": [text]} to an embedding service; results are
  memoized per exact input text.

Every non-zero vector handed out is L2-normalized; the empty string embeds
to the zero vector and any cosine against it is defined as 0.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading

import numpy as np

from .errors import TransportError

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

DEFAULT_DIM = 256


def _tokens(text):
    return _TOKEN_RE.findall(text.lower())


def _features(text, bigrams=True):
    toks = _tokens(text)
    feats = list(toks)
    if bigrams:
        feats.extend(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    return feats


class HashEmbedding:
    kind = "hash"

    def __init__(self, dim=DEFAULT_DIM, seed=0, bigrams=True):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self.bigrams = bigrams

    def _bucket(self, feature):
        digest = hashlib.blake2b(
            f"{self.seed}|{feature}".encode("utf-8"), digest_size=9
        ).digest()
        index = int.from_bytes(digest[:8], "big") % self.dim
        sign = 1.0 if digest[8] & 1 else -1.0
        return index, sign

    def embed(self, text):
        vec = np.zeros(self.dim, dtype=np.float64)
        for feature in _features(text, self.bigrams):
            index, sign = self._bucket(feature)
            vec[index] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec


class TableEmbedding:
    """Lookup provider over a JSONL file of {"text": ..., "vector": [...]}.

    Rows are L2-normalized once at load. Texts absent from the table embed
    through a hash fallback of the same dimension; ``miss_count`` and
    ``missed_texts`` record every fallback.
    """

    kind = "table"

    def __init__(self, path=None, rows=None, seed=0):
        table = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        obj = json.loads(line)
                        table[obj["text"]] = np.asarray(obj["vector"], dtype=np.float64)
        if rows:
            for text, vector in rows.items():
                table[text] = np.asarray(vector, dtype=np.float64)
        if not table:
            raise ValueError("embedding table is empty")
        dims = {v.shape[0] for v in table.values()}
        if len(dims) != 1:
            raise ValueError(f"table rows disagree on dimension: {sorted(dims)}")
        (self.dim,) = dims
        for text, vec in table.items():
            norm = np.linalg.norm(vec)
            if norm > 0:
                table[text] = vec / norm
        self._table = table
        self._fallback = HashEmbedding(dim=self.dim, seed=seed)
        self.miss_count = 0
        self.missed_texts = set()

    def embed(self, text):
        row = self._table.get(text)
        if row is not None:
            return row.copy()
        self.miss_count += 1
        self.missed_texts.add(text)
        return self._fallback.embed(text)


class RemoteEmbedding:
    """HTTP provider speaking {"input": [texts]} -> {"data": [{"embedding"}]}.

    Responses are cached by exact input text behind a lock, so repeated
    embeds of one string cost one request.
    """

    kind = "remote"

    def __init__(self, endpoint, dim, api_key=None, timeout=30.0, transport=None):
        self.endpoint = endpoint
        self.dim = dim
        self.api_key = api_key
        self.timeout = timeout
        self._transport = transport
        self._cache = {}
        self._lock = threading.Lock()

    def _post(self, payload):
        from . import _http

        return _http.post_json(
            self.endpoint,
            payload,
            api_key=self.api_key,
            timeout=self.timeout,
            transport=self._transport,
        )

    def embed(self, text):
        with self._lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached.copy()
        body = self._post({"input": [text]})
        try:
            raw = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError):
            raise TransportError(
                "embedding response missing data[0].embedding", endpoint=self.endpoint
            )
        vec = np.asarray(raw, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise TransportError(
                f"embedding has dimension {vec.shape}, expected ({self.dim},)",
                endpoint=self.endpoint,
            )
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        with self._lock:
            self._cache[text] = vec
        return vec.copy()


def embed(provider, text):
    """Embed through any provider, enforcing the vector contract: float64,
    correct dimension, and unit L2 norm (or exactly zero)."""
    vec = np.asarray(provider.embed(text), dtype=np.float64)
    if vec.shape != (provider.dim,):
        raise ValueError(f"provider returned shape {vec.shape}, expected ({provider.dim},)")
    norm = np.linalg.norm(vec)
    if norm > 0 and abs(norm - 1.0) > 1e-9:
        vec = vec / norm
    return vec


def cosine(a, b):
    """Cosine similarity in [-1, 1]; 0 when either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))
