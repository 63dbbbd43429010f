"""Next-step text generation behind one provider interface.

Providers return (text, confidence) for a rendered prompt. The remote
provider speaks an OpenAI-style completions contract; the two mock
providers exist so the whole planning loop runs offline and reproducibly:

* follower mock: echoes the first knowledge line of the prompt that the
  step history has not used yet, with a configured confidence schedule.
* scripted mock: looks responses up by a stable fingerprint of the exact
  prompt bytes (FNV-1a, 64-bit, lowercase hex; also described in the
  README).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Any

from .errors import TransportError

MASK_SENTINEL = "<mask>"

_STEP_PREFIX_RE = re.compile(r"^\s*step\s*\d*\s*:\s*", re.IGNORECASE)
_KNOWLEDGE_LINE_RE = re.compile(r"^Step:\s*(.+?)\.?\s*$")
_HISTORY_LINE_RE = re.compile(r"^Step\s+(\d+):\s*(.+?)\.?\s*$")


class FixtureMissError(KeyError):
    def __init__(self, fingerprint, prompt):
        head = prompt[:80].replace("\n", "\\n")
        super().__init__(f"no scripted response for fingerprint {fingerprint} (prompt: {head}...)")
        self.fingerprint = fingerprint


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    mode: str = "autoregressive"  # or "autoencoder"
    max_tokens: int = 64
    temperature: float = 0.0
    stop: tuple[str, ...] = ("\n",)

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")
        if self.mode not in ("autoregressive", "autoencoder"):
            raise ValueError(f"unknown generation mode {self.mode!r}")

    def payload_prompt(self):
        """Prompt as sent to a completion service; autoencoder mode appends
        the single mask sentinel."""
        if self.mode == "autoencoder":
            return f"{self.prompt} {MASK_SENTINEL}"
        return self.prompt


@dataclass(frozen=True)
class GenerationResult:
    text: str
    confidence: float
    raw: Any = None
    flagged: bool = False  # confidence was defaulted (no logprobs from the service)


def prompt_fingerprint(prompt):
    """FNV-1a 64-bit over the UTF-8 prompt bytes, as 16 lowercase hex chars."""
    h = 0xCBF29CE484222325
    for byte in prompt.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def clean_completion(text):
    """Reduce a raw completion to one step's worth of text: cut at the first
    line break, drop any leading step marker, keep the first sentence, and
    strip edge whitespace and the trailing period."""
    text = text.strip().split("\n", 1)[0]
    text = _STEP_PREFIX_RE.sub("", text)
    dot = text.find(".")
    if dot >= 0:
        text = text[:dot]
    return text.strip()


def parse_prompt_sections(prompt):
    """Split a rendered prompt into (knowledge line texts, history step
    texts). Knowledge lines look like "Step: x." and history lines like
    "Step 3: x."."""
    knowledge, history = [], []
    for line in prompt.splitlines():
        m = _HISTORY_LINE_RE.match(line.strip())
        if m:
            history.append(m.group(2))
            continue
        m = _KNOWLEDGE_LINE_RE.match(line.strip())
        if m:
            knowledge.append(m.group(1))
    return knowledge, history


class KnowledgeFollowerGenerator:
    """Returns the first knowledge line of the prompt not yet in the step
    history; when every line is used up, returns ("", 0.0).

    ``schedule`` supplies the confidence for the i-th generated step
    (indexed by history length, clamped to the last entry). Stateless
    across calls by construction.
    """

    kind = "follower"

    def __init__(self, schedule=(1.0,)):
        schedule = tuple(float(c) for c in schedule)
        if not schedule:
            raise ValueError("confidence schedule must be nonempty")
        self.schedule = schedule

    def next_step(self, request):
        knowledge, history = parse_prompt_sections(request.prompt)
        used = set(history)
        for line in knowledge:
            if line not in used:
                idx = min(len(history), len(self.schedule) - 1)
                return GenerationResult(text=line, confidence=self.schedule[idx])
        return GenerationResult(text="", confidence=0.0)


class ScriptedGenerator:
    """Fixture-backed provider: a JSON map from prompt fingerprint to
    {"text", "confidence"}. A miss is an error, never a silent default."""

    kind = "scripted"

    def __init__(self, path=None, responses=None):
        if responses is None:
            with open(path, "r", encoding="utf-8") as fh:
                responses = json.load(fh)
        self.responses = dict(responses)

    def next_step(self, request):
        fp = prompt_fingerprint(request.prompt)
        entry = self.responses.get(fp)
        if entry is None:
            raise FixtureMissError(fp, request.prompt)
        return GenerationResult(
            text=clean_completion(entry["text"]), confidence=float(entry["confidence"])
        )


class RemoteGenerator:
    """OpenAI-style completion client with bounded, jittered retries.

    Confidence is exp(mean token log-probability) when the service returns
    logprobs; otherwise 1.0 with the result flagged.
    """

    kind = "remote"

    def __init__(
        self,
        endpoint,
        model,
        api_key=None,
        timeout=60.0,
        retries=3,
        logprobs=1,
        transport=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries
        self.logprobs = logprobs
        self._transport = transport

    def next_step(self, request):
        from . import _http

        payload = {
            "model": self.model,
            "prompt": request.payload_prompt(),
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "logprobs": self.logprobs,
            "stop": list(request.stop),
        }
        body = _http.post_json(
            self.endpoint,
            payload,
            api_key=self.api_key,
            timeout=self.timeout,
            retries=self.retries,
            transport=self._transport,
        )
        try:
            choice = body["choices"][0]
            text = choice["text"]
        except (KeyError, IndexError, TypeError):
            raise TransportError("completion response missing choices[0].text", endpoint=self.endpoint)
        token_logprobs = (choice.get("logprobs") or {}).get("token_logprobs")
        if token_logprobs:
            confidence = math.exp(sum(token_logprobs) / len(token_logprobs))
            flagged = False
        else:
            confidence, flagged = 1.0, True
        return GenerationResult(
            text=clean_completion(text), confidence=confidence, raw=body, flagged=flagged
        )


def next_step(provider, request):
    """Run one generation and enforce the single-step output contract."""
    result = provider.next_step(request)
    text = result.text.strip()
    if "\n" in text or _STEP_PREFIX_RE.match(text):
        text = clean_completion(text)
    if text != result.text:
        result = GenerationResult(text, result.confidence, result.raw, result.flagged)
    if not math.isfinite(result.confidence):
        raise ValueError(f"provider returned non-finite confidence {result.confidence!r}")
    return result
