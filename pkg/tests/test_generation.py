"""Generation providers: completion cleanup, mocks, remote transport."""

import json
import math

import pytest

import oracles
from nsplan.errors import TransportError
from nsplan.generation import (
    MASK_SENTINEL,
    FixtureMissError,
    GenerationRequest,
    GenerationResult,
    KnowledgeFollowerGenerator,
    RemoteGenerator,
    ScriptedGenerator,
    clean_completion,
    next_step,
    parse_prompt_sections,
    prompt_fingerprint,
)

PROMPT = (
    "Task: Watch TV\n"
    "Step: find remote control.\n"
    "Step: switch on television.\n"
    "Step: sit on sofa.\n"
    "Step 1: find remote control."
)


class TestCleanCompletion:
    @pytest.mark.parametrize(
        "raw,want",
        [
            ("  walk to sofa  ", "walk to sofa"),
            ("walk to sofa.\nStep 2: sit down.", "walk to sofa"),
            ("Step 3: switch on television. Then relax.", "switch on television"),
            ("step: soap up", "soap up"),
            ("STEP 12 :  dry off.", "dry off"),
            ("", ""),
            ("\n\nkept after leading blank lines\nsecond", "kept after leading blank lines"),
            ("no trailing dot", "no trailing dot"),
        ],
    )
    def test_cases(self, raw, want):
        assert clean_completion(raw) == want

    def test_idempotent(self):
        for raw in ["Step 1: walk.", "plain text", "a. b. c."]:
            once = clean_completion(raw)
            assert clean_completion(once) == once


class TestFingerprint:
    def test_known_vectors(self):
        # FNV-1a 64-bit reference values.
        assert prompt_fingerprint("") == "cbf29ce484222325"
        assert prompt_fingerprint("a") == "af63dc4c8601ec8c"
        assert prompt_fingerprint("foobar") == "85944171f73967e8"

    def test_sixteen_lowercase_hex(self):
        fp = prompt_fingerprint(PROMPT)
        assert len(fp) == 16
        assert fp == fp.lower()
        int(fp, 16)

    def test_sensitive_to_every_byte(self):
        assert prompt_fingerprint(PROMPT) != prompt_fingerprint(PROMPT + " ")


class TestRequest:
    def test_autoencoder_appends_mask(self):
        req = GenerationRequest(prompt="Task: X", mode="autoencoder")
        assert req.payload_prompt() == f"Task: X {MASK_SENTINEL}"

    def test_autoregressive_unchanged(self):
        req = GenerationRequest(prompt="Task: X")
        assert req.payload_prompt() == "Task: X"

    def test_rejects_empty_prompt_and_bad_mode(self):
        with pytest.raises(ValueError):
            GenerationRequest(prompt="")
        with pytest.raises(ValueError):
            GenerationRequest(prompt="x", mode="diffusion")


class TestPromptSections:
    def test_splits_knowledge_and_history(self):
        knowledge, history = parse_prompt_sections(PROMPT)
        assert knowledge == ["find remote control", "switch on television", "sit on sofa"]
        assert history == ["find remote control"]

    def test_ignores_task_and_blank_lines(self):
        knowledge, history = parse_prompt_sections("Task: X\n\nnot a step line\n")
        assert knowledge == [] and history == []


class TestFollower:
    def test_returns_first_unused_knowledge_line(self):
        result = KnowledgeFollowerGenerator().next_step(GenerationRequest(PROMPT))
        assert result.text == "switch on television"
        assert result.confidence == 1.0

    def test_schedule_indexed_by_history_length(self):
        gen = KnowledgeFollowerGenerator(schedule=(1.0, 1.0, 0.5))
        result = gen.next_step(GenerationRequest(PROMPT))  # one history step
        assert result.confidence == 1.0
        longer = PROMPT + "\nStep 2: switch on television."
        result = gen.next_step(GenerationRequest(longer))
        assert result.text == "sit on sofa"
        assert result.confidence == 0.5

    def test_schedule_clamps_to_last_entry(self):
        gen = KnowledgeFollowerGenerator(schedule=(0.9,))
        longer = PROMPT + "\nStep 2: switch on television."
        assert gen.next_step(GenerationRequest(longer)).confidence == 0.9

    def test_exhaustion_returns_empty_zero(self):
        done = (
            "Task: Watch TV\n"
            "Step: sit on sofa.\n"
            "Step 1: sit on sofa."
        )
        result = KnowledgeFollowerGenerator().next_step(GenerationRequest(done))
        assert (result.text, result.confidence) == ("", 0.0)

    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError):
            KnowledgeFollowerGenerator(schedule=())

    def test_stateless_across_calls(self):
        gen = KnowledgeFollowerGenerator()
        first = gen.next_step(GenerationRequest(PROMPT))
        second = gen.next_step(GenerationRequest(PROMPT))
        assert first == second


class TestScripted:
    def test_lookup_by_fingerprint(self):
        fp = prompt_fingerprint("Task: X")
        gen = ScriptedGenerator(responses={fp: {"text": "Step 1: walk.", "confidence": 0.7}})
        result = gen.next_step(GenerationRequest("Task: X"))
        assert result.text == "walk"
        assert result.confidence == 0.7

    def test_miss_raises_with_fingerprint(self):
        gen = ScriptedGenerator(responses={})
        with pytest.raises(FixtureMissError) as err:
            gen.next_step(GenerationRequest("Task: X"))
        assert err.value.fingerprint == prompt_fingerprint("Task: X")

    def test_loads_from_file(self, tmp_path):
        fp = prompt_fingerprint("Task: Y")
        path = tmp_path / "responses.json"
        path.write_text(json.dumps({fp: {"text": "sit", "confidence": 0.5}}))
        result = ScriptedGenerator(path=path).next_step(GenerationRequest("Task: Y"))
        assert (result.text, result.confidence) == ("sit", 0.5)


class TestRemote:
    @staticmethod
    def _ok_body(text="walk to sofa", logprobs=None):
        choice = {"text": text}
        if logprobs is not None:
            choice["logprobs"] = {"token_logprobs": logprobs}
        return {"choices": [choice]}

    def test_payload_shape(self):
        seen = []

        def transport(payload):
            seen.append(payload)
            return 200, self._ok_body(logprobs=[-0.1])

        gen = RemoteGenerator("http://svc/v1", model="m1", transport=transport)
        gen.next_step(GenerationRequest("Task: X", max_tokens=32, temperature=0.2))
        assert seen == [
            {
                "model": "m1",
                "prompt": "Task: X",
                "max_tokens": 32,
                "temperature": 0.2,
                "logprobs": 1,
                "stop": ["\n"],
            }
        ]

    def test_autoencoder_mode_sends_mask(self):
        seen = []

        def transport(payload):
            seen.append(payload["prompt"])
            return 200, self._ok_body(logprobs=[-0.1])

        gen = RemoteGenerator("http://svc/v1", model="m", transport=transport)
        gen.next_step(GenerationRequest("Task: X", mode="autoencoder"))
        assert seen == [f"Task: X {MASK_SENTINEL}"]

    def test_confidence_is_exp_mean_logprob(self):
        logprobs = [-0.5, -1.0, -0.25]
        gen = RemoteGenerator(
            "http://svc/v1",
            model="m",
            transport=lambda p: (200, self._ok_body(logprobs=logprobs)),
        )
        result = gen.next_step(GenerationRequest("Task: X"))
        want = oracles.mean_logprob_confidence_oracle(logprobs)
        assert result.confidence == pytest.approx(want, abs=1e-15)
        assert result.confidence == pytest.approx(math.exp(-1.75 / 3), abs=1e-12)
        assert not result.flagged

    def test_missing_logprobs_flags_confidence_one(self):
        gen = RemoteGenerator(
            "http://svc/v1", model="m", transport=lambda p: (200, self._ok_body())
        )
        result = gen.next_step(GenerationRequest("Task: X"))
        assert result.confidence == 1.0
        assert result.flagged

    def test_cleans_raw_completion(self):
        gen = RemoteGenerator(
            "http://svc/v1",
            model="m",
            transport=lambda p: (
                200,
                self._ok_body(text="Step 2: sit on sofa. Then nap.", logprobs=[-0.1]),
            ),
        )
        assert gen.next_step(GenerationRequest("Task: X")).text == "sit on sofa"

    def test_retries_then_succeeds(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda _: None)
        calls = []

        def transport(payload):
            calls.append(1)
            if len(calls) < 3:
                return 429, {}
            return 200, self._ok_body(logprobs=[-0.2])

        gen = RemoteGenerator("http://svc/v1", model="m", transport=transport, retries=3)
        assert gen.next_step(GenerationRequest("Task: X")).text == "walk to sofa"
        assert len(calls) == 3

    def test_transport_error_after_retries(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda _: None)
        gen = RemoteGenerator(
            "http://svc/v1", model="m", transport=lambda p: (503, {}), retries=2
        )
        with pytest.raises(TransportError) as err:
            gen.next_step(GenerationRequest("Task: X"))
        assert err.value.status == 503

    def test_non_retryable_status_raises_immediately(self):
        calls = []

        def transport(payload):
            calls.append(1)
            return 401, {}

        gen = RemoteGenerator("http://svc/v1", model="m", transport=transport)
        with pytest.raises(TransportError):
            gen.next_step(GenerationRequest("Task: X"))
        assert len(calls) == 1

    def test_malformed_body_raises(self):
        gen = RemoteGenerator(
            "http://svc/v1", model="m", transport=lambda p: (200, {"choices": []})
        )
        with pytest.raises(TransportError, match="choices"):
            gen.next_step(GenerationRequest("Task: X"))


class TestNextStepContract:
    def test_recleans_sloppy_provider(self):
        class Sloppy:
            def next_step(self, request):
                return GenerationResult("Step 4: walk.\ngarbage", 0.5)

        assert next_step(Sloppy(), GenerationRequest("Task: X")).text == "walk"

    def test_rejects_non_finite_confidence(self):
        class Bad:
            def next_step(self, request):
                return GenerationResult("walk", float("nan"))

        with pytest.raises(ValueError):
            next_step(Bad(), GenerationRequest("Task: X"))

    def test_passes_through_clean_results(self):
        result = next_step(KnowledgeFollowerGenerator(), GenerationRequest(PROMPT))
        assert result.text == "switch on television"
