"""Chat-completion backends: OpenAI-compatible HTTP, replay from a recorded
cache, and scripted oracles for offline runs.

Every successful completion is appended to a JSONL cache keyed by a content
digest of (model, temperature, messages); identical requests are served from
the cache without touching the backend, and a recorded cache can be replayed
as a backend of its own, which is what makes evaluation runs repeatable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx

from framekit.corpus.types import FrameDef, FrameInstance
from framekit.errors import (
    AuthError,
    RateLimitExhausted,
    ReplayMiss,
    TransportError,
)
from framekit.prompting import PromptRecord
from framekit.representations import RepresentationFormat, encode

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelEndpoint:
    base_url: str
    model_name: str
    temperature: float = 0.0
    max_output_tokens: int | None = None
    api_key_env: str = "OPENAI_API_KEY"

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if not self.base_url.startswith(("http://", "https://")):
            raise ValueError(f"base_url does not look like a URL: {self.base_url!r}")


@dataclass
class CompletionRecord:
    request_digest: str
    model_name: str
    temperature: float
    prompt_meta: dict
    response_text: str
    latency_ms: float
    attempt_count: int
    finish_reason: str | None = None

    def as_dict(self) -> dict:
        return dict(vars(self))

    @classmethod
    def from_dict(cls, data: dict) -> "CompletionRecord":
        return cls(
            request_digest=data["request_digest"],
            model_name=data["model_name"],
            temperature=data["temperature"],
            prompt_meta=data.get("prompt_meta", {}),
            response_text=data["response_text"],
            latency_ms=data.get("latency_ms", 0.0),
            attempt_count=data.get("attempt_count", 1),
            finish_reason=data.get("finish_reason"),
        )


def request_digest(model_name: str, temperature: float, messages: list[dict]) -> str:
    canonical = json.dumps(
        {"messages": messages, "model": model_name, "temperature": temperature},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class CompletionCache:
    """Append-only JSONL store of completion records, indexed by digest.

    Lookups and appends are serialized; the file only ever grows, so a crash
    mid-run loses at most the in-flight record.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_digest: dict[str, CompletionRecord] = {}
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    record = CompletionRecord.from_dict(json.loads(line))
                    self._by_digest.setdefault(record.request_digest, record)

    def __len__(self) -> int:
        return len(self._by_digest)

    def lookup(self, digest: str) -> CompletionRecord | None:
        with self._lock:
            return self._by_digest.get(digest)

    def append(self, record: CompletionRecord) -> None:
        with self._lock:
            if record.request_digest in self._by_digest:
                return
            self._by_digest[record.request_digest] = record
            with self.path.open("a", encoding="utf-8", newline="\n") as handle:
                handle.write(json.dumps(record.as_dict(), ensure_ascii=False))
                handle.write("\n")

    def records(self) -> list[CompletionRecord]:
        with self._lock:
            return list(self._by_digest.values())


@dataclass
class RawCompletion:
    text: str
    finish_reason: str | None = None
    attempt_count: int = 1


class Backend(Protocol):
    model_name: str
    temperature: float

    def run(self, prompt: PromptRecord) -> RawCompletion: ...


class HttpBackend:
    """OpenAI-compatible chat-completions endpoint with retry and backoff.

    Transient failures (429, 5xx, timeouts, transport errors) back off as
    base * 2^attempt with +/-20% jitter up to `max_attempts`.
    """

    def __init__(
        self,
        endpoint: ModelEndpoint,
        max_attempts: int = 6,
        backoff_base: float = 1.0,
        jitter: float = 0.2,
        transport: httpx.BaseTransport | None = None,
        sleeper=time.sleep,
        timeout: float = 120.0,
    ):
        self.endpoint = endpoint
        self.model_name = endpoint.model_name
        self.temperature = endpoint.temperature
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.jitter = jitter
        self._sleep = sleeper
        self._rng = random.Random()
        self._client = httpx.Client(
            base_url=endpoint.base_url, transport=transport, timeout=timeout
        )

    def _api_key(self) -> str:
        key = os.environ.get(self.endpoint.api_key_env, "")
        if not key:
            raise AuthError(f"environment variable {self.endpoint.api_key_env} is not set")
        return key

    def run(self, prompt: PromptRecord) -> RawCompletion:
        payload: dict = {
            "model": self.endpoint.model_name,
            "temperature": self.endpoint.temperature,
            "messages": prompt.messages(),
        }
        if self.endpoint.max_output_tokens is not None:
            payload["max_tokens"] = self.endpoint.max_output_tokens
        headers = {"Authorization": f"Bearer {self._api_key()}"}

        last_error: Exception | None = None
        rate_limited = False
        for attempt in range(1, self.max_attempts + 1):
            try:
                response = self._client.post("/chat/completions", json=payload, headers=headers)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_error = exc
                rate_limited = False
            else:
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials ({response.status_code})")
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = TransportError(f"HTTP {response.status_code}")
                    rate_limited = response.status_code == 429
                else:
                    response.raise_for_status()
                    body = response.json()
                    choice = body["choices"][0]
                    return RawCompletion(
                        text=choice["message"]["content"] or "",
                        finish_reason=choice.get("finish_reason"),
                        attempt_count=attempt,
                    )
            if attempt < self.max_attempts:
                delay = self.backoff_base * (2 ** (attempt - 1))
                delay *= 1.0 + self._rng.uniform(-self.jitter, self.jitter)
                self._sleep(max(delay, 0.0))
        if rate_limited:
            raise RateLimitExhausted(f"gave up after {self.max_attempts} attempts: {last_error}")
        raise TransportError(f"gave up after {self.max_attempts} attempts: {last_error}")


class ReplayBackend:
    """Serves responses from a recorded cache; a miss is an error, never a
    network call."""

    def __init__(self, cache_path: str | Path):
        self.cache = CompletionCache(cache_path)
        records = self.cache.records()
        if records:
            self.model_name = records[0].model_name
            self.temperature = records[0].temperature
        else:
            self.model_name = "replay"
            self.temperature = 0.0

    def run(self, prompt: PromptRecord) -> RawCompletion:
        digest = request_digest(self.model_name, self.temperature, prompt.messages())
        record = self.cache.lookup(digest)
        if record is None:
            raise ReplayMiss(digest)
        return RawCompletion(
            text=record.response_text,
            finish_reason=record.finish_reason,
            attempt_count=0,
        )


ORACLE_PERFECT = "perfect"
ORACLE_EMPTY = "empty"
ORACLE_CORRUPT = "corrupt"


class OracleBackend:
    """Scripted model for offline runs.

    perfect: returns the gold encoding for the prompted (instance, frame);
             candidate frames with no gold annotation get the empty output.
    empty:   always returns the empty output.
    corrupt: deterministic per-instance mutation of the gold (drops, renames,
             text edits, spurious elements), for exercising the metrics.
    """

    def __init__(
        self,
        mode: str,
        fmt: RepresentationFormat,
        gold: dict[tuple, tuple[FrameInstance, FrameDef]] | None = None,
        corrupt_seed: int = 0,
    ):
        if mode not in (ORACLE_PERFECT, ORACLE_EMPTY, ORACLE_CORRUPT):
            raise ValueError(f"unknown oracle mode {mode!r}")
        self.mode = mode
        self.fmt = fmt
        self.gold = gold or {}
        self.corrupt_seed = corrupt_seed
        self.model_name = f"oracle:{mode}"
        self.temperature = 0.0

    @staticmethod
    def gold_key(meta: dict) -> tuple:
        return (
            meta.get("document_id"),
            meta.get("sentence_id"),
            meta.get("frame_name"),
            meta.get("target_start"),
        )

    @classmethod
    def build_gold(cls, instances, lexicon) -> dict[tuple, tuple[FrameInstance, FrameDef]]:
        gold = {}
        for instance in instances:
            frame_def = lexicon.frame(instance.frame_name)
            if frame_def is None:
                continue
            key = (
                instance.document_id,
                instance.sentence_id,
                instance.frame_name,
                instance.target[0].start,
            )
            gold[key] = (instance, frame_def)
        return gold

    def _fence(self, body: str) -> str:
        lang = "json" if self.fmt.is_json else ""
        return f"```{lang}\n{body}\n```"

    def _empty_output(self, meta: dict) -> str:
        if self.fmt is RepresentationFormat.JSON_EXISTING:
            return self._fence("{}")
        if self.fmt is RepresentationFormat.MARKDOWN:
            return self._fence("")
        entry = self.gold.get(self.gold_key(meta))
        if self.fmt is RepresentationFormat.XML_TAGS:
            return self._fence(entry[0].sentence_text if entry else "")
        # json-complete: every defined element, all empty
        frame_def = entry[1] if entry else None
        names = frame_def.fe_names() if frame_def else ()
        return self._fence(json.dumps({name: "" for name in names}, ensure_ascii=False))

    def run(self, prompt: PromptRecord) -> RawCompletion:
        meta = prompt.meta
        if self.mode == ORACLE_EMPTY:
            return RawCompletion(text=self._empty_output(meta), finish_reason="stop")
        entry = self.gold.get(self.gold_key(meta))
        if entry is None:
            return RawCompletion(text=self._empty_output(meta), finish_reason="stop")
        instance, frame_def = entry
        if self.mode == ORACLE_PERFECT:
            return RawCompletion(text=self._fence(encode(self.fmt, instance, frame_def)), finish_reason="stop")
        return RawCompletion(
            text=self._fence(self._corrupted(instance, frame_def)), finish_reason="stop"
        )

    def _corrupted(self, instance: FrameInstance, frame_def: FrameDef) -> str:
        rng = random.Random(f"{self.corrupt_seed}:{instance.instance_key}")
        pairs = instance.fe_pairs()
        op = rng.choice(("drop", "rename", "edit", "spurious", "keep"))
        if op == "drop" and pairs:
            pairs.pop(rng.randrange(len(pairs)))
        elif op == "rename" and pairs:
            index = rng.randrange(len(pairs))
            pairs[index] = (f"Bogus_{rng.randrange(100)}", pairs[index][1])
        elif op == "edit" and pairs:
            index = rng.randrange(len(pairs))
            name, text = pairs[index]
            pairs[index] = (name, text + "x")
        elif op == "spurious":
            pairs.append((f"Bogus_{rng.randrange(100)}", "nothing"))
        if self.fmt is RepresentationFormat.MARKDOWN:
            return "\n".join(f"- {name}: {text}" for name, text in pairs)
        if self.fmt is RepresentationFormat.XML_TAGS:
            # Positional format: corruption is expressed by re-tagging only the
            # surviving (name, text) pairs at their first occurrence.
            sentence = instance.sentence_text
            out = []
            for name, text in pairs:
                out.append(f"<{name}>{text}</{name}>")
            return " ".join(out) if out else sentence
        obj: dict = {}
        for name, text in pairs:
            existing = obj.get(name)
            if existing is None:
                obj[name] = text
            elif isinstance(existing, list):
                existing.append(text)
            else:
                obj[name] = [existing, text]
        if self.fmt is RepresentationFormat.JSON_COMPLETE:
            complete = {name: "" for name in frame_def.fe_names()}
            complete.update(obj)
            obj = complete
        return json.dumps(obj, ensure_ascii=False)


def complete_record(
    backend: Backend, prompt: PromptRecord, cache: CompletionCache | None = None
) -> CompletionRecord:
    """One completion, cache-first; fresh successes are appended to the cache."""
    digest = request_digest(backend.model_name, backend.temperature, prompt.messages())
    if cache is not None:
        hit = cache.lookup(digest)
        if hit is not None:
            return CompletionRecord(
                request_digest=digest,
                model_name=backend.model_name,
                temperature=backend.temperature,
                prompt_meta=hit.prompt_meta,
                response_text=hit.response_text,
                latency_ms=0.0,
                attempt_count=0,
                finish_reason=hit.finish_reason,
            )
    started = time.perf_counter()
    raw = backend.run(prompt)
    latency_ms = (time.perf_counter() - started) * 1000.0
    record = CompletionRecord(
        request_digest=digest,
        model_name=backend.model_name,
        temperature=backend.temperature,
        prompt_meta=dict(prompt.meta),
        response_text=raw.text,
        latency_ms=latency_ms,
        attempt_count=raw.attempt_count,
        finish_reason=raw.finish_reason,
    )
    if cache is not None:
        cache.append(record)
    return record


def complete(backend: Backend, prompt: PromptRecord, cache: CompletionCache | None = None) -> str:
    return complete_record(backend, prompt, cache).response_text


@dataclass
class BatchItem:
    index: int
    text: str | None = None
    error: str | None = None
    record: CompletionRecord | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def complete_batch(
    backend: Backend,
    prompts: list[PromptRecord],
    max_in_flight: int = 8,
    cache: CompletionCache | None = None,
) -> list[BatchItem]:
    """Run prompts with bounded concurrency; item i of the result always
    corresponds to prompt i, and one failure never aborts the batch."""
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")
    items = [BatchItem(index=i) for i in range(len(prompts))]

    def _one(index: int) -> None:
        try:
            record = complete_record(backend, prompts[index], cache)
            items[index].text = record.response_text
            items[index].record = record
        except Exception as exc:  # per-item error slot, batch survives
            items[index].error = f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        list(pool.map(_one, range(len(prompts))))
    return items
