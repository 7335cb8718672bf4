"""Encode gold annotations into the four frame-element representation formats
and decode raw model output back into predictions.

Formats:

    markdown       one "- Name: text" line per annotated element
    xml            the sentence with each element span wrapped in <Name>...</Name>
    json-exist     JSON object listing only annotated elements
    json-complete  JSON object listing every defined element, "" when absent

An element annotated on two spans cannot be two JSON keys, so JSON formats
serialize repeated names as a single key with a list value and the decoder
accepts both strings and lists.

Decoding is best-effort and never raises: any input yields a PredictionSet,
possibly empty, with warnings describing what had to be repaired or dropped.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass
from enum import Enum
from warnings import catch_warnings, simplefilter

from framekit.corpus.types import FrameDef, FrameInstance, Span
from framekit.errors import NestedSpans, OverlappingTarget


class RepresentationFormat(Enum):
    MARKDOWN = "markdown"
    XML_TAGS = "xml"
    JSON_EXISTING = "json-exist"
    JSON_COMPLETE = "json-complete"

    @property
    def is_json(self) -> bool:
        return self in (RepresentationFormat.JSON_EXISTING, RepresentationFormat.JSON_COMPLETE)


# Warning kinds carried on PredictionSet.
WARN_NO_CODE_FENCE = "no_code_fence"
WARN_UNCLOSED_FENCE = "unclosed_fence"
WARN_UNKNOWN_FE = "unknown_fe"
WARN_UNPARSEABLE = "unparseable"
WARN_SENTENCE_MUTATED = "sentence_mutated"
WARN_MALFORMED_TAG = "malformed_tag"
WARN_NON_STRING_VALUE = "non_string_value"


@dataclass(frozen=True)
class DecodeWarning:
    kind: str
    detail: str = ""


@dataclass(frozen=True)
class PredictionSet:
    """Decoded model output: (element name, text) entries in output order.

    Duplicate names are preserved; empty texts never appear (an empty string
    in json-complete means "not present").
    """

    entries: tuple[tuple[str, str], ...] = ()
    warnings: tuple[DecodeWarning, ...] = ()

    def fe_names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def warning_kinds(self) -> tuple[str, ...]:
        return tuple(w.kind for w in self.warnings)


@dataclass(frozen=True)
class MarkedSentence:
    """A sentence with every target span wrapped in double asterisks."""

    original: str
    marked: str
    target: tuple[Span, ...]


def mark_target(sentence: str, target: list[Span] | tuple[Span, ...]) -> MarkedSentence:
    spans = sorted(target, key=lambda s: s.start)
    for left, right in zip(spans, spans[1:]):
        if left.overlaps(right):
            raise OverlappingTarget(
                f"target spans [{left.start},{left.end}) and [{right.start},{right.end}) overlap"
            )
    marked = sentence
    for span in reversed(spans):
        marked = f"{marked[:span.start]}**{marked[span.start:span.end]}**{marked[span.end:]}"
    return MarkedSentence(original=sentence, marked=marked, target=tuple(spans))


# --- encoding ----------------------------------------------------------------


def encode(fmt: RepresentationFormat, instance: FrameInstance, frame_def: FrameDef) -> str:
    pairs = instance.fe_pairs()
    if fmt is RepresentationFormat.MARKDOWN:
        return "\n".join(f"- {name}: {text}" for name, text in pairs)
    if fmt is RepresentationFormat.XML_TAGS:
        return _encode_xml(instance)
    if fmt is RepresentationFormat.JSON_EXISTING:
        return json.dumps(_fe_object(pairs), ensure_ascii=False)
    if fmt is RepresentationFormat.JSON_COMPLETE:
        obj: dict[str, object] = {fe.name: "" for fe in frame_def.fe_defs}
        for name, value in _fe_object(pairs).items():
            obj[name] = value
        return json.dumps(obj, ensure_ascii=False)
    raise ValueError(f"unknown format {fmt!r}")


def _fe_object(pairs: list[tuple[str, str]]) -> dict[str, object]:
    obj: dict[str, object] = {}
    for name, text in pairs:
        if name in obj:
            current = obj[name]
            if isinstance(current, list):
                current.append(text)
            else:
                obj[name] = [current, text]
        else:
            obj[name] = text
    return obj


def _encode_xml(instance: FrameInstance) -> str:
    spans = sorted(instance.fes, key=lambda fe: fe.span.start)
    for left, right in zip(spans, spans[1:]):
        if left.span.overlaps(right.span):
            raise NestedSpans(
                f"{instance.instance_key}: overlapping element spans cannot be tagged"
            )
    sentence = instance.sentence_text
    for fe in reversed(spans):
        s, e = fe.span.start, fe.span.end
        sentence = f"{sentence[:s]}<{fe.name}>{sentence[s:e]}</{fe.name}>{sentence[e:]}"
    return sentence


# --- code fence extraction ----------------------------------------------------

_CLOSED_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z0-9_-]*)[ \t]*\r?\n?(.*?)```", re.S)
_OPEN_FENCE_RE = re.compile(r"```[ \t]*([A-Za-z0-9_-]*)[ \t]*\r?\n?(.*)\Z", re.S)


def extract_code_block(raw: str) -> tuple[str, tuple[DecodeWarning, ...]]:
    """Pull the payload out of a fenced code block.

    Prefers the first block labeled `json`, then the first block of any
    label. Without any fence the raw text is returned trimmed, with a
    warning; an unterminated fence yields everything after it.
    """
    blocks = [(m.group(1).lower(), m.group(2)) for m in _CLOSED_FENCE_RE.finditer(raw)]
    if blocks:
        for lang, body in blocks:
            if lang == "json":
                return body.strip(), ()
        return blocks[0][1].strip(), ()
    open_match = _OPEN_FENCE_RE.search(raw)
    if open_match:
        return open_match.group(2).strip(), (DecodeWarning(WARN_UNCLOSED_FENCE),)
    return raw.strip(), (DecodeWarning(WARN_NO_CODE_FENCE),)


# --- decoding ----------------------------------------------------------------


def decode(
    fmt: RepresentationFormat,
    raw: str,
    frame_def: FrameDef,
    sentence: str = "",
) -> PredictionSet:
    """Parse raw model output into a PredictionSet, surviving arbitrary input."""
    body, warnings_tuple = extract_code_block(raw)
    warnings = list(warnings_tuple)
    if fmt is RepresentationFormat.MARKDOWN:
        entries = _decode_markdown(body, warnings)
    elif fmt is RepresentationFormat.XML_TAGS:
        entries = _decode_xml(body, sentence, warnings)
    else:
        entries = _decode_json(body, warnings)

    known = set(frame_def.fe_names())
    warned_unknown = set()
    for name, _ in entries:
        if name not in known and name not in warned_unknown:
            warned_unknown.add(name)
            warnings.append(DecodeWarning(WARN_UNKNOWN_FE, name))
    return PredictionSet(entries=tuple(entries), warnings=tuple(warnings))


_MD_ITEM_RE = re.compile(r"^\s*[-*]\s+(.*)$")


def _decode_markdown(body: str, warnings: list[DecodeWarning]) -> list[tuple[str, str]]:
    entries = []
    saw_content = False
    for line in body.splitlines():
        if line.strip():
            saw_content = True
        item = _MD_ITEM_RE.match(line)
        if not item:
            continue
        payload = item.group(1).strip()
        if ": " in payload:
            name, text = payload.split(": ", 1)
        elif ":" in payload:
            name, text = payload.split(":", 1)
        else:
            continue
        name = name.strip().strip("*`_").strip()
        text = text.strip()
        if name and text:
            entries.append((name, text))
    if saw_content and not entries:
        warnings.append(DecodeWarning(WARN_UNPARSEABLE, "no markdown list items found"))
    return entries


_SMART_QUOTES = {
    "“": '"',
    "”": '"',
    "„": '"',
    "‘": "'",
    "’": "'",
    "′": "'",
}
_TRAILING_COMMA_RE = re.compile(r",\s*([}\]])")
_KV_FALLBACK_RE = re.compile(r"[\"']([^\"':]{1,200})[\"']\s*:\s*[\"']([^\"']*)[\"']")
_MAX_JSON_LEN = 1_000_000


def _decode_json(body: str, warnings: list[DecodeWarning]) -> list[tuple[str, str]]:
    if not body.strip():
        return []
    if len(body) > _MAX_JSON_LEN:
        body = body[:_MAX_JSON_LEN]
        warnings.append(DecodeWarning(WARN_UNPARSEABLE, "output truncated before parsing"))
    cleaned = body
    for smart, plain in _SMART_QUOTES.items():
        cleaned = cleaned.replace(smart, plain)
    cleaned = _TRAILING_COMMA_RE.sub(r"\1", cleaned)

    obj = None
    try:
        obj = json.loads(cleaned)
    except (json.JSONDecodeError, ValueError):
        try:
            with catch_warnings():
                # Mangled model output trips invalid-escape warnings in the
                # literal parser; they are expected here.
                simplefilter("ignore", SyntaxWarning)
                simplefilter("ignore", DeprecationWarning)
                obj = ast.literal_eval(cleaned)
        except (ValueError, SyntaxError, MemoryError, RecursionError, TypeError):
            obj = None

    if not isinstance(obj, dict):
        pairs = _KV_FALLBACK_RE.findall(cleaned)
        warnings.append(DecodeWarning(WARN_UNPARSEABLE, "fell back to key/value scan"))
        return [(name, text) for name, text in pairs if text]

    entries: list[tuple[str, str]] = []
    for key, value in obj.items():
        name = key if isinstance(key, str) else str(key)
        values = value if isinstance(value, list) else [value]
        for item in values:
            if item is None or item == "":
                continue
            if not isinstance(item, str):
                warnings.append(DecodeWarning(WARN_NON_STRING_VALUE, f"{name}: {item!r}"))
                item = str(item)
            if item:
                entries.append((name, item))
    return entries


_XML_PAIR_RE = re.compile(r"<([A-Za-z_][\w.'-]*)>(.*?)</\1>", re.S)
_XML_ANY_TAG_RE = re.compile(r"</?[A-Za-z_][\w.'-]*>")


def _decode_xml(body: str, sentence: str, warnings: list[DecodeWarning]) -> list[tuple[str, str]]:
    entries = []
    for match in _XML_PAIR_RE.finditer(body):
        text = _XML_ANY_TAG_RE.sub("", match.group(2)).strip()
        if text:
            entries.append((match.group(1), text))

    remainder = _XML_PAIR_RE.sub(lambda m: m.group(2), body)
    # Repeat substitution to unwrap tags nested inside recovered values.
    while _XML_PAIR_RE.search(remainder):
        remainder = _XML_PAIR_RE.sub(lambda m: m.group(2), remainder)
    orphans = _XML_ANY_TAG_RE.findall(remainder)
    if orphans:
        warnings.append(DecodeWarning(WARN_MALFORMED_TAG, " ".join(orphans[:5])))
        remainder = _XML_ANY_TAG_RE.sub("", remainder)

    if not entries and body.strip() and not orphans and body.strip() != sentence.strip():
        # No tags at all and the text is not just the untouched sentence.
        if "<" not in body:
            warnings.append(DecodeWarning(WARN_UNPARSEABLE, "no element tags found"))
    if sentence and remainder.strip() != sentence.strip():
        warnings.append(DecodeWarning(WARN_SENTENCE_MUTATED))
    return entries


# --- span alignment -----------------------------------------------------------


def align_to_span(pred_text: str, sentence: str, occurrence: str = "first") -> Span | None:
    """Locate predicted text in the sentence; None when absent."""
    if not pred_text:
        return None
    if occurrence == "last":
        index = sentence.rfind(pred_text)
    else:
        index = sentence.find(pred_text)
    if index < 0:
        return None
    return Span(start=index, end=index + len(pred_text), text=pred_text)
