"""Core corpus data model: frames, lexical units, spans, and annotated instances.

All types are immutable after construction; loaders build them once and the
rest of the toolkit only reads them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from framekit.errors import OffsetOutOfBounds, UnknownCoreness


class Coreness(enum.Enum):
    """Coreness status of a frame element, as labeled in the source XML."""

    CORE = "Core"
    CORE_UNEXPRESSED = "Core-Unexpressed"
    PERIPHERAL = "Peripheral"
    EXTRA_THEMATIC = "Extra-Thematic"

    @classmethod
    def from_xml(cls, value: str, file: str = "") -> "Coreness":
        for member in cls:
            if member.value == value:
                return member
        raise UnknownCoreness(value, file)


@dataclass(frozen=True)
class Span:
    """Character span over a sentence: 0-based start, exclusive end.

    Offsets count Unicode scalar values, not bytes. `text` always equals
    the covered substring of the sentence the span was built from.
    """

    start: int
    end: int
    text: str

    @classmethod
    def from_offsets(cls, sentence: str, start: int, end: int) -> "Span":
        if not (0 <= start < end <= len(sentence)):
            raise OffsetOutOfBounds(
                f"span [{start}, {end}) does not fit sentence of length {len(sentence)}"
            )
        return cls(start, end, sentence[start:end])

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class FrameElementDef:
    """One frame element of a frame: name, coreness, prose definition, and
    example sentences drawn from the element's documentation.

    Each example is a (sentence, element text) pair; the sentence keeps its
    target highlighted with double asterisks.
    """

    name: str
    coreness: Coreness
    definition: str = ""
    fe_examples: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class LexicalUnit:
    """A lemma.pos pairing bound to one frame (e.g. begin.v)."""

    lemma: str
    pos: str
    frame_name: str

    @property
    def name(self) -> str:
        return f"{self.lemma}.{self.pos}"


@dataclass(frozen=True)
class Exemplar:
    """An example sentence from a frame's documentation with its annotated
    element texts, in documentation order."""

    sentence: str
    fes: tuple[tuple[str, str], ...] = ()

    def fe_map(self) -> dict[str, str]:
        return dict(self.fes)


@dataclass(frozen=True)
class FrameDef:
    name: str
    definition: str = ""
    fe_defs: tuple[FrameElementDef, ...] = ()
    lexical_units: tuple[LexicalUnit, ...] = ()
    exemplars: tuple[Exemplar, ...] = ()

    def fe_names(self) -> tuple[str, ...]:
        return tuple(fe.name for fe in self.fe_defs)

    def find_fe(self, name: str) -> FrameElementDef | None:
        for fe in self.fe_defs:
            if fe.name == name:
                return fe
        return None


@dataclass(frozen=True)
class FeAnnotation:
    """One annotated frame element occurrence.

    `undefined` marks element names that do not resolve in the frame's
    definition (out-of-domain data contains such annotations; they are kept
    and scored rather than rejected).
    """

    name: str
    span: Span
    undefined: bool = False


@dataclass(frozen=True)
class FrameInstance:
    """One evoked frame in one sentence: the unit of prediction and scoring."""

    sentence_id: str
    document_id: str
    sentence_text: str
    frame_name: str
    target: tuple[Span, ...]
    fes: tuple[FeAnnotation, ...] = ()
    lu_name: str | None = None

    @property
    def target_key(self) -> str:
        """Identity of the evoking target, shared by candidate frames."""
        return f"{self.document_id}:{self.sentence_id}:{self.target[0].start}"

    @property
    def instance_key(self) -> str:
        return f"{self.target_key}:{self.frame_name}"

    def fe_pairs(self) -> list[tuple[str, str]]:
        """(element name, covered text) pairs in annotation order."""
        return [(fe.name, fe.span.text) for fe in self.fes]

    def n_fes(self) -> int:
        return len(self.fes)


def validate_instance(instance: FrameInstance) -> None:
    """Raise ValueError if the instance violates the span invariants."""
    text = instance.sentence_text
    if not instance.target:
        raise ValueError(f"{instance.instance_key}: no target span")
    for span in instance.target:
        _check_span(span, text, instance.instance_key)
    spans = sorted((fe.span for fe in instance.fes), key=lambda s: s.start)
    for span in spans:
        _check_span(span, text, instance.instance_key)
    for left, right in zip(spans, spans[1:]):
        if left.overlaps(right):
            raise ValueError(
                f"{instance.instance_key}: frame element spans overlap "
                f"([{left.start},{left.end}) and [{right.start},{right.end}))"
            )


def _check_span(span: Span, sentence: str, context: str) -> None:
    if not (0 <= span.start < span.end <= len(sentence)):
        raise ValueError(f"{context}: span [{span.start},{span.end}) out of bounds")
    if sentence[span.start : span.end] != span.text:
        raise ValueError(f"{context}: span text does not match sentence substring")


class Lexicon:
    """All frame definitions plus the lexical-unit index.

    Frames keep load order (document order of the source files); candidate
    frame lists for a (lemma, pos) pair keep index order.
    """

    def __init__(self, frames: list[FrameDef], lu_index: dict[tuple[str, str], tuple[str, ...]] | None = None):
        self._frames: dict[str, FrameDef] = {f.name: f for f in frames}
        if lu_index is None:
            lu_index = {}
            for frame_def in frames:
                for lu in frame_def.lexical_units:
                    key = (lu.lemma.lower(), lu.pos.lower())
                    existing = lu_index.get(key, ())
                    if frame_def.name not in existing:
                        lu_index[key] = existing + (frame_def.name,)
        self._lu_index = lu_index

    def __len__(self) -> int:
        return len(self._frames)

    def __contains__(self, frame_name: str) -> bool:
        return frame_name in self._frames

    def frame(self, name: str) -> FrameDef | None:
        return self._frames.get(name)

    def frames(self) -> list[FrameDef]:
        return list(self._frames.values())

    def frame_names(self) -> list[str]:
        return list(self._frames)

    def candidate_frames(self, lemma: str, pos: str) -> tuple[str, ...]:
        return self._lu_index.get((lemma.lower(), pos.lower()), ())

    @property
    def lu_index(self) -> dict[tuple[str, str], tuple[str, ...]]:
        return dict(self._lu_index)

    # --- serialization for the ingest cache ---------------------------------

    def to_dict(self) -> dict:
        return {
            "frames": [
                {
                    "name": f.name,
                    "definition": f.definition,
                    "fe_defs": [
                        {
                            "name": fe.name,
                            "coreness": fe.coreness.value,
                            "definition": fe.definition,
                            "fe_examples": [list(pair) for pair in fe.fe_examples],
                        }
                        for fe in f.fe_defs
                    ],
                    "lexical_units": [[lu.lemma, lu.pos] for lu in f.lexical_units],
                    "exemplars": [
                        {"sentence": ex.sentence, "fes": [list(pair) for pair in ex.fes]}
                        for ex in f.exemplars
                    ],
                }
                for f in self._frames.values()
            ],
            "lu_index": [
                [lemma, pos, list(frames)] for (lemma, pos), frames in self._lu_index.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Lexicon":
        frames = []
        for fd in data["frames"]:
            frames.append(
                FrameDef(
                    name=fd["name"],
                    definition=fd["definition"],
                    fe_defs=tuple(
                        FrameElementDef(
                            name=fe["name"],
                            coreness=Coreness(fe["coreness"]),
                            definition=fe["definition"],
                            fe_examples=tuple((s, t) for s, t in fe["fe_examples"]),
                        )
                        for fe in fd["fe_defs"]
                    ),
                    lexical_units=tuple(
                        LexicalUnit(lemma, pos, fd["name"]) for lemma, pos in fd["lexical_units"]
                    ),
                    exemplars=tuple(
                        Exemplar(ex["sentence"], tuple((n, t) for n, t in ex["fes"]))
                        for ex in fd["exemplars"]
                    ),
                )
            )
        lu_index = {
            (lemma, pos): tuple(frame_names) for lemma, pos, frame_names in data["lu_index"]
        }
        return cls(frames, lu_index)


class SplitLabel(enum.Enum):
    TRAIN = "train"
    TEST = "test"
    OUT_OF_DOMAIN = "ood"


@dataclass(frozen=True)
class CorpusPart:
    """An immutable slice of the corpus: documents, instances, and the lexicon
    they resolve against."""

    label: SplitLabel
    documents: tuple[str, ...]
    instances: tuple[FrameInstance, ...]
    lexicon: Lexicon = field(repr=False, compare=False, default=None)  # type: ignore[assignment]
