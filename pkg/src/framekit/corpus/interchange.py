"""Line-delimited interchange format for annotated instances.

One JSON object per line, UTF-8, character-based end-exclusive offsets:

    {"sentence": ..., "doc_id": ..., "frame": ...,
     "target": [[start, end], ...],
     "fes": [{"name": ..., "start": ..., "end": ...}, ...]}

`sentence_id` and `lu` are optional on input and always written on output so
that an export/load cycle reproduces instances exactly. Out-of-domain files
may annotate element names a frame does not define; those are kept and
flagged, not rejected.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from framekit.corpus.types import (
    CorpusPart,
    FeAnnotation,
    FrameInstance,
    Lexicon,
    Span,
    SplitLabel,
)
from framekit.errors import OffsetOutOfBounds

log = logging.getLogger(__name__)


@dataclass
class InterchangeReport:
    records: int = 0
    malformed_records: int = 0
    undefined_fes: int = 0
    unresolved_frames: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


def instance_to_record(instance: FrameInstance) -> dict:
    record = {
        "sentence": instance.sentence_text,
        "doc_id": instance.document_id,
        "sentence_id": instance.sentence_id,
        "frame": instance.frame_name,
        "target": [[span.start, span.end] for span in instance.target],
        "fes": [
            {"name": fe.name, "start": fe.span.start, "end": fe.span.end}
            for fe in instance.fes
        ],
    }
    if instance.lu_name:
        record["lu"] = instance.lu_name
    return record


def record_to_instance(record: dict, lexicon: Lexicon | None, line_no: int) -> FrameInstance:
    sentence = record["sentence"]
    doc_id = record["doc_id"]
    frame_name = record["frame"]
    sentence_id = str(record.get("sentence_id") or f"{doc_id}:{line_no}")
    target = tuple(Span.from_offsets(sentence, int(s), int(e)) for s, e in record["target"])
    if not target:
        raise ValueError("record has no target span")

    frame_def = lexicon.frame(frame_name) if lexicon is not None else None
    known_names = set(frame_def.fe_names()) if frame_def is not None else set()
    fes = []
    for fe in record["fes"]:
        span = Span.from_offsets(sentence, int(fe["start"]), int(fe["end"]))
        if any(span.overlaps(prev.span) for prev in fes):
            raise ValueError(f"overlapping FE span for {fe['name']!r}")
        fes.append(FeAnnotation(name=fe["name"], span=span, undefined=fe["name"] not in known_names))
    return FrameInstance(
        sentence_id=sentence_id,
        document_id=doc_id,
        sentence_text=sentence,
        frame_name=frame_name,
        target=target,
        fes=tuple(fes),
        lu_name=record.get("lu"),
    )


def export_interchange(instances, path: str | Path) -> int:
    """Write instances one-per-line; returns the record count.

    Output is deterministic for a given instance sequence, so re-exports are
    byte-identical.
    """
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for instance in instances:
            handle.write(json.dumps(instance_to_record(instance), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def load_interchange(
    path: str | Path,
    lexicon: Lexicon,
    label: SplitLabel = SplitLabel.OUT_OF_DOMAIN,
) -> tuple[CorpusPart, InterchangeReport]:
    """Load an interchange file; malformed lines are skipped with a warning."""
    path = Path(path)
    report = InterchangeReport()
    instances: list[FrameInstance] = []
    documents: list[str] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                instance = record_to_instance(json.loads(line), lexicon, line_no)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, OffsetOutOfBounds) as exc:
                log.warning("%s:%d: malformed record skipped (%s)", path, line_no, exc)
                report.malformed_records += 1
                continue
            report.records += 1
            report.undefined_fes += sum(1 for fe in instance.fes if fe.undefined)
            if lexicon.frame(instance.frame_name) is None:
                report.unresolved_frames += 1
            if instance.document_id not in documents:
                documents.append(instance.document_id)
            instances.append(instance)
    part = CorpusPart(
        label=label,
        documents=tuple(documents),
        instances=tuple(instances),
        lexicon=lexicon,
    )
    return part, report
