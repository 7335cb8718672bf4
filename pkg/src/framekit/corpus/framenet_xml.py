"""Readers for the FrameNet 1.7 distribution layout.

Expected layout under the corpus root:

    frame/*.xml     one file per frame: definition markup, FE inventory with
                    coreness attributes, lexical units
    fulltext/*.xml  exhaustively annotated documents
    luIndex.xml     index of lexical units -> frames

Notes:

 * Label offsets in the source XML are inclusive on both ends; spans here are
   end-exclusive, so every label end is shifted by +1.
 * Definition text is stored as escaped markup (<def-root> with <fex>, <t>,
   <ex>, ... tags). The markup is not always well-formed XML once unescaped,
   so it is mined with regexes rather than re-parsed.
 * <fex name="..."> attributes may use either the full FE name or its
   abbreviation; both are resolved against the frame's FE inventory.
 * Annotation sets without a frame label (the POS-only "UNANN" sets), sets
   whose frame is a "Test35"-style placeholder, and FE labels carrying an
   itype attribute (null instantiations, which have no text span) are all
   excluded, each under its own counter.
 * A second FE layer (rank >= 2) occasionally annotates overlapping spans;
   only the rank-1 layer is read.
"""

from __future__ import annotations

import html
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from framekit.corpus.types import (
    Coreness,
    Exemplar,
    FeAnnotation,
    FrameDef,
    FrameElementDef,
    FrameInstance,
    LexicalUnit,
    Lexicon,
    Span,
)
from framekit.errors import MalformedXml, MissingDirectory, OffsetOutOfBounds

log = logging.getLogger(__name__)

FN_NS = "{http://framenet.icsi.berkeley.edu}"

_PLACEHOLDER_FRAME = re.compile(r"^Test\d+$")

_EX_RE = re.compile(r"<ex>(.*?)</ex>", re.S | re.I)
_FEX_RE = re.compile(r"""<fex\s+name=["']([^"']+)["']\s*>(.*?)</fex>""", re.S | re.I)
_T_RE = re.compile(r"<t>(.*?)</t>", re.S | re.I)
_TAG_RE = re.compile(r"</?[^<>]*>")
_WS_RE = re.compile(r"\s+")


def _plain_text(markup: str) -> str:
    return _WS_RE.sub(" ", html.unescape(_TAG_RE.sub("", markup))).strip()


def _example_sentence(block: str, mark_target: bool) -> str:
    """Flatten one <ex> block to a sentence, optionally keeping the target
    highlighted with double asterisks."""
    block = _FEX_RE.sub(lambda m: m.group(2), block)
    block = _T_RE.sub((lambda m: f"**{m.group(1)}**") if mark_target else (lambda m: m.group(1)), block)
    return _plain_text(block)


def _parse_frame_file(path: Path) -> FrameDef:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(str(path), exc.position, str(exc)) from exc

    frame_name = root.get("name", path.stem)

    fe_defs: list[FrameElementDef] = []
    name_map: dict[str, str] = {}
    raw_fes: list[tuple[str, Coreness, str]] = []
    for fe_el in root.findall(FN_NS + "FE"):
        name = fe_el.get("name", "").strip()
        coreness = Coreness.from_xml(fe_el.get("coreType", ""), str(path))
        abbrev = fe_el.get("abbrev", "").strip()
        name_map[name] = name
        if abbrev:
            name_map.setdefault(abbrev, name)
        defn_el = fe_el.find(FN_NS + "definition")
        raw_fes.append((name, coreness, defn_el.text or "" if defn_el is not None else ""))

    for name, coreness, markup in raw_fes:
        examples = []
        for block in _EX_RE.findall(markup):
            fe_text = None
            for fex_name, fex_body in _FEX_RE.findall(block):
                if name_map.get(fex_name, fex_name) == name:
                    fe_text = _plain_text(fex_body)
                    break
            if fe_text:
                examples.append((_example_sentence(block, mark_target=True), fe_text))
        fe_defs.append(
            FrameElementDef(
                name=name,
                coreness=coreness,
                definition=_plain_text(_EX_RE.sub("", markup)),
                fe_examples=tuple(examples),
            )
        )

    defn_el = root.find(FN_NS + "definition")
    frame_markup = defn_el.text or "" if defn_el is not None else ""
    exemplars = []
    for block in _EX_RE.findall(frame_markup):
        pairs = tuple(
            (name_map.get(fex_name, fex_name), _plain_text(fex_body))
            for fex_name, fex_body in _FEX_RE.findall(block)
            if _plain_text(fex_body)
        )
        sentence = _example_sentence(block, mark_target=False)
        if sentence and pairs:
            exemplars.append(Exemplar(sentence=sentence, fes=pairs))

    lexical_units = []
    seen_lus = set()
    for lu_el in root.findall(FN_NS + "lexUnit"):
        lu = _parse_lu_name(lu_el.get("name", ""), frame_name)
        if lu is not None and (lu.lemma, lu.pos) not in seen_lus:
            seen_lus.add((lu.lemma, lu.pos))
            lexical_units.append(lu)

    return FrameDef(
        name=frame_name,
        definition=_plain_text(_EX_RE.sub("", frame_markup)),
        fe_defs=tuple(fe_defs),
        lexical_units=tuple(lexical_units),
        exemplars=tuple(exemplars),
    )


def _parse_lu_name(raw: str, frame_name: str) -> LexicalUnit | None:
    raw = raw.strip()
    if "." not in raw:
        return None
    lemma, pos = raw.rsplit(".", 1)
    if not lemma or not pos:
        return None
    return LexicalUnit(lemma=lemma.lower(), pos=pos.lower(), frame_name=frame_name)


def load_lexicon(framenet_dir: str | Path) -> Lexicon:
    """Parse every frame file plus the lexical-unit index into a Lexicon.

    Raises MissingDirectory when the layout is incomplete, MalformedXml or
    UnknownCoreness (with file context) when a file cannot be interpreted.
    """
    root = Path(framenet_dir)
    frame_dir = root / "frame"
    lu_index_path = root / "luIndex.xml"
    if not root.is_dir():
        raise MissingDirectory(f"corpus directory not found: {root}")
    if not frame_dir.is_dir():
        raise MissingDirectory(f"frame directory not found: {frame_dir}")
    if not lu_index_path.is_file():
        raise MissingDirectory(f"lexical-unit index not found: {lu_index_path}")

    frame_files = sorted(frame_dir.glob("*.xml"))
    if not frame_files:
        raise MissingDirectory(f"no frame files under {frame_dir}")

    frames = [_parse_frame_file(path) for path in frame_files]
    by_name = {f.name: f for f in frames}

    # luIndex.xml drives candidate order; frame-file lexUnit entries fill in
    # anything the index is missing.
    lu_index: dict[tuple[str, str], tuple[str, ...]] = {}

    def _index(lemma: str, pos: str, frame_name: str) -> None:
        key = (lemma, pos)
        existing = lu_index.get(key, ())
        if frame_name not in existing:
            lu_index[key] = existing + (frame_name,)

    try:
        index_root = ET.parse(lu_index_path).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(str(lu_index_path), exc.position, str(exc)) from exc
    for lu_el in index_root.iter(FN_NS + "lu"):
        frame_name = lu_el.get("frameName", "")
        lu = _parse_lu_name(lu_el.get("name", ""), frame_name)
        if lu is not None and frame_name:
            _index(lu.lemma, lu.pos, frame_name)
    for frame_def in frames:
        for lu in frame_def.lexical_units:
            _index(lu.lemma, lu.pos, frame_def.name)

    log.info("loaded %d frames, %d lexical-unit keys", len(by_name), len(lu_index))
    return Lexicon(frames, lu_index)


@dataclass
class DocumentAnnotations:
    document_id: str
    instances: list[FrameInstance] = field(default_factory=list)


@dataclass
class FulltextReport:
    """Counters from a full-text load; skips are warnings, never fatal."""

    documents: int = 0
    sentences: int = 0
    instances: int = 0
    fes: int = 0
    sets_without_frame: int = 0
    placeholder_frames: int = 0
    missing_target: int = 0
    bad_offsets: int = 0
    overlapping_fes_dropped: int = 0
    null_instantiations: int = 0
    duplicate_sets: int = 0
    unresolved_frames: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


def _target_spans(aset: ET.Element, text: str) -> list[Span]:
    spans = []
    for layer in aset.findall(FN_NS + "layer"):
        if layer.get("name") != "Target":
            continue
        for label in layer.findall(FN_NS + "label"):
            if label.get("itype"):
                continue
            start, end = label.get("start"), label.get("end")
            if start is None or end is None:
                continue
            spans.append(Span.from_offsets(text, int(start), int(end) + 1))
    spans.sort(key=lambda s: s.start)
    return spans


def _fe_labels(aset: ET.Element) -> tuple[list[ET.Element], int]:
    """Rank-1 FE labels plus the count of null-instantiated ones."""
    labels: list[ET.Element] = []
    null_count = 0
    for layer in aset.findall(FN_NS + "layer"):
        if layer.get("name") != "FE" or layer.get("rank", "1") != "1":
            continue
        for label in layer.findall(FN_NS + "label"):
            if label.get("itype"):
                null_count += 1
            else:
                labels.append(label)
    return labels, null_count


def load_fulltext(
    framenet_dir: str | Path, lexicon: Lexicon
) -> tuple[list[DocumentAnnotations], FulltextReport]:
    """Parse fulltext/*.xml into frame instances, one document per file.

    Documents come back sorted by file name, which doubles as the document
    id used by the split configuration.
    """
    root = Path(framenet_dir)
    fulltext_dir = root / "fulltext"
    if not fulltext_dir.is_dir():
        raise MissingDirectory(f"fulltext directory not found: {fulltext_dir}")

    report = FulltextReport()
    documents = []
    for path in sorted(fulltext_dir.glob("*.xml")):
        try:
            doc_root = ET.parse(path).getroot()
        except ET.ParseError as exc:
            raise MalformedXml(str(path), exc.position, str(exc)) from exc
        doc = DocumentAnnotations(document_id=path.stem)
        report.documents += 1
        for sent_el in doc_root.findall(FN_NS + "sentence"):
            report.sentences += 1
            text_el = sent_el.find(FN_NS + "text")
            text = text_el.text or "" if text_el is not None else ""
            sentence_id = sent_el.get("ID") or f"{path.stem}#{report.sentences}"
            seen_keys: set[tuple[str, tuple[tuple[int, int], ...]]] = set()
            for aset in sent_el.findall(FN_NS + "annotationSet"):
                instance = _parse_annotation_set(
                    aset, text, sentence_id, path.stem, lexicon, report, seen_keys
                )
                if instance is not None:
                    doc.instances.append(instance)
                    report.instances += 1
                    report.fes += instance.n_fes()
        documents.append(doc)
    return documents, report


def _parse_annotation_set(
    aset: ET.Element,
    text: str,
    sentence_id: str,
    doc_id: str,
    lexicon: Lexicon,
    report: FulltextReport,
    seen_keys: set,
) -> FrameInstance | None:
    frame_name = aset.get("frameName")
    if not frame_name or aset.get("status") == "UNANN":
        report.sets_without_frame += 1
        return None
    if _PLACEHOLDER_FRAME.match(frame_name):
        report.placeholder_frames += 1
        return None

    try:
        target = _target_spans(aset, text)
    except OffsetOutOfBounds:
        log.warning("sentence %s: target offsets out of bounds, instance skipped", sentence_id)
        report.bad_offsets += 1
        return None
    if not target:
        report.missing_target += 1
        return None

    key = (frame_name, tuple((s.start, s.end) for s in target))
    if key in seen_keys:
        report.duplicate_sets += 1
        return None
    seen_keys.add(key)

    frame_def = lexicon.frame(frame_name)
    if frame_def is None:
        report.unresolved_frames += 1
    known_names = set(frame_def.fe_names()) if frame_def is not None else set()

    labels, null_count = _fe_labels(aset)
    report.null_instantiations += null_count
    fes: list[FeAnnotation] = []
    for label in labels:
        name = label.get("name", "")
        start, end = label.get("start"), label.get("end")
        if not name or start is None or end is None:
            continue
        try:
            span = Span.from_offsets(text, int(start), int(end) + 1)
        except OffsetOutOfBounds:
            log.warning("sentence %s: FE %r offsets out of bounds, instance skipped", sentence_id, name)
            report.bad_offsets += 1
            return None
        if any(span.overlaps(other.span) for other in fes):
            report.overlapping_fes_dropped += 1
            continue
        fes.append(FeAnnotation(name=name, span=span, undefined=name not in known_names))

    return FrameInstance(
        sentence_id=sentence_id,
        document_id=doc_id,
        sentence_text=text,
        frame_name=frame_name,
        target=tuple(target),
        fes=tuple(fes),
        lu_name=aset.get("luName") or None,
    )
