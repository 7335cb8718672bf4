"""Prompt construction, fine-tune export, and training-set subsampling.

Prompt wording lives in editable template files under ``templates/``; the
defaults ship with the package and a directory of overrides can be supplied
to any builder. Placeholders: {task}, {notes}, {frame_name},
{frame_definition}, {exemplar_block}, {fe_block}, {marked_sentence}.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files
from pathlib import Path
from typing import Iterable, Sequence

from framekit.corpus.types import FrameDef, FrameInstance, Lexicon
from framekit.representations import MarkedSentence, RepresentationFormat, encode, mark_target


@dataclass(frozen=True)
class PromptRecord:
    """A system/user(/assistant) chat triple.

    `gold_assistant` is present only on fine-tuning records. `meta`
    identifies the instance and format the prompt was built for.
    """

    system: str
    user: str
    gold_assistant: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def messages(self) -> list[dict[str, str]]:
        messages = []
        if self.system:
            messages.append({"role": "system", "content": self.system})
        messages.append({"role": "user", "content": self.user})
        if self.gold_assistant is not None:
            messages.append({"role": "assistant", "content": self.gold_assistant})
        return messages


@dataclass(frozen=True)
class ExemplarPolicy:
    """How much frame documentation goes into a prompt."""

    max_frame_exemplars: int = 3
    max_fe_examples: int = 1
    include_exemplars: bool = True

    def __post_init__(self):
        if self.max_frame_exemplars < 0 or self.max_fe_examples < 0:
            raise ValueError("example counts must be >= 0")


DEFAULT_POLICY = ExemplarPolicy()


def _load_template(name: str, template_dir: str | Path | None) -> str:
    if template_dir is not None:
        override = Path(template_dir) / name
        if override.is_file():
            return override.read_text(encoding="utf-8")
    return (files("framekit") / "templates" / name).read_text(encoding="utf-8")


def _task_and_notes(fmt: RepresentationFormat, template_dir) -> tuple[str, str]:
    suffix = "json" if fmt.is_json else fmt.value
    task = _load_template(f"task_{suffix}.txt", template_dir).strip()
    notes = _load_template(f"notes_{suffix}.txt", template_dir).strip()
    return task, notes


def _exemplar_json(fes: Iterable[tuple[str, str]]) -> str:
    obj: dict[str, str] = {}
    for name, text in fes:
        obj.setdefault(name, text)
    return json.dumps(obj, ensure_ascii=False)


def render_exemplar_block(frame_def: FrameDef, policy: ExemplarPolicy) -> str:
    if not policy.include_exemplars or policy.max_frame_exemplars == 0 or not frame_def.exemplars:
        return ""
    lines = ["Examples:"]
    for exemplar in frame_def.exemplars[: policy.max_frame_exemplars]:
        lines.append(f"  - {exemplar.sentence} -> {_exemplar_json(exemplar.fes)}")
    return "\n".join(lines) + "\n"


def render_fe_block(frame_def: FrameDef, policy: ExemplarPolicy) -> str:
    blocks = []
    for fe in frame_def.fe_defs:
        lines = [f"{fe.name} ({fe.coreness.value}): {fe.definition}".rstrip()]
        if policy.include_exemplars:
            for sentence, fe_text in fe.fe_examples[: policy.max_fe_examples]:
                lines.append(f"  - {sentence} -> {_exemplar_json([(fe.name, fe_text)])}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def build_inference_prompt(
    frame_def: FrameDef,
    marked: MarkedSentence,
    fmt: RepresentationFormat,
    policy: ExemplarPolicy = DEFAULT_POLICY,
    template_dir: str | Path | None = None,
    meta: dict | None = None,
) -> PromptRecord:
    """Single-message prompt for zero/few-shot argument identification."""
    task, notes = _task_and_notes(fmt, template_dir)
    user = _load_template("inference.txt", template_dir).format(
        task=task,
        notes=notes,
        frame_name=frame_def.name,
        frame_definition=frame_def.definition,
        exemplar_block=render_exemplar_block(frame_def, policy),
        fe_block=render_fe_block(frame_def, policy),
        marked_sentence=marked.marked,
    )
    record_meta = {"frame_name": frame_def.name, "format": fmt.value}
    if meta:
        record_meta.update(meta)
    return PromptRecord(system="", user=user.rstrip("\n"), meta=record_meta)


def prompt_for_instance(
    instance: FrameInstance,
    frame_def: FrameDef,
    fmt: RepresentationFormat,
    policy: ExemplarPolicy = DEFAULT_POLICY,
    template_dir: str | Path | None = None,
    frame_override: FrameDef | None = None,
) -> PromptRecord:
    """Inference prompt for one gold instance (gold frame and target given).

    `frame_override` swaps in a different candidate frame while keeping the
    instance's identity in the metadata, which is what frame identification
    over candidate frames needs.
    """
    shown_frame = frame_override or frame_def
    marked = mark_target(instance.sentence_text, instance.target)
    return build_inference_prompt(
        shown_frame,
        marked,
        fmt,
        policy,
        template_dir,
        meta={
            "sentence_id": instance.sentence_id,
            "document_id": instance.document_id,
            "target_start": instance.target[0].start,
            "gold_frame": instance.frame_name,
        },
    )


def build_finetune_record(
    instance: FrameInstance,
    frame_def: FrameDef,
    fmt: RepresentationFormat,
    template_dir: str | Path | None = None,
) -> PromptRecord:
    """Chat record with the task in the system turn and the gold encoding in
    the assistant turn. Frame documentation examples are left out; training
    uses the full-text annotations alone."""
    task, notes = _task_and_notes(fmt, template_dir)
    bare = ExemplarPolicy(max_frame_exemplars=0, max_fe_examples=0, include_exemplars=False)
    marked = mark_target(instance.sentence_text, instance.target)
    system = _load_template("finetune_system.txt", template_dir).format(task=task, notes=notes)
    user = _load_template("finetune_user.txt", template_dir).format(
        frame_name=frame_def.name,
        frame_definition=frame_def.definition,
        fe_block=render_fe_block(frame_def, bare),
        marked_sentence=marked.marked,
    )
    fence = "json" if fmt.is_json else ""
    assistant = f"### Output:\n```{fence}\n{encode(fmt, instance, frame_def)}\n```"
    return PromptRecord(
        system=system.rstrip("\n"),
        user=user.rstrip("\n"),
        gold_assistant=assistant,
        meta={
            "sentence_id": instance.sentence_id,
            "document_id": instance.document_id,
            "frame_name": frame_def.name,
            "format": fmt.value,
            "target_start": instance.target[0].start,
        },
    )


@dataclass(frozen=True)
class FineTuneExportConfig:
    format: RepresentationFormat
    output_path: str | Path
    lora_rank_note: int | None = None
    template_dir: str | Path | None = None


def export_finetune_jsonl(
    instances: Iterable[FrameInstance],
    lexicon: Lexicon,
    config: FineTuneExportConfig,
) -> dict:
    """Write one {"messages": [...]} object per instance, ordered by
    (document, sentence, target start); returns a manifest with a record
    count and a rough chars/4 token estimate."""
    ordered = sorted(
        instances, key=lambda i: (i.document_id, i.sentence_id, i.target[0].start)
    )
    path = Path(config.output_path)
    count = 0
    total_chars = 0
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for instance in ordered:
            frame_def = lexicon.frame(instance.frame_name)
            if frame_def is None:
                raise ValueError(f"frame {instance.frame_name!r} not in lexicon")
            record = build_finetune_record(instance, frame_def, config.format, config.template_dir)
            line = json.dumps({"messages": record.messages()}, ensure_ascii=False)
            handle.write(line)
            handle.write("\n")
            count += 1
            total_chars += len(line)
    return {
        "record_count": count,
        "token_estimate": total_chars // 4,
        "token_estimate_note": "chars/4 heuristic, approximate",
        "format": config.format.value,
        "lora_rank_note": config.lora_rank_note,
        "output_path": str(path),
    }


class SubsampleStrategy(Enum):
    MOST_FE = "most-fe"
    RANDOM = "random"
    DIVERSE = "diverse"


def _group_by_frame(instances: Sequence[FrameInstance]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for index, instance in enumerate(instances):
        groups.setdefault(instance.frame_name, []).append(index)
    return groups


def _frame_rng(seed: int, frame_name: str) -> random.Random:
    # String seeds hash identically across processes, unlike object hashes.
    return random.Random(f"{seed}:{frame_name}")


def subsample(
    instances: Sequence[FrameInstance],
    strategy: SubsampleStrategy,
    k: int = 5,
    seed: int = 0,
) -> list[FrameInstance]:
    """Select up to `k` instances per frame.

    most-fe: the k with the most annotated elements (ties by corpus order).
    random:  k uniform without replacement, seeded per frame.
    diverse: greedy cover of the frame's element names (ties by element
             count, then corpus order), padded by the most-fe rule.

    The result keeps corpus order; identical inputs and seed give an
    identical sequence.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    selected: list[int] = []
    for frame_name, indexes in _group_by_frame(instances).items():
        if len(indexes) <= k:
            selected.extend(indexes)
            continue
        if strategy is SubsampleStrategy.MOST_FE:
            picked = _most_fe(instances, indexes, k)
        elif strategy is SubsampleStrategy.RANDOM:
            picked = _frame_rng(seed, frame_name).sample(indexes, k)
        else:
            picked = _diverse(instances, indexes, k)
        selected.extend(picked)
    return [instances[i] for i in sorted(selected)]


def _most_fe(instances: Sequence[FrameInstance], indexes: list[int], k: int) -> list[int]:
    return sorted(indexes, key=lambda i: (-instances[i].n_fes(), i))[:k]


def _diverse(instances: Sequence[FrameInstance], indexes: list[int], k: int) -> list[int]:
    remaining = list(indexes)
    covered: set[str] = set()
    picked: list[int] = []
    while remaining and len(picked) < k:
        gains = [
            (len({fe.name for fe in instances[i].fes} - covered), i) for i in remaining
        ]
        best_gain = max(gain for gain, _ in gains)
        if best_gain == 0:
            break
        candidates = [i for gain, i in gains if gain == best_gain]
        choice = min(candidates, key=lambda i: (-instances[i].n_fes(), i))
        picked.append(choice)
        remaining.remove(choice)
        covered.update(fe.name for fe in instances[choice].fes)
    if len(picked) < k and remaining:
        picked.extend(_most_fe(instances, remaining, k - len(picked)))
    return picked


def saturation_subsets(
    instances: Sequence[FrameInstance],
    fractions: Sequence[float],
    seed: int = 0,
) -> list[list[FrameInstance]]:
    """Nested subsets from a single seeded shuffle.

    Subset i is the first ceil(fraction_i * N) items of the shuffle, so each
    smaller subset is a strict prefix of every larger one.
    """
    if not fractions:
        raise ValueError("no fractions given")
    if list(fractions) != sorted(fractions):
        raise ValueError("fractions must be sorted ascending")
    if any(not (0.0 < f <= 1.0) for f in fractions):
        raise ValueError("fractions must be in (0, 1]")
    shuffled = list(instances)
    random.Random(seed).shuffle(shuffled)
    return [shuffled[: math.ceil(fraction * len(shuffled))] for fraction in fractions]


SATURATION_GRID = (0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 1.00)


def negative_finetune_record(
    instance: FrameInstance,
    candidate_frame: FrameDef,
    fmt: RepresentationFormat,
    template_dir: str | Path | None = None,
) -> PromptRecord:
    """Fine-tune record for a non-evoked candidate frame: the gold assistant
    output is the empty encoding, teaching the model to predict nothing when
    shown the wrong frame."""
    empty = FrameInstance(
        sentence_id=instance.sentence_id,
        document_id=instance.document_id,
        sentence_text=instance.sentence_text,
        frame_name=candidate_frame.name,
        target=instance.target,
        fes=(),
        lu_name=instance.lu_name,
    )
    return build_finetune_record(empty, candidate_frame, fmt, template_dir)
