"""Frame identification from predicted frame elements.

For each target, every candidate frame from the lexical-unit lookup is run
through the element extractor with that frame's definition in the prompt.
Candidates that yield at least one element support the frame; a single
supporter wins outright, several supporters are tie-broken (random by
default, seeded), and none means no prediction. Lexicon filtering can
short-circuit unambiguous targets to their sole candidate without calling
the extractor.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from framekit.corpus.types import Lexicon
from framekit.representations import PredictionSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSet:
    """Candidate frames for one target occurrence, in lexicon order."""

    lemma: str
    pos: str
    candidates: tuple[str, ...]
    target_uid: str = ""

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidate list must be nonempty")

    @property
    def ambiguous(self) -> bool:
        return len(self.candidates) > 1


class Decision(Enum):
    ONLY_SUPPORTED = "only_supported"
    RANDOM_TIE_BREAK = "random_tie_break"
    LEXICON_FILTER = "lexicon_filter"
    NO_SUPPORT = "no_support"


@dataclass(frozen=True)
class FrameIdResult:
    target_uid: str
    lemma: str
    pos: str
    candidates: tuple[str, ...]
    predicted_frame: str | None
    supporting: tuple[str, ...]
    decided_by: Decision

    @property
    def ambiguous(self) -> bool:
        return len(self.candidates) > 1

    def as_dict(self) -> dict:
        return {
            "target_uid": self.target_uid,
            "lemma": self.lemma,
            "pos": self.pos,
            "candidates": list(self.candidates),
            "predicted_frame": self.predicted_frame,
            "supporting": list(self.supporting),
            "decided_by": self.decided_by.value,
        }


def candidates_for_target(
    lexicon: Lexicon, lemma: str, pos: str, target_uid: str = ""
) -> CandidateSet | None:
    """Frames owning a lexical unit with this (lemma, pos); None when the
    lemma is unknown (the caller counts and skips such targets)."""
    frames = lexicon.candidate_frames(lemma, pos)
    if not frames:
        return None
    deduped = tuple(dict.fromkeys(frames))
    return CandidateSet(lemma=lemma.lower(), pos=pos.lower(), candidates=deduped, target_uid=target_uid)


TIE_RANDOM = "random"
TIE_MOST_FES = "most-fes"
TIE_FIRST = "first"


def identify_frame(
    candidate_set: CandidateSet,
    fe_extractor: Callable[[str], PredictionSet],
    rng_seed: int = 0,
    tie_breaker: str = TIE_RANDOM,
) -> FrameIdResult:
    """Run the extractor once per candidate frame and pick the supported one.

    Extractor failures count as empty predictions. The random tie-break is
    seeded per target, so a rerun with the same seed and the same extractor
    outputs reproduces the result exactly.
    """
    predictions: dict[str, PredictionSet] = {}
    for frame_name in candidate_set.candidates:
        try:
            predictions[frame_name] = fe_extractor(frame_name)
        except Exception as exc:
            log.warning("extractor failed on %s for %s: %s", frame_name, candidate_set.target_uid, exc)
            predictions[frame_name] = PredictionSet()
    supporting = tuple(
        frame_name
        for frame_name in candidate_set.candidates
        if predictions[frame_name].entries
    )

    if not supporting:
        predicted, decided = None, Decision.NO_SUPPORT
    elif len(supporting) == 1:
        predicted, decided = supporting[0], Decision.ONLY_SUPPORTED
    elif tie_breaker == TIE_MOST_FES:
        predicted = max(supporting, key=lambda f: (len(predictions[f].entries), -supporting.index(f)))
        decided = Decision.RANDOM_TIE_BREAK
    elif tie_breaker == TIE_FIRST:
        predicted, decided = supporting[0], Decision.RANDOM_TIE_BREAK
    else:
        rng = random.Random(f"{rng_seed}:{candidate_set.target_uid}")
        predicted, decided = rng.choice(supporting), Decision.RANDOM_TIE_BREAK

    return FrameIdResult(
        target_uid=candidate_set.target_uid,
        lemma=candidate_set.lemma,
        pos=candidate_set.pos,
        candidates=candidate_set.candidates,
        predicted_frame=predicted,
        supporting=supporting,
        decided_by=decided,
    )


def lexicon_filter(candidate_set: CandidateSet) -> str | None:
    """The sole candidate for unambiguous targets; None otherwise."""
    if candidate_set.ambiguous:
        return None
    return candidate_set.candidates[0]


def apply_lexicon_filter(result: FrameIdResult) -> FrameIdResult:
    """Replace an unambiguous target's outcome with its sole candidate;
    ambiguous targets pass through untouched."""
    if result.ambiguous:
        return result
    return FrameIdResult(
        target_uid=result.target_uid,
        lemma=result.lemma,
        pos=result.pos,
        candidates=result.candidates,
        predicted_frame=result.candidates[0],
        supporting=result.supporting,
        decided_by=Decision.LEXICON_FILTER,
    )


@dataclass(frozen=True)
class FrameIdSummary:
    acc_all: float
    acc_ambiguous: float
    coverage: float
    n_targets: int
    n_ambiguous: int

    def as_dict(self) -> dict:
        return {
            "acc_all": self.acc_all,
            "acc_ambiguous": self.acc_ambiguous,
            "coverage": self.coverage,
            "n_targets": self.n_targets,
            "n_ambiguous": self.n_ambiguous,
        }


def evaluate_frame_id(
    pairs: list[tuple[FrameIdResult, str]],
    n_no_candidates: int = 0,
) -> FrameIdSummary:
    """Accuracy over all targets and over ambiguous ones.

    Missing predictions (no supported candidate) are wrong. Targets whose
    lemma produced no candidates at all are wrong too and excluded from the
    ambiguous bucket; coverage reports how many targets had candidates.
    """
    n_targets = len(pairs) + n_no_candidates
    if n_targets == 0:
        return FrameIdSummary(0.0, 0.0, 0.0, 0, 0)
    correct_all = sum(1 for result, gold in pairs if result.predicted_frame == gold)
    ambiguous = [(result, gold) for result, gold in pairs if result.ambiguous]
    correct_ambiguous = sum(1 for result, gold in ambiguous if result.predicted_frame == gold)
    return FrameIdSummary(
        acc_all=correct_all / n_targets,
        acc_ambiguous=correct_ambiguous / len(ambiguous) if ambiguous else 0.0,
        coverage=len(pairs) / n_targets,
        n_targets=n_targets,
        n_ambiguous=len(ambiguous),
    )
