"""Corpus statistics and checksums."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from framekit.corpus.types import FrameInstance


@dataclass(frozen=True)
class CorpusStats:
    """Headline counts for a corpus part.

    `sentences` counts distinct sentences that evoke at least one frame;
    sentences carrying only part-of-speech annotation do not contribute.
    """

    sentences: int
    frame_instances: int
    fes: int

    def as_dict(self) -> dict[str, int]:
        return {
            "sentences": self.sentences,
            "frame_instances": self.frame_instances,
            "fes": self.fes,
        }


def corpus_stats(instances: Iterable[FrameInstance]) -> CorpusStats:
    sentence_keys = set()
    n_instances = 0
    n_fes = 0
    for instance in instances:
        sentence_keys.add((instance.document_id, instance.sentence_id))
        n_instances += 1
        n_fes += instance.n_fes()
    return CorpusStats(len(sentence_keys), n_instances, n_fes)


def file_checksum(*paths: str | Path) -> str:
    """SHA-256 over the concatenated bytes of the given files."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()
