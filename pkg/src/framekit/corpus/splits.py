"""Document-level train/test splitting and generalization partitions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from framekit.corpus.framenet_xml import DocumentAnnotations
from framekit.corpus.types import CorpusPart, FrameInstance, Lexicon, SplitLabel
from framekit.errors import OverlappingSplit

WILDCARD = "*"


@dataclass(frozen=True)
class SplitConfig:
    """Document-id lists for the two splits.

    `train_docs` may be the single wildcard "*", meaning every document not
    named in `test_docs`.
    """

    train_docs: tuple[str, ...] | str
    test_docs: tuple[str, ...]

    @classmethod
    def from_file(cls, path: str | Path) -> "SplitConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        train = data["train_docs"]
        return cls(
            train_docs=WILDCARD if train == WILDCARD else tuple(train),
            test_docs=tuple(data["test_docs"]),
        )


def default_split_config() -> SplitConfig:
    """The split shipped with the package (conventional test documents)."""
    from importlib.resources import files

    path = files("framekit") / "data" / "fn17_fulltext_split.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    train = data["train_docs"]
    return SplitConfig(
        train_docs=WILDCARD if train == WILDCARD else tuple(train),
        test_docs=tuple(data["test_docs"]),
    )


def split_corpus(
    documents: list[DocumentAnnotations],
    config: SplitConfig,
    lexicon: Lexicon,
) -> tuple[CorpusPart, CorpusPart, list[str]]:
    """Route documents into train/test parts by id.

    Returns (train, test, excluded ids). A document id in both lists is a
    fatal OverlappingSplit; ids in neither list are excluded and reported.
    """
    test_set = set(config.test_docs)
    wildcard = config.train_docs == WILDCARD
    train_set = set() if wildcard else set(config.train_docs)
    if not wildcard:
        overlap = train_set & test_set
        if overlap:
            raise OverlappingSplit(sorted(overlap)[0])

    train_docs: list[str] = []
    test_docs: list[str] = []
    train_instances: list[FrameInstance] = []
    test_instances: list[FrameInstance] = []
    excluded: list[str] = []
    for doc in documents:
        if doc.document_id in test_set:
            test_docs.append(doc.document_id)
            test_instances.extend(doc.instances)
        elif wildcard or doc.document_id in train_set:
            train_docs.append(doc.document_id)
            train_instances.extend(doc.instances)
        else:
            excluded.append(doc.document_id)

    train = CorpusPart(SplitLabel.TRAIN, tuple(train_docs), tuple(train_instances), lexicon)
    test = CorpusPart(SplitLabel.TEST, tuple(test_docs), tuple(test_instances), lexicon)
    return train, test, excluded


SEEN = "seen"
UNSEEN_FRAME = "unseen_frame"
UNSEEN_FE = "unseen_fe"


@dataclass(frozen=True)
class UnseenPartition:
    """Test instances partitioned by what the training set has shown.

    unseen_frame: the instance's frame never occurs in train.
    unseen_fe: at least one (frame, fe name) pair never occurs in train.
    seen: everything else. The three lists partition the test instances.
    """

    seen: tuple[FrameInstance, ...]
    unseen_frame: tuple[FrameInstance, ...]
    unseen_fe: tuple[FrameInstance, ...]

    def labels(self, instances) -> list[str]:
        by_key = {}
        for label, group in (
            (SEEN, self.seen),
            (UNSEEN_FRAME, self.unseen_frame),
            (UNSEEN_FE, self.unseen_fe),
        ):
            for instance in group:
                by_key[id(instance)] = label
        return [by_key[id(instance)] for instance in instances]


def unseen_partition(train: CorpusPart, test: CorpusPart) -> UnseenPartition:
    train_frames = {instance.frame_name for instance in train.instances}
    train_pairs = {
        (instance.frame_name, fe.name)
        for instance in train.instances
        for fe in instance.fes
    }
    seen: list[FrameInstance] = []
    unseen_frame: list[FrameInstance] = []
    unseen_fe: list[FrameInstance] = []
    for instance in test.instances:
        if instance.frame_name not in train_frames:
            unseen_frame.append(instance)
        elif any((instance.frame_name, fe.name) not in train_pairs for fe in instance.fes):
            unseen_fe.append(instance)
        else:
            seen.append(instance)
    return UnseenPartition(tuple(seen), tuple(unseen_frame), tuple(unseen_fe))
