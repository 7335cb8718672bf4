from framekit.corpus.framenet_xml import (
    DocumentAnnotations,
    FulltextReport,
    load_fulltext,
    load_lexicon,
)
from framekit.corpus.interchange import (
    InterchangeReport,
    export_interchange,
    instance_to_record,
    load_interchange,
    record_to_instance,
)
from framekit.corpus.splits import (
    SEEN,
    UNSEEN_FE,
    UNSEEN_FRAME,
    SplitConfig,
    UnseenPartition,
    default_split_config,
    split_corpus,
    unseen_partition,
)
from framekit.corpus.stats import CorpusStats, corpus_stats, file_checksum
from framekit.corpus.types import (
    Coreness,
    CorpusPart,
    Exemplar,
    FeAnnotation,
    FrameDef,
    FrameElementDef,
    FrameInstance,
    LexicalUnit,
    Lexicon,
    Span,
    SplitLabel,
    validate_instance,
)

__all__ = [
    "Coreness",
    "CorpusPart",
    "CorpusStats",
    "DocumentAnnotations",
    "Exemplar",
    "FeAnnotation",
    "FrameDef",
    "FrameElementDef",
    "FrameInstance",
    "FulltextReport",
    "InterchangeReport",
    "LexicalUnit",
    "Lexicon",
    "SEEN",
    "Span",
    "SplitConfig",
    "SplitLabel",
    "UNSEEN_FE",
    "UNSEEN_FRAME",
    "UnseenPartition",
    "corpus_stats",
    "default_split_config",
    "export_interchange",
    "file_checksum",
    "instance_to_record",
    "load_fulltext",
    "load_interchange",
    "load_lexicon",
    "record_to_instance",
    "split_corpus",
    "unseen_partition",
    "validate_instance",
]
