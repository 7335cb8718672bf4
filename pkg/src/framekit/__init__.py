"""Frame-semantic argument identification toolkit.

Subpackages and modules:

    corpus           FrameNet 1.7 ingestion, interchange files, splits
    representations  the four frame-element representation codecs
    prompting        prompt building, fine-tune export, subsampling
    llm_client       HTTP / replay / oracle chat-completion backends
    evaluation       exact-match metrics and benchmark correlations
    frame_id         frame identification from predicted elements
    cli              the `framekit` command-line entry point
"""

__version__ = "0.1.0"
