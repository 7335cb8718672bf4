"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class FramekitError(Exception):
    """Base class for all toolkit errors."""


# --- corpus loading ---------------------------------------------------------


class MissingDirectory(FramekitError):
    """A required corpus directory or index file is absent."""


class MalformedXml(FramekitError):
    def __init__(self, file: str, position: tuple[int, int] | None, detail: str):
        self.file = file
        self.position = position
        at = f" at line {position[0]}, column {position[1]}" if position else ""
        super().__init__(f"{file}{at}: {detail}")


class UnknownCoreness(FramekitError):
    def __init__(self, value: str, file: str = ""):
        self.value = value
        where = f" in {file}" if file else ""
        super().__init__(f"unknown frame element coreness {value!r}{where}")


class OffsetOutOfBounds(FramekitError):
    """A character span does not fit its sentence."""


class OverlappingSplit(FramekitError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"document {doc_id!r} appears in both train and test lists")


# --- representations --------------------------------------------------------


class OverlappingTarget(FramekitError):
    """Target spans overlap; they cannot be marked independently."""


class NestedSpans(FramekitError):
    """Frame element spans overlap; XML tag encoding cannot represent them."""


# --- evaluation -------------------------------------------------------------


class EmptyScoreList(FramekitError):
    """Aggregation requires at least one instance score."""


class DegenerateVariance(FramekitError):
    """A residual series has no variance; the correlation is undefined."""


# --- llm client -------------------------------------------------------------


class AuthError(FramekitError):
    """API key missing or rejected by the endpoint."""


class RateLimitExhausted(FramekitError):
    """Retries exhausted while the endpoint kept rate-limiting."""


class ReplayMiss(FramekitError):
    def __init__(self, digest: str):
        self.digest = digest
        super().__init__(f"no recorded completion for request digest {digest}")


class TransportError(FramekitError):
    """Network failure that persisted beyond the retry budget."""
