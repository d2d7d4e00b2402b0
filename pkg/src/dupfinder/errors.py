"""Exception hierarchy for the toolkit.

Every error raised by dupfinder code (as opposed to programming errors such
as TypeError) derives from DupfinderError, so callers and the CLI can catch
one base class and map it to a data-error exit code.
"""

from __future__ import annotations


class DupfinderError(Exception):
    """Base class for all toolkit errors."""


class IoFailure(DupfinderError):
    """A file could not be read or written."""


class MalformedRecord(DupfinderError):
    """An input row is missing required fields or cannot be parsed."""


class DuplicateId(DupfinderError):
    """The same record id appears more than once in one input."""


class EmptyCorpus(DupfinderError):
    """An operation that needs at least one record got an empty corpus."""


class UnknownId(DupfinderError):
    """A pair references a record id that is not in the corpus."""


class ZeroVector(DupfinderError):
    """A vector with zero norm reached a similarity computation."""


class MissingEmbedding(DupfinderError):
    """A record id has no vector in the supplied embedding store."""


class VectorFileError(DupfinderError):
    """A vector file violates the DFV1 format."""


class BadMagic(VectorFileError):
    """The file does not start with the DFV1 magic bytes."""


class DimensionMismatch(VectorFileError):
    """The declared vector dimension is invalid or inconsistent."""


class TruncatedFile(VectorFileError):
    """The file ends before the declared content is complete."""


class MissingMeasure(DupfinderError):
    """A score row lacks a measure required by the requested operation."""


class NoOverlap(DupfinderError):
    """No predicted pair has a usable ground-truth verdict."""


class DegenerateVariance(DupfinderError):
    """A correlation was requested over a constant or too-short series."""


class UnknownPair(DupfinderError):
    """A label was submitted for a pair outside the annotation session."""


class InvalidVerdict(DupfinderError):
    """A label was submitted with a verdict outside the allowed set."""
