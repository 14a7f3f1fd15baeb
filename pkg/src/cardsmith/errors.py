"""Exception hierarchy for the card pipeline.

Every error carries an ``exit_code`` so the CLI can map failures onto its
contract (0 success, 1 validation errors, 2 I/O errors, 3 internal errors)
without a big if/else ladder.
"""


class CardError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


# --- I/O-flavoured errors (exit 2) ---------------------------------------

class MissingFile(CardError):
    exit_code = 2


class MissingFolder(CardError):
    exit_code = 2


class PermissionDenied(CardError):
    exit_code = 2


class CardIoError(CardError):
    """Read/write failure, wrapped with path context."""

    exit_code = 2


# --- ingest validation errors (exit 1) ------------------------------------

class MalformedHeader(CardError):
    pass


class MalformedRow(CardError):
    """A data row that cannot be parsed; message carries the 1-based row number."""


class UnknownLabel(CardError):
    pass


class ArgmaxMismatch(CardError):
    pass


class EmptyLog(CardError):
    pass


class NonMonotonicEpochs(CardError):
    pass


class ValueOutOfRange(CardError):
    pass


class YamlSyntaxError(CardError):
    """Unparseable YAML, or anchors/aliases (rejected for determinism)."""


# --- metrics / uncertainty -------------------------------------------------

class EmptyMatrix(CardError):
    pass


class InvalidLevel(CardError):
    pass


class CountExceedsN(CardError):
    pass


class TooFewReplicates(CardError):
    pass


# --- chartgen / render -----------------------------------------------------

class TooFewEpochs(CardError):
    pass


class InvalidVersion(CardError):
    pass


class MissingChart(CardError):
    pass


# --- versioning -------------------------------------------------------------

class VersionConflict(CardError):
    pass


class UnknownVersion(CardError):
    pass
