"""Exception hierarchy shared by every module.

Each class carries a stable ``code`` so the HTTP layer can map failures to
wire-level error payloads without leaking stack traces.
"""

from __future__ import annotations


class InsightLoopError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


# --- specification grammar ---------------------------------------------------

class SpecSyntaxError(InsightLoopError):
    code = "syntax_error"


class SchemaError(InsightLoopError):
    """Structural violation in a parsed document; ``path`` names the offender."""

    code = "schema_error"

    def __init__(self, message: str, path: str = "", detail: object = None):
        super().__init__(message, detail)
        self.path = path

    def __str__(self) -> str:
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class UnknownView(InsightLoopError):
    code = "unknown_view"


class MalformedTutorial(InsightLoopError):
    code = "malformed_tutorial"


# --- tabular data -------------------------------------------------------------

class IoError(InsightLoopError):
    code = "io_error"


class RaggedRow(InsightLoopError):
    code = "ragged_row"

    def __init__(self, row_index: int, expected: int, got: int):
        super().__init__(
            f"row {row_index} has {got} fields, expected {expected}",
            detail={"row": row_index, "expected": expected, "got": got},
        )
        self.row_index = row_index


class EmptyFile(InsightLoopError):
    code = "empty_file"


class UnknownDim(InsightLoopError):
    code = "unknown_dim"


class UnknownMeasure(InsightLoopError):
    code = "unknown_measure"


class TypeMismatch(InsightLoopError):
    code = "type_mismatch"


class EmptyBase(InsightLoopError):
    code = "empty_base"


# --- insight computation ------------------------------------------------------

class TooFewPoints(InsightLoopError):
    code = "too_few_points"

    def __init__(self, needed: int, got: int):
        super().__init__(f"need at least {needed} points, got {got}",
                         detail={"needed": needed, "got": got})


class ZeroVariance(InsightLoopError):
    code = "zero_variance"


class ZeroTotal(InsightLoopError):
    code = "zero_total"


class MisalignedSeries(InsightLoopError):
    code = "misaligned_series"


class KeyNotFound(InsightLoopError):
    code = "key_not_found"


# --- recommendation pipeline --------------------------------------------------

class PlanParseError(InsightLoopError):
    code = "plan_parse_error"


class SubjectResolutionError(InsightLoopError):
    code = "subject_resolution_error"


class AnnotationTargetMissing(InsightLoopError):
    code = "annotation_target_missing"


# --- provider boundary --------------------------------------------------------

class ProviderError(InsightLoopError):
    code = "provider_error"


class MissingInput(InsightLoopError):
    code = "missing_input"

    def __init__(self, block: str):
        super().__init__(f"prompt input missing: {block}", detail={"block": block})
        self.block = block


# --- session provenance -------------------------------------------------------

class NoOpenRound(InsightLoopError):
    code = "no_open_round"


class RoundStillOpen(InsightLoopError):
    code = "round_open"


class UnknownRound(InsightLoopError):
    code = "unknown_round"


class CorruptSession(InsightLoopError):
    code = "corrupt_session"


# --- reporting ----------------------------------------------------------------

class EmptyRound(InsightLoopError):
    code = "empty_round"


class MissingImage(InsightLoopError):
    code = "missing_image"


# --- benchmark ----------------------------------------------------------------

class UnsupportedTask(InsightLoopError):
    code = "unsupported_task"
