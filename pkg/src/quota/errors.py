"""Exception hierarchy.

Every error carries a stable kebab-case ``kind`` so the CLI can emit
machine-readable error JSON without string-matching messages.
"""

from __future__ import annotations


class QuotaError(Exception):
    """Base class for all errors raised by this package."""

    kind: str = "error"

    def to_json(self) -> dict:
        return {"error": self.kind, "message": str(self)}


# --- core model ---

class DimensionMismatchError(QuotaError):
    kind = "dimension-mismatch"


class NonFiniteValueError(QuotaError):
    kind = "non-finite-value"


class EmptyVideoError(QuotaError):
    kind = "empty-video"


# --- sampling ---

class NonPositiveDurationError(QuotaError):
    kind = "non-positive-duration"


class ZeroFramesError(QuotaError):
    kind = "zero-frames"


# --- query decoupling ---

class EmptyQueryError(QuotaError):
    kind = "empty-query"


class UnparseableResponseError(QuotaError):
    kind = "unparseable-response"


# --- scoring ---

class ScorerUnreachableError(QuotaError):
    kind = "scorer-unreachable"


class ScoreCountMismatchError(QuotaError):
    kind = "score-count-mismatch"


class OutOfRangeScoreError(QuotaError):
    kind = "out-of-range-score"


class NegativeScoreError(QuotaError):
    kind = "negative-score"


# --- allocation ---

class BudgetTooSmallError(QuotaError):
    kind = "budget-too-small"


class NonPositiveTargetError(QuotaError):
    kind = "non-positive-target"


class InfeasibleBudgetError(QuotaError):
    kind = "infeasible-budget"


# --- assigners ---

class UpsampleRequestedError(QuotaError):
    kind = "upsample-requested"


# --- file formats ---

class BadMagicError(QuotaError):
    kind = "bad-magic"


class TruncatedFileError(QuotaError):
    kind = "truncated-file"


class VersionUnsupportedError(QuotaError):
    kind = "version-unsupported"


class MalformedJsonError(QuotaError):
    kind = "malformed-json"


class NonNumericScoreError(QuotaError):
    kind = "non-numeric-score"


# --- pipeline / CLI ---

class FrameCountMismatchError(QuotaError):
    kind = "frame-count-mismatch"


class ConfigError(QuotaError):
    kind = "config-error"
