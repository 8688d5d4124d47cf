"""Exception hierarchy shared by all diffsim modules.

Every exception carries a short machine-readable ``kind`` used by the CLI
for its single-line error records and exit-code mapping: validation-style
failures exit with 1, degenerate-input signals with 2.
"""

from __future__ import annotations


class DiffsimError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class ValidationError(DiffsimError):
    """Input violates a precondition (shape, range, parameter, schema)."""

    kind = "validation"


class FormatError(DiffsimError):
    """A file does not conform to the expected on-disk format."""

    kind = "format"


class DataError(DiffsimError):
    """File content parsed but carries invalid values (NaN/Inf)."""

    kind = "data"


class IngestionError(DiffsimError):
    """A manifest-referenced input could not be loaded."""

    kind = "ingestion"


class FusionDepthExceededError(ValidationError):
    """More representations supplied than the fusion depth limit allows."""

    kind = "fusion_depth"


class DegenerateInputError(DiffsimError):
    """Base for signals where the input carries no usable variation."""

    kind = "degenerate"


class DegenerateRSMError(DegenerateInputError):
    """A similarity matrix centers to (numerically) zero."""

    kind = "degenerate_rsm"


class DegenerateBandwidthError(DegenerateInputError):
    """Median pairwise distance is zero, no RBF bandwidth can be inferred."""

    kind = "degenerate_bandwidth"


class ZeroVarianceError(DegenerateInputError):
    """A rank correlation was requested on a constant sequence."""

    kind = "zero_variance"
