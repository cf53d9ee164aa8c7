"""Exception types shared across the package."""

from __future__ import annotations


class SiteRecError(Exception):
    """Base class for every error raised by siterec."""


# --- hierarchy / snapshot ---


class DuplicateCodeError(SiteRecError):
    """A site code occurs more than once."""


class UnknownParentError(SiteRecError):
    """A site references a parent code that does not exist."""


class LevelSkipError(SiteRecError):
    """A site's parent is not exactly one level above it."""


class CycleDetectedError(SiteRecError):
    """The parent relation contains a cycle."""


class UnknownLevelNameError(SiteRecError):
    """A level name is not part of the configured level scheme."""


class UnknownSiteError(SiteRecError):
    """A site code is not present in the hierarchy."""


class UnknownFactorError(SiteRecError):
    """A factor id is not registered in the snapshot."""


class UnresolvableAtRootError(SiteRecError):
    """A factor (or weight factor) has no resolvable value at a root site."""


class MissingFactorError(SiteRecError):
    """A factor needed for a derived quantity is absent or unresolvable."""


class ZeroNationalAverageError(SiteRecError):
    """The national per-inhabitant average is zero; an index cannot be formed."""


# --- ingest ---


class IngestError(SiteRecError):
    """Base class for dataset parsing and assembly failures."""


class MalformedRowError(IngestError):
    """A delimited row has the wrong shape (column count, bad header)."""


class EmptyFileError(IngestError):
    """A file contains no data rows."""


class NonNumericValueError(IngestError):
    """A numeric cell cannot be parsed (thousands separators are rejected)."""


class DuplicateObservationError(IngestError):
    """The same (site, year) appears twice for one factor."""


class ManifestError(IngestError):
    """The dataset manifest is invalid or references missing files."""


class SnapshotRefusedError(IngestError):
    """Snapshot construction was refused; carries the validation report."""

    def __init__(self, report):
        super().__init__("; ".join(report.fatal) or "snapshot refused")
        self.report = report


# --- requirement profiles / engine ---


class ProfileError(SiteRecError):
    """Base class for requirement-profile failures."""


class SchemaViolationError(ProfileError):
    """A profile document does not match the expected schema."""


class NonPositiveWeightError(ProfileError):
    """A criterion or rating weight is zero or negative."""


class UnsortedBreakpointsError(ProfileError):
    """Membership breakpoints are not strictly increasing in x."""


class EmptyFocusError(ProfileError):
    """A recommendation was requested with no regional focus."""


class InconsistentProfileError(ProfileError):
    """Must-have constraints are mutually unsatisfiable; carries the conflicts."""

    def __init__(self, conflicts):
        names = ", ".join(f"'{c.first}' vs '{c.second}'" for c in conflicts)
        super().__init__(f"profile is inconsistent: {names}")
        self.conflicts = tuple(conflicts)


# --- analysis ---


class LengthMismatchError(SiteRecError):
    """Paired vectors have different or insufficient length."""


class ZeroVarianceError(SiteRecError):
    """A vector is constant; a correlation is undefined."""


class SetNotInUniverseError(SiteRecError):
    """A site set contains codes outside the evaluation universe."""


class EmptyStoreSetError(SiteRecError):
    """An overlap percentage was requested for an empty store set."""


class EmptySampleError(SiteRecError):
    """A rank-sum test was requested with an empty sample."""
