"""Exception hierarchy shared by all laglift modules."""


class LagliftError(Exception):
    """Base class for every error raised by laglift."""


class VersionParseError(LagliftError):
    """Version text could not be tokenized."""


class UnknownVersionError(LagliftError):
    """A version was expected in a release list but is absent."""


class InputFileError(LagliftError):
    """An input file is missing or unreadable."""


class DocumentFormatError(LagliftError):
    """A JSON document violates its schema (bad keys, values, or shape)."""


class DuplicateReleaseError(LagliftError):
    """Two releases of the same package compare equal."""


class DanglingTargetError(LagliftError):
    """A dependency declaration points at a coordinate absent from the registry."""


class UnknownPackageError(LagliftError):
    """Package id not present in the registry or graph."""


class UnknownReleaseError(LagliftError):
    """(package, version) pair not present in the registry."""


class NoStableReleaseError(LagliftError):
    """Package has no stable release to act as 'latest'."""


class TreeFormatError(LagliftError):
    """Dependency-tree text is malformed (coordinate, indentation, or empty)."""


class PackageMismatchError(LagliftError):
    """Two releases expected to belong to the same package do not."""


class PlanExecutionError(LagliftError):
    """Planning loop aborted; message names the failing iteration."""
