"""Exception types shared across the package."""


class LdpcError(Exception):
    """Base class for all ldpcsim errors."""


class MalformedAlist(LdpcError):
    """alist text is structurally invalid (bad counts, range, duplicates)."""


class EmptyRowOrColumn(LdpcError):
    """A check node or variable node has no edges."""


class InfeasibleParameters(LdpcError):
    """Requested regular-code parameters cannot be satisfied."""


class LengthMismatch(LdpcError):
    """A vector's length does not match the code length."""


class ConfigurationError(LdpcError):
    """Decoder or simulator configuration is unusable for the given code."""


class NotDivisible(LdpcError):
    """Check count is not divisible by the requested slave count."""


class PacketOverflow(LdpcError):
    """A packet would exceed the wire size limit (internal assertion)."""


class PartitionMismatch(LdpcError):
    """Partition does not cover the matrix it is applied to."""


class DegenerateCostModel(LdpcError):
    """Cost model prices the run at zero time; throughput is undefined."""


class NoFeasiblePoint(LdpcError):
    """Calibration could not approach the targets within tolerance."""


class WorkerError(LdpcError):
    """A benchmark worker process failed."""
