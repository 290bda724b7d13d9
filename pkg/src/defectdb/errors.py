"""Exception types shared across the package."""


class DefectDbError(Exception):
    """Base class for all defectdb errors."""


class BundleError(DefectDbError):
    """Bundle directory is missing, malformed, or fails strict validation."""


class WfcFormatError(DefectDbError):
    """Plane-wave coefficient file is malformed or truncated."""


class LatticeMismatchError(DefectDbError):
    """Two wavefunctions do not share the same reciprocal lattice."""


class DegenerateLevelsError(DefectDbError):
    """Band energies too close for a dipole to be defined."""


class PhononFormatError(DefectDbError):
    """Phonon mode file is malformed or violates normalization."""


class IngestError(DefectDbError):
    """Manifest-level ingest failure (strict mode)."""


class UnknownDefectError(DefectDbError, KeyError):
    """Lookup of a defect id that is not in the index."""


class InvalidSignatureError(DefectDbError, ValueError):
    """Identification signature has no criteria or malformed bounds."""


class InvalidCursorError(DefectDbError, ValueError):
    """Pagination cursor cannot be decoded."""
