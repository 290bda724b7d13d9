"""defectdb: database engine and service for fluorescent defects in hBN.

Submodules:
    model, bundle       record types, validation, canonical persistence
    wavefunction        WFC parsing, momentum elements, transition dipoles
    photophysics        radiative/non-radiative rates, quantum efficiency
    lineshape           Huang-Rhys factors and PL spectrum synthesis
    polarization        crystal-referenced angles, visibility, misalignment
    query               in-memory index and identification
    ingest, stats, cli  bulk pipeline and reports
    api                 HTTP service
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    DefectRecord,
    DipoleMoment,
    TransitionRecord,
    compute_zpl,
    validate_record,
)
from .bundle import Bundle, load_bundle, save_bundle  # noqa: F401
from .query import Signature, build_index, identify  # noqa: F401
