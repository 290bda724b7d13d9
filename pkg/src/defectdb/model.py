"""Data model for defect records and their validation.

A :class:`DefectRecord` describes one defect species at a fixed charge and
spin multiplicity; each spin-conserving electronic transition it supports is
a :class:`TransitionRecord`.  Records are plain immutable dataclasses with a
canonical dict form used by the bundle serializer (see :mod:`defectdb.bundle`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .constants import EANG_TO_DEBYE, EV_NM

SITE_KINDS = (
    "substitution-on-B",
    "substitution-on-N",
    "vacancy-on-B",
    "vacancy-on-N",
    "antisite",
    "complex-member",
)
SPIN_MULTIPLICITIES = ("singlet", "doublet", "triplet")
SPIN_CHANNELS = ("up", "down")
HOST_GROUPS = ("III", "IV", "V", "VI")

# Main-group assignment for elements that occur as hBN dopants.
ELEMENT_GROUP = {
    "B": "III", "Al": "III", "Ga": "III", "In": "III", "Tl": "III",
    "C": "IV", "Si": "IV", "Ge": "IV", "Sn": "IV", "Pb": "IV",
    "N": "V", "P": "V", "As": "V", "Sb": "V", "Bi": "V",
    "O": "VI", "S": "VI", "Se": "VI", "Te": "VI",
}

# Sites that place an actual atom in the lattice (vacancies do not).
_ATOM_BEARING_SITES = ("substitution-on-B", "substitution-on-N", "antisite", "complex-member")

# Relative tolerances used by validate_record for derived quantities.
ZPL_NM_RTOL = 1e-6
RATE_LIFETIME_RTOL = 1e-12
MU_SQ_RTOL = 1e-9
ZPL_CONSISTENCY_TOL = 1e-9


def compute_zpl(ground_total: float, excited_total: float) -> float:
    """Zero-phonon line energy: total-energy difference of the relaxed
    excited and ground configurations, in eV.

    Raises ValueError for non-finite inputs or a non-positive result (which
    signals mislabeled ground/excited states).
    """
    if not (math.isfinite(ground_total) and math.isfinite(excited_total)):
        raise ValueError("total energies must be finite")
    zpl = excited_total - ground_total
    if zpl <= 0:
        raise ValueError(f"non-positive ZPL ({zpl:.6g} eV): ground/excited states mislabeled?")
    return zpl


@dataclass(frozen=True)
class DipoleMoment:
    """Transition dipole moment with complex Cartesian components in e*Angstrom.

    ``mu_sq`` is the squared modulus |mu_x|^2+|mu_y|^2+|mu_z|^2 converted to
    Debye^2 with the pinned e*Angstrom -> Debye factor.
    """

    mu_x: complex
    mu_y: complex
    mu_z: complex
    mu_sq: float

    @classmethod
    def from_components(cls, mu_x: complex, mu_y: complex, mu_z: complex) -> "DipoleMoment":
        mu_sq_eang = abs(mu_x) ** 2 + abs(mu_y) ** 2 + abs(mu_z) ** 2
        return cls(complex(mu_x), complex(mu_y), complex(mu_z), mu_sq_eang * EANG_TO_DEBYE**2)

    def to_dict(self) -> dict:
        return {
            "mu_x": [self.mu_x.real, self.mu_x.imag],
            "mu_y": [self.mu_y.real, self.mu_y.imag],
            "mu_z": [self.mu_z.real, self.mu_z.imag],
            "mu_sq": self.mu_sq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DipoleMoment":
        return cls(
            complex(d["mu_x"][0], d["mu_x"][1]),
            complex(d["mu_y"][0], d["mu_y"][1]),
            complex(d["mu_z"][0], d["mu_z"][1]),
            float(d["mu_sq"]),
        )


@dataclass(frozen=True)
class TransitionRecord:
    """One spin-conserving electronic transition of a defect."""

    spin_channel: str
    excited_total_energy: float
    zpl: float
    zpl_nm: float
    radiative_rate: float
    radiative_lifetime: float
    excitation_dipole: DipoleMoment | None = None
    emission_dipole: DipoleMoment | None = None
    excitation_polarization_deg: float | None = None
    emission_polarization_deg: float | None = None
    visibility_exc: float | None = None
    visibility_em: float | None = None
    misalignment_deg: float | None = None
    nonradiative_rate: float | None = None
    quantum_efficiency: float | None = None
    lineshape_ref: str | None = None
    hr_ref: str | None = None

    def to_dict(self) -> dict:
        return {
            "spin_channel": self.spin_channel,
            "excited_total_energy": self.excited_total_energy,
            "zpl": self.zpl,
            "zpl_nm": self.zpl_nm,
            "radiative_rate": self.radiative_rate,
            "radiative_lifetime": self.radiative_lifetime,
            "excitation_dipole": self.excitation_dipole.to_dict() if self.excitation_dipole else None,
            "emission_dipole": self.emission_dipole.to_dict() if self.emission_dipole else None,
            "excitation_polarization_deg": self.excitation_polarization_deg,
            "emission_polarization_deg": self.emission_polarization_deg,
            "visibility_exc": self.visibility_exc,
            "visibility_em": self.visibility_em,
            "misalignment_deg": self.misalignment_deg,
            "nonradiative_rate": self.nonradiative_rate,
            "quantum_efficiency": self.quantum_efficiency,
            "lineshape_ref": self.lineshape_ref,
            "hr_ref": self.hr_ref,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransitionRecord":
        return cls(
            spin_channel=d["spin_channel"],
            excited_total_energy=float(d["excited_total_energy"]),
            zpl=float(d["zpl"]),
            zpl_nm=float(d["zpl_nm"]),
            radiative_rate=float(d["radiative_rate"]),
            radiative_lifetime=math.inf if d["radiative_lifetime"] == "inf" else float(d["radiative_lifetime"]),
            excitation_dipole=DipoleMoment.from_dict(d["excitation_dipole"]) if d.get("excitation_dipole") else None,
            emission_dipole=DipoleMoment.from_dict(d["emission_dipole"]) if d.get("emission_dipole") else None,
            excitation_polarization_deg=d.get("excitation_polarization_deg"),
            emission_polarization_deg=d.get("emission_polarization_deg"),
            visibility_exc=d.get("visibility_exc"),
            visibility_em=d.get("visibility_em"),
            misalignment_deg=d.get("misalignment_deg"),
            nonradiative_rate=d.get("nonradiative_rate"),
            quantum_efficiency=d.get("quantum_efficiency"),
            lineshape_ref=d.get("lineshape_ref"),
            hr_ref=d.get("hr_ref"),
        )


@dataclass(frozen=True)
class DefectRecord:
    """One defect species at a fixed charge state and spin multiplicity."""

    id: str
    composition: tuple[tuple[str, str], ...]  # (element symbol, site kind)
    charge: int
    spin_multiplicity: str
    ground_total_energy: float
    transitions: tuple[TransitionRecord, ...] = ()
    host_group: str | None = None
    electron_count: int | None = None
    structure_ref: str | None = None
    memory_metrics: dict[str, float] | None = None
    provenance: str = ""

    def contained_elements(self) -> frozenset[str]:
        """Elements actually present as atoms (vacant sites contribute none)."""
        return frozenset(el for el, site in self.composition if site in _ATOM_BEARING_SITES)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "composition": [{"element": el, "site": site} for el, site in self.composition],
            "charge": self.charge,
            "spin_multiplicity": self.spin_multiplicity,
            "ground_total_energy": self.ground_total_energy,
            "transitions": [t.to_dict() for t in self.transitions],
            "host_group": self.host_group,
            "electron_count": self.electron_count,
            "structure_ref": self.structure_ref,
            "memory_metrics": self.memory_metrics,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DefectRecord":
        return cls(
            id=d["id"],
            composition=tuple((c["element"], c["site"]) for c in d["composition"]),
            charge=int(d["charge"]),
            spin_multiplicity=d["spin_multiplicity"],
            ground_total_energy=float(d["ground_total_energy"]),
            transitions=tuple(TransitionRecord.from_dict(t) for t in d["transitions"]),
            host_group=d.get("host_group"),
            electron_count=d.get("electron_count"),
            structure_ref=d.get("structure_ref"),
            memory_metrics=d.get("memory_metrics"),
            provenance=d.get("provenance", ""),
        )


def derive_defect_id(composition, charge: int, spin_multiplicity: str) -> str:
    """Deterministic record id from composition, charge and spin.

    Site tokens follow the usual defect notation: C on a boron site -> CB,
    a nitrogen vacancy -> VN, the N-on-B antisite -> NB.  A collision on
    ingest therefore means two entries describe the same defect.
    """
    tokens = []
    for element, site in composition:
        if site == "substitution-on-B":
            tokens.append(f"{element}B")
        elif site == "substitution-on-N":
            tokens.append(f"{element}N")
        elif site == "vacancy-on-B":
            tokens.append("VB")
        elif site == "vacancy-on-N":
            tokens.append("VN")
        elif site == "antisite":
            # host atom sitting on the opposite sublattice
            tokens.append("NB" if element == "N" else "BN")
        else:  # complex-member
            tokens.append(element)
    return f"{''.join(tokens)}_q{charge}_{spin_multiplicity}"


def derive_host_group(composition) -> str | None:
    """Periodic-table group (III-VI) of the dopant elements, or None.

    Vacancies carry no dopant; when dopants span several groups no single
    group applies and None is returned.
    """
    groups = {
        ELEMENT_GROUP.get(el)
        for el, site in composition
        if site in _ATOM_BEARING_SITES
    }
    groups.discard(None)
    if len(groups) == 1:
        return groups.pop()
    return None


def _check_range(violations, prefix, name, value, lo, hi):
    if value is not None and not (lo <= value <= hi):
        violations.append(f"{prefix}{name}: must be in [{lo}, {hi}], got {value}")


def _validate_transition(t: TransitionRecord, ground_total: float, prefix: str) -> list[str]:
    v: list[str] = []
    if t.spin_channel not in SPIN_CHANNELS:
        v.append(f"{prefix}spin_channel: must be one of {SPIN_CHANNELS}, got {t.spin_channel!r}")
    if not (t.zpl > 0):
        v.append(f"{prefix}zpl: must be positive, got {t.zpl}")
    else:
        expected = t.excited_total_energy - ground_total
        if abs(t.zpl - expected) > ZPL_CONSISTENCY_TOL * max(1.0, abs(expected)):
            v.append(
                f"{prefix}zpl: inconsistent with totals "
                f"(stored {t.zpl!r}, excited-ground {expected!r})"
            )
        nm = EV_NM / t.zpl
        if abs(t.zpl_nm - nm) > ZPL_NM_RTOL * nm:
            v.append(f"{prefix}zpl_nm: inconsistent with zpl (stored {t.zpl_nm!r}, expected {nm!r})")

    if t.radiative_rate < 0:
        v.append(f"{prefix}radiative_rate: must be >= 0, got {t.radiative_rate}")
    elif t.radiative_rate == 0:
        if not math.isinf(t.radiative_lifetime):
            v.append(f"{prefix}radiative_lifetime: must be infinite when rate is 0")
    else:
        prod = t.radiative_rate * t.radiative_lifetime
        if not math.isfinite(prod) or abs(prod - 1.0) > RATE_LIFETIME_RTOL:
            v.append(f"{prefix}radiative_lifetime: rate*lifetime = {prod!r}, must be 1 within {RATE_LIFETIME_RTOL}")

    if (t.nonradiative_rate is None) != (t.quantum_efficiency is None):
        v.append(f"{prefix}quantum_efficiency: present iff nonradiative_rate present")
    if t.nonradiative_rate is not None and t.nonradiative_rate < 0:
        v.append(f"{prefix}nonradiative_rate: must be >= 0, got {t.nonradiative_rate}")
    _check_range(v, prefix, "quantum_efficiency", t.quantum_efficiency, 0.0, 1.0)

    for name, dip in (("excitation_dipole", t.excitation_dipole), ("emission_dipole", t.emission_dipole)):
        if dip is None:
            continue
        if dip.mu_sq < 0:
            v.append(f"{prefix}{name}.mu_sq: must be >= 0, got {dip.mu_sq}")
        expected = (abs(dip.mu_x) ** 2 + abs(dip.mu_y) ** 2 + abs(dip.mu_z) ** 2) * EANG_TO_DEBYE**2
        if abs(dip.mu_sq - expected) > MU_SQ_RTOL * max(1.0, expected):
            v.append(f"{prefix}{name}.mu_sq: inconsistent with components (stored {dip.mu_sq!r}, expected {expected!r})")

    for name, angle in (
        ("excitation_polarization_deg", t.excitation_polarization_deg),
        ("emission_polarization_deg", t.emission_polarization_deg),
    ):
        if angle is not None and not (0.0 <= angle < 60.0):
            v.append(f"{prefix}{name}: must be in [0, 60), got {angle}")
    _check_range(v, prefix, "visibility_exc", t.visibility_exc, 0.0, 1.0)
    _check_range(v, prefix, "visibility_em", t.visibility_em, 0.0, 1.0)
    _check_range(v, prefix, "misalignment_deg", t.misalignment_deg, 0.0, 30.0)
    return v


def validate_record(record: DefectRecord) -> list[str]:
    """Check every record invariant; returns one message per violation.

    Violations are data, not exceptions: an empty list means the record is
    internally consistent.
    """
    v: list[str] = []
    if not record.id:
        v.append("id: must be non-empty")
    if record.charge not in (-1, 0, 1):
        v.append(f"charge: must be one of -1, 0, +1, got {record.charge}")
    if record.spin_multiplicity not in SPIN_MULTIPLICITIES:
        v.append(f"spin_multiplicity: must be one of {SPIN_MULTIPLICITIES}, got {record.spin_multiplicity!r}")
    elif record.electron_count is not None:
        odd = record.electron_count % 2 == 1
        if odd and record.spin_multiplicity != "doublet":
            v.append(
                f"spin_multiplicity: odd electron count ({record.electron_count}) "
                f"requires doublet, got {record.spin_multiplicity}"
            )
        if not odd and record.spin_multiplicity == "doublet":
            v.append(
                f"spin_multiplicity: even electron count ({record.electron_count}) "
                f"forbids doublet"
            )
    for el, site in record.composition:
        if site not in SITE_KINDS:
            v.append(f"composition: unknown site kind {site!r}")
        if not el and site not in ("vacancy-on-B", "vacancy-on-N"):
            v.append(f"composition: element symbol required for site {site!r}")
    if record.host_group is not None and record.host_group not in HOST_GROUPS:
        v.append(f"host_group: must be one of {HOST_GROUPS} or absent, got {record.host_group!r}")
    if not math.isfinite(record.ground_total_energy):
        v.append("ground_total_energy: must be finite")
    for i, t in enumerate(record.transitions):
        v.extend(_validate_transition(t, record.ground_total_energy, f"transitions[{i}]."))
    return v


def with_rescaled_refractive_index(t: TransitionRecord, old_n: float, new_n: float) -> TransitionRecord:
    """Transition with radiative rate/lifetime rescaled to a new host
    refractive index (the rate is linear in it); quantum efficiency is
    recomputed when a non-radiative rate is stored."""
    if old_n <= 0 or new_n <= 0:
        raise ValueError("refractive indices must be positive")
    rate = t.radiative_rate * (new_n / old_n)
    lifetime = math.inf if rate == 0 else 1.0 / rate
    qe = t.quantum_efficiency
    if t.nonradiative_rate is not None and (rate + t.nonradiative_rate) > 0:
        qe = rate / (rate + t.nonradiative_rate)
    return replace(t, radiative_rate=rate, radiative_lifetime=lifetime, quantum_efficiency=qe)
