"""Crystal-referenced polarization angles, visibility, and misalignment.

Measured polarizations are orthogonal to the transition dipole, so the
in-plane dipole angle is rotated by 90 degrees and folded modulo 60 (the
threefold lattice makes angles 60 degrees apart equivalent once the 180
degree head-tail symmetry is folded in).  Visibility is the in-plane
intensity fraction (|mu_x|^2 + |mu_y|^2) / |mu|^2, the measurable analog of
polarization-resolved PL contrast.

By default angles are built from component moduli, which confines the raw
dipole angle to [0, 90] and discards the relative phase of mu_x and mu_y;
``convention="signed"`` instead uses the polarization-ellipse major axis,
which retains the relative sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DipoleMoment

CONVENTIONS = ("modulus", "signed")


@dataclass(frozen=True)
class PolarizationResult:
    angle_deg: float | None          # [0, 60); None when purely out-of-plane
    visibility: float                # in [0, 1]
    raw_dipole_angle_deg: float | None  # [0, 180) from the crystal axis

    @property
    def out_of_plane(self) -> bool:
        return self.angle_deg is None


def polarization_from_dipole(
    mu: DipoleMoment,
    crystal_axis_deg: float = 0.0,
    convention: str = "modulus",
) -> PolarizationResult:
    """Polarization angle and in-plane visibility of a dipole moment.

    The raw dipole angle is measured from ``crystal_axis_deg`` and folded to
    [0, 180); the reported polarization angle is (raw + 90) mod 60.  A dipole
    with no in-plane component gets the out-of-plane flag (angle None).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    in_plane_sq = abs(mu.mu_x) ** 2 + abs(mu.mu_y) ** 2
    total_sq = in_plane_sq + abs(mu.mu_z) ** 2
    if total_sq == 0.0:
        raise ValueError("zero dipole has no polarization")
    visibility = in_plane_sq / total_sq
    if in_plane_sq == 0.0:
        return PolarizationResult(angle_deg=None, visibility=0.0, raw_dipole_angle_deg=None)

    if convention == "modulus":
        theta = math.degrees(math.atan2(abs(mu.mu_y), abs(mu.mu_x)))
    else:
        # polarization-ellipse major axis; keeps the mu_x/mu_y relative sign
        cross = 2.0 * (mu.mu_x * mu.mu_y.conjugate()).real
        diff = abs(mu.mu_x) ** 2 - abs(mu.mu_y) ** 2
        theta = math.degrees(0.5 * math.atan2(cross, diff))
    raw = (theta - crystal_axis_deg) % 180.0
    return PolarizationResult(
        angle_deg=(raw + 90.0) % 60.0,
        visibility=visibility,
        raw_dipole_angle_deg=raw,
    )


def misalignment(excitation: PolarizationResult, emission: PolarizationResult) -> float:
    """Angle between excitation and emission polarizations, folded into
    [0, 30] degrees by the 60-degree lattice symmetry."""
    if excitation.out_of_plane or emission.out_of_plane:
        raise ValueError("misalignment undefined for out-of-plane polarization")
    d = abs(excitation.angle_deg - emission.angle_deg) % 60.0
    return min(d, 60.0 - d)
