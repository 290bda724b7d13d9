"""Radiative and non-radiative transition rates and quantum efficiency.

Radiative decay of a spin-conserving transition:

    Gamma_R = n_D e^2 / (3 pi eps0 hbar^4 c^3) * E0^3 * mu^2

with E0 the zero-phonon-line energy and mu^2 the squared transition dipole.
The host refractive index n_D defaults to 1.85 (hBN in the visible) and is
kept an open parameter throughout the pipeline.  The lifetime is the inverse
rate; a dark transition (mu^2 = 0) gets an infinite-lifetime sentinel.

Intersystem-crossing rates follow the golden rule with supplied
electron-phonon coupling tables; the energy-conserving delta function is
broadened to a normalized Gaussian of width sigma and initial vibrational
states are weighted by a Boltzmann distribution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import C_LIGHT, DEBYE_CM, EPS0, EV_J, HBAR_EVS, HBAR_J, KB_EV

DEFAULT_REFRACTIVE_INDEX = 1.85
DEFAULT_BROADENING_EV = 0.01


@dataclass(frozen=True)
class RadiativeResult:
    rate: float                  # 1/s
    lifetime: float              # s (math.inf for a dark transition)
    refractive_index_used: float


@dataclass(frozen=True)
class CouplingTable:
    """Electron-phonon coupling strengths |<fm|H|in>|^2 between vibrational
    levels of the initial and final electronic states, in eV^2."""

    degeneracy: int
    temperature: float  # K
    e_initial: np.ndarray
    e_final: np.ndarray
    coupling_sq: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e_initial", np.asarray(self.e_initial, dtype=float))
        object.__setattr__(self, "e_final", np.asarray(self.e_final, dtype=float))
        object.__setattr__(self, "coupling_sq", np.asarray(self.coupling_sq, dtype=float))
        if not (len(self.e_initial) == len(self.e_final) == len(self.coupling_sq)):
            raise ValueError("coupling table columns must have equal length")
        if self.degeneracy < 1:
            raise ValueError(f"degeneracy must be a positive integer, got {self.degeneracy}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if np.any(self.coupling_sq < 0):
            raise ValueError("coupling_sq entries must be >= 0")

    def __len__(self):
        return len(self.coupling_sq)


def read_coupling_table(path) -> CouplingTable:
    """Read a coupling table CSV.

    Two header lines ``g,<int>`` and ``T,<kelvin>``, then a column header
    ``E_in_eV,E_fm_eV,coupling_sq_eV2`` and one row per matrix element.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 3 or rows[0][0] != "g" or rows[1][0] != "T":
        raise ValueError(f"{path}: expected 'g' and 'T' header rows")
    g = int(rows[0][1])
    temperature = float(rows[1][1])
    if rows[2] != ["E_in_eV", "E_fm_eV", "coupling_sq_eV2"]:
        raise ValueError(f"{path}: bad column header {rows[2]}")
    data = np.array([[float(x) for x in r] for r in rows[3:]], dtype=float).reshape(-1, 3)
    return CouplingTable(g, temperature, data[:, 0], data[:, 1], data[:, 2])


def write_coupling_table(table: CouplingTable, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["g", table.degeneracy])
        w.writerow(["T", repr(table.temperature)])
        w.writerow(["E_in_eV", "E_fm_eV", "coupling_sq_eV2"])
        for ei, ef, c in zip(table.e_initial, table.e_final, table.coupling_sq):
            w.writerow([repr(float(ei)), repr(float(ef)), repr(float(c))])


def radiative_rate(
    zpl_ev: float,
    mu_sq_debye2: float,
    refractive_index: float = DEFAULT_REFRACTIVE_INDEX,
) -> RadiativeResult:
    """Radiative rate and lifetime for a transition of energy ``zpl_ev`` and
    squared dipole ``mu_sq_debye2``.

    The rate is cubic in the transition energy and linear in both mu^2 and
    the refractive index.
    """
    if zpl_ev <= 0 or not math.isfinite(zpl_ev):
        raise ValueError(f"transition energy must be positive, got {zpl_ev}")
    if mu_sq_debye2 < 0:
        raise ValueError(f"mu^2 must be >= 0, got {mu_sq_debye2}")
    if refractive_index <= 0:
        raise ValueError(f"refractive index must be positive, got {refractive_index}")
    omega = zpl_ev * EV_J / HBAR_J                    # rad/s
    mu_sq_si = mu_sq_debye2 * DEBYE_CM**2             # (C m)^2
    rate = refractive_index * omega**3 * mu_sq_si / (3.0 * math.pi * EPS0 * HBAR_J * C_LIGHT**3)
    lifetime = math.inf if rate == 0.0 else 1.0 / rate
    return RadiativeResult(rate=rate, lifetime=lifetime, refractive_index_used=refractive_index)


def nonradiative_rate(table: CouplingTable, sigma_ev: float = DEFAULT_BROADENING_EV) -> float:
    """Golden-rule intersystem-crossing rate from a coupling table, in 1/s.

    The delta function is replaced by a normalized Gaussian of width
    ``sigma_ev``; initial-state thermal weights are exp(-E_in/kT)/Z with Z
    summed over the distinct initial vibrational energies in the table.
    """
    if sigma_ev <= 0:
        raise ValueError(f"broadening width must be positive, got {sigma_ev}")
    if len(table) == 0:
        raise ValueError("coupling table is empty")
    e_min = float(np.min(table.e_initial))
    kt = KB_EV * table.temperature
    boltzmann = np.exp(-(table.e_initial - e_min) / kt)
    z = float(np.sum(np.exp(-(np.unique(table.e_initial) - e_min) / kt)))
    weights = boltzmann / z
    gauss = np.exp(-((table.e_final - table.e_initial) ** 2) / (2.0 * sigma_ev**2)) / (
        sigma_ev * math.sqrt(2.0 * math.pi)
    )
    total = float(np.sum(weights * table.coupling_sq * gauss))  # eV
    return (2.0 * math.pi / HBAR_EVS) * table.degeneracy * total


def quantum_efficiency(rate_radiative: float, rate_nonradiative: float) -> float:
    """Fraction of decays that are radiative: Gamma_R / (Gamma_R + Gamma_NR)."""
    if rate_radiative < 0 or rate_nonradiative < 0:
        raise ValueError("rates must be >= 0")
    total = rate_radiative + rate_nonradiative
    if total == 0:
        raise ValueError("quantum efficiency undefined: both rates are zero")
    return rate_radiative / total
