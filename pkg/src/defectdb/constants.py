"""Physical constants and unit conversions.

Internal conventions: energies in eV, lengths in Angstrom, dipole moments in
e*Angstrom (squared moduli reported in Debye^2), momentum matrix elements in
Hartree atomic units, rates in 1/s.

The two PINNED factors below define stored record values and the on-disk
format; they must not drift between releases.  Everything else comes from
scipy's CODATA tables.
"""

import math

from scipy import constants as _sc

# Pinned conversion factors (format-defining).
EV_NM = 1239.84198          # photon energy [eV] * vacuum wavelength [nm]
EANG_TO_DEBYE = 4.803204    # 1 e*Angstrom in Debye

# CODATA values.
HBAR_J = _sc.hbar                                        # J s
HBAR_EVS = _sc.value("reduced Planck constant in eV s")  # eV s
EV_J = _sc.e                                             # 1 eV in J
E_CHARGE = _sc.e                                         # C
EPS0 = _sc.epsilon_0                                     # F/m
C_LIGHT = _sc.c                                          # m/s
M_ELECTRON = _sc.m_e                                     # kg
KB_EV = _sc.value("Boltzmann constant in eV/K")          # eV/K
AMU_KG = _sc.value("atomic mass constant")               # kg
BOHR_ANG = _sc.value("Bohr radius") * 1e10               # Angstrom
HARTREE_EV = _sc.value("Hartree energy in eV")           # eV

DEBYE_CM = 1e-21 / C_LIGHT                               # 1 Debye in C m

# s_k = HR_COEF * (hbar*omega [eV]) * (q [amu^1/2 Angstrom])^2
HR_COEF = EV_J * AMU_KG * 1e-20 / (2.0 * HBAR_J**2)


def ev_to_nm(energy_ev: float) -> float:
    """Convert a photon energy in eV to its vacuum wavelength in nm."""
    if energy_ev <= 0 or not math.isfinite(energy_ev):
        raise ValueError(f"photon energy must be positive and finite, got {energy_ev}")
    return EV_NM / energy_ev


def nm_to_ev(wavelength_nm: float) -> float:
    """Convert a vacuum wavelength in nm to photon energy in eV."""
    if wavelength_nm <= 0 or not math.isfinite(wavelength_nm):
        raise ValueError(f"wavelength must be positive and finite, got {wavelength_nm}")
    return EV_NM / wavelength_nm
