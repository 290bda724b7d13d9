"""Huang-Rhys analysis and photoluminescence lineshape synthesis.

The pipeline:

1. configuration coordinates  q_k = sum_{a,i} m_a (R_e - R_g)_{a,i} d_{k,a,i}
   where d_k are the stored Cartesian eigendisplacements with unit
   mass-weighted norm (sum m |d|^2 = 1 amu); q_k carries amu^1/2*Angstrom.
2. partial Huang-Rhys factors  s_k = omega_k q_k^2 / (2 hbar).
3. time-domain spectral function  S(t) = sum_k s_k exp(-i omega_k t)
   (the delta-peaked spectral density integrates analytically, so no
   frequency smearing grid is needed).
4. generating function  G(t) = exp(S(t) - S(0)) damped by exp(-gamma|t|),
   Fourier-transformed to the optical spectral function A(E).  The axis
   convention puts phonon sidebands on the red side of the ZPL:

       A(E) = (1/pi) Re  int_0^inf G(t) e^{-gamma t} e^{-i (E - E_zpl) t} dt

   (reduced time units hbar/eV, energies in eV).  A single mode of factor s
   then yields Lorentzians of weight e^{-s} s^n / n! at E_zpl - n*hbar*omega,
   and the ZPL carries the Debye-Waller weight e^{-S(0)}.
5. luminescence  L(E) = C E^3 A(E), peak-normalized to 1.

The time grid is auto-sized so results are bit-for-bit reproducible:
step = pi/(4*max(max_k hbar*omega_k, window half-width)), span = 16/gamma
(satisfying span >= 10 hbar/gamma), trapezoidal weights.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import HR_COEF
from .errors import PhononFormatError

PHONON_MAGIC = "PHONONS v1"
MASS_NORM_TOL = 1e-6
DEFAULT_GAMMA_EV = 0.005
CLIP_WARN_FRACTION = 1e-6
TIME_SPAN_OVER_GAMMA = 16.0
_ENERGY_CHUNK = 256


@dataclass(frozen=True)
class PhononSet:
    """Phonon modes plus the ground/excited equilibrium geometries.

    ``displacements`` has shape (modes, atoms, 3): per-mode Cartesian
    eigendisplacements normalized to unit mass-weighted norm.
    """

    energies_ev: np.ndarray       # hbar*omega_k, eV
    displacements: np.ndarray     # (K, N, 3)
    masses_amu: np.ndarray        # (N,)
    ground_positions: np.ndarray  # (N, 3), Angstrom
    excited_positions: np.ndarray

    def __post_init__(self):
        for name in ("energies_ev", "displacements", "masses_amu", "ground_positions", "excited_positions"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n_atoms = len(self.masses_amu)
        if self.ground_positions.shape != (n_atoms, 3) or self.excited_positions.shape != (n_atoms, 3):
            raise PhononFormatError("position arrays must be (atoms, 3) and match the mass list")
        if self.displacements.shape != (len(self.energies_ev), n_atoms, 3):
            raise PhononFormatError("displacements must be (modes, atoms, 3)")
        if np.any(self.energies_ev <= 0):
            raise PhononFormatError("phonon energies must be positive")
        norms = np.einsum("kai,kai,a->k", self.displacements, self.displacements, self.masses_amu)
        bad = np.abs(norms - 1.0) > MASS_NORM_TOL
        if np.any(bad):
            k = int(np.argmax(bad))
            raise PhononFormatError(
                f"mode {k}: mass-weighted norm {norms[k]:.8g} deviates from 1 beyond {MASS_NORM_TOL}"
            )

    @property
    def n_modes(self) -> int:
        return len(self.energies_ev)


@dataclass(frozen=True)
class HRSpectrum:
    """Partial Huang-Rhys factors per phonon mode."""

    energies_ev: np.ndarray
    factors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "energies_ev", np.asarray(self.energies_ev, dtype=float))
        object.__setattr__(self, "factors", np.asarray(self.factors, dtype=float))
        if self.energies_ev.shape != self.factors.shape:
            raise ValueError("energies and factors must have the same shape")
        if np.any(self.factors < 0):
            raise ValueError("partial HR factors must be >= 0")

    @property
    def total(self) -> float:
        """Total HR factor S(0)."""
        return float(np.sum(self.factors))


@dataclass(frozen=True)
class SpectralGrid:
    emin: float
    emax: float
    points: int = 2001

    def __post_init__(self):
        if not (self.emin < self.emax):
            raise ValueError("need emin < emax")
        if self.points < 2:
            raise ValueError("need at least 2 grid points")

    def energies(self) -> np.ndarray:
        return np.linspace(self.emin, self.emax, self.points)


@dataclass(frozen=True)
class PLSpectrum:
    energies: np.ndarray
    intensities: np.ndarray
    zpl: float
    gamma: float
    normalization: float


def configuration_coordinates(phonons: PhononSet) -> np.ndarray:
    """Per-mode configuration coordinate q_k in amu^1/2 * Angstrom.

    Projects the excited-to-ground geometry change onto each mode in the
    mass-weighted metric; the sign is kept (HR factors use q_k^2).
    """
    delta = phonons.excited_positions - phonons.ground_positions  # (N, 3)
    return np.einsum("kai,ai,a->k", phonons.displacements, delta, phonons.masses_amu)


def hr_factors(phonons: PhononSet) -> HRSpectrum:
    """Partial HR factors s_k = omega_k q_k^2 / (2 hbar), dimensionless."""
    q = configuration_coordinates(phonons)
    return HRSpectrum(phonons.energies_ev.copy(), HR_COEF * phonons.energies_ev * q**2)


def spectral_function_time(hr: HRSpectrum, t_grid: np.ndarray) -> np.ndarray:
    """S(t) = sum_k s_k exp(-i omega_k t) on a uniform grid of reduced time
    (units hbar/eV), so S(0) is the total HR factor."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ValueError("empty time grid")
    if t.size > 1:
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("time grid must be uniform")
    return _spectral_series(hr, t)


def _spectral_series(hr: HRSpectrum, t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=complex)
    if hr.energies_ev.size == 0:
        return out
    for start in range(0, t.size, 4096):
        chunk = t[start:start + 4096]
        out[start:start + 4096] = np.exp(-1j * np.outer(chunk, hr.energies_ev)) @ hr.factors
    return out


def _time_grid(gamma: float, max_feature_ev: float) -> np.ndarray:
    dt = math.pi / (4.0 * max_feature_ev)
    span = TIME_SPAN_OVER_GAMMA / gamma
    n = int(math.ceil(span / dt)) + 1
    return np.arange(n) * dt


def optical_spectral_function(
    hr: HRSpectrum,
    zpl_ev: float,
    gamma_ev: float,
    grid: SpectralGrid,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized optical spectral function A(E) on the requested grid.

    A integrates to 1 over the full axis (up to Lorentzian tail truncation
    by the window); phonon sidebands appear below the ZPL.
    """
    if gamma_ev <= 0:
        raise ValueError(f"gamma must be positive, got {gamma_ev}")
    if not (grid.emin < zpl_ev < grid.emax):
        raise ValueError(f"spectral window [{grid.emin}, {grid.emax}] must cover the ZPL at {zpl_ev}")
    energies = grid.energies()
    half_width = 0.5 * (grid.emax - grid.emin)
    max_mode = float(np.max(hr.energies_ev)) if hr.energies_ev.size else 0.0
    t = _time_grid(gamma_ev, max(max_mode, half_width))

    s_t = _spectral_series(hr, t)
    damped = np.exp(s_t - hr.total - gamma_ev * t)
    damped[0] *= 0.5  # trapezoid end weight; the far end is ~e^-16 and negligible
    dt = t[1] - t[0]

    a = np.empty_like(energies)
    for start in range(0, energies.size, _ENERGY_CHUNK):
        de = energies[start:start + _ENERGY_CHUNK] - zpl_ev
        phases = np.exp(-1j * np.outer(de, t))
        a[start:start + _ENERGY_CHUNK] = (phases @ damped).real
    a *= dt / math.pi
    return energies, a


def pl_spectrum(
    hr: HRSpectrum,
    zpl_ev: float,
    gamma_ev: float = DEFAULT_GAMMA_EV,
    grid: SpectralGrid | None = None,
) -> PLSpectrum:
    """Photoluminescence spectrum L(E) = C E^3 A(E), peak-normalized to 1.

    Residual Fourier ringing is clipped at zero; dips beyond 1e-6 of the
    peak trigger a warning since they indicate an undersized time grid.
    """
    if grid is None:
        grid = SpectralGrid(max(0.05, zpl_ev - 0.8), zpl_ev + 0.2)
    if grid.emin <= 0:
        raise ValueError("photon-energy window must be positive")
    energies, a = optical_spectral_function(hr, zpl_ev, gamma_ev, grid)
    raw = energies**3 * a
    peak = float(np.max(raw))
    if peak <= 0:
        raise ValueError("spectrum has no positive intensity in the window")
    c = 1.0 / peak
    scaled = c * raw
    low = float(np.min(scaled))
    if low < -CLIP_WARN_FRACTION:
        warnings.warn(
            f"negative spectral ringing at {low:.2e} of peak; time grid may be undersized",
            RuntimeWarning,
            stacklevel=2,
        )
    return PLSpectrum(
        energies=energies,
        intensities=np.clip(scaled, 0.0, None),
        zpl=zpl_ev,
        gamma=gamma_ev,
        normalization=c,
    )


# ---------------------------------------------------------------------------
# file formats

def parse_phonons(path, renormalize: bool = False) -> PhononSet:
    """Parse a phonon mode text file.

    Format: ``PHONONS v1``; ``atoms N modes K``; ``masses`` + one line of N
    amu values; ``ground_positions`` / ``excited_positions`` + N xyz rows
    each; then per mode a line ``mode <hbar_omega_eV>`` + N displacement rows.
    """
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0] != PHONON_MAGIC:
        raise PhononFormatError(f"{path}: missing '{PHONON_MAGIC}' header")
    try:
        head = lines[1].split()
        if head[0] != "atoms" or head[2] != "modes":
            raise IndexError
        n_atoms, n_modes = int(head[1]), int(head[3])
    except (IndexError, ValueError) as exc:
        raise PhononFormatError(f"{path}: header must be 'atoms N modes K'") from exc

    pos = 2

    def take_block(marker: str, rows: int) -> np.ndarray:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(marker):
            raise PhononFormatError(f"{path}: expected '{marker}' section at line {pos + 1}")
        pos += 1
        block = lines[pos:pos + rows]
        if len(block) != rows:
            raise PhononFormatError(f"{path}: '{marker}' section truncated")
        pos += rows
        try:
            return np.array([[float(x) for x in ln.split()] for ln in block], dtype=float)
        except ValueError as exc:
            raise PhononFormatError(f"{path}: bad number in '{marker}' section: {exc}") from exc

    if pos >= len(lines) or lines[pos] != "masses":
        raise PhononFormatError(f"{path}: expected 'masses' section")
    pos += 1
    try:
        masses = np.array([float(x) for x in lines[pos].split()], dtype=float)
    except (IndexError, ValueError) as exc:
        raise PhononFormatError(f"{path}: bad masses line") from exc
    pos += 1
    if masses.size != n_atoms:
        raise PhononFormatError(f"{path}: expected {n_atoms} masses, got {masses.size}")

    ground = take_block("ground_positions", n_atoms)
    excited = take_block("excited_positions", n_atoms)

    energies = np.empty(n_modes)
    disps = np.empty((n_modes, n_atoms, 3))
    for k in range(n_modes):
        if pos >= len(lines) or not lines[pos].startswith("mode"):
            raise PhononFormatError(f"{path}: expected mode {k + 1} of {n_modes}")
        parts = lines[pos].split()
        try:
            energies[k] = float(parts[1])
        except (IndexError, ValueError) as exc:
            raise PhononFormatError(f"{path}: bad mode header {lines[pos]!r}") from exc
        pos += 1
        block = lines[pos:pos + n_atoms]
        if len(block) != n_atoms:
            raise PhononFormatError(f"{path}: displacement rows for mode {k + 1} truncated")
        try:
            disps[k] = [[float(x) for x in ln.split()] for ln in block]
        except ValueError as exc:
            raise PhononFormatError(f"{path}: bad displacement row in mode {k + 1}") from exc
        pos += n_atoms
    if pos != len(lines):
        raise PhononFormatError(f"{path}: {len(lines) - pos} unexpected trailing line(s)")

    if renormalize:
        norms = np.einsum("kai,kai,a->k", disps, disps, masses)
        disps = disps / np.sqrt(norms)[:, None, None]
    return PhononSet(energies, disps, masses, ground, excited)


def write_phonons(phonons: PhononSet, path) -> None:
    lines = [PHONON_MAGIC, f"atoms {len(phonons.masses_amu)} modes {phonons.n_modes}", "masses"]
    lines.append(" ".join(repr(float(m)) for m in phonons.masses_amu))
    for marker, arr in (("ground_positions", phonons.ground_positions),
                        ("excited_positions", phonons.excited_positions)):
        lines.append(marker)
        lines.extend(" ".join(repr(float(x)) for x in row) for row in arr)
    for k in range(phonons.n_modes):
        lines.append(f"mode {float(phonons.energies_ev[k])!r}")
        lines.extend(" ".join(repr(float(x)) for x in row) for row in phonons.displacements[k])
    Path(path).write_text("\n".join(lines) + "\n")


def write_hr_csv(hr: HRSpectrum, path) -> None:
    lines = ["hbar_omega_eV,s_k"]
    lines.extend(f"{float(e)!r},{float(s)!r}" for e, s in zip(hr.energies_ev, hr.factors))
    Path(path).write_text("\n".join(lines) + "\n")


def read_hr_csv(path) -> HRSpectrum:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0] != "hbar_omega_eV,s_k":
        raise ValueError(f"{path}: not an HR factor table")
    pairs = [ln.split(",") for ln in lines[1:]]
    energies = np.array([float(p[0]) for p in pairs])
    factors = np.array([float(p[1]) for p in pairs])
    return HRSpectrum(energies, factors)


def write_spectrum_csv(spectrum: PLSpectrum, path) -> None:
    lines = ["energy_eV,intensity"]
    lines.extend(
        f"{float(e)!r},{float(i)!r}" for e, i in zip(spectrum.energies, spectrum.intensities)
    )
    Path(path).write_text("\n".join(lines) + "\n")
