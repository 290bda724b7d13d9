"""Gamma-point plane-wave wavefunctions and transition dipole moments.

A wavefunction is a list of reciprocal-lattice coefficients
``psi = sum_G c(G) e^{iG.r}``.  Between two such states the momentum matrix
element is diagonal in G:

    <f|p|i> = sum_G c_f*(G) hbar G_cart c_i(G)

and the transition dipole follows from the commutator relation

    mu = i hbar / ((E_f - E_i) m) <f|p|i>

Internally momentum is accumulated in hbar/Angstrom and converted to Hartree
atomic units at the type boundary; dipoles are returned in e*Angstrom.
Both relaxed geometries share one plane-wave basis (the cell is fixed during
relaxation), so coefficients are matched on integer index triples and
triples missing from one side contribute zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import BOHR_ANG, HARTREE_EV
from .errors import DegenerateLevelsError, LatticeMismatchError, WfcFormatError
from .model import DipoleMoment

WFC_MAGIC = "WFC v1"
NORM_FLAG_TOL = 1e-6    # |sum|c|^2 - 1| above this is flagged and renormalized
NORM_ERROR_TOL = 1e-3   # ... and above this the file is considered truncated
LATTICE_MATCH_TOL = 1e-8
DEGENERATE_EV = 1e-6
OCCUPANCIES = ("occupied", "unoccupied")


@dataclass(frozen=True)
class PlaneWaveFunction:
    """Gamma-point wavefunction as reciprocal-lattice coefficients.

    ``reciprocal_lattice`` rows are the reciprocal basis vectors in 1/Angstrom;
    ``indices`` is an (N, 3) integer array of G-vector triples and
    ``amplitudes`` the matching complex coefficients, unit-normalized.
    """

    reciprocal_lattice: np.ndarray
    indices: np.ndarray
    amplitudes: np.ndarray
    band_energy: float
    spin_channel: str
    occupancy: str = "occupied"
    was_renormalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "reciprocal_lattice", np.asarray(self.reciprocal_lattice, dtype=float))
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))
        if self.reciprocal_lattice.shape != (3, 3):
            raise WfcFormatError("reciprocal lattice must be 3x3")
        if self.indices.shape != (len(self.amplitudes), 3):
            raise WfcFormatError("indices and amplitudes must have matching lengths")
        if len(self.indices) != len({tuple(t) for t in self.indices.tolist()}):
            raise WfcFormatError("duplicate G-vector index triple")

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class MomentumMatrixElement:
    """Momentum matrix element <f|p|i> in Hartree atomic units."""

    p_x: complex
    p_y: complex
    p_z: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.p_x, self.p_y, self.p_z])


def parse_wfc(path, occupancy: str | None = None, renormalize: bool = False) -> PlaneWaveFunction:
    """Parse a WFC text file.

    Format: line 1 ``WFC v1``; line 2 the reciprocal lattice (9 floats,
    1/Angstrom, row-major); line 3 ``N band_energy_eV spin [occupancy]``;
    then N lines of ``g1 g2 g3 re im``.

    A squared norm off unity by more than 1e-6 renormalizes the amplitudes
    and sets ``was_renormalized``; a deviation above 1e-3 signals a truncated
    file and raises unless ``renormalize`` is forced.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != WFC_MAGIC:
        raise WfcFormatError(f"{path}: missing '{WFC_MAGIC}' header")
    if len(lines) < 3:
        raise WfcFormatError(f"{path}: incomplete header")
    try:
        lattice = np.array([float(x) for x in lines[1].split()], dtype=float)
    except ValueError as exc:
        raise WfcFormatError(f"{path}: bad lattice line: {exc}") from exc
    if lattice.size != 9:
        raise WfcFormatError(f"{path}: lattice line must hold 9 floats, got {lattice.size}")
    head = lines[2].split()
    if len(head) not in (3, 4):
        raise WfcFormatError(f"{path}: header line must be 'N energy spin [occupancy]'")
    try:
        count = int(head[0])
        band_energy = float(head[1])
    except ValueError as exc:
        raise WfcFormatError(f"{path}: bad header line: {exc}") from exc
    spin = head[2]
    if spin not in ("up", "down"):
        raise WfcFormatError(f"{path}: spin tag must be 'up' or 'down', got {spin!r}")
    file_occ = head[3] if len(head) == 4 else None
    if file_occ is not None and file_occ not in OCCUPANCIES:
        raise WfcFormatError(f"{path}: occupancy must be one of {OCCUPANCIES}, got {file_occ!r}")

    body = [ln for ln in lines[3:] if ln.strip()]
    if len(body) != count:
        raise WfcFormatError(f"{path}: header promises {count} coefficients, file has {len(body)}")
    indices = np.empty((count, 3), dtype=np.int64)
    amplitudes = np.empty(count, dtype=complex)
    for i, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != 5:
            raise WfcFormatError(f"{path}: coefficient line {i + 1} must be 'g1 g2 g3 re im'")
        try:
            indices[i] = [int(parts[0]), int(parts[1]), int(parts[2])]
            amplitudes[i] = complex(float(parts[3]), float(parts[4]))
        except ValueError as exc:
            raise WfcFormatError(f"{path}: coefficient line {i + 1}: {exc}") from exc

    norm_sq = float(np.sum(np.abs(amplitudes) ** 2))
    deviation = abs(norm_sq - 1.0)
    flagged = False
    if deviation > NORM_ERROR_TOL and not renormalize:
        raise WfcFormatError(
            f"{path}: squared norm {norm_sq:.6g} deviates from 1 by more than "
            f"{NORM_ERROR_TOL} (truncated file?)"
        )
    if deviation > NORM_FLAG_TOL:
        if norm_sq == 0.0:
            raise WfcFormatError(f"{path}: all coefficients vanish")
        amplitudes = amplitudes / np.sqrt(norm_sq)
        flagged = True

    return PlaneWaveFunction(
        reciprocal_lattice=lattice.reshape(3, 3),
        indices=indices,
        amplitudes=amplitudes,
        band_energy=band_energy,
        spin_channel=spin,
        occupancy=occupancy or file_occ or "occupied",
        was_renormalized=flagged,
    )


def write_wfc(wf: PlaneWaveFunction, path) -> None:
    """Serialize a wavefunction in the WFC text format (floats via repr)."""
    lines = [WFC_MAGIC, " ".join(repr(float(x)) for x in wf.reciprocal_lattice.ravel())]
    lines.append(f"{len(wf.amplitudes)} {wf.band_energy!r} {wf.spin_channel} {wf.occupancy}")
    for (g1, g2, g3), c in zip(wf.indices.tolist(), wf.amplitudes.tolist()):
        lines.append(f"{g1} {g2} {g3} {c.real!r} {c.imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def momentum_element(wf_i: PlaneWaveFunction, wf_f: PlaneWaveFunction) -> MomentumMatrixElement:
    """<psi_f | p | psi_i> in atomic units, matching coefficients on G triples.

    Requires both wavefunctions to share the reciprocal lattice (fixed-cell
    relaxation); G triples present on only one side contribute zero.
    """
    if np.max(np.abs(wf_i.reciprocal_lattice - wf_f.reciprocal_lattice)) > LATTICE_MATCH_TOL:
        raise LatticeMismatchError("wavefunctions carry different reciprocal lattices")
    lookup = {tuple(t): k for k, t in enumerate(wf_f.indices.tolist())}
    rows_i, rows_f = [], []
    for k, t in enumerate(wf_i.indices.tolist()):
        j = lookup.get(tuple(t))
        if j is not None:
            rows_i.append(k)
            rows_f.append(j)
    if not rows_i:
        return MomentumMatrixElement(0j, 0j, 0j)
    ci = wf_i.amplitudes[rows_i]
    cf = wf_f.amplitudes[rows_f]
    g_cart = wf_i.indices[rows_i].astype(float) @ wf_i.reciprocal_lattice  # hbar/Angstrom
    p = (np.conj(cf) * ci) @ g_cart * BOHR_ANG  # -> atomic units
    return MomentumMatrixElement(complex(p[0]), complex(p[1]), complex(p[2]))


def transition_dipole(
    wf_i: PlaneWaveFunction,
    wf_f: PlaneWaveFunction,
    e_i: float,
    e_f: float,
) -> DipoleMoment:
    """Transition dipole moment between two states with band energies in eV.

    mu = i hbar / ((E_f - E_i) m) <f|p|i>, evaluated in atomic units and
    returned in e*Angstrom.  The caller chooses which geometry's files enter:
    ground-geometry occupied -> unoccupied for the excitation dipole,
    the relaxed excited-geometry pair for the emission dipole.
    """
    delta_ev = e_f - e_i
    if abs(delta_ev) < DEGENERATE_EV:
        raise DegenerateLevelsError(
            f"band energies degenerate within {DEGENERATE_EV} eV (dE = {delta_ev:.3g})"
        )
    p = momentum_element(wf_i, wf_f)
    delta_ha = delta_ev / HARTREE_EV
    mu_au = 1j * p.vector / delta_ha          # e*bohr
    mu = mu_au * BOHR_ANG                     # e*Angstrom
    return DipoleMoment.from_components(mu[0], mu[1], mu[2])
