"""Minimal XYZ / CIF structure I/O for bundle downloads.

XYZ files use the extended-xyz convention of carrying the cell in the
comment line as ``Lattice="ax ay az bx by bz cx cy cz"``.  CIF output is a
P1 cell with fractional coordinates; the CIF reader handles exactly that
documented subset (it exists so the two formats round-trip, not as a general
crystallography parser).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STRUCTURE_FORMATS = ("xyz", "cif")


@dataclass(frozen=True)
class Structure:
    symbols: tuple[str, ...]
    positions: np.ndarray          # (N, 3) Cartesian Angstrom
    cell: np.ndarray | None = None  # (3, 3) rows = lattice vectors

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        if self.cell is not None:
            object.__setattr__(self, "cell", np.asarray(self.cell, dtype=float))
        if self.positions.shape != (len(self.symbols), 3):
            raise ValueError("positions must be (len(symbols), 3)")


_LATTICE_RE = re.compile(r'Lattice="([^"]+)"')


def read_xyz(path) -> Structure:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2:
        raise ValueError(f"{path}: truncated XYZ file")
    n = int(lines[0].split()[0])
    if len(lines) < 2 + n:
        raise ValueError(f"{path}: XYZ promises {n} atoms, file has {len(lines) - 2} rows")
    cell = None
    m = _LATTICE_RE.search(lines[1])
    if m:
        vals = [float(x) for x in m.group(1).split()]
        if len(vals) != 9:
            raise ValueError(f"{path}: Lattice= must hold 9 numbers")
        cell = np.array(vals).reshape(3, 3)
    symbols, rows = [], []
    for ln in lines[2:2 + n]:
        parts = ln.split()
        symbols.append(parts[0])
        rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
    return Structure(tuple(symbols), np.array(rows), cell)


def write_xyz(structure: Structure, path=None) -> str:
    comment = ""
    if structure.cell is not None:
        cell = " ".join(f"{x:.10f}" for x in structure.cell.ravel())
        comment = f'Lattice="{cell}"'
    lines = [str(len(structure.symbols)), comment]
    for sym, (x, y, z) in zip(structure.symbols, structure.positions):
        lines.append(f"{sym} {x:.10f} {y:.10f} {z:.10f}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _cell_parameters(cell: np.ndarray):
    a, b, c = (float(np.linalg.norm(v)) for v in cell)

    def angle(u, v):
        cosang = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
        return math.degrees(math.acos(max(-1.0, min(1.0, cosang))))

    return a, b, c, angle(cell[1], cell[2]), angle(cell[0], cell[2]), angle(cell[0], cell[1])


def write_cif(structure: Structure, path=None, data_name: str = "defect") -> str:
    if structure.cell is None:
        raise ValueError("CIF output requires a cell")
    a, b, c, alpha, beta, gamma = _cell_parameters(structure.cell)
    frac = structure.positions @ np.linalg.inv(structure.cell)
    lines = [
        f"data_{data_name}",
        f"_cell_length_a {a:.10f}",
        f"_cell_length_b {b:.10f}",
        f"_cell_length_c {c:.10f}",
        f"_cell_angle_alpha {alpha:.10f}",
        f"_cell_angle_beta {beta:.10f}",
        f"_cell_angle_gamma {gamma:.10f}",
        "_symmetry_space_group_name_H-M 'P 1'",
        "loop_",
        "_atom_site_label",
        "_atom_site_type_symbol",
        "_atom_site_fract_x",
        "_atom_site_fract_y",
        "_atom_site_fract_z",
    ]
    for i, (sym, (fx, fy, fz)) in enumerate(zip(structure.symbols, frac), start=1):
        lines.append(f"{sym}{i} {sym} {fx:.10f} {fy:.10f} {fz:.10f}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _cell_from_parameters(a, b, c, alpha, beta, gamma) -> np.ndarray:
    ca, cb, cg = (math.cos(math.radians(x)) for x in (alpha, beta, gamma))
    sg = math.sin(math.radians(gamma))
    v1 = [a, 0.0, 0.0]
    v2 = [b * cg, b * sg, 0.0]
    cx = c * cb
    cy = c * (ca - cb * cg) / sg
    cz = math.sqrt(max(0.0, c**2 - cx**2 - cy**2))
    return np.array([v1, v2, [cx, cy, cz]])


def read_cif(path) -> Structure:
    """Read the P1 CIF subset emitted by :func:`write_cif`."""
    params = {}
    symbols, fracs = [], []
    in_atoms = False
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if ln.startswith("_cell_"):
            key, val = ln.split(None, 1)
            params[key] = float(val)
        elif ln.startswith("_atom_site_fract_z"):
            in_atoms = True
        elif in_atoms and ln and not ln.startswith(("_", "loop_", "data_")):
            parts = ln.split()
            if len(parts) != 5:
                break
            symbols.append(parts[1])
            fracs.append([float(parts[2]), float(parts[3]), float(parts[4])])
    required = ("_cell_length_a", "_cell_length_b", "_cell_length_c",
                "_cell_angle_alpha", "_cell_angle_beta", "_cell_angle_gamma")
    if any(k not in params for k in required) or not symbols:
        raise ValueError(f"{path}: not in the supported P1 CIF subset")
    cell = _cell_from_parameters(*(params[k] for k in required))
    return Structure(tuple(symbols), np.array(fracs) @ cell, cell)


def read_structure(path) -> Structure:
    path = Path(path)
    if path.suffix == ".xyz":
        return read_xyz(path)
    if path.suffix == ".cif":
        return read_cif(path)
    raise ValueError(f"unsupported structure format: {path.suffix}")


def render_structure(structure: Structure, fmt: str) -> bytes:
    if fmt == "xyz":
        return write_xyz(structure).encode()
    if fmt == "cif":
        return write_cif(structure).encode()
    raise ValueError(f"unsupported structure format: {fmt}")
