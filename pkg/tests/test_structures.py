import math

import numpy as np
import pytest

from defectdb.structures import (
    Structure,
    read_cif,
    read_structure,
    read_xyz,
    render_structure,
    write_cif,
    write_xyz,
)


@pytest.fixture
def hex_structure():
    a = 2.504
    cell = np.array([[a, 0, 0], [-a / 2, a * math.sqrt(3) / 2, 0], [0, 0, 15.0]])
    return Structure(("B", "N"), np.array([[0.0, 0.0, 7.5], [a / 2, a / (2 * math.sqrt(3)), 7.5]]), cell)


def test_xyz_roundtrip(tmp_path, hex_structure):
    write_xyz(hex_structure, tmp_path / "s.xyz")
    back = read_xyz(tmp_path / "s.xyz")
    assert back.symbols == hex_structure.symbols
    assert back.positions == pytest.approx(hex_structure.positions, abs=1e-9)
    assert back.cell == pytest.approx(hex_structure.cell, abs=1e-9)


def test_cif_roundtrip(tmp_path, hex_structure):
    write_cif(hex_structure, tmp_path / "s.cif")
    back = read_cif(tmp_path / "s.cif")
    assert back.symbols == hex_structure.symbols
    assert back.positions == pytest.approx(hex_structure.positions, abs=1e-6)


def test_render_byte_stable(hex_structure):
    assert render_structure(hex_structure, "xyz") == render_structure(hex_structure, "xyz")
    assert render_structure(hex_structure, "cif") == render_structure(hex_structure, "cif")


def test_cif_requires_cell():
    bare = Structure(("C",), np.zeros((1, 3)), None)
    with pytest.raises(ValueError, match="cell"):
        write_cif(bare)


def test_read_structure_dispatch(tmp_path, hex_structure):
    write_xyz(hex_structure, tmp_path / "s.xyz")
    write_cif(hex_structure, tmp_path / "s.cif")
    assert read_structure(tmp_path / "s.xyz").symbols == hex_structure.symbols
    assert read_structure(tmp_path / "s.cif").symbols == hex_structure.symbols
    with pytest.raises(ValueError, match="format"):
        read_structure(tmp_path / "s.pdb")


def test_truncated_xyz_rejected(tmp_path):
    (tmp_path / "bad.xyz").write_text("5\ncomment\nC 0 0 0\n")
    with pytest.raises(ValueError, match="promises"):
        read_xyz(tmp_path / "bad.xyz")
