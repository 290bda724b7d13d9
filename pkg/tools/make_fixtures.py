#!/usr/bin/env python3
"""Regenerate the shipped test fixtures under tests/fixtures/raw/.

Constructs physically consistent raw inputs for three benchmark defects:
the negative boron vacancy (spin-down transition at 2.08 eV, with phonon and
coupling data), the carbon-on-boron + nitrogen-vacancy complex (spin-up
transition at 1.89 eV), and a UV carbon-dimer record using precomputed
dipoles.  All floats are written via repr so fixtures are bit-stable.
"""

import json
import math
from pathlib import Path

import numpy as np

from defectdb.lineshape import PhononSet, write_phonons
from defectdb.photophysics import CouplingTable, write_coupling_table
from defectdb.structures import Structure, write_xyz
from defectdb.wavefunction import PlaneWaveFunction, write_wfc

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "raw"

# 7x7x1 hBN-like supercell, fixed across all wavefunctions
A_SC = 7 * 2.504
C_SC = 15.0
K = 2 * math.pi / A_SC
RECIP = np.array([
    [K, K / math.sqrt(3.0), 0.0],
    [0.0, 2.0 * K / math.sqrt(3.0), 0.0],
    [0.0, 0.0, 2 * math.pi / C_SC],
])


def wfc(pairs, energy, spin, occupancy, filler_index, path):
    """Build a unit-norm coefficient list from (index, amplitude) pairs plus
    a filler amplitude on a non-overlapping triple."""
    weight = sum(abs(a) ** 2 for _, a in pairs)
    if weight >= 1.0:
        raise SystemExit(f"{path}: pair weight {weight} leaves no room for the filler")
    indices = [idx for idx, _ in pairs] + [filler_index]
    amps = [a for _, a in pairs] + [math.sqrt(1.0 - weight)]
    wf = PlaneWaveFunction(RECIP, np.array(indices), np.array(amps, dtype=complex),
                           energy, spin, occupancy)
    assert abs(wf.norm_sq - 1.0) < 1e-12
    write_wfc(wf, OUT / path)


def pm_pair(g, u, v):
    """Coefficient pairs putting weight u on +/-g (initial) and +/-v with a
    sign flip (final): the product contributes 2uv * G_cart to <f|p|i>."""
    gi = tuple(g)
    gneg = tuple(-x for x in g)
    return [(gi, u), (gneg, u)], [(gi, v), (gneg, -v)]


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    # ---- totals ----------------------------------------------------------
    (OUT / "vb_totals.txt").write_text("ground -425.16\nexcited down -423.08\n")
    (OUT / "cbvn_totals.txt").write_text("ground -418.27\nexcited up -416.38\n")
    (OUT / "c2_totals.txt").write_text("ground -430.5\nexcited up -426.4\n")

    # ---- VB wavefunctions: excitation along b1, emission along (1,1) -----
    u = v = 0.63
    i_pairs, f_pairs = pm_pair((1, 0, 0), u, v)
    wfc(i_pairs, -1.10, "down", "occupied", (3, 2, 0), "vb_gs_occ.wfc")
    wfc(f_pairs, 1.30, "down", "unoccupied", (0, 3, 1), "vb_gs_unocc.wfc")

    alpha = 0.30
    beta = alpha * (math.sqrt(3.0) - 1.0) / 2.0  # makes p point along (1, 1, 0)
    u1 = math.sqrt(alpha / 2.0)
    w1 = math.sqrt(beta / 2.0)
    i1, f1 = pm_pair((1, 0, 0), u1, u1)
    i2, f2 = pm_pair((0, 1, 0), w1, w1)
    wfc(i1 + i2, -0.95, "down", "occupied", (4, 1, 0), "vb_es_occ.wfc")
    wfc(f1 + f2, 1.25, "down", "unoccupied", (1, 4, 2), "vb_es_unocc.wfc")

    # ---- CBVN wavefunctions: tilted out of plane, small misalignment -----
    i_pairs, f_pairs = pm_pair((1, 0, 0), 0.5, 0.5)
    iz, fz = pm_pair((0, 0, 1), 0.3, 0.25)
    wfc(i_pairs + iz, -0.85, "up", "occupied", (5, 0, 0), "cbvn_gs_occ.wfc")
    wfc(f_pairs + fz, 1.45, "up", "unoccupied", (0, 5, 1), "cbvn_gs_unocc.wfc")

    alpha = 0.28
    beta = 0.1 * alpha
    u1 = math.sqrt(alpha / 2.0)
    w1 = math.sqrt(beta / 2.0)
    i1, f1 = pm_pair((1, 0, 0), u1, u1)
    i2, f2 = pm_pair((0, 1, 0), w1, w1)
    wfc(i1 + i2, -0.80, "up", "occupied", (4, 0, 1), "cbvn_es_occ.wfc")
    wfc(f1 + f2, 1.30, "up", "unoccupied", (2, 3, 0), "cbvn_es_unocc.wfc")

    # ---- VB phonons -------------------------------------------------------
    masses = np.array([10.811, 14.007, 14.007, 14.007])
    ground = np.array([
        [0.000, 0.000, 0.0],
        [1.446, 0.000, 0.0],
        [-0.723, 1.252, 0.0],
        [-0.723, -1.252, 0.0],
    ])
    excited = ground + np.array([
        [0.030, 0.010, 0.0],
        [-0.035, 0.000, 0.0],
        [0.012, -0.028, 0.0],
        [0.008, 0.020, 0.0],
    ])
    raw_modes = np.array([
        # breathing-like
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-0.5, 0.87, 0.0], [-0.5, -0.87, 0.0]],
        # central-atom shear
        [[1.0, 0.2, 0.0], [-0.3, 0.1, 0.0], [0.1, -0.4, 0.0], [0.2, 0.1, 0.0]],
        # out-of-plane flap (orthogonal to the in-plane distortion)
        [[0.0, 0.0, 1.0], [0.0, 0.0, -0.4], [0.0, 0.0, -0.3], [0.0, 0.0, -0.3]],
    ])
    disps = np.empty_like(raw_modes)
    for k, mode in enumerate(raw_modes):
        norm = math.sqrt(float(np.einsum("ai,ai,a->", mode, mode, masses)))
        disps[k] = mode / norm
    phonons = PhononSet(np.array([0.055, 0.1, 0.165]), disps, masses, ground, excited)
    write_phonons(phonons, OUT / "vb_down.phn")

    # ---- VB coupling table -------------------------------------------------
    table = CouplingTable(
        degeneracy=1,
        temperature=300.0,
        e_initial=np.array([0.0, 0.0, 0.05, 0.05]),
        e_final=np.array([0.002, 0.01, 0.048, 0.06]),
        coupling_sq=np.array([2e-11, 1.5e-11, 1e-11, 0.5e-11]),
    )
    write_coupling_table(table, OUT / "vb_down.coupling.csv")

    # ---- structures --------------------------------------------------------
    cell = np.array([[A_SC, 0.0, 0.0], [-A_SC / 2, A_SC * math.sqrt(3) / 2, 0.0], [0.0, 0.0, C_SC]])
    write_xyz(Structure(("N", "N", "N", "B", "N"), np.array([
        [1.446, 0.0, 7.5], [-0.723, 1.252, 7.5], [-0.723, -1.252, 7.5],
        [2.892, 0.0, 7.5], [3.615, 1.252, 7.5],
    ]), cell), OUT / "vb.xyz")
    write_xyz(Structure(("C", "N", "B", "N", "B"), np.array([
        [0.0, 0.0, 7.5], [1.446, 0.0, 7.5], [2.169, 1.252, 7.5],
        [-0.723, 1.252, 7.5], [-1.446, 0.0, 7.5],
    ]), cell), OUT / "cbvn.xyz")
    write_xyz(Structure(("C", "C", "B", "N"), np.array([
        [0.0, 0.0, 7.5], [1.446, 0.0, 7.5], [2.169, 1.252, 7.5], [-0.723, 1.252, 7.5],
    ]), cell), OUT / "c2.xyz")

    # ---- manifest ----------------------------------------------------------
    manifest = {
        "version": "1",
        "defects": [
            {
                "name": "boron vacancy (-1, triplet)",
                "composition": [{"element": "B", "site": "vacancy-on-B"}],
                "charge": -1,
                "spin_multiplicity": "triplet",
                "totals": "vb_totals.txt",
                "structure": "vb.xyz",
                "provenance": "fixture: constrained-occupation run, spin-down channel only",
                "memory_metrics": {"lambda_readout_fidelity": 0.82},
                "transitions": [
                    {
                        "spin_channel": "down",
                        "wfc": {
                            "ground_occupied": "vb_gs_occ.wfc",
                            "ground_unoccupied": "vb_gs_unocc.wfc",
                            "excited_occupied": "vb_es_occ.wfc",
                            "excited_unoccupied": "vb_es_unocc.wfc",
                        },
                        "phonons": "vb_down.phn",
                        "coupling": "vb_down.coupling.csv",
                    }
                ],
            },
            {
                "name": "carbon on boron + nitrogen vacancy",
                "composition": [
                    {"element": "C", "site": "substitution-on-B"},
                    {"element": "N", "site": "vacancy-on-N"},
                ],
                "charge": 0,
                "spin_multiplicity": "triplet",
                "totals": "cbvn_totals.txt",
                "structure": "cbvn.xyz",
                "provenance": "fixture: constrained-occupation run, spin-up channel",
                "transitions": [
                    {
                        "spin_channel": "up",
                        "wfc": {
                            "ground_occupied": "cbvn_gs_occ.wfc",
                            "ground_unoccupied": "cbvn_gs_unocc.wfc",
                            "excited_occupied": "cbvn_es_occ.wfc",
                            "excited_unoccupied": "cbvn_es_unocc.wfc",
                        },
                    }
                ],
            },
            {
                "name": "carbon dimer (UV)",
                "composition": [
                    {"element": "C", "site": "substitution-on-B"},
                    {"element": "C", "site": "substitution-on-N"},
                ],
                "charge": 0,
                "spin_multiplicity": "triplet",
                "totals": "c2_totals.txt",
                "structure": "c2.xyz",
                "provenance": "fixture: dipoles imported from an upstream run",
                "transitions": [
                    {
                        "spin_channel": "up",
                        "dipoles": {
                            "excitation": {"mu_x": [0.4, 0.0], "mu_y": [0.1, 0.0], "mu_z": [0.0, 0.0]},
                            "emission": {"mu_x": [0.35, 0.0], "mu_y": [0.12, 0.0], "mu_z": [0.0, 0.02]},
                        },
                    }
                ],
            },
        ],
    }
    (OUT / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
