"""Per-record exports: transition tables as CSV, structures as XYZ/CIF,
and stored PL spectra re-rendered alongside their data files."""

from __future__ import annotations

from pathlib import Path

from .bundle import Bundle
from .model import DefectRecord
from .structures import read_structure, render_structure

_CSV_COLUMNS = (
    "id", "spin_channel", "zpl_eV", "zpl_nm", "radiative_rate_per_s",
    "radiative_lifetime_s", "nonradiative_rate_per_s", "quantum_efficiency",
    "excitation_polarization_deg", "emission_polarization_deg",
    "visibility_exc", "visibility_em", "misalignment_deg", "mu_sq_exc_debye2",
    "mu_sq_em_debye2",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _transitions_csv(records) -> str:
    lines = [",".join(_CSV_COLUMNS)]
    for record in records:
        for t in record.transitions:
            lines.append(",".join(_fmt(v) for v in (
                record.id, t.spin_channel, t.zpl, t.zpl_nm, t.radiative_rate,
                t.radiative_lifetime, t.nonradiative_rate, t.quantum_efficiency,
                t.excitation_polarization_deg, t.emission_polarization_deg,
                t.visibility_exc, t.visibility_em, t.misalignment_deg,
                t.excitation_dipole.mu_sq if t.excitation_dipole else None,
                t.emission_dipole.mu_sq if t.emission_dipole else None,
            )))
    return "\n".join(lines) + "\n"


def _render_spectrum_figure(csv_path: Path, png_path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data[:, 0], data[:, 1])
    ax.set_xlabel("photon energy (eV)")
    ax.set_ylabel("PL intensity (arb.)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def export_records(
    bundle: Bundle,
    records: list[DefectRecord],
    outdir: Path,
    fmt: str = "csv",
    spectra: bool = False,
) -> list[Path]:
    """Write export artifacts for the given records; returns written paths."""
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if fmt == "csv":
        path = outdir / "transitions.csv"
        path.write_text(_transitions_csv(records))
        written.append(path)
    elif fmt in ("xyz", "cif"):
        for record in records:
            if not record.structure_ref:
                continue
            src = bundle.resolve(record.structure_ref)
            structure = read_structure(src)
            path = outdir / f"{record.id}.{fmt}"
            path.write_bytes(render_structure(structure, fmt))
            written.append(path)
    else:
        raise ValueError(f"unsupported export format {fmt!r}")

    if spectra:
        for record in records:
            for n, t in enumerate(record.transitions):
                if not t.lineshape_ref:
                    continue
                src = bundle.resolve(t.lineshape_ref)
                csv_path = outdir / f"{record.id}_t{n}_spectrum.csv"
                csv_path.write_bytes(src.read_bytes())
                png_path = outdir / f"{record.id}_t{n}_spectrum.png"
                _render_spectrum_figure(csv_path, png_path, f"{record.id} transition {n}")
                written.extend([csv_path, png_path])
    return written
