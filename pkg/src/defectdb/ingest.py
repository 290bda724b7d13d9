"""Ingest pipeline: assemble a bundle from raw per-defect simulation artifacts.

The manifest is a JSON file listing, per defect: composition/charge/spin
metadata, a totals file (ground total energy plus relaxed excited totals per
spin channel), a structure file, and per transition either a quartet of WFC
files (ground occupied/unoccupied, excited occupied/unoccupied) or
precomputed dipoles, plus optional phonon and coupling files.

For each transition the pipeline runs: ZPL -> excitation/emission dipoles ->
polarization + misalignment -> radiative rate/lifetime -> optional
non-radiative rate and quantum efficiency -> optional HR factors and PL
lineshape.  Failures are collected per entry, so one bad defect never takes
down a bulk ingest unless strict mode asks for it.  Output is deterministic:
the same manifest always produces a byte-identical record file.
"""

from __future__ import annotations

import json
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import lineshape as ls
from . import photophysics as pp
from .bundle import Bundle, SUBDIRS, load_bundle, make_manifest, records_to_bytes, save_bundle
from .errors import IngestError
from .model import (
    DefectRecord,
    DipoleMoment,
    TransitionRecord,
    derive_defect_id,
    derive_host_group,
    validate_record,
)
from .constants import EV_NM
from .model import compute_zpl
from .polarization import misalignment, polarization_from_dipole
from .wavefunction import parse_wfc, transition_dipole

MANIFEST_VERSION = "1"
WFC_ROLES = ("ground_occupied", "ground_unoccupied", "excited_occupied", "excited_unoccupied")


@dataclass(frozen=True)
class IngestFailure:
    entry: str
    message: str


@dataclass(frozen=True)
class IngestReport:
    bundle: Bundle
    failures: tuple[IngestFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: not valid JSON: {exc}") from exc
    if manifest.get("version") != MANIFEST_VERSION:
        raise IngestError(f"{path}: unsupported manifest version {manifest.get('version')!r}")
    if not isinstance(manifest.get("defects"), list):
        raise IngestError(f"{path}: manifest must carry a 'defects' list")
    return manifest


def read_totals(path) -> tuple[float, dict[str, float]]:
    """Totals file: ``ground <eV>`` plus ``excited up|down <eV>`` lines."""
    ground = None
    excited: dict[str, float] = {}
    for ln in Path(path).read_text().splitlines():
        parts = ln.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "ground" and len(parts) == 2:
            ground = float(parts[1])
        elif parts[0] == "excited" and len(parts) == 3 and parts[1] in ("up", "down"):
            excited[parts[1]] = float(parts[2])
        else:
            raise IngestError(f"{path}: unrecognized totals line {ln!r}")
    if ground is None:
        raise IngestError(f"{path}: missing 'ground' line")
    return ground, excited


def _dipole_from_entry(entry: dict) -> DipoleMoment:
    comps = [complex(re, im) for re, im in (entry["mu_x"], entry["mu_y"], entry["mu_z"])]
    return DipoleMoment.from_components(*comps)


def _dipoles_from_wfc(base: Path, wfc: dict):
    missing = [role for role in WFC_ROLES if role not in wfc]
    if missing:
        raise IngestError(f"WFC quartet incomplete, missing {missing}")
    files = {role: parse_wfc(base / wfc[role]) for role in WFC_ROLES}
    exc = transition_dipole(
        files["ground_occupied"], files["ground_unoccupied"],
        files["ground_occupied"].band_energy, files["ground_unoccupied"].band_energy,
    )
    em = transition_dipole(
        files["excited_occupied"], files["excited_unoccupied"],
        files["excited_occupied"].band_energy, files["excited_unoccupied"].band_energy,
    )
    return exc, em


@dataclass
class _EntryResult:
    record: DefectRecord
    # ("copy", source path, bundle-relative dest) or ("hr"/"spectrum", object, dest)
    files: list[tuple]


def _build_entry(base: Path, entry: dict, refractive_index: float) -> _EntryResult:
    composition = tuple((c["element"], c["site"]) for c in entry["composition"])
    charge = int(entry["charge"])
    spin = entry["spin_multiplicity"]
    defect_id = derive_defect_id(composition, charge, spin)
    files: list[tuple] = []

    ground_total, excited_totals = read_totals(base / entry["totals"])

    structure_ref = None
    if entry.get("structure"):
        src = base / entry["structure"]
        if not src.is_file():
            raise IngestError(f"structure file missing: {src}")
        structure_ref = f"structures/{defect_id}{src.suffix}"
        files.append(("copy", src, structure_ref))

    transitions = []
    for n, tr in enumerate(entry.get("transitions", [])):
        channel = tr["spin_channel"]
        if channel not in excited_totals:
            raise IngestError(f"transition {n}: no excited total for spin channel {channel!r}")
        zpl = compute_zpl(ground_total, excited_totals[channel])

        if "wfc" in tr:
            exc_dip, em_dip = _dipoles_from_wfc(base, tr["wfc"])
            for role in WFC_ROLES:
                src = base / tr["wfc"][role]
                files.append(("copy", src, f"wavefunctions/{defect_id}_t{n}_{role}.wfc"))
        elif "dipoles" in tr:
            exc_dip = _dipole_from_entry(tr["dipoles"]["excitation"])
            em_dip = _dipole_from_entry(tr["dipoles"]["emission"])
        else:
            raise IngestError(f"transition {n}: needs either 'wfc' quartet or precomputed 'dipoles'")

        exc_pol = polarization_from_dipole(exc_dip)
        em_pol = polarization_from_dipole(em_dip)
        misalign = None
        if not exc_pol.out_of_plane and not em_pol.out_of_plane:
            misalign = misalignment(exc_pol, em_pol)

        # the emitted photon couples through the emission dipole
        radiative = pp.radiative_rate(zpl, em_dip.mu_sq, refractive_index)

        nr_rate = None
        qe = None
        if tr.get("coupling"):
            src = base / tr["coupling"]
            table = pp.read_coupling_table(src)
            nr_rate = pp.nonradiative_rate(table, tr.get("sigma_ev", pp.DEFAULT_BROADENING_EV))
            qe = pp.quantum_efficiency(radiative.rate, nr_rate)
            files.append(("copy", src, f"phonons/{defect_id}_t{n}.coupling.csv"))

        lineshape_ref = None
        hr_ref = None
        if tr.get("phonons"):
            src = base / tr["phonons"]
            phonons = ls.parse_phonons(src)
            hr = ls.hr_factors(phonons)
            spectrum = ls.pl_spectrum(hr, zpl)
            hr_ref = f"lineshapes/{defect_id}_t{n}.hr.csv"
            lineshape_ref = f"lineshapes/{defect_id}_t{n}.spectrum.csv"
            files.append(("copy", src, f"phonons/{defect_id}_t{n}.phn"))
            files.append(("hr", hr, hr_ref))
            files.append(("spectrum", spectrum, lineshape_ref))

        transitions.append(TransitionRecord(
            spin_channel=channel,
            excited_total_energy=excited_totals[channel],
            zpl=zpl,
            zpl_nm=EV_NM / zpl,
            radiative_rate=radiative.rate,
            radiative_lifetime=radiative.lifetime,
            excitation_dipole=exc_dip,
            emission_dipole=em_dip,
            excitation_polarization_deg=exc_pol.angle_deg,
            emission_polarization_deg=em_pol.angle_deg,
            visibility_exc=exc_pol.visibility,
            visibility_em=em_pol.visibility,
            misalignment_deg=misalign,
            nonradiative_rate=nr_rate,
            quantum_efficiency=qe,
            lineshape_ref=lineshape_ref,
            hr_ref=hr_ref,
        ))

    record = DefectRecord(
        id=defect_id,
        composition=composition,
        charge=charge,
        spin_multiplicity=spin,
        ground_total_energy=ground_total,
        transitions=tuple(transitions),
        host_group=entry.get("host_group", derive_host_group(composition)),
        electron_count=entry.get("electron_count"),
        structure_ref=structure_ref,
        memory_metrics=entry.get("memory_metrics"),
        provenance=entry.get("provenance", ""),
    )
    violations = validate_record(record)
    if violations:
        raise IngestError(f"derived record invalid: {'; '.join(violations[:3])}")
    return _EntryResult(record, files)


def _entry_label(entry: dict, position: int) -> str:
    if isinstance(entry, dict):
        if entry.get("name"):
            return str(entry["name"])
        try:
            composition = tuple((c["element"], c["site"]) for c in entry["composition"])
            return derive_defect_id(composition, int(entry["charge"]), entry["spin_multiplicity"])
        except Exception:
            pass
    return f"entry[{position}]"


def ingest(
    manifest_path,
    out_path,
    refractive_index: float = pp.DEFAULT_REFRACTIVE_INDEX,
    strict: bool = False,
    jobs: int = 1,
    force: bool = False,
) -> IngestReport:
    """Run the full ingest pipeline and write the bundle at ``out_path``.

    Per-entry failures are collected and reported; in strict mode any
    failure raises IngestError after processing all entries.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    manifest = read_manifest(manifest_path)
    entries = manifest["defects"]

    results: list[_EntryResult | None] = [None] * len(entries)
    failures: list[IngestFailure] = []

    def run_one(pos: int):
        return _build_entry(base, entries[pos], refractive_index)

    if jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {pos: pool.submit(run_one, pos) for pos in range(len(entries))}
        outcomes = {pos: fut for pos, fut in futures.items()}
    else:
        outcomes = None

    for pos in range(len(entries)):
        try:
            results[pos] = outcomes[pos].result() if outcomes else run_one(pos)
        except Exception as exc:
            failures.append(IngestFailure(_entry_label(entries[pos], pos), str(exc)))

    # single-threaded assembly: dedupe ids, write the tree, canonical order
    by_id: dict[str, _EntryResult] = {}
    for pos, res in enumerate(results):
        if res is None:
            continue
        if res.record.id in by_id:
            failures.append(IngestFailure(
                _entry_label(entries[pos], pos),
                f"id collision: {res.record.id} already produced by another entry",
            ))
            continue
        by_id[res.record.id] = res

    out_path = Path(out_path)
    staging = out_path.parent / f".{out_path.name}.ingest"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    for sub in SUBDIRS:
        (staging / sub).mkdir()
    for res in by_id.values():
        for kind, payload, dest in res.files:
            if kind == "hr":
                ls.write_hr_csv(payload, staging / dest)
            elif kind == "spectrum":
                ls.write_spectrum_csv(payload, staging / dest)
            else:
                shutil.copyfile(payload, staging / dest)
    records = sorted((res.record for res in by_id.values()), key=lambda r: r.id)
    (staging / "defects.jsonl").write_bytes(records_to_bytes(records))
    (staging / "manifest.json").write_text(
        json.dumps(make_manifest(len(records), refractive_index), sort_keys=True,
                   separators=(",", ": "), indent=2) + "\n"
    )

    built = load_bundle(staging)
    final = save_bundle(built, out_path, force=force)
    shutil.rmtree(staging)

    if strict and failures:
        head = "; ".join(f"{f.entry}: {f.message}" for f in failures[:5])
        raise IngestError(f"{len(failures)} entr(ies) failed in strict mode: {head}")
    return IngestReport(bundle=final, failures=tuple(failures))
