"""On-disk bundle: a self-contained directory of defect records and raw inputs.

Layout::

    bundle/
      manifest.json     metadata (format kind, version, record count, n_D)
      defects.jsonl     canonical record file, one record per line
      structures/       crystallographic files (XYZ, CIF)
      wavefunctions/    plane-wave coefficient files
      phonons/          phonon mode files and coupling tables
      lineshapes/       HR factor tables and PL spectra (CSV)

The record file is canonical: records sorted by id, JSON objects with sorted
keys and compact separators, floats rendered by Python's shortest
round-trip repr, infinite lifetimes stored as the string sentinel "inf".
Loading and re-serializing is therefore byte-identical, which makes bundles
diff-friendly and ingest idempotence testable.
"""

from __future__ import annotations

import json
import math
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BundleError
from .model import DefectRecord, validate_record

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "defects.jsonl"
SUBDIRS = ("structures", "wavefunctions", "phonons", "lineshapes")
FORMAT_KIND = "defectdb-bundle"
SUPPORTED_VERSIONS = ("1",)
DEFAULT_REFRACTIVE_INDEX = 1.85


def _encode_floats(obj):
    """Replace non-finite floats with the serializable sentinel."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            raise BundleError("NaN is not representable in the record file")
        return obj
    if isinstance(obj, dict):
        return {k: _encode_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_encode_floats(v) for v in obj]
    return obj


def record_to_line(record: DefectRecord) -> str:
    """Canonical single-line serialization of one record."""
    payload = _encode_floats(record.to_dict())
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def record_from_line(line: str) -> DefectRecord:
    return DefectRecord.from_dict(json.loads(line))


def records_to_bytes(records) -> bytes:
    lines = [record_to_line(r) for r in sorted(records, key=lambda r: r.id)]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


@dataclass(frozen=True)
class Bundle:
    """Immutable in-memory view of a bundle directory.

    Safe for concurrent readers; writers produce a new directory and swap it
    in (see :func:`save_bundle`).
    """

    root: Path
    manifest: dict
    records: tuple[DefectRecord, ...]
    violations: tuple[tuple[str, str], ...] = ()  # (record id, message)
    _by_id: dict[str, DefectRecord] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {r.id: r for r in self.records})

    def get(self, record_id: str) -> DefectRecord | None:
        return self._by_id.get(record_id)

    @property
    def refractive_index(self) -> float:
        return float(self.manifest.get("refractive_index", DEFAULT_REFRACTIVE_INDEX))

    def resolve(self, ref: str) -> Path:
        """Resolve a record-relative file reference inside the bundle root."""
        p = (self.root / ref).resolve()
        if not str(p).startswith(str(self.root.resolve())):
            raise BundleError(f"reference escapes bundle root: {ref}")
        return p


def make_manifest(record_count: int, refractive_index: float = DEFAULT_REFRACTIVE_INDEX) -> dict:
    return {
        "kind": FORMAT_KIND,
        "version": "1",
        "record_count": record_count,
        "refractive_index": refractive_index,
    }


def _referenced_paths(record: DefectRecord):
    if record.structure_ref:
        yield record.structure_ref
    for t in record.transitions:
        if t.lineshape_ref:
            yield t.lineshape_ref
        if t.hr_ref:
            yield t.hr_ref


def load_bundle(path, strict: bool = False) -> Bundle:
    """Load a bundle directory, validating every record.

    Violations (invariant breaks, dangling file references, duplicate ids)
    are collected on the returned Bundle; with ``strict=True`` any violation
    aborts the load with a BundleError instead.
    """
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise BundleError(f"missing {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"unreadable manifest: {exc}") from exc
    if manifest.get("kind") != FORMAT_KIND:
        raise BundleError(f"not a defect bundle: kind={manifest.get('kind')!r}")
    if manifest.get("version") not in SUPPORTED_VERSIONS:
        raise BundleError(f"unsupported bundle version {manifest.get('version')!r}")

    records: list[DefectRecord] = []
    violations: list[tuple[str, str]] = []
    records_path = root / RECORDS_NAME
    if records_path.is_file():
        with records_path.open() as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = record_from_line(line)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise BundleError(f"{RECORDS_NAME}:{lineno}: unparseable record: {exc}") from exc
                records.append(record)

    seen: set[str] = set()
    for record in records:
        if record.id in seen:
            violations.append((record.id, "duplicate record id"))
        seen.add(record.id)
        for msg in validate_record(record):
            violations.append((record.id, msg))
        for ref in _referenced_paths(record):
            if not (root / ref).is_file():
                violations.append((record.id, f"referenced file missing: {ref}"))

    if strict and violations:
        head = "; ".join(f"{rid}: {msg}" for rid, msg in violations[:5])
        raise BundleError(f"{len(violations)} validation violation(s): {head}")

    records.sort(key=lambda r: r.id)
    return Bundle(root=root, manifest=manifest, records=tuple(records), violations=tuple(violations))


def _write_bundle_tree(bundle: Bundle, dest: Path) -> None:
    dest.mkdir(parents=True)
    (dest / MANIFEST_NAME).write_text(
        json.dumps(bundle.manifest, sort_keys=True, separators=(",", ": "), indent=2) + "\n"
    )
    (dest / RECORDS_NAME).write_bytes(records_to_bytes(bundle.records))
    for sub in SUBDIRS:
        src_sub = bundle.root / sub
        dst_sub = dest / sub
        if src_sub.is_dir() and src_sub.resolve() != dst_sub.resolve():
            shutil.copytree(src_sub, dst_sub)
        else:
            dst_sub.mkdir(exist_ok=True)


def save_bundle(bundle: Bundle, path, force: bool = False) -> Bundle:
    """Write a bundle to ``path`` atomically (build a temp sibling, then rename).

    Concurrent readers of an existing directory at ``path`` keep their open
    snapshot; ``force`` is required to replace an existing directory.
    """
    target = Path(path)
    if target.exists() and not force:
        raise BundleError(f"target exists: {target} (use force to replace)")
    tmp = target.parent / f".{target.name}.tmp-{os.getpid()}"
    if tmp.exists():
        shutil.rmtree(tmp)
    try:
        _write_bundle_tree(bundle, tmp)
        if target.exists():
            old = target.parent / f".{target.name}.old-{os.getpid()}"
            os.rename(target, old)
            os.rename(tmp, target)
            shutil.rmtree(old)
        else:
            os.rename(tmp, target)
    except Exception:
        if tmp.exists():
            shutil.rmtree(tmp, ignore_errors=True)
        raise
    return load_bundle(target)
