import json
import math

import pytest

from defectdb.bundle import (
    Bundle,
    load_bundle,
    make_manifest,
    record_from_line,
    record_to_line,
    records_to_bytes,
    save_bundle,
)
from defectdb.errors import BundleError
from test_model import make_record, make_transition


def write_minimal_bundle(root, records=(), manifest=None):
    root.mkdir(parents=True, exist_ok=True)
    manifest = manifest or make_manifest(len(records))
    (root / "manifest.json").write_text(json.dumps(manifest))
    (root / "defects.jsonl").write_bytes(records_to_bytes(records))
    return root


class TestCanonicalSerialization:
    def test_line_roundtrip_identity(self):
        record = make_record()
        line = record_to_line(record)
        assert record_from_line(line) == record
        assert record_to_line(record_from_line(line)) == line

    def test_keys_sorted(self):
        line = record_to_line(make_record())
        keys = list(json.loads(line).keys())
        assert keys == sorted(keys)

    def test_infinite_lifetime_sentinel(self):
        t = make_transition(radiative_rate=0.0, radiative_lifetime=math.inf)
        record = make_record(transitions=(t,))
        line = record_to_line(record)
        assert '"inf"' in line and "Infinity" not in line
        back = record_from_line(line)
        assert math.isinf(back.transitions[0].radiative_lifetime)

    def test_records_sorted_by_id(self):
        a = make_record(id="A_q0_triplet")
        z = make_record(id="Z_q0_triplet")
        data = records_to_bytes([z, a]).decode()
        assert data.index("A_q0") < data.index("Z_q0")


class TestLoadSave:
    def test_roundtrip_byte_identity(self, tmp_path):
        records = (make_record(), make_record(id="CBVN_q0_triplet", charge=0))
        src = write_minimal_bundle(tmp_path / "src", records)
        bundle = load_bundle(src)
        saved = save_bundle(bundle, tmp_path / "copy")
        assert (src / "defects.jsonl").read_bytes() == (tmp_path / "copy" / "defects.jsonl").read_bytes()
        assert saved.records == bundle.records

    def test_empty_bundle_valid(self, tmp_path):
        root = write_minimal_bundle(tmp_path / "empty")
        bundle = load_bundle(root)
        assert bundle.records == ()
        assert bundle.violations == ()

    def test_missing_manifest(self, tmp_path):
        (tmp_path / "nothing").mkdir()
        with pytest.raises(BundleError, match="manifest"):
            load_bundle(tmp_path / "nothing")

    def test_unsupported_version(self, tmp_path):
        manifest = make_manifest(0)
        manifest["version"] = "99"
        root = write_minimal_bundle(tmp_path / "v99", manifest=manifest)
        with pytest.raises(BundleError, match="version"):
            load_bundle(root)

    def test_missing_referenced_file_strictness(self, tmp_path):
        record = make_record(structure_ref="structures/x.cif")
        root = write_minimal_bundle(tmp_path / "dangling", (record,))
        bundle = load_bundle(root)
        assert any("structures/x.cif" in msg for _, msg in bundle.violations)
        with pytest.raises(BundleError, match="violation"):
            load_bundle(root, strict=True)

    def test_duplicate_id_flagged(self, tmp_path):
        record = make_record()
        root = tmp_path / "dup"
        root.mkdir()
        (root / "manifest.json").write_text(json.dumps(make_manifest(2)))
        line = record_to_line(record)
        (root / "defects.jsonl").write_text(line + "\n" + line + "\n")
        bundle = load_bundle(root)
        assert any("duplicate" in msg for _, msg in bundle.violations)

    def test_save_refuses_overwrite_without_force(self, tmp_path):
        root = write_minimal_bundle(tmp_path / "a", (make_record(),))
        bundle = load_bundle(root)
        save_bundle(bundle, tmp_path / "b")
        with pytest.raises(BundleError, match="exists"):
            save_bundle(bundle, tmp_path / "b")
        replaced = save_bundle(bundle, tmp_path / "b", force=True)
        assert replaced.records == bundle.records

    def test_reference_escape_rejected(self, tmp_path):
        root = write_minimal_bundle(tmp_path / "esc")
        bundle = load_bundle(root)
        with pytest.raises(BundleError, match="escapes"):
            bundle.resolve("../secrets.txt")
