import pytest

from defectdb.ingest import ingest

FIXTURE_MANIFEST = "tests/fixtures/raw/manifest.json"

VB_ID = "VB_q-1_triplet"
CBVN_ID = "CBVN_q0_triplet"
C2_ID = "CBCN_q0_triplet"


@pytest.fixture(scope="session")
def fixture_bundle(tmp_path_factory):
    """Bundle built once from the shipped raw-input manifest."""
    out = tmp_path_factory.mktemp("bundle") / "fixture"
    report = ingest(FIXTURE_MANIFEST, out, strict=True)
    assert report.ok
    return report.bundle
