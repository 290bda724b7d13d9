import math
import random

import pytest

from defectdb.bundle import Bundle, make_manifest
from defectdb.errors import InvalidCursorError, InvalidSignatureError, UnknownDefectError
from defectdb.model import DefectRecord, TransitionRecord
from defectdb.constants import EV_NM
from defectdb.query import (
    DefectFilters,
    Signature,
    build_index,
    decode_cursor,
    encode_cursor,
    get_defect,
    identify,
    list_defects,
)

ELEMENTS = ("C", "O", "Si", "S", "Ge", "Al", "P")
SITES = ("substitution-on-B", "substitution-on-N", "complex-member")
GROUPS = ("III", "IV", "V", "VI", None)


def random_bundle(rng: random.Random, n_records: int) -> Bundle:
    records = []
    for i in range(n_records):
        n_el = rng.randint(0, 3)
        composition = tuple(
            (rng.choice(ELEMENTS), rng.choice(SITES)) for _ in range(n_el)
        ) or (("B", "vacancy-on-B"),)
        transitions = []
        for n in range(rng.randint(1, 4)):
            zpl = rng.uniform(0.3, 6.5)
            if rng.random() < 0.06:
                rate, lifetime = 0.0, math.inf
            else:
                lifetime = 10 ** rng.uniform(-9.5, -4.0)
                rate = 1.0 / lifetime
            transitions.append(TransitionRecord(
                spin_channel=rng.choice(("up", "down")),
                excited_total_energy=zpl,
                zpl=zpl,
                zpl_nm=EV_NM / zpl,
                radiative_rate=rate,
                radiative_lifetime=lifetime,
                visibility_em=rng.choice((None, rng.random())),
                misalignment_deg=rng.choice((None, rng.uniform(0, 30))),
            ))
        records.append(DefectRecord(
            id=f"D{i:04d}_q0_triplet",
            composition=composition,
            charge=rng.choice((-1, 0, 1)),
            spin_multiplicity=rng.choice(("singlet", "doublet", "triplet")),
            ground_total_energy=0.0,
            transitions=tuple(transitions),
            host_group=rng.choice(GROUPS),
        ))
    records.sort(key=lambda r: r.id)
    return Bundle(root=None, manifest=make_manifest(len(records)), records=tuple(records))


def random_signature(rng: random.Random) -> Signature:
    kwargs = {}
    if rng.random() < 0.75:
        kwargs["zpl_ev"] = rng.uniform(0.3, 6.5)
        kwargs["zpl_tolerance_ev"] = rng.choice((0.05, 0.1, 0.4, 1.0))
    if rng.random() < 0.35:
        lo = 10 ** rng.uniform(-9.5, -5.0)
        kwargs["lifetime_min_s"] = lo
        kwargs["lifetime_max_s"] = lo * 10 ** rng.uniform(0.1, 3.0)
    if rng.random() < 0.25:
        kwargs["visibility_min"] = rng.random()
    if rng.random() < 0.25:
        kwargs["misalignment_max_deg"] = rng.uniform(0, 30)
    if rng.random() < 0.3:
        kwargs["spin_multiplicity"] = rng.choice(("singlet", "doublet", "triplet"))
    if rng.random() < 0.2:
        kwargs["charge"] = rng.choice((-1, 0, 1))
    if rng.random() < 0.3:
        kwargs["must_contain_elements"] = tuple(
            rng.sample(ELEMENTS, rng.randint(1, 2))
        )
    if rng.random() < 0.2:
        kwargs["host_group"] = rng.choice(("III", "IV", "V", "VI"))
    if not kwargs:
        kwargs["zpl_ev"] = 2.0
    return Signature(**kwargs)


def brute_force_identify(bundle: Bundle, sig: Signature):
    """Independent oracle: exhaustive scan + explicit sort, no index."""
    rows = []
    for record in bundle.records:
        for n, t in enumerate(record.transitions):
            if sig.zpl_ev is not None and abs(t.zpl - sig.zpl_ev) > sig.zpl_tolerance_ev:
                continue
            if sig.lifetime_min_s is not None or sig.lifetime_max_s is not None:
                if not math.isfinite(t.radiative_lifetime):
                    continue
                if sig.lifetime_min_s is not None and t.radiative_lifetime < sig.lifetime_min_s:
                    continue
                if sig.lifetime_max_s is not None and t.radiative_lifetime > sig.lifetime_max_s:
                    continue
            if sig.visibility_min is not None:
                if t.visibility_em is None or t.visibility_em < sig.visibility_min:
                    continue
            if sig.misalignment_max_deg is not None:
                if t.misalignment_deg is None or t.misalignment_deg > sig.misalignment_max_deg:
                    continue
            if sig.spin_multiplicity is not None and record.spin_multiplicity != sig.spin_multiplicity:
                continue
            if sig.charge is not None and record.charge != sig.charge:
                continue
            if sig.must_contain_elements:
                present = {el for el, site in record.composition if site != "vacancy-on-B" and site != "vacancy-on-N"}
                if not set(sig.must_contain_elements).issubset(present):
                    continue
            if sig.host_group is not None and record.host_group != sig.host_group:
                continue
            zpl_dist = abs(t.zpl - sig.zpl_ev) if sig.zpl_ev is not None else 0.0
            if sig.lifetime_min_s is not None and sig.lifetime_max_s is not None and math.isfinite(t.radiative_lifetime):
                mid = 0.5 * (math.log10(sig.lifetime_min_s) + math.log10(sig.lifetime_max_s))
                lt_dist = abs(math.log10(t.radiative_lifetime) - mid)
            else:
                lt_dist = 0.0
            rows.append(((zpl_dist, lt_dist, record.id, n), (record.id, n)))
    rows.sort(key=lambda r: r[0])
    return [key for _, key in rows]


class TestIndex:
    def test_empty_bundle(self):
        bundle = Bundle(root=None, manifest=make_manifest(0), records=())
        index = build_index(bundle)
        assert index.n_defects == 0 and index.n_transitions == 0
        assert identify(index, Signature(zpl_ev=2.0)) == []

    def test_counts(self):
        bundle = random_bundle(random.Random(1), 25)
        index = build_index(bundle)
        assert index.n_defects == 25
        assert index.n_transitions == sum(len(r.transitions) for r in bundle.records)


class TestIdentify:
    def test_matches_brute_force_randomized(self):
        rng = random.Random(2024)
        for _ in range(40):
            bundle = random_bundle(rng, rng.randint(1, 60))
            index = build_index(bundle)
            for _ in range(25):
                sig = random_signature(rng)
                got = [(m.defect_id, m.transition_index) for m in identify(index, sig)]
                assert got == brute_force_identify(bundle, sig)

    def test_adding_criterion_never_enlarges(self):
        rng = random.Random(7)
        bundle = random_bundle(rng, 40)
        index = build_index(bundle)
        base = Signature(zpl_ev=2.0, zpl_tolerance_ev=1.5)
        base_set = {(m.defect_id, m.transition_index) for m in identify(index, base)}
        for extra in (
            Signature(zpl_ev=2.0, zpl_tolerance_ev=1.5, spin_multiplicity="triplet"),
            Signature(zpl_ev=2.0, zpl_tolerance_ev=1.5, charge=0),
            Signature(zpl_ev=2.0, zpl_tolerance_ev=1.5, must_contain_elements=("C",)),
            Signature(zpl_ev=2.0, zpl_tolerance_ev=1.5, visibility_min=0.5),
        ):
            narrowed = {(m.defect_id, m.transition_index) for m in identify(index, extra)}
            assert narrowed <= base_set

    def test_widening_tolerance_never_shrinks(self):
        rng = random.Random(8)
        bundle = random_bundle(rng, 40)
        index = build_index(bundle)
        previous: set = set()
        for tol in (0.05, 0.2, 0.4, 1.0, 3.0):
            current = {
                (m.defect_id, m.transition_index)
                for m in identify(index, Signature(zpl_ev=2.5, zpl_tolerance_ev=tol))
            }
            assert previous <= current
            previous = current

    def test_deterministic(self):
        rng = random.Random(9)
        bundle = random_bundle(rng, 30)
        index = build_index(bundle)
        sig = Signature(zpl_ev=2.0, zpl_tolerance_ev=2.0)
        first = identify(index, sig)
        for _ in range(3):
            assert identify(index, sig) == first

    def test_empty_signature_rejected(self):
        index = build_index(random_bundle(random.Random(3), 5))
        with pytest.raises(InvalidSignatureError, match="criterion"):
            identify(index, Signature())

    def test_match_lists_reverifiable_criteria(self):
        rng = random.Random(12)
        bundle = random_bundle(rng, 30)
        index = build_index(bundle)
        sig = Signature(zpl_ev=2.5, zpl_tolerance_ev=2.0, charge=0)
        for m in identify(index, sig):
            record = index.bundle.get(m.defect_id)
            t = record.transitions[m.transition_index]
            assert set(m.matched_criteria) == {"zpl", "charge"}
            assert m.criteria_satisfied == 2
            assert abs(t.zpl - 2.5) <= 2.0
            assert record.charge == 0
            assert m.zpl_distance_ev == abs(t.zpl - 2.5)


class TestFixtureAnchors:
    def test_boron_vacancy_found_near_two_ev(self, fixture_bundle):
        index = build_index(fixture_bundle)
        ids = [m.defect_id for m in identify(index, Signature(zpl_ev=2.0, zpl_tolerance_ev=0.4))]
        assert "VB_q-1_triplet" in ids

    def test_carbon_filter_excludes_vacancy(self, fixture_bundle):
        index = build_index(fixture_bundle)
        sig = Signature(zpl_ev=2.0, zpl_tolerance_ev=0.4, must_contain_elements=("C",))
        ids = [m.defect_id for m in identify(index, sig)]
        assert "VB_q-1_triplet" not in ids
        assert "CBVN_q0_triplet" in ids

    def test_out_of_gap_query_is_empty(self, fixture_bundle):
        index = build_index(fixture_bundle)
        assert identify(index, Signature(zpl_ev=10.0, zpl_tolerance_ev=0.4)) == []


class TestLookupAndPagination:
    def test_get_returns_ingested_record(self, fixture_bundle):
        index = build_index(fixture_bundle)
        record = get_defect(index, "VB_q-1_triplet")
        assert record.id == "VB_q-1_triplet"
        with pytest.raises(UnknownDefectError):
            get_defect(index, "nope")

    def test_pages_partition_the_set(self):
        bundle = random_bundle(random.Random(5), 25)
        index = build_index(bundle)
        seen = []
        cursor = None
        pages = 0
        while True:
            page, cursor = list_defects(index, cursor, limit=10)
            seen.extend(r.id for r in page)
            pages += 1
            if cursor is None:
                break
        assert pages == 3
        assert seen == [r.id for r in bundle.records]
        assert len(set(seen)) == len(seen)

    def test_filter_matches_brute_force(self):
        bundle = random_bundle(random.Random(6), 50)
        index = build_index(bundle)
        filters = DefectFilters(spin_multiplicity="triplet")
        page, _ = list_defects(index, None, limit=500, filters=filters)
        expected = [r.id for r in bundle.records if r.spin_multiplicity == "triplet"]
        assert [r.id for r in page] == expected

    def test_cursor_roundtrip_and_errors(self):
        token = encode_cursor("VB_q-1_triplet")
        assert decode_cursor(token) == "VB_q-1_triplet"
        with pytest.raises(InvalidCursorError):
            decode_cursor("!!not-base64!!")
