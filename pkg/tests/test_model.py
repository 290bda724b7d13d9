import math

import pytest
from hypothesis import given, strategies as st

from defectdb.constants import EV_NM, ev_to_nm, nm_to_ev
from defectdb.model import (
    DefectRecord,
    DipoleMoment,
    TransitionRecord,
    compute_zpl,
    derive_defect_id,
    derive_host_group,
    validate_record,
    with_rescaled_refractive_index,
)


def make_transition(**overrides) -> TransitionRecord:
    zpl = overrides.pop("zpl", 2.08)
    rate = overrides.pop("radiative_rate", 1e8)
    base = dict(
        spin_channel="down",
        excited_total_energy=zpl,   # paired with ground_total_energy = 0.0
        zpl=zpl,
        zpl_nm=EV_NM / zpl,
        radiative_rate=rate,
        radiative_lifetime=math.inf if rate == 0 else 1.0 / rate,
    )
    base.update(overrides)
    return TransitionRecord(**base)


def make_record(**overrides) -> DefectRecord:
    base = dict(
        id="VB_q-1_triplet",
        composition=(("B", "vacancy-on-B"),),
        charge=-1,
        spin_multiplicity="triplet",
        ground_total_energy=0.0,
        transitions=(make_transition(),),
    )
    base.update(overrides)
    return DefectRecord(**base)


class TestComputeZpl:
    def test_benchmark_difference(self):
        assert compute_zpl(-7.92, -5.84) == pytest.approx(2.08, rel=1e-12)

    def test_shift_invariance(self):
        e = -418.27
        assert compute_zpl(e, e + 1.89) == pytest.approx(1.89, rel=1e-12)

    def test_degenerate_pair_rejected(self):
        with pytest.raises(ValueError, match="non-positive"):
            compute_zpl(0.0, 0.0)

    def test_inverted_labels_rejected(self):
        with pytest.raises(ValueError, match="non-positive"):
            compute_zpl(-5.84, -7.92)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            compute_zpl(math.nan, 1.0)

    @given(
        st.floats(-1e3, 1e3, allow_nan=False),
        st.floats(-1e3, 1e3, allow_nan=False),
    )
    def test_antisymmetric(self, a, b):
        if abs(a - b) < 1e-9:
            return
        lo, hi = min(a, b), max(a, b)
        assert compute_zpl(lo, hi) == -(-compute_zpl(lo, hi))
        with pytest.raises(ValueError):
            compute_zpl(hi, lo)
        assert compute_zpl(lo, hi) == (hi - lo)


class TestUnitConversion:
    @given(st.floats(0.1, 12.0))
    def test_ev_nm_involutive(self, energy):
        assert nm_to_ev(ev_to_nm(energy)) == pytest.approx(energy, rel=1e-9)

    def test_anchor_wavelength(self):
        # 2.08 eV sits in the orange-red, ~596 nm
        assert ev_to_nm(2.08) == pytest.approx(1239.84198 / 2.08, rel=1e-12)


class TestValidateRecord:
    def test_benchmark_record_clean(self):
        record = make_record()
        assert validate_record(record) == []
        t = record.transitions[0]
        assert t.zpl == 2.08 and t.zpl_nm == pytest.approx(596.0778, abs=1e-4)

    def test_rate_lifetime_inverse_pair(self):
        record = make_record(transitions=(make_transition(radiative_rate=1e8),))
        assert validate_record(record) == []

    def test_negative_zpl_flagged(self):
        t = TransitionRecord(
            spin_channel="down", excited_total_energy=-0.3, zpl=-0.3, zpl_nm=1.0,
            radiative_rate=1e8, radiative_lifetime=1e-8,
        )
        msgs = validate_record(make_record(transitions=(t,)))
        assert any("zpl" in m and "positive" in m for m in msgs)

    def test_zpl_nm_consistency_enforced(self):
        t = make_transition(zpl_nm=596.2)
        msgs = validate_record(make_record(transitions=(t,)))
        assert any("zpl_nm" in m for m in msgs)

    def test_lifetime_must_invert_rate(self):
        t = make_transition(radiative_lifetime=2e-8)
        msgs = validate_record(make_record(transitions=(t,)))
        assert any("rate*lifetime" in m for m in msgs)

    def test_dark_transition_needs_infinite_lifetime(self):
        t = make_transition(radiative_rate=0.0, radiative_lifetime=math.inf)
        assert validate_record(make_record(transitions=(t,))) == []

    def test_efficiency_requires_nonradiative(self):
        t = make_transition(quantum_efficiency=0.5)
        msgs = validate_record(make_record(transitions=(t,)))
        assert any("quantum_efficiency" in m for m in msgs)

    def test_charge_domain(self):
        msgs = validate_record(make_record(charge=2))
        assert any("charge" in m for m in msgs)

    @pytest.mark.parametrize("count,spin,ok", [
        (101, "doublet", True),
        (101, "triplet", False),
        (101, "singlet", False),
        (102, "triplet", True),
        (102, "doublet", False),
    ])
    def test_spin_parity(self, count, spin, ok):
        msgs = validate_record(make_record(electron_count=count, spin_multiplicity=spin))
        assert (not any("spin_multiplicity" in m for m in msgs)) is ok

    def test_mu_sq_consistency(self):
        good = DipoleMoment.from_components(1 + 0j, 0.5j, 0)
        t = make_transition(excitation_dipole=good)
        assert validate_record(make_record(transitions=(t,))) == []
        bad = DipoleMoment(1 + 0j, 0.5j, 0j, good.mu_sq * 1.5)
        t = make_transition(excitation_dipole=bad)
        msgs = validate_record(make_record(transitions=(t,)))
        assert any("mu_sq" in m for m in msgs)

    def test_polarization_ranges(self):
        t = make_transition(excitation_polarization_deg=61.0, misalignment_deg=31.0, visibility_em=1.5)
        msgs = validate_record(make_record(transitions=(t,)))
        assert len([m for m in msgs if "deg" in m or "visibility" in m]) == 3


class TestIds:
    def test_vacancy_id(self):
        assert derive_defect_id((("B", "vacancy-on-B"),), -1, "triplet") == "VB_q-1_triplet"

    def test_complex_id(self):
        comp = (("C", "substitution-on-B"), ("N", "vacancy-on-N"))
        assert derive_defect_id(comp, 0, "singlet") == "CBVN_q0_singlet"

    def test_antisite_id(self):
        assert derive_defect_id((("N", "antisite"),), 1, "doublet") == "NB_q1_doublet"

    def test_deterministic(self):
        comp = (("C", "substitution-on-B"), ("C", "substitution-on-N"))
        assert derive_defect_id(comp, 0, "triplet") == derive_defect_id(comp, 0, "triplet")


class TestHostGroup:
    def test_single_dopant(self):
        assert derive_host_group((("C", "substitution-on-B"), ("N", "vacancy-on-N"))) == "IV"

    def test_no_dopant(self):
        assert derive_host_group((("B", "vacancy-on-B"),)) is None

    def test_mixed_groups(self):
        comp = (("O", "substitution-on-N"), ("Si", "substitution-on-B"))
        assert derive_host_group(comp) is None


class TestRefractiveRescale:
    def test_rate_linear_in_index(self):
        t = make_transition(nonradiative_rate=2e7, quantum_efficiency=1e8 / 1.2e8)
        scaled = with_rescaled_refractive_index(t, 1.85, 3.7)
        assert scaled.radiative_rate == pytest.approx(2 * t.radiative_rate, rel=1e-12)
        assert scaled.radiative_rate * scaled.radiative_lifetime == pytest.approx(1.0, rel=1e-12)
        assert scaled.quantum_efficiency == pytest.approx(2e8 / 2.2e8, rel=1e-12)
