import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdiwitness.qcore import KET0, KET1, PLUS, BinaryObservable
from sdiwitness.witness import (
    KEYS,
    CorrelatorTable,
    EncodingError,
    MeasurementPair,
    PreparationSet,
    bb84_preparations,
    bob_success,
    correlator_table,
    duality_witness_max,
    per_config_duality,
    symmetric_witness,
    tunable_measurements,
    witness_at,
    witness_value,
)

S2 = math.sqrt(2)
PREP = bb84_preparations()
phases = st.floats(0, math.pi / 2), st.floats(-4 * math.pi, 4 * math.pi)


def S_closed(phi_s, phi_x):
    """Hand-derived symmetric-strategy witness."""
    return 2 * math.cos(phi_s) - 2 * math.sin(phi_s) * math.cos(phi_x)


class TestPreparations:
    def test_bloch_vectors(self):
        np.testing.assert_allclose(PREP[0, 0].bloch, [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(PREP[0, 1].bloch, [-1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(PREP[1, 0].bloch, [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(PREP[1, 1].bloch, [0, 0, -1], atol=1e-15)

    def test_unbiased_overlap(self):
        assert np.trace(KET0.rho @ PLUS.rho).real == pytest.approx(0.5, abs=1e-15)

    def test_parity_oblivious(self):
        assert PREP.parity_oblivious()
        skew = PreparationSet({(0, 0): KET0, (0, 1): KET0, (1, 0): KET1, (1, 1): KET1})
        assert skew.parity_oblivious()  # ½(0+1) = ½(0+1)
        broken = PreparationSet({(0, 0): KET0, (0, 1): KET1, (1, 0): KET1, (1, 1): KET0})
        assert not broken.parity_oblivious()

    def test_incomplete(self):
        with pytest.raises(ValueError):
            PreparationSet({(0, 0): KET0})


class TestMeasurements:
    def test_particle(self):
        np.testing.assert_allclose(tunable_measurements(0.0, 1.234).m0.op, np.diag([1, -1]), atol=1e-15)

    def test_wave(self):
        np.testing.assert_allclose(tunable_measurements(math.pi / 2, 0.0).m0.op, [[0, 1], [1, 0]], atol=1e-15)

    def test_diagonal(self):
        expected = (np.diag([1, -1]) - np.array([[0, 1], [1, 0]])) / S2
        np.testing.assert_allclose(tunable_measurements(math.pi / 4, math.pi).m0.op, expected, atol=1e-15)

    @given(*phases)
    def test_second_is_shifted_first(self, phi_s, phi_x):
        pair = tunable_measurements(phi_s, phi_x)
        shifted = tunable_measurements(phi_s, phi_x + math.pi).m0
        np.testing.assert_allclose(pair.m1.op, shifted.op, atol=1e-12)
        np.testing.assert_allclose(pair.m0.op @ pair.m0.op, np.eye(2), atol=1e-10)


class TestCorrelators:
    def test_particle_setting(self):
        t = correlator_table(PREP, tunable_measurements(0.0, 0.3))
        assert t[0, 0, 0] == pytest.approx(1.0, abs=1e-15)
        assert t[1, 1, 0] == pytest.approx(0.0, abs=1e-15)

    def test_diagonal_setting(self):
        t = correlator_table(PREP, tunable_measurements(math.pi / 4, math.pi))
        assert t[0, 1, 0] == pytest.approx(0.8535533905932737, abs=1e-12)

    def test_wave_setting(self):
        t = correlator_table(PREP, tunable_measurements(math.pi / 2, 0.0))
        assert t[0, 0, 0] == pytest.approx(0.5, abs=1e-15)

    @given(*phases)
    def test_symmetry_and_normalization(self, phi_s, phi_x):
        t = correlator_table(PREP, tunable_measurements(phi_s, phi_x))
        assert t.symmetric()
        assert t.normalized()
        assert all(0.0 <= t[k] <= 1.0 for k in KEYS)


class TestWitnessValue:
    def test_quantum_optimum(self):
        assert witness_at(PREP, math.pi / 4, math.pi) == pytest.approx(2 * S2, abs=1e-12)

    @pytest.mark.parametrize("phi_x", [0.0, 1.0, 4.0])
    def test_particle_gives_two(self, phi_x):
        assert witness_at(PREP, 0.0, phi_x) == pytest.approx(2.0, abs=1e-12)

    def test_uninformative(self):
        assert witness_value(CorrelatorTable({k: 0.5 for k in KEYS})) == 0.0

    def test_incomplete(self):
        with pytest.raises(ValueError):
            witness_value({(0, 0, 0): 1.0})

    @given(*phases)
    def test_closed_form_and_cap(self, phi_s, phi_x):
        s = witness_at(PREP, phi_s, phi_x)
        assert s == pytest.approx(S_closed(phi_s, phi_x), abs=1e-12)
        assert s <= 2 * S2 + 1e-9

    @given(*phases)
    def test_bob_round_trip(self, phi_s, phi_x):
        s = witness_at(PREP, phi_s, phi_x)
        assert bob_success(s) == (s + 4) / 8


@pytest.mark.parametrize("s, p", [(2 * S2, 0.8535533905932737), (2.0, 0.75), (0.0, 0.5)])
def test_bob_success(s, p):
    assert bob_success(s) == pytest.approx(p, abs=1e-15)


def test_bob_success_range():
    with pytest.raises(ValueError):
        bob_success(4.5)


def _relabel(prep, flip0, flip1, swap):
    """Re-assign bits to states: new input (a0, a1) uses the old state at the mapped input."""
    def old(a0, a1):
        b0, b1 = a0 ^ flip0, a1 ^ flip1
        return (b1, b0) if swap else (b0, b1)
    return PreparationSet({(a0, a1): prep[old(a0, a1)] for a0, a1 in itertools.product((0, 1), repeat=2)})


@pytest.mark.parametrize("flip0, flip1, swap", list(itertools.product((0, 1), repeat=3)))
def test_relabeling_closure(flip0, flip1, swap):
    """Undo a bit relabelling by relabelling settings and outcomes; S is unchanged."""
    rng = np.random.default_rng(3)
    dirs = rng.normal(size=(2, 3))
    meas = [BinaryObservable(d / np.linalg.norm(d)) for d in dirs]
    base = witness_value(correlator_table(PREP, MeasurementPair(*meas)))
    new_prep = _relabel(PREP, flip0, flip1, swap)
    # with swapped bits, new setting y uses the old measurement for a_{1-y};
    # either way its outcome is off from the new a_y by flip_y
    meas_new = meas[::-1] if swap else meas
    flips = (flip0, flip1)
    raw = correlator_table(new_prep, MeasurementPair(*meas_new))
    entries = {}
    for a0, a1, y in KEYS:
        e = raw[a0, a1, y]
        entries[a0, a1, y] = 1 - e if flips[y] else e
    assert witness_value(entries) == pytest.approx(base, abs=1e-12)


class TestPerConfigDuality:
    def test_symmetric_point(self):
        t = per_config_duality(PREP, math.pi / 4)
        for y in (0, 1):
            assert t.d[0, 0, y] == pytest.approx(S2 / 2, abs=1e-12)
            assert t.d[1, 1, y] == pytest.approx(S2 / 2, abs=1e-12)

    def test_no_visibility_for_particle(self):
        t = per_config_duality(PREP, 0.0)
        assert all(v == pytest.approx(0.0, abs=1e-12) for v in t.v.values())

    def test_closed_forms(self):
        t = per_config_duality(PREP, math.pi / 3)
        assert all(d == pytest.approx(0.5, abs=1e-12) for d in t.d.values())
        assert all(v == pytest.approx(math.sin(math.pi / 3), abs=1e-9) for v in t.v.values())

    def test_rejects_phase_dependent_path_encoding(self):
        bad = PreparationSet({(0, 0): PLUS, (0, 1): KET0, (1, 0): KET1, (1, 1): PLUS})
        with pytest.raises(EncodingError):
            per_config_duality(bad, 0.7)


class TestDualityWitnessMax:
    def test_optimum(self):
        r = duality_witness_max(PREP, math.pi / 4)
        assert r.s_value == pytest.approx(2 * S2, abs=1e-12)
        # arg-max location limited by flatness of the peak
        assert r.phi_x_star == pytest.approx(math.pi, abs=5e-8)
        assert r.p_b == pytest.approx((r.s_value + 4) / 8, abs=1e-12)

    def test_degenerate_tie_break(self):
        r = duality_witness_max(PREP, 0.0)
        assert r.s_value == pytest.approx(2.0, abs=1e-12)
        assert r.phi_x_star == 0.0

    def test_pure_wave(self):
        assert duality_witness_max(PREP, math.pi / 2).s_value == pytest.approx(2.0, abs=1e-12)

    def test_grid_floor(self):
        with pytest.raises(ValueError):
            duality_witness_max(PREP, 0.3, grid=64)

    def test_decomposition_on_grid(self):
        for phi_s in np.linspace(0, math.pi / 2, 25):
            r = duality_witness_max(PREP, phi_s)
            assert r.decomposition == pytest.approx(r.s_value, abs=1e-6)
            assert r.s_value == pytest.approx(2 * (math.cos(phi_s) + math.sin(phi_s)), abs=1e-12)


@pytest.mark.parametrize("d, v, s", [(S2 / 2, S2 / 2, 2 * S2), (1, 0, 2), (0, 1, 2)])
def test_symmetric_witness(d, v, s):
    assert symmetric_witness(d, v) == pytest.approx(s, abs=1e-15)


def test_symmetric_witness_range():
    with pytest.raises(ValueError):
        symmetric_witness(1.2, 0.0)
