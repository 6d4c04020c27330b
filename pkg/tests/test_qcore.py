import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdiwitness.qcore import (
    KET0,
    KET1,
    MAXMIX,
    MINUS,
    OBS_X,
    OBS_Z,
    PLUS,
    BinaryObservable,
    QubitState,
    UnphysicalError,
    expectation,
    helstrom,
    outcome_prob,
    state_from_bloch,
)
from sdiwitness.witness import tunable_measurements

unit = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: 0.1 < np.linalg.norm(v)).map(
    lambda v: np.array(v) / np.linalg.norm(v)
)
ball = st.tuples(unit, st.floats(0, 1)).map(lambda t: t[0] * t[1])


class TestStateFromBloch:
    def test_north_pole(self):
        np.testing.assert_allclose(state_from_bloch((0, 0, 1)).rho, np.diag([1, 0]), atol=1e-15)

    def test_maximally_mixed(self):
        np.testing.assert_allclose(state_from_bloch((0, 0, 0)).rho, np.eye(2) / 2, atol=1e-15)

    def test_plus_state(self):
        np.testing.assert_allclose(state_from_bloch((1, 0, 0)).rho, np.full((2, 2), 0.5), atol=1e-15)

    def test_rejects_outside_ball(self):
        with pytest.raises(UnphysicalError):
            state_from_bloch((0, 0, 1 + 1e-9))

    @given(unit)
    def test_pure_for_unit_vectors(self, n):
        assert state_from_bloch(n).purity == pytest.approx(1.0, abs=1e-10)

    @given(ball)
    def test_bloch_round_trip(self, n):
        np.testing.assert_allclose(state_from_bloch(n).bloch, n, atol=1e-12)


def test_state_validation():
    with pytest.raises(UnphysicalError):
        QubitState(np.diag([1.0, 1.0]))
    with pytest.raises(UnphysicalError):
        QubitState(np.diag([1.5, -0.5]))
    with pytest.raises(UnphysicalError):
        QubitState(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_state_is_immutable():
    with pytest.raises(ValueError):
        KET0.rho[0, 0] = 0


class TestObservable:
    def test_squares_to_identity(self):
        m = tunable_measurements(0.4, 1.3).m0
        np.testing.assert_allclose(m.op @ m.op, np.eye(2), atol=1e-10)

    def test_from_operator(self):
        obs = BinaryObservable.from_operator(np.array([[0, 1], [1, 0]]))
        np.testing.assert_allclose(obs.direction, [1, 0, 0])

    def test_rejects_non_unit(self):
        with pytest.raises(UnphysicalError):
            BinaryObservable((0, 0, 0.5))

    def test_projector_zero_is_plus_eigenspace(self):
        np.testing.assert_allclose(OBS_Z.projector(0), np.diag([1, 0]))


class TestBornRule:
    def test_eigenstate(self):
        assert outcome_prob(KET0, OBS_Z, 0) == 1.0

    def test_unbiased(self):
        assert outcome_prob(PLUS, OBS_Z, 0) == pytest.approx(0.5, abs=1e-15)

    def test_tunable_measurement_on_minus(self):
        # (1 - sqrt2/2)/2 from hand 2x2 arithmetic
        m0 = tunable_measurements(math.pi / 4, 0.0).m0
        assert outcome_prob(MINUS, m0, 0) == pytest.approx(0.1464466094067262, abs=1e-12)

    def test_bad_outcome(self):
        with pytest.raises(ValueError):
            outcome_prob(KET0, OBS_Z, 2)

    @given(ball, unit)
    def test_probabilities_sum_to_one(self, n, m):
        rho, obs = state_from_bloch(n), BinaryObservable(m)
        assert outcome_prob(rho, obs, 0) + outcome_prob(rho, obs, 1) == pytest.approx(1.0, abs=1e-12)

    @given(ball, unit)
    def test_expectation_is_dot_product(self, n, m):
        assert expectation(state_from_bloch(n), BinaryObservable(m)) == pytest.approx(float(n @ m), abs=1e-12)


@pytest.mark.parametrize(
    "rho, obs, expected",
    [(KET0, OBS_Z, 1.0), (MAXMIX, OBS_X, 0.0), (state_from_bloch((0, 0, 0.6)), OBS_Z, 0.6)],
)
def test_expectation_examples(rho, obs, expected):
    assert expectation(rho, obs) == pytest.approx(expected, abs=1e-12)


class TestHelstrom:
    def test_orthogonal(self):
        assert helstrom(KET0, KET1) == pytest.approx(1.0, abs=1e-12)

    def test_identical(self):
        assert helstrom(PLUS, PLUS) == 0.5

    def test_bb84_mixtures(self):
        rho0 = QubitState.mixture(KET0, MINUS)
        rho1 = QubitState.mixture(PLUS, KET1)
        assert helstrom(rho0, rho1) == pytest.approx(0.5 + math.sqrt(2) / 4, abs=1e-12)

    @settings(max_examples=200)
    @given(ball, ball)
    def test_symmetric_and_matches_eigensolver(self, n0, n1):
        r0, r1 = state_from_bloch(n0), state_from_bloch(n1)
        assert helstrom(r0, r1) == pytest.approx(helstrom(r1, r0), abs=1e-14)
        # independent route: numerical eigenvalues of the difference
        tn = np.abs(np.linalg.eigvalsh(r0.rho - r1.rho)).sum()
        assert helstrom(r0, r1) == pytest.approx(0.5 + tn / 4, abs=1e-12)
        assert helstrom(r0, r1) >= 0.5
