import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lm05sim.polarization import (
    BASIS_SWITCH_ANGLE,
    FLIPPER_DIAGONAL,
    FLIPPER_RECTILINEAR,
    Detector,
    JonesVector,
    NamedState,
    PockelsCell,
    Source,
    apply,
    classify,
    equal_up_to_phase,
    flipper_matrix,
    hwp_matrix,
    measurement_probs,
    pockels_matrix,
    trace_state,
)

H, V, D, A = NamedState.H, NamedState.V, NamedState.D, NamedState.A

# Matrices of the triggered cells, unnormalized as conventionally written.
SWAP_HV = np.array([[0, 1], [1, 0]], dtype=complex)
SWAP_DA = np.array([[1, 0], [0, -1]], dtype=complex)
BASIS_SWITCH = np.array([[1, 1], [1, -1]], dtype=complex)
FLIP = np.array([[0, -1], [1, 0]], dtype=complex)


def proportional(mat_a, mat_b, tol=1e-10):
    """True when the matrices differ only by a global complex scalar."""
    mat_a = np.asarray(mat_a, dtype=complex)
    mat_b = np.asarray(mat_b, dtype=complex)
    idx = np.unravel_index(np.argmax(np.abs(mat_b)), mat_b.shape)
    if abs(mat_a[idx]) < tol:
        return False
    scale = mat_a[idx] / mat_b[idx]
    return np.allclose(mat_a, scale * mat_b, atol=tol)


def unitary_up_to_scale(mat, tol=1e-10):
    prod = mat.conj().T @ mat
    scale = prod[0, 0].real
    return scale > 0 and np.allclose(prod, scale * np.eye(2), atol=tol)


finite_angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)

amplitudes = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def jones_vectors(draw):
    re_a = draw(amplitudes)
    im_a = draw(amplitudes)
    re_b = draw(amplitudes)
    im_b = draw(amplitudes)
    a = complex(re_a, im_a)
    b = complex(re_b, im_b)
    if math.hypot(abs(a), abs(b)) < 1e-3:
        a = 1.0 + 0j
    return JonesVector(a, b)


class TestHwpMatrix:
    def test_theta_zero_swaps_diagonal_basis(self):
        assert np.allclose(hwp_matrix(0.0), SWAP_DA, atol=1e-12)

    def test_theta_quarter_pi_swaps_rectilinear_basis(self):
        assert np.allclose(hwp_matrix(math.pi / 4), SWAP_HV, atol=1e-12)

    def test_theta_minus_eighth_pi(self):
        expected = np.array([[1, -1], [-1, -1]], dtype=complex) / math.sqrt(2)
        assert np.allclose(hwp_matrix(-math.pi / 8), expected, atol=1e-12)
        assert proportional(hwp_matrix(-math.pi / 8), np.array([[1, -1], [-1, -1]]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            hwp_matrix(math.nan)

    @given(finite_angles)
    def test_unitary_up_to_scale(self, theta):
        assert unitary_up_to_scale(hwp_matrix(theta))

    @given(finite_angles)
    def test_involution(self, theta):
        m = hwp_matrix(theta)
        assert proportional(m @ m, np.eye(2))


class TestPockelsMatrix:
    def test_idle_cell_is_identity(self):
        assert np.array_equal(pockels_matrix(PockelsCell(math.pi / 8)), np.eye(2))

    def test_fired_at_eighth_pi(self):
        got = pockels_matrix(PockelsCell(math.pi / 8, triggered=True))
        assert proportional(got, BASIS_SWITCH)

    def test_fired_at_quarter_pi(self):
        got = pockels_matrix(PockelsCell(math.pi / 4, triggered=True))
        assert np.allclose(got, SWAP_HV, atol=1e-12)


class TestFlipper:
    def test_idle_is_identity(self):
        assert np.array_equal(flipper_matrix(False), np.eye(2))

    def test_fired_is_orthogonal_rotation(self):
        assert proportional(flipper_matrix(True), FLIP)

    def test_h_to_v(self):
        assert equal_up_to_phase(apply(flipper_matrix(True), H.vector), V.vector)

    def test_a_to_d(self):
        assert equal_up_to_phase(apply(flipper_matrix(True), A.vector), D.vector)

    @pytest.mark.parametrize("state", list(NamedState))
    def test_orthogonal_to_input(self, state):
        flipped = apply(flipper_matrix(True), state.vector)
        overlap = abs(np.vdot(state.vector.as_array(), flipped.as_array()))
        assert overlap < 1e-10

    def test_cell_order_does_not_matter(self):
        ab = pockels_matrix(FLIPPER_DIAGONAL) @ pockels_matrix(FLIPPER_RECTILINEAR)
        ba = pockels_matrix(FLIPPER_RECTILINEAR) @ pockels_matrix(FLIPPER_DIAGONAL)
        assert proportional(ab, ba)

    @given(jones_vectors())
    def test_double_flip_is_identity(self, vec):
        m = flipper_matrix(True)
        assert equal_up_to_phase(apply(m, apply(m, vec)), vec)


class TestApply:
    def test_identity_keeps_state(self):
        assert equal_up_to_phase(apply(np.eye(2), V.vector), V.vector)

    def test_basis_switch_takes_h_to_d(self):
        switch = pockels_matrix(PockelsCell(BASIS_SWITCH_ANGLE, triggered=True))
        assert equal_up_to_phase(apply(switch, H.vector), D.vector)

    def test_basis_switch_takes_a_to_v(self):
        switch = pockels_matrix(PockelsCell(BASIS_SWITCH_ANGLE, triggered=True))
        assert equal_up_to_phase(apply(switch, A.vector), V.vector)

    def test_zero_output_raises(self):
        with pytest.raises(ValueError):
            apply(np.zeros((2, 2)), H.vector)


class TestEqualUpToPhase:
    def test_pure_phase(self):
        rotated = JonesVector(np.exp(1j * math.pi / 3), 0)
        assert equal_up_to_phase(H.vector, rotated)

    def test_orthogonal(self):
        assert not equal_up_to_phase(H.vector, V.vector)

    def test_sign_flip(self):
        assert equal_up_to_phase(D.vector, JonesVector(-1, -1))


class TestMeasurementProbs:
    def test_horizontal(self):
        assert measurement_probs(H.vector) == (1.0, 0.0)

    def test_diagonal_splits_evenly(self):
        p1, p2 = measurement_probs(D.vector)
        assert p1 == pytest.approx(0.5, abs=1e-12)
        assert p2 == pytest.approx(0.5, abs=1e-12)

    def test_antidiagonal_through_switch_hits_spcm2(self):
        switch = pockels_matrix(PockelsCell(BASIS_SWITCH_ANGLE, triggered=True))
        p1, p2 = measurement_probs(apply(switch, A.vector))
        assert p1 == pytest.approx(0.0, abs=1e-12)
        assert p2 == pytest.approx(1.0, abs=1e-12)

    @given(jones_vectors())
    def test_probs_sum_to_one(self, vec):
        p1, p2 = measurement_probs(vec)
        assert p1 + p2 == pytest.approx(1.0, abs=1e-12)


# Expected end-to-end behaviour of the chain: prepared state, state sent
# back after the flipper, detector that fires.
CHAIN_TABLE = [
    (Source.SRC1, False, False, H, H, Detector.SPCM1),
    (Source.SRC1, False, True, H, V, Detector.SPCM2),
    (Source.SRC2, False, False, V, V, Detector.SPCM2),
    (Source.SRC2, False, True, V, H, Detector.SPCM1),
    (Source.SRC1, True, False, D, D, Detector.SPCM1),
    (Source.SRC1, True, True, D, A, Detector.SPCM2),
    (Source.SRC2, True, False, A, A, Detector.SPCM2),
    (Source.SRC2, True, True, A, D, Detector.SPCM1),
]


class TestTraceState:
    @pytest.mark.parametrize("source,pc1,flip,prepared,returned,detector", CHAIN_TABLE)
    def test_exhaustive_chain(self, source, pc1, flip, prepared, returned, detector):
        assert trace_state(source, pc1, flip) == (prepared, returned, detector)

    def test_flip_always_swaps_detector(self):
        for source in Source:
            for pc1 in (False, True):
                _, _, det_off = trace_state(source, pc1, False)
                _, _, det_on = trace_state(source, pc1, True)
                assert det_off != det_on

    def test_identity_encodes_same_state(self):
        for source in Source:
            for pc1 in (False, True):
                prepared, returned, _ = trace_state(source, pc1, False)
                assert prepared == returned

    def test_opposite_switch_orientation_also_routes_deterministically(self):
        # the measurement cell works at either +pi/8 or -pi/8; the diagonal
        # states then land on swapped detectors but routing stays 0/1
        other = hwp_matrix(-BASIS_SWITCH_ANGLE)
        for state, expected_port in ((D, 1), (A, 0)):
            p1, p2 = measurement_probs(apply(other, state.vector))
            assert max(p1, p2) == pytest.approx(1.0, abs=1e-12)
            assert (p1, p2)[expected_port] == pytest.approx(1.0, abs=1e-12)


class TestClassify:
    @pytest.mark.parametrize("state", list(NamedState))
    def test_roundtrip(self, state):
        assert classify(state.vector) == state

    def test_rejects_other_states(self):
        with pytest.raises(ValueError):
            classify(JonesVector(1, 1j))


class TestJonesVector:
    def test_normalizes_on_construction(self):
        vec = JonesVector(3, 4)
        assert abs(vec.a) ** 2 + abs(vec.b) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            JonesVector(0, 0)

    @given(jones_vectors())
    @settings(max_examples=50)
    def test_always_normalized(self, vec):
        assert abs(vec.a) ** 2 + abs(vec.b) ** 2 == pytest.approx(1.0, abs=1e-12)
