"""Jones-calculus model of the polarization chain.

Four linear polarization states (horizontal, vertical, diagonal and
anti-diagonal) travel through a chain of Pockels cells.  An idle cell is the
identity; a fired cell acts as a half-wave plate at its mounting angle.
Global phase carries no physical meaning here, so vectors are stored
normalized and compared up to an arbitrary complex unit factor, and matrices
are only required to be unitary up to a real positive scale.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "JonesMatrix",
    "JonesVector",
    "NamedState",
    "PockelsCell",
    "Source",
    "Detector",
    "BASIS_SWITCH_ANGLE",
    "FLIPPER_RECTILINEAR",
    "FLIPPER_DIAGONAL",
    "hwp_matrix",
    "pockels_matrix",
    "flipper_matrix",
    "apply",
    "equal_up_to_phase",
    "measurement_probs",
    "classify",
    "trace_state",
]

#: 2x2 complex array.  Every matrix built by this module satisfies
#: M†M = c·I with c > 0.
JonesMatrix = np.ndarray

NORM_TOL = 1e-12
PHASE_TOL = 1e-10


@dataclass(frozen=True)
class JonesVector:
    """Normalized complex amplitude pair, horizontal component first.

    Construction renormalizes, so ``JonesVector(1, 1)`` is the diagonal
    state.  A zero input raises ``ValueError``.
    """

    a: complex
    b: complex

    def __post_init__(self) -> None:
        norm = math.hypot(abs(self.a), abs(self.b))
        if norm < NORM_TOL:
            raise ValueError("Jones vector must be nonzero")
        object.__setattr__(self, "a", complex(self.a) / norm)
        object.__setattr__(self, "b", complex(self.b) / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)


class NamedState(enum.Enum):
    """The four linear polarization states used on the link."""

    H = "H"
    V = "V"
    D = "D"
    A = "A"

    @property
    def vector(self) -> JonesVector:
        return _CANONICAL[self]


_CANONICAL = {
    NamedState.H: JonesVector(1, 0),
    NamedState.V: JonesVector(0, 1),
    NamedState.D: JonesVector(1, 1),
    NamedState.A: JonesVector(1, -1),
}


class Source(enum.Enum):
    """Pulsed laser heads: SRC1 emits |H>, SRC2 emits |V>."""

    SRC1 = "SRC1"
    SRC2 = "SRC2"


class Detector(enum.Enum):
    """Wollaston prism outputs: SPCM1 sees the H port, SPCM2 the V port."""

    SPCM1 = "SPCM1"
    SPCM2 = "SPCM2"


@dataclass(frozen=True)
class PockelsCell:
    """Electro-optic cell: identity when idle, half-wave plate when fired."""

    orientation: float  # angle to the optical axis, radians
    triggered: bool = False


#: Mounting angle of the basis-switching cells (preparation and measurement).
#: A half-wave plate at pi/8 exchanges the bases: H <-> D and V <-> A.
BASIS_SWITCH_ANGLE = math.pi / 8

#: The two serially aligned cells forming the encoder's flipper.  Fired
#: together they take each of the four linear states to its orthogonal
#: partner; each one alone only affects "its" basis.
FLIPPER_RECTILINEAR = PockelsCell(math.pi / 4, triggered=True)  # swaps H/V
FLIPPER_DIAGONAL = PockelsCell(0.0, triggered=True)  # swaps D/A


def hwp_matrix(theta: float) -> JonesMatrix:
    """Jones matrix of a half-wave plate at orientation ``theta`` radians.

    Returns [[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]].
    """
    if not math.isfinite(theta):
        raise ValueError(f"orientation must be finite, got {theta!r}")
    c = math.cos(2.0 * theta)
    s = math.sin(2.0 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def pockels_matrix(cell: PockelsCell) -> JonesMatrix:
    """Jones matrix of a Pockels cell in its current trigger state."""
    if not cell.triggered:
        return np.eye(2, dtype=complex)
    return hwp_matrix(cell.orientation)


def flipper_matrix(triggered: bool) -> JonesMatrix:
    """Combined matrix of the encoder's two-cell flipper.

    Identity when idle.  When fired, the product of the diagonal-basis cell
    after the rectilinear-basis cell, which equals [[0, -1], [1, 0]] up to a
    global scalar and rotates every linear state onto its orthogonal partner.
    The two cells commute up to a scalar, so the order is a pure convention.
    """
    if not triggered:
        return np.eye(2, dtype=complex)
    return pockels_matrix(FLIPPER_DIAGONAL) @ pockels_matrix(FLIPPER_RECTILINEAR)


def apply(matrix: JonesMatrix, state: JonesVector) -> JonesVector:
    """Apply ``matrix`` to ``state`` and renormalize.

    Raises ValueError when the output is numerically zero: the chain only
    contains elements that are unitary up to scale, so a vanishing output
    signals a bug, not physics.
    """
    out = np.asarray(matrix, dtype=complex) @ state.as_array()
    if float(np.linalg.norm(out)) < NORM_TOL:
        raise ValueError("matrix annihilated the state")
    return JonesVector(out[0], out[1])


def equal_up_to_phase(u: JonesVector, v: JonesVector, tol: float = PHASE_TOL) -> bool:
    """True when ``u`` and ``v`` differ only by a global complex unit factor."""
    overlap = abs(np.vdot(u.as_array(), v.as_array()))
    return overlap >= 1.0 - tol


def measurement_probs(state: JonesVector) -> tuple[float, float]:
    """Born probabilities at the Wollaston outputs, (to SPCM1, to SPCM2)."""
    return abs(state.a) ** 2, abs(state.b) ** 2


def classify(state: JonesVector, tol: float = PHASE_TOL) -> NamedState:
    """Identify ``state`` with one of the four canonical states, up to phase."""
    for named in NamedState:
        if equal_up_to_phase(state, named.vector, tol):
            return named
    raise ValueError("state is not one of the four linear polarization states")


def trace_state(
    source: Source, pc1_on: bool, flipper_on: bool
) -> tuple[NamedState, NamedState, Detector]:
    """Follow one pulse through the whole chain with ideal optics.

    The measurement cell shares the preparation cell's mounting angle and
    fires exactly when the preparation cell fired, so the detection basis
    always matches the preparation basis and the routing is deterministic.

    Returns the prepared state, the state sent back to the receiver after
    the flipper, and the detector that clicks with unit probability.
    """
    emitted = NamedState.H if source is Source.SRC1 else NamedState.V
    basis_cell = PockelsCell(BASIS_SWITCH_ANGLE, triggered=pc1_on)
    prepared_vec = apply(pockels_matrix(basis_cell), emitted.vector)
    returned_vec = apply(flipper_matrix(flipper_on), prepared_vec)
    measured = apply(pockels_matrix(basis_cell), returned_vec)
    p1, p2 = measurement_probs(measured)
    if p1 > 1.0 - PHASE_TOL:
        detector = Detector.SPCM1
    elif p2 > 1.0 - PHASE_TOL:
        detector = Detector.SPCM2
    else:
        raise ValueError(f"ambiguous routing, probabilities ({p1:.3g}, {p2:.3g})")
    return classify(prepared_vec), classify(returned_vec), detector
