"""Photon-spin parity-check gate and its linear-optics readout.

The ideal gate is an eight-rule signed permutation on circular photon labels
times electron spin: when the photon's spin angular momentum (set jointly by
polarization and propagation direction) matches the electron spin, the photon
is reflected with polarization label and direction both flipped and sign +1;
otherwise it is transmitted unchanged with a pi phase (sign -1).

A half-wave plate at 45 degrees converts circular to linear polarization and
a polarizing beam splitter per output port routes H/V onto labeled detectors.

With a leaky cavity the same gate is described by frequency-dependent
scattering coefficients: the coupled (reflecting) subspace scatters with
(t, r) and the uncoupled (transmitting) subspace with (t0, r0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import (
    CircularBasisPhotonError,
    LinearBasisPhotonError,
    ShapeMismatchError,
    SingularDenominatorError,
)
from .hilbert import (
    BasisKet,
    Direction,
    PhotonLabel,
    Polarization,
    SpinLabel,
    StateVector,
    combine_terms,
)

_R, _L, _H, _V = Polarization.R, Polarization.L, Polarization.H, Polarization.V
_UP, _DOWN = SpinLabel.UP, SpinLabel.DOWN
_PLUS, _MINUS = Direction.PLUS_Z, Direction.MINUS_Z

# The complete interaction table: (pol, dir, spin) -> (pol', dir', sign).
# Spins never change; reflected entries flip polarization label and direction.
_INTERACTION: dict[tuple[Polarization, Direction, SpinLabel], tuple[Polarization, Direction, int]] = {
    (_R, _PLUS, _UP): (_L, _MINUS, +1),
    (_R, _MINUS, _UP): (_R, _MINUS, -1),
    (_R, _PLUS, _DOWN): (_R, _PLUS, -1),
    (_R, _MINUS, _DOWN): (_L, _PLUS, +1),
    (_L, _PLUS, _UP): (_L, _PLUS, -1),
    (_L, _MINUS, _UP): (_R, _PLUS, +1),
    (_L, _PLUS, _DOWN): (_R, _MINUS, +1),
    (_L, _MINUS, _DOWN): (_L, _MINUS, -1),
}


class Station(Enum):
    """Which party's detector bank reads out the photon."""

    ALICE = "alice"
    CHARLIE = "charlie"


class DetectorLabel(Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    D5 = "D5"
    D6 = "D6"
    D7 = "D7"
    D8 = "D8"


# Detector routing.  For a photon injected along MINUS_Z, the transmitted
# port (output2) keeps MINUS_Z and the reflected port (output1) is PLUS_Z.
# H is the beam-splitter transmission, V the reflection, at every port.
_ROUTING: dict[tuple[Station, Direction, Polarization], DetectorLabel] = {
    (Station.ALICE, _PLUS, _H): DetectorLabel.D1,
    (Station.ALICE, _PLUS, _V): DetectorLabel.D2,
    (Station.ALICE, _MINUS, _H): DetectorLabel.D3,
    (Station.ALICE, _MINUS, _V): DetectorLabel.D4,
    (Station.CHARLIE, _PLUS, _H): DetectorLabel.D5,
    (Station.CHARLIE, _PLUS, _V): DetectorLabel.D6,
    (Station.CHARLIE, _MINUS, _H): DetectorLabel.D7,
    (Station.CHARLIE, _MINUS, _V): DetectorLabel.D8,
}

_DETECTOR_ORDER = {d: i for i, d in enumerate(DetectorLabel)}


def ideal_interaction(ket: BasisKet, spin_index: int) -> tuple[BasisKet, int]:
    """Apply one gate pass to a single basis ket.

    Returns the image ket and its sign (+1 reflected, -1 transmitted).
    """
    if ket.photon is None:
        raise ShapeMismatchError("ket carries no photon")
    if not ket.photon.polarization.is_circular:
        raise LinearBasisPhotonError("gate acts on circular polarizations only")
    spin = ket.spins[spin_index]
    pol, direction, sign = _INTERACTION[(ket.photon.polarization, ket.photon.direction, spin)]
    return BasisKet(PhotonLabel(pol, direction), ket.spins), sign


def couples(polarization: Polarization, direction: Direction, spin: SpinLabel) -> bool:
    """True when this ket belongs to the coupled (reflecting) gate subspace."""
    return _INTERACTION[(polarization, direction, spin)][2] > 0


def apply_ebs_gate(state: StateVector, spin_index: int) -> StateVector:
    """Linear extension of :func:`ideal_interaction` over a whole state."""
    return combine_terms(
        ((new_ket, sign * amp) for ket, amp in state.items()
         for new_ket, sign in (ideal_interaction(ket, spin_index),)),
        state.tolerance,
    )


_SQRT_HALF = 1.0 / math.sqrt(2.0)
# R -> (H+V)/sqrt(2), L -> (H-V)/sqrt(2)
_HWP = {
    _R: ((_H, _SQRT_HALF), (_V, _SQRT_HALF)),
    _L: ((_H, _SQRT_HALF), (_V, -_SQRT_HALF)),
}


def hwp45(state: StateVector) -> StateVector:
    """Half-wave plate at 45 degrees: map circular polarizations to linear."""
    pairs = []
    for ket, amp in state.items():
        photon = ket.photon
        if photon is None:
            raise ShapeMismatchError("state carries no photon")
        if not photon.polarization.is_circular:
            raise LinearBasisPhotonError("photon already in linear basis")
        for pol, factor in _HWP[photon.polarization]:
            pairs.append((BasisKet(PhotonLabel(pol, photon.direction), ket.spins), factor * amp))
    return combine_terms(pairs, state.tolerance)


@dataclass(frozen=True)
class DetectionEvent:
    """One detector that can fire: its label, probability, and the collapsed spins."""

    detector: DetectorLabel
    probability: float
    spins: StateVector


def detect(state: StateVector, station: Station) -> list[DetectionEvent]:
    """Route a linear-basis photon onto the station's detectors.

    Returns one event per detector with nonzero mass, ordered D1..D8.  Event
    probabilities sum to the squared norm of ``state``; collapsed spin states
    are normalized and carry no photon.
    """
    groups: dict[DetectorLabel, list[tuple[BasisKet, complex]]] = {}
    for ket, amp in state.items():
        photon = ket.photon
        if photon is None:
            raise ShapeMismatchError("state carries no photon")
        if photon.polarization.is_circular:
            raise CircularBasisPhotonError("detection requires a linear-basis photon")
        detector = _ROUTING[(station, photon.direction, photon.polarization)]
        groups.setdefault(detector, []).append((ket.without_photon(), amp))
    events = []
    for detector in sorted(groups, key=_DETECTOR_ORDER.get):
        collapsed = combine_terms(groups[detector], state.tolerance)
        prob = collapsed.norm() ** 2
        if prob == 0.0:
            continue
        events.append(DetectionEvent(detector, prob, collapsed.normalize()))
    return events


# -- cavity scattering --------------------------------------------------------


class DenominatorConvention(Enum):
    """Placement of the coupling term g^2 in the hot-cavity denominator.

    VERBATIM adds g^2 inside the cavity-detuning bracket, so the emitter
    bracket cancels against the numerator.  CORRECTED places g^2 outside the
    bracket product (the standard input-output form).  The two coincide when
    g = 0.
    """

    VERBATIM = "verbatim"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class CavityParams:
    """Cavity and emitter rates; everything is normalized to kappa internally."""

    kappa: float = 1.0
    kappa_s: float = 0.0
    gamma: float = 0.0
    g: float = 0.0
    omega0: float = 0.0
    omega_c: float = 0.0
    omega_x: float = 0.0

    def __post_init__(self) -> None:
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")
        if self.kappa_s < 0.0 or self.gamma < 0.0 or self.g < 0.0:
            raise ValueError("rates must be nonnegative")


@dataclass(frozen=True)
class ScatterCoefficients:
    """Hot (t, r) and cold (t0, r0) cavity scattering amplitudes at one frequency."""

    t: complex
    r: complex
    t0: complex
    r0: complex

    @property
    def transmitted_signal_fraction(self) -> float:
        """|t0| / sqrt(|t0|^2 + |t|^2): transmitted-port amplitude that carries parity information."""
        denom = math.hypot(abs(self.t0), abs(self.t))
        return abs(self.t0) / denom if denom > 0.0 else 0.0

    @property
    def reflected_signal_fraction(self) -> float:
        """|r| / sqrt(|r0|^2 + |r|^2): reflected-port amplitude that carries parity information."""
        denom = math.hypot(abs(self.r0), abs(self.r))
        return abs(self.r) / denom if denom > 0.0 else 0.0

    def to_json_obj(self) -> dict:
        return {
            name: {"re": value.real, "im": value.imag}
            for name, value in (("t", self.t), ("r", self.r), ("t0", self.t0), ("r0", self.r0))
        }


_SINGULAR = 1e-15


def scatter_coefficients(
    params: CavityParams,
    omega: float | None = None,
    convention: DenominatorConvention = DenominatorConvention.VERBATIM,
) -> ScatterCoefficients:
    """Weak-excitation scattering coefficients at probe frequency ``omega``.

    ``omega`` defaults to the input-photon frequency ``params.omega0``.  All
    rates and detunings are divided by kappa before evaluation.  Both
    reflection amplitudes are built as 1 + transmission, so r - t = 1 and
    r0 - t0 = 1 hold identically.
    """
    if omega is None:
        omega = params.omega0
    k = params.kappa
    ks = params.kappa_s / k
    gm = params.gamma / k
    gg = params.g / k
    d_x = (params.omega_x - omega) / k
    d_c = (params.omega_c - omega) / k
    d_0 = (params.omega0 - omega) / k

    emitter = 1j * d_x + gm / 2.0
    if convention is DenominatorConvention.VERBATIM:
        den = emitter * (1j * d_c + 1.0 + ks / 2.0 + gg * gg)
    else:
        den = emitter * (1j * d_c + 1.0 + ks / 2.0) + gg * gg
    if abs(den) < _SINGULAR:
        raise SingularDenominatorError(f"hot-cavity denominator {den} too small")
    t = -emitter / den

    den0 = 1j * d_0 + ks / 2.0 + 1.0
    if abs(den0) < _SINGULAR:
        raise SingularDenominatorError(f"cold-cavity denominator {den0} too small")
    t0 = -1.0 / den0

    return ScatterCoefficients(t=t, r=1.0 + t, t0=t0, r0=1.0 + t0)


@dataclass(frozen=True)
class LossyOperators:
    """Transmission/reflection weights of the gate under cavity leakage.

    Uncoupled kets scatter with the cold-cavity pair (t0, r0), coupled kets
    with the hot-cavity pair (t, r).  In the ideal limit (t0, r0, t, r) =
    (-1, 0, 0, 1) this reproduces :func:`ideal_interaction` exactly.
    """

    coefficients: ScatterCoefficients

    @property
    def uncoupled(self) -> tuple[complex, complex]:
        return self.coefficients.t0, self.coefficients.r0

    @property
    def coupled(self) -> tuple[complex, complex]:
        return self.coefficients.t, self.coefficients.r

    def weights(self, ket: BasisKet, spin_index: int) -> tuple[complex, complex]:
        """(transmitted, reflected) amplitudes for one basis ket."""
        if ket.photon is None:
            raise ShapeMismatchError("ket carries no photon")
        if not ket.photon.polarization.is_circular:
            raise LinearBasisPhotonError("gate acts on circular polarizations only")
        hot = couples(ket.photon.polarization, ket.photon.direction, ket.spins[spin_index])
        return self.coupled if hot else self.uncoupled

    def apply(self, state: StateVector, spin_index: int) -> StateVector:
        """Scatter every term into its transmitted and reflected branches.

        The result is generally subnormalized; the missing mass is photon
        loss through the leakage channel.
        """
        pairs = []
        for ket, amp in state.items():
            transmit, reflect = self.weights(ket, spin_index)
            pairs.append((ket, transmit * amp))
            pairs.append((BasisKet(ket.photon.reflected(), ket.spins), reflect * amp))
        return combine_terms(pairs, state.tolerance)


def lossy_operators(coefficients: ScatterCoefficients) -> LossyOperators:
    """Bundle scattering coefficients into gate transmission/reflection operators."""
    return LossyOperators(coefficients)
