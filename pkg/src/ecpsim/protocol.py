"""Two-station W-state concentration protocol.

Three parties share ``a1|duu> + a2|udu> + a3|uud>``.  The first station
(Alice, spin 1) repeatedly injects an ancilla photon prepared from her current
coefficient pair, passes it through the parity-check gate, and reads the two
output ports: the transmitted port (D3/D4) heralds success and leaves the
state in the one-repeated-coefficient form ``(a2, a2, a3)``; the reflected
port (D1/D2) heralds a retry with squared coefficients.  The second station
(Charlie, spin 3) runs the mirror-image loop where the reflected port (D5/D6)
heralds the maximally entangled W state and the transmitted port (D7/D8) a
retry.  Odd detectors need no correction; even detectors are followed by a
single-spin phase rotation at the station that ran the gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cavity import (
    CavityParams,
    DenominatorConvention,
    DetectorLabel,
    Station,
    apply_ebs_gate,
    detect,
    hwp45,
    scatter_coefficients,
)
from .errors import (
    ConfigError,
    DegenerateCoefficientsError,
    InvalidCoefficientsError,
    UnknownDetectorError,
    ZeroStateError,
)
from .hilbert import (
    BasisKet,
    Direction,
    PhotonLabel,
    Polarization,
    SpinLabel,
    StateVector,
)

_NORM_TOLERANCE = 1e-12

_W_KETS = (BasisKet.from_spins("duu"), BasisKet.from_spins("udu"), BasisKet.from_spins("uud"))


@dataclass(frozen=True)
class WCoefficients:
    """Real nonnegative W-state coefficient triple with unit norm."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self) -> None:
        if self.a1 < 0.0 or self.a2 < 0.0 or self.a3 < 0.0:
            raise InvalidCoefficientsError("coefficients must be nonnegative")
        norm_sq = self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3
        if abs(norm_sq - 1.0) > _NORM_TOLERANCE:
            raise InvalidCoefficientsError(f"coefficients not normalized: |a|^2 = {norm_sq}")

    @classmethod
    def normalized(cls, a1: float, a2: float, a3: float) -> WCoefficients:
        n = math.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
        if n == 0.0:
            raise InvalidCoefficientsError("cannot normalize the zero triple")
        return cls(a1 / n, a2 / n, a3 / n)

    @classmethod
    def symmetric(cls) -> WCoefficients:
        a = 1.0 / math.sqrt(3.0)
        return cls(a, a, a)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)


class OutcomeClass(Enum):
    ALICE_SUCCESS = "alice_success"
    ALICE_RETRY = "alice_retry"
    CHARLIE_SUCCESS = "charlie_success"
    CHARLIE_RETRY = "charlie_retry"


@dataclass(frozen=True)
class GateMode:
    """Ideal gate, or the lossy gate specified by cavity parameters."""

    cavity: CavityParams | None = None
    convention: DenominatorConvention = DenominatorConvention.VERBATIM

    @classmethod
    def ideal(cls) -> GateMode:
        return cls()

    @classmethod
    def lossy(
        cls,
        cavity: CavityParams,
        convention: DenominatorConvention = DenominatorConvention.VERBATIM,
    ) -> GateMode:
        return cls(cavity=cavity, convention=convention)

    @property
    def is_lossy(self) -> bool:
        return self.cavity is not None


@dataclass(frozen=True)
class RoundOutcome:
    """One detector branch of a round: its probability within the round,
    the corrected post-measurement spin state, and the coefficient triple
    that parameterizes it."""

    detector: DetectorLabel
    probability: float
    post_state: StateVector
    post_coefficients: WCoefficients
    classification: OutcomeClass

    def to_json_obj(self) -> dict:
        return {
            "detector": self.detector.value,
            "probability": self.probability,
            "classification": self.classification.value,
            "post_coefficients": list(self.post_coefficients.as_tuple()),
            "post_state": self.post_state.to_json_obj(),
        }


@dataclass(frozen=True)
class ProtocolConfig:
    max_rounds_alice: int = 1
    max_rounds_charlie: int = 1
    gate_mode: GateMode = field(default_factory=GateMode.ideal)
    rng_seed: int = 0
    mode: str = "tree"  # "tree" or "mc"
    n_shots: int = 0

    def to_json_obj(self) -> dict:
        obj: dict = {
            "max_rounds_alice": self.max_rounds_alice,
            "max_rounds_charlie": self.max_rounds_charlie,
            "mode": self.mode,
            "rng_seed": self.rng_seed,
        }
        if self.mode == "mc":
            obj["n_shots"] = self.n_shots
        if self.gate_mode.is_lossy:
            cav = self.gate_mode.cavity
            obj["cavity"] = {
                "kappa": cav.kappa,
                "kappa_s": cav.kappa_s,
                "gamma": cav.gamma,
                "g": cav.g,
                "omega0": cav.omega0,
                "omega_c": cav.omega_c,
                "omega_x": cav.omega_x,
            }
            obj["convention"] = self.gate_mode.convention.value
        return obj


@dataclass(frozen=True)
class BranchRecord:
    """One aggregated leaf of the protocol tree (or one sampled path class).

    Retry steps merge the two equivalent detectors into a single token such
    as ``"D1|D2"`` in exhaustive mode, because both collapse to the same
    post-state; Monte Carlo paths keep concrete detector tokens.
    """

    path: tuple[str, ...]
    probability: float
    classification: OutcomeClass
    count: int | None = None

    def to_json_obj(self) -> dict:
        obj: dict = {
            "path": list(self.path),
            "probability": self.probability,
            "classification": self.classification.value,
        }
        if self.count is not None:
            obj["count"] = self.count
        return obj


@dataclass
class ProtocolTrace:
    """Complete record of one protocol execution."""

    config: ProtocolConfig
    coefficients: WCoefficients
    rounds: list[RoundOutcome]
    branches: list[BranchRecord]
    total_success_probability: float
    shots: int | None = None
    counts: dict[str, int] | None = None
    rng_algorithm: str | None = None

    def to_json_obj(self) -> dict:
        obj: dict = {
            "config": self.config.to_json_obj(),
            "coefficients": list(self.coefficients.as_tuple()),
            "rounds": [r.to_json_obj() for r in self.rounds],
            "branches": [b.to_json_obj() for b in self.branches],
            "total_success_probability": self.total_success_probability,
        }
        if self.shots is not None:
            obj["monte_carlo"] = {
                "shots": self.shots,
                "counts": self.counts,
                "rng": self.rng_algorithm,
            }
        return obj


# -- state and photon preparation ---------------------------------------------


def prepare_w_state(coefficients: WCoefficients) -> StateVector:
    """Three-spin input state; all three coefficients must be strictly positive."""
    a1, a2, a3 = coefficients.as_tuple()
    if a1 == 0.0 or a2 == 0.0 or a3 == 0.0:
        raise InvalidCoefficientsError("protocol requires strictly positive coefficients")
    return StateVector(dict(zip(_W_KETS, (a1, a2, a3))))


def _photon(amp_r: float, amp_l: float) -> StateVector:
    n = math.hypot(amp_r, amp_l)
    if n == 0.0:
        raise DegenerateCoefficientsError("photon amplitudes are both zero")
    return StateVector(
        {
            BasisKet(PhotonLabel(Polarization.R, Direction.MINUS_Z), ()): amp_r / n,
            BasisKet(PhotonLabel(Polarization.L, Direction.MINUS_Z), ()): amp_l / n,
        }
    )


def alice_photon(coefficients: WCoefficients) -> StateVector:
    """Ancilla for the first station: amplitudes proportional to (a1, a2)."""
    return _photon(coefficients.a1, coefficients.a2)


def charlie_photon(coefficients: WCoefficients) -> StateVector:
    """Ancilla for the second station: amplitudes proportional to (a2, a3)."""
    return _photon(coefficients.a2, coefficients.a3)


# -- coefficient bookkeeping ----------------------------------------------------


def coefficient_update_alice(coefficients: WCoefficients) -> WCoefficients:
    """Retry map for the first station: (a1, a2, a3) -> (a1^2, a2^2, a2*a3) normalized."""
    a1, a2, a3 = coefficients.as_tuple()
    try:
        return WCoefficients.normalized(a1 * a1, a2 * a2, a2 * a3)
    except InvalidCoefficientsError as exc:
        raise DegenerateCoefficientsError("retry map undefined for this triple") from exc


def coefficient_update_charlie(coefficients: WCoefficients) -> WCoefficients:
    """Retry map for the second station: (a1, a2, a3) -> (a2^2, a2^2, a3^2) normalized."""
    a2, a3 = coefficients.a2, coefficients.a3
    try:
        return WCoefficients.normalized(a2 * a2, a2 * a2, a3 * a3)
    except InvalidCoefficientsError as exc:
        raise DegenerateCoefficientsError("retry map undefined for this triple") from exc


def _alice_success_coefficients(coefficients: WCoefficients) -> WCoefficients:
    return WCoefficients.normalized(coefficients.a2, coefficients.a2, coefficients.a3)


# -- measurement corrections ----------------------------------------------------

# Which spin the correcting party rotates, per even detector.
_CORRECTION_SPIN = {
    DetectorLabel.D2: 0,
    DetectorLabel.D4: 0,
    DetectorLabel.D6: 2,
    DetectorLabel.D8: 2,
}


def phase_correction(state: StateVector, detector: DetectorLabel) -> StateVector:
    """Undo the V-port sign flip by a phase rotation on the gated spin.

    Even detectors herald a state with exactly one sign flipped relative to
    the all-positive form; flipping the phase of the DOWN component of the
    spin that passed the gate restores it (up to global phase).  Odd
    detectors need no correction and are rejected.
    """
    try:
        index = _CORRECTION_SPIN[detector]
    except KeyError:
        raise UnknownDetectorError(f"{detector.value} heralds no correction") from None
    flipped = {
        ket: (-amp if ket.spins[index] is SpinLabel.DOWN else amp) for ket, amp in state.items()
    }
    return StateVector(flipped, state.tolerance)


# -- single rounds ---------------------------------------------------------------

_STATION_PLAN = {
    Station.ALICE: {
        "spin_index": 0,
        "photon": alice_photon,
        "success": (DetectorLabel.D3, DetectorLabel.D4),
        "success_class": OutcomeClass.ALICE_SUCCESS,
        "retry_class": OutcomeClass.ALICE_RETRY,
        "success_coefficients": _alice_success_coefficients,
        "retry_coefficients": coefficient_update_alice,
    },
    Station.CHARLIE: {
        "spin_index": 2,
        "photon": charlie_photon,
        "success": (DetectorLabel.D5, DetectorLabel.D6),
        "success_class": OutcomeClass.CHARLIE_SUCCESS,
        "retry_class": OutcomeClass.CHARLIE_RETRY,
        "success_coefficients": lambda _c: WCoefficients.symmetric(),
        "retry_coefficients": coefficient_update_charlie,
    },
}


def _lossy_success_factor(gate_mode: GateMode, station: Station) -> float:
    coeffs = scatter_coefficients(gate_mode.cavity, convention=gate_mode.convention)
    if station is Station.ALICE:
        return coeffs.transmitted_signal_fraction
    return coeffs.reflected_signal_fraction


def _station_round(
    state: StateVector,
    coefficients: WCoefficients,
    gate_mode: GateMode,
    station: Station,
) -> list[RoundOutcome]:
    plan = _STATION_PLAN[station]
    photon = plan["photon"](coefficients)
    joint = state.tensor_with_photon(photon)
    events = detect(hwp45(apply_ebs_gate(joint, plan["spin_index"])), station)

    outcomes = []
    for event in events:
        success = event.detector in plan["success"]
        corrected = (
            phase_correction(event.spins, event.detector)
            if event.detector in _CORRECTION_SPIN
            else event.spins
        )
        post_coeffs = (
            plan["success_coefficients"](coefficients)
            if success
            else plan["retry_coefficients"](coefficients)
        )
        outcomes.append(
            RoundOutcome(
                detector=event.detector,
                probability=event.probability,
                post_state=corrected,
                post_coefficients=post_coeffs,
                classification=plan["success_class"] if success else plan["retry_class"],
            )
        )

    if gate_mode.is_lossy:
        # Success probabilities shrink by the port signal fraction; whatever
        # did not herald success (including photons lost to leakage) counts
        # toward the retry branches.  Post-states keep their ideal form.
        factor = _lossy_success_factor(gate_mode, station)
        p_succ = sum(o.probability for o in outcomes if o.classification is plan["success_class"])
        p_retry = sum(o.probability for o in outcomes if o.classification is plan["retry_class"])
        if p_retry > 0.0:
            retry_scale = (1.0 - factor * p_succ) / p_retry
        else:
            retry_scale = 0.0
        outcomes = [
            RoundOutcome(
                detector=o.detector,
                probability=o.probability
                * (factor if o.classification is plan["success_class"] else retry_scale),
                post_state=o.post_state,
                post_coefficients=o.post_coefficients,
                classification=o.classification,
            )
            for o in outcomes
        ]
    return outcomes


def alice_round(
    state: StateVector,
    coefficients: WCoefficients,
    gate_mode: GateMode | None = None,
) -> list[RoundOutcome]:
    """One repetition at the first station; outcomes ordered D1..D4."""
    return _station_round(state, coefficients, gate_mode or GateMode.ideal(), Station.ALICE)


def charlie_round(
    state: StateVector,
    coefficients: WCoefficients,
    gate_mode: GateMode | None = None,
) -> list[RoundOutcome]:
    """One repetition at the second station; outcomes ordered D5..D8."""
    return _station_round(state, coefficients, gate_mode or GateMode.ideal(), Station.CHARLIE)


# -- full protocol ----------------------------------------------------------------


def _validate_config(config: ProtocolConfig) -> None:
    if config.max_rounds_alice < 1 or config.max_rounds_charlie < 1:
        raise ConfigError("round limits must be at least 1")
    if config.mode not in ("tree", "mc"):
        raise ConfigError(f"unknown mode {config.mode!r}")
    if config.mode == "mc" and config.n_shots < 1:
        raise ConfigError("mc mode requires n_shots >= 1")


def _stage_chains(
    coefficients: WCoefficients, config: ProtocolConfig
) -> tuple[list[list[RoundOutcome]], list[list[RoundOutcome]]]:
    """Per-round outcome tables for both stations.

    Retry physics is path-independent (both retry detectors collapse to the
    same state), so one chain per station carries the complete dynamics.
    Likewise every successful Alice round leaves the same Charlie input, so a
    single Charlie chain (seeded from the first-round success branch) serves
    all of them.
    """
    state = prepare_w_state(coefficients)
    alice_stages: list[list[RoundOutcome]] = []
    cur_state, cur_coeffs = state, coefficients
    for _ in range(config.max_rounds_alice):
        outcomes = alice_round(cur_state, cur_coeffs, config.gate_mode)
        alice_stages.append(outcomes)
        retry = next(o for o in outcomes if o.classification is OutcomeClass.ALICE_RETRY)
        cur_state, cur_coeffs = retry.post_state, retry.post_coefficients

    seed = next(
        o for o in alice_stages[0] if o.classification is OutcomeClass.ALICE_SUCCESS
    )
    charlie_stages: list[list[RoundOutcome]] = []
    cur_state, cur_coeffs = seed.post_state, seed.post_coefficients
    for _ in range(config.max_rounds_charlie):
        outcomes = charlie_round(cur_state, cur_coeffs, config.gate_mode)
        charlie_stages.append(outcomes)
        retry = next(o for o in outcomes if o.classification is OutcomeClass.CHARLIE_RETRY)
        cur_state, cur_coeffs = retry.post_state, retry.post_coefficients
    return alice_stages, charlie_stages


def _split(
    stages: list[list[RoundOutcome]], success_class: OutcomeClass
) -> tuple[list[list[RoundOutcome]], list[list[RoundOutcome]]]:
    successes = [[o for o in st if o.classification is success_class] for st in stages]
    retries = [[o for o in st if o.classification is not success_class] for st in stages]
    return successes, retries


def _tree_branches(
    alice_stages: list[list[RoundOutcome]], charlie_stages: list[list[RoundOutcome]]
) -> tuple[list[BranchRecord], float]:
    a_succ, a_retry = _split(alice_stages, OutcomeClass.ALICE_SUCCESS)
    c_succ, c_retry = _split(charlie_stages, OutcomeClass.CHARLIE_SUCCESS)

    def merged(outcomes: list[RoundOutcome]) -> str:
        return "|".join(o.detector.value for o in outcomes)

    records: list[BranchRecord] = []
    total_success = 0.0
    reach_alice = 1.0
    for k, stage in enumerate(alice_stages):
        prefix = tuple(merged(a_retry[j]) for j in range(k))
        for a_out in a_succ[k]:
            base = reach_alice * a_out.probability
            reach_charlie = 1.0
            for j in range(len(charlie_stages)):
                c_prefix = tuple(merged(c_retry[i]) for i in range(j))
                for c_out in c_succ[j]:
                    prob = base * reach_charlie * c_out.probability
                    records.append(
                        BranchRecord(
                            path=prefix + (a_out.detector.value,) + c_prefix + (c_out.detector.value,),
                            probability=prob,
                            classification=OutcomeClass.CHARLIE_SUCCESS,
                        )
                    )
                    total_success += prob
                reach_charlie *= sum(o.probability for o in c_retry[j])
            records.append(
                BranchRecord(
                    path=prefix
                    + (a_out.detector.value,)
                    + tuple(merged(c_retry[i]) for i in range(len(charlie_stages))),
                    probability=base * reach_charlie,
                    classification=OutcomeClass.CHARLIE_RETRY,
                )
            )
        reach_alice *= sum(o.probability for o in a_retry[k])
    records.append(
        BranchRecord(
            path=tuple(merged(a_retry[j]) for j in range(len(alice_stages))),
            probability=reach_alice,
            classification=OutcomeClass.ALICE_RETRY,
        )
    )
    return records, total_success


_RNG_ALGORITHM = "philox4x64; shot i consumes row i of the (shots x stages) uniform block"
_CHUNK = 1 << 16


def _sample_branches(
    config: ProtocolConfig,
    alice_stages: list[list[RoundOutcome]],
    charlie_stages: list[list[RoundOutcome]],
) -> tuple[list[BranchRecord], dict[str, int], float]:
    """Vectorized Monte Carlo walk over the stage chains.

    Each shot owns one row of a counter-based uniform block, so results are
    reproducible for a given (seed, shot index) regardless of chunking.
    """
    k_alice = len(alice_stages)
    k_charlie = len(charlie_stages)
    n_stages = k_alice + k_charlie
    # Cumulative detector probabilities per stage, outcomes ordered by label.
    a_cum = np.cumsum([[o.probability for o in st] for st in alice_stages], axis=1)
    c_cum = np.cumsum([[o.probability for o in st] for st in charlie_stages], axis=1)
    a_success = np.array(
        [[o.classification is OutcomeClass.ALICE_SUCCESS for o in st] for st in alice_stages]
    )
    c_success = np.array(
        [[o.classification is OutcomeClass.CHARLIE_SUCCESS for o in st] for st in charlie_stages]
    )
    a_codes = np.array([[int(o.detector.value[1]) for o in st] for st in alice_stages])
    c_codes = np.array([[int(o.detector.value[1]) for o in st] for st in charlie_stages])

    rng = np.random.Generator(np.random.Philox(key=config.rng_seed))
    path_counts: dict[tuple[int, ...], int] = {}
    class_counts = {cls: 0 for cls in OutcomeClass}

    remaining = config.n_shots
    while remaining > 0:
        n = min(remaining, _CHUNK)
        remaining -= n
        u = rng.random((n, n_stages))
        paths = np.zeros((n, n_stages), dtype=np.int8)
        in_alice = np.arange(n)
        to_charlie = []
        for k in range(k_alice):
            if in_alice.size == 0:
                break
            choice = np.searchsorted(a_cum[k], u[in_alice, k], side="right")
            np.clip(choice, 0, a_cum.shape[1] - 1, out=choice)
            paths[in_alice, k] = a_codes[k][choice]
            success = a_success[k][choice]
            to_charlie.append(in_alice[success])
            in_alice = in_alice[~success]
        class_counts[OutcomeClass.ALICE_RETRY] += in_alice.size
        in_charlie = np.concatenate(to_charlie) if to_charlie else np.empty(0, dtype=int)
        for j in range(k_charlie):
            if in_charlie.size == 0:
                break
            col = k_alice + j
            choice = np.searchsorted(c_cum[j], u[in_charlie, col], side="right")
            np.clip(choice, 0, c_cum.shape[1] - 1, out=choice)
            paths[in_charlie, col] = c_codes[j][choice]
            success = c_success[j][choice]
            class_counts[OutcomeClass.CHARLIE_SUCCESS] += int(success.sum())
            in_charlie = in_charlie[~success]
        class_counts[OutcomeClass.CHARLIE_RETRY] += in_charlie.size

        unique, counts = np.unique(paths, axis=0, return_counts=True)
        for row, count in zip(unique, counts):
            key = tuple(int(x) for x in row)
            path_counts[key] = path_counts.get(key, 0) + int(count)

    def classify(row: tuple[int, ...]) -> OutcomeClass:
        final = [code for code in row if code][-1]
        if final in (5, 6):
            return OutcomeClass.CHARLIE_SUCCESS
        if final in (7, 8):
            return OutcomeClass.CHARLIE_RETRY
        return OutcomeClass.ALICE_RETRY

    branches = [
        BranchRecord(
            path=tuple(f"D{code}" for code in row if code),
            probability=count / config.n_shots,
            classification=classify(row),
            count=count,
        )
        for row, count in sorted(path_counts.items())
    ]
    counts = {cls.value: class_counts[cls] for cls in OutcomeClass}
    total = class_counts[OutcomeClass.CHARLIE_SUCCESS] / config.n_shots
    return branches, counts, total


def run_protocol(coefficients: WCoefficients, config: ProtocolConfig) -> ProtocolTrace:
    """Execute the full two-loop protocol.

    In ``tree`` mode, branch probabilities are enumerated exactly; the two
    retry detectors of a round are merged into one path token because they
    collapse to identical states.  In ``mc`` mode, ``n_shots`` paths are
    sampled with a counter-based generator (one uniform row per shot), and
    branch records carry observed frequencies.
    """
    _validate_config(config)
    alice_stages, charlie_stages = _stage_chains(coefficients, config)
    rounds = [o for stage in alice_stages + charlie_stages for o in stage]

    if config.mode == "tree":
        branches, total = _tree_branches(alice_stages, charlie_stages)
        return ProtocolTrace(
            config=config,
            coefficients=coefficients,
            rounds=rounds,
            branches=branches,
            total_success_probability=total,
        )

    branches, counts, total = _sample_branches(config, alice_stages, charlie_stages)
    return ProtocolTrace(
        config=config,
        coefficients=coefficients,
        rounds=rounds,
        branches=branches,
        total_success_probability=total,
        shots=config.n_shots,
        counts=counts,
        rng_algorithm=_RNG_ALGORITHM,
    )
