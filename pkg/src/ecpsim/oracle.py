"""Cross-validation of closed-form probabilities against raw amplitudes.

The enumeration here walks every detector branch of the protocol and keeps
only quantities derived from amplitudes (path probabilities and collapsed
states).  The closed forms from :mod:`ecpsim.analytics` enter solely in
:func:`compare_all`, where the two routes are put side by side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from . import analytics
from .cavity import CavityParams, DenominatorConvention, DetectorLabel, scatter_coefficients
from .errors import DomainError
from .protocol import (
    GateMode,
    OutcomeClass,
    ProtocolConfig,
    WCoefficients,
    alice_round,
    charlie_round,
    prepare_w_state,
    run_protocol,
)
from .hilbert import StateVector

_ALICE_DETECTORS = {DetectorLabel.D1, DetectorLabel.D2, DetectorLabel.D3, DetectorLabel.D4}
_ALICE_SUCCESS = {DetectorLabel.D3, DetectorLabel.D4}
_CHARLIE_SUCCESS = {DetectorLabel.D5, DetectorLabel.D6}


@dataclass
class BranchNode:
    """One node of the exhaustive protocol tree.

    ``amplitude_weight`` is the unconditional probability of reaching this
    node; children of an internal node carry its weight times their round
    probability, so sibling weights sum to the parent weight.
    """

    path: tuple[DetectorLabel, ...]
    amplitude_weight: float
    state: StateVector
    coefficients: WCoefficients
    depth: int
    classification: OutcomeClass | None = None
    children: list[BranchNode] = field(default_factory=list)

    def walk(self) -> Iterator[BranchNode]:
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> Iterator[BranchNode]:
        for node in self.walk():
            if not node.children:
                yield node


def enumerate_tree(
    c: WCoefficients,
    k_alice: int,
    k_charlie: int,
    gate_mode: GateMode | None = None,
) -> BranchNode:
    """Exhaustively enumerate the protocol tree to the given depths.

    Every detector gets its own child (no merging), so the tree grows
    exponentially; depths beyond about 6 rounds per station get slow.
    ``k_charlie`` may be 0 for a first-station-only tree, in which case the
    success branches terminate as ALICE_SUCCESS leaves.
    """
    if k_alice < 1:
        raise DomainError("k_alice must be at least 1")
    if k_charlie < 0:
        raise DomainError("k_charlie must be nonnegative")
    mode = gate_mode or GateMode.ideal()
    root = BranchNode(
        path=(),
        amplitude_weight=1.0,
        state=prepare_w_state(c),
        coefficients=c,
        depth=0,
    )

    def expand_charlie(node: BranchNode, rounds_left: int) -> None:
        for outcome in charlie_round(node.state, node.coefficients, mode):
            child = BranchNode(
                path=node.path + (outcome.detector,),
                amplitude_weight=node.amplitude_weight * outcome.probability,
                state=outcome.post_state,
                coefficients=outcome.post_coefficients,
                depth=node.depth + 1,
            )
            node.children.append(child)
            if outcome.classification is OutcomeClass.CHARLIE_SUCCESS:
                child.classification = OutcomeClass.CHARLIE_SUCCESS
            elif rounds_left > 1:
                expand_charlie(child, rounds_left - 1)
            else:
                child.classification = OutcomeClass.CHARLIE_RETRY

    def expand_alice(node: BranchNode, rounds_left: int) -> None:
        for outcome in alice_round(node.state, node.coefficients, mode):
            child = BranchNode(
                path=node.path + (outcome.detector,),
                amplitude_weight=node.amplitude_weight * outcome.probability,
                state=outcome.post_state,
                coefficients=outcome.post_coefficients,
                depth=node.depth + 1,
            )
            node.children.append(child)
            if outcome.classification is OutcomeClass.ALICE_SUCCESS:
                if k_charlie > 0:
                    expand_charlie(child, k_charlie)
                else:
                    child.classification = OutcomeClass.ALICE_SUCCESS
            elif rounds_left > 1:
                expand_alice(child, rounds_left - 1)
            else:
                child.classification = OutcomeClass.ALICE_RETRY

    expand_alice(root, k_alice)
    return root


def sample_paths(c: WCoefficients, config: ProtocolConfig) -> dict[str, int]:
    """Monte Carlo leaf-class counts for ``config.n_shots`` sampled paths."""
    if config.mode != "mc":
        config = ProtocolConfig(
            max_rounds_alice=config.max_rounds_alice,
            max_rounds_charlie=config.max_rounds_charlie,
            gate_mode=config.gate_mode,
            rng_seed=config.rng_seed,
            mode="mc",
            n_shots=config.n_shots,
        )
    trace = run_protocol(c, config)
    return dict(trace.counts)


@dataclass(frozen=True)
class ComparisonReport:
    """One closed-form value next to its amplitude-derived counterpart."""

    quantity: str
    point: tuple[float, float, float]
    analytic: float
    simulated: float
    tolerance: float

    @property
    def abs_error(self) -> float:
        return abs(self.analytic - self.simulated)

    @property
    def passed(self) -> bool:
        return self.abs_error <= self.tolerance

    def to_json_obj(self) -> dict:
        return {
            "quantity": self.quantity,
            "point": list(self.point),
            "analytic": self.analytic,
            "simulated": self.simulated,
            "abs_error": self.abs_error,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def simplex_grid(n: int) -> list[WCoefficients]:
    """n x n grid of strictly interior coefficient triples.

    The grid is the image of a uniform (u, v) lattice under
    ``(a1^2, a2^2, a3^2) = (u, (1-u) v, (1-u)(1-v))``; for n = 1 it
    degenerates to the symmetric triple.
    """
    if n < 1:
        raise DomainError("grid size must be at least 1")
    if n == 1:
        return [WCoefficients.symmetric()]
    points = []
    for i in range(n):
        u = (i + 1) / (n + 1)
        for j in range(n):
            v = (j + 1) / (n + 1)
            points.append(
                WCoefficients.normalized(
                    (u) ** 0.5, ((1 - u) * v) ** 0.5, ((1 - u) * (1 - v)) ** 0.5
                )
            )
    return points


def _tree_masses(
    root: BranchNode, k_alice: int, k_charlie: int
) -> tuple[dict[int, float], dict[int, float], float]:
    """Amplitude-route success masses: per-round station-1 mass, per-round
    station-2 mass (conditional on station-1 success), and the depth-(1,1)
    joint mass."""
    alice_at: dict[int, float] = {k: 0.0 for k in range(1, k_alice + 1)}
    charlie_at: dict[int, float] = {k: 0.0 for k in range(1, k_charlie + 1)}
    first_round_joint = 0.0
    for node in root.walk():
        if not node.path:
            continue
        last = node.path[-1]
        if last in _ALICE_SUCCESS and all(d in _ALICE_DETECTORS for d in node.path):
            alice_at[len(node.path)] += node.amplitude_weight
        if node.classification is OutcomeClass.CHARLIE_SUCCESS:
            alice_rounds = sum(1 for d in node.path if d in _ALICE_DETECTORS)
            charlie_rounds = len(node.path) - alice_rounds
            charlie_at[charlie_rounds] += node.amplitude_weight
            if len(node.path) == 2:
                first_round_joint += node.amplitude_weight
    alice_total = sum(alice_at.values())
    if alice_total > 0.0:
        charlie_at = {k: v / alice_total for k, v in charlie_at.items()}
    return alice_at, charlie_at, first_round_joint


_ROUND_COMPARISONS = 4


def compare_all(
    grid: list[WCoefficients],
    depths: tuple[int, int] = (4, 4),
    tolerance: float = 1e-10,
    cavity: CavityParams | None = None,
    convention: DenominatorConvention = DenominatorConvention.VERBATIM,
) -> list[ComparisonReport]:
    """Compare closed forms against exhaustive enumeration over a grid.

    Covers the per-round success probabilities of both stations (up to four
    rounds), the one-round joint probability, and, when cavity parameters
    are given, the three lossy one-round quantities.
    """
    k_alice, k_charlie = depths
    reports: list[ComparisonReport] = []
    lossy_mode = None
    if cavity is not None:
        sc = scatter_coefficients(cavity, convention=convention)
        lossy_mode = GateMode.lossy(cavity, convention)

    for c in grid:
        point = c.as_tuple()
        root = enumerate_tree(c, k_alice, k_charlie)
        alice_at, charlie_at, joint = _tree_masses(root, k_alice, k_charlie)
        for k in range(1, min(_ROUND_COMPARISONS, k_alice) + 1):
            reports.append(
                ComparisonReport(
                    quantity=f"p1_round[k={k}]",
                    point=point,
                    analytic=analytics.p1_round(k, c),
                    simulated=alice_at[k],
                    tolerance=tolerance,
                )
            )
        for k in range(1, min(_ROUND_COMPARISONS, k_charlie) + 1):
            reports.append(
                ComparisonReport(
                    quantity=f"p2_round[k={k}]",
                    point=point,
                    analytic=analytics.p2_round(k, c),
                    simulated=charlie_at[k],
                    tolerance=tolerance,
                )
            )
        if k_charlie >= 1:
            reports.append(
                ComparisonReport(
                    quantity="pt_one_round",
                    point=point,
                    analytic=analytics.pt_one_round(c),
                    simulated=joint,
                    tolerance=tolerance,
                )
            )

        if lossy_mode is not None:
            lossy_alice = alice_round(prepare_w_state(c), c, lossy_mode)
            sim_p1 = sum(
                o.probability
                for o in lossy_alice
                if o.classification is OutcomeClass.ALICE_SUCCESS
            )
            ideal_alice = alice_round(prepare_w_state(c), c)
            seed = next(
                o for o in ideal_alice if o.classification is OutcomeClass.ALICE_SUCCESS
            )
            lossy_charlie = charlie_round(seed.post_state, seed.post_coefficients, lossy_mode)
            sim_p2 = sum(
                o.probability
                for o in lossy_charlie
                if o.classification is OutcomeClass.CHARLIE_SUCCESS
            )
            for quantity, analytic, simulated in (
                ("p1_practical", analytics.practical_p1(c, sc), sim_p1),
                ("p2_practical", analytics.practical_p2(c, sc), sim_p2),
                ("p_practical", analytics.practical_total(c, sc), sim_p1 * sim_p2),
            ):
                reports.append(
                    ComparisonReport(
                        quantity=quantity,
                        point=point,
                        analytic=analytic,
                        simulated=simulated,
                        tolerance=tolerance,
                    )
                )
    return reports
