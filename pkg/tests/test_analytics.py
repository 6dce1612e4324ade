import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecpsim import (
    CavityParams,
    DomainError,
    SweepSpec,
    WCoefficients,
    coefficient_update_alice,
    coefficient_update_charlie,
    p1_round,
    p1_total,
    p2_round,
    p2_simplified,
    p2_total,
    practical_p1,
    practical_p2,
    practical_total,
    pt_one_round,
    scatter_coefficients,
    sweep,
)
from ecpsim.analytics import CSV_HEADER, write_sweep_csv

EQUAL = WCoefficients.symmetric()
SKEWED = WCoefficients(0.8, 0.36, 0.48)

POINTS = [
    EQUAL,
    SKEWED,
    WCoefficients.normalized(0.5, 0.6, 0.75),
    WCoefficients.normalized(0.2, 0.9, 0.3),
    WCoefficients.normalized(0.9, 0.2, 0.5),
]

interior = st.tuples(
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.05, max_value=1.0),
).map(lambda t: WCoefficients.normalized(*t))


# -- independent oracle: iterate the retry maps instead of the closed forms --


def p1_round_by_iteration(k: int, c: WCoefficients) -> float:
    """Chain single-round probabilities through the retry coefficient map."""

    def single(cur: WCoefficients) -> float:
        a1, a2, a3 = cur.as_tuple()
        return a1 * a1 * (a3 * a3 + 2 * a2 * a2) / (a1 * a1 + a2 * a2)

    reach, cur = 1.0, c
    for _ in range(k - 1):
        reach *= 1.0 - single(cur)
        cur = coefficient_update_alice(cur)
    return reach * single(cur)


def p2_round_by_iteration(k: int, c: WCoefficients) -> float:
    def single(cur: WCoefficients) -> float:
        _, a2, a3 = cur.as_tuple()
        return 3 * a2 * a2 * a3 * a3 / ((a3 * a3 + a2 * a2) * (a3 * a3 + 2 * a2 * a2))

    _, a2, a3 = c.as_tuple()
    reach, cur = 1.0, WCoefficients.normalized(a2, a2, a3)
    for _ in range(k - 1):
        reach *= 1.0 - single(cur)
        cur = coefficient_update_charlie(cur)
    return reach * single(cur)


# -- per-round closed forms ----------------------------------------------------


def test_round_one_frozen_values():
    assert p1_round(1, EQUAL) == pytest.approx(0.5, abs=1e-12)
    assert p2_round(1, EQUAL) == pytest.approx(0.5, abs=1e-12)
    assert p1_round(1, SKEWED) == pytest.approx(0.313344 / 0.7696, abs=1e-15)


@pytest.mark.parametrize("c", POINTS)
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_p1_closed_form_equals_iteration(c, k):
    assert p1_round(k, c) == pytest.approx(p1_round_by_iteration(k, c), abs=1e-14)


@pytest.mark.parametrize("c", POINTS)
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_p2_closed_form_equals_iteration(c, k):
    assert p2_round(k, c) == pytest.approx(p2_round_by_iteration(k, c), abs=1e-14)


def test_round_index_domain():
    for bad in (0, -1, 65):
        with pytest.raises(DomainError):
            p1_round(bad, EQUAL)
        with pytest.raises(DomainError):
            p2_round(bad, EQUAL)


def test_rounds_survive_extreme_ratio():
    # deep rounds underflow naively (a^(2^k)); grouped ratios must not
    c = WCoefficients.normalized(0.999, 0.01, 0.04)
    for k in (5, 6):
        val = p1_round(k, c)
        assert math.isfinite(val)
        assert 0.0 <= val <= 1.0


# -- totals ---------------------------------------------------------------------


@given(interior)
@settings(max_examples=40, deadline=None)
def test_totals_are_probabilities(c):
    for total in (p1_total, p2_total):
        v = total(c)
        assert 0.0 <= v <= 1.0 + 1e-12


@pytest.mark.parametrize("c", POINTS)
def test_partial_sums_monotone(c):
    for round_fn in (p1_round, p2_round):
        acc, prev = 0.0, -1.0
        for k in range(1, 21):
            acc += round_fn(k, c)
            assert acc >= prev
            prev = acc
        assert acc <= 1.0 + 1e-12


@pytest.mark.parametrize("c", POINTS)
def test_truncation_error_is_negligible(c):
    assert abs(p1_total(c) - p1_total(c, tol=0.0)) < 1e-10
    assert abs(p2_total(c) - p2_total(c, tol=0.0)) < 1e-10


def test_equal_alpha_totals_converge_to_one():
    assert p1_total(EQUAL) == pytest.approx(1.0, abs=1e-9)
    assert p2_total(EQUAL) == pytest.approx(1.0, abs=1e-9)


# -- one-round joint probability ---------------------------------------------------


def test_pt_frozen_value():
    assert pt_one_round(EQUAL) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("c", POINTS)
def test_pt_factorizes(c):
    assert pt_one_round(c) == pytest.approx(p1_round(1, c) * p2_round(1, c), abs=1e-15)


# -- practical (lossy) forms ---------------------------------------------------------


def low_leakage():
    return scatter_coefficients(CavityParams(kappa=1.0, kappa_s=0.1, g=0.5, gamma=0.1))


def test_practical_frozen_values():
    sc = low_leakage()
    assert practical_p1(EQUAL, sc) == pytest.approx(0.5 * 0.7779411802037215, abs=1e-13)
    assert practical_p2(EQUAL, sc) == pytest.approx(0.5 * 0.9793666392196709, abs=1e-13)
    assert practical_total(EQUAL, sc) == pytest.approx(0.1904724097916758, abs=1e-13)


@pytest.mark.parametrize("c", POINTS)
def test_practical_total_factorizes(c):
    sc = low_leakage()
    product = practical_p1(c, sc) * practical_p2(c, sc)
    assert abs(practical_total(c, sc) - product) <= 1e-15
    # combined closed form: joint ideal probability times both port fractions
    combined = (
        pt_one_round(c)
        * sc.transmitted_signal_fraction
        * sc.reflected_signal_fraction
    )
    assert practical_total(c, sc) == pytest.approx(combined, abs=1e-15)


# -- fixed-alpha2 slice ------------------------------------------------------------


def test_p2_simplified_matches_general_form():
    limit = math.sqrt(2.0 / 3.0)
    for i in range(1, 200):
        a1 = limit * i / 200
        a3 = math.sqrt(max(0.0, 2.0 / 3.0 - a1 * a1))
        general = p2_round(1, WCoefficients(a1, 1.0 / math.sqrt(3.0), a3))
        assert abs(p2_simplified(a1) - general) <= 1e-14


def test_p2_simplified_endpoints():
    assert p2_simplified(0.0) == pytest.approx(0.5, abs=1e-12)
    assert p2_simplified(math.sqrt(2.0 / 3.0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        p2_simplified(-0.1)
    with pytest.raises(DomainError):
        p2_simplified(0.9)


# -- sweeps ---------------------------------------------------------------------------


def test_sweep_spec_validation():
    with pytest.raises(DomainError):
        SweepSpec(alpha1_range=(0.5, 0.1))
    with pytest.raises(DomainError):
        SweepSpec(alpha1_range=(0.0, 0.5))  # open interval at zero
    with pytest.raises(DomainError):
        SweepSpec(alpha1_range=(0.1, 0.9))  # exceeds sqrt(1 - alpha2^2)
    with pytest.raises(DomainError):
        SweepSpec(n_points=0)
    with pytest.raises(DomainError):
        SweepSpec(alpha2=1.0)


def test_sweep_grid_and_columns():
    spec = SweepSpec(alpha1_range=(0.1, 0.8), n_points=8)
    pts = sweep(spec)
    assert len(pts) == 8
    assert pts[0].alpha1 == pytest.approx(0.1)
    assert pts[-1].alpha1 == pytest.approx(0.8)
    for p in pts:
        c = WCoefficients(p.alpha1, p.alpha2, p.alpha3)
        assert p.alpha3 == pytest.approx(math.sqrt(1 - p.alpha1**2 - p.alpha2**2), abs=1e-12)
        assert p.p1 == pytest.approx(p1_round(1, c), abs=1e-14)
        assert p.p2 == pytest.approx(p2_round(1, c), abs=1e-14)
        assert p.p_total == pytest.approx(pt_one_round(c), abs=1e-14)
        # no cavity: practical columns collapse onto the ideal ones
        assert p.p1_practical == p.p1
        assert p.p_practical == p.p_total


def test_sweep_with_cavity_applies_fractions():
    cav = CavityParams(kappa=1.0, kappa_s=0.1, g=0.5, gamma=0.1)
    sc = scatter_coefficients(cav)
    pts = sweep(SweepSpec(alpha1_range=(0.3, 0.6), n_points=3, cavity=cav))
    for p in pts:
        assert p.p1_practical == pytest.approx(p.p1 * sc.transmitted_signal_fraction, abs=1e-14)
        assert p.p2_practical == pytest.approx(p.p2 * sc.reflected_signal_fraction, abs=1e-14)
        assert p.p_practical == pytest.approx(p.p1_practical * p.p2_practical, abs=1e-15)


def test_csv_output_round_trips():
    pts = sweep(SweepSpec(alpha1_range=(0.2, 0.7), n_points=4))
    buf = io.StringIO()
    write_sweep_csv(pts, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 5
    first = lines[1].split(",")
    assert float(first[0]) == pts[0].alpha1  # repr round-trip is exact
    assert float(first[5]) == pts[0].p_total
