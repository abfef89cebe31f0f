from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twochild.montecarlo import (
    SimConfig,
    SimulationError,
    estimate_conditional,
    expected_counts,
    make_estimate,
    sample_family,
    simulate,
    slot_marginal_estimate,
)
from twochild.querylang import parse_expr as E
from twochild.reference import FOOTNOTE_COUNTS
from twochild.samplespace import I0, I1, I2, Gender, Regime, RegimeKind

TWO_GIRLS = E("E.f & Y.f")
A_GIRL_NAMED = E("E.fN + Y.fN")
TWO_BOYS = E("E.m & Y.m")
A_BOY = E("E.m + Y.m")


def cfg(regime, r, n, seed=2024, mode="direct"):
    return SimConfig(regime, Fraction(r), n, seed, mode)


def test_config_validation():
    with pytest.raises(SimulationError):
        cfg(I1, "1/50", 0)
    with pytest.raises(SimulationError):
        cfg(I1, "1/50", 10, mode="reject")
    with pytest.raises(ValueError):
        cfg(I2, "1/2", 10)
    with pytest.raises(SimulationError):
        cfg(I2, "1/50", 10, mode="bogus")


def test_single_family():
    sim = simulate(cfg(I1, "1/50", 1))
    assert sim.kept == 1


@pytest.mark.parametrize("regime, r", [(I0, 0), (I1, "3/10"), (I2, "1/50")])
def test_determinism_across_workers(regime, r):
    c = cfg(regime, r, 300_000, seed=7)
    one, eight = simulate(c, 1), simulate(c, 8)
    assert one.counts == eight.counts and one.rejected == eight.rejected
    assert estimate_conditional(c, TWO_GIRLS, E("E.f + Y.f"), sim=one) == \
        estimate_conditional(c, TWO_GIRLS, E("E.f + Y.f"), sim=eight)


def test_family_draws_are_indexable():
    c = cfg(I1, "1/5", 70_000, seed=11)
    sim = simulate(c)
    # recount a handful of families one by one; chunk boundaries (65536) included
    picks = [0, 1, 65535, 65536, 69999]
    got = [sample_family(c, i) for i in picks]
    again = [sample_family(c, i) for i in picks]
    assert got == again
    assert all(o in sim.outcomes for o in got)


def test_seed_changes_draws():
    a = simulate(cfg(I1, "1/5", 10_000, seed=1)).counts
    b = simulate(cfg(I1, "1/5", 10_000, seed=2)).counts
    assert a != b


def test_unique_names_never_repeat_a_name():
    for seed in range(5):
        sim = simulate(cfg(I2, "2/5", 200_000, seed=seed))
        assert sim.table()[("fN", "fN")] == 0
        assert sim.count(E("E.fN & Y.fN")) == 0


def test_textbook_frequencies():
    sim = simulate(cfg(I0, 0, 1_000_000))
    for k, c in sim.table().items():
        est = make_estimate(c, sim.kept, Fraction(1, 4))
        assert est.within(4), (k, est)


def test_shared_names_center_cell():
    c = cfg(I1, "1/50", 1_000_000)
    est = make_estimate(simulate(c).table()[("fN", "fN")], c.n_families, Fraction(1, 10000))
    assert est.within(4)


@pytest.mark.parametrize(
    "regime, r, a, b, analytic",
    [
        (I0, 0, TWO_BOYS, A_BOY, Fraction(1, 3)),
        (I1, "3/10", TWO_GIRLS, A_GIRL_NAMED, Fraction(17, 37)),
        (I1, "1/50", TWO_GIRLS, A_GIRL_NAMED, Fraction(99, 199)),
        (I2, "1/50", TWO_GIRLS, A_GIRL_NAMED, Fraction(1, 2)),
    ],
)
def test_four_sigma(regime, r, a, b, analytic):
    est = estimate_conditional(cfg(regime, r, 1_000_000), a, b, workers=4)
    assert est.analytic == analytic
    assert est.within(4), est


def test_estimate_json():
    c = cfg(I2, "1/50", 10_000)
    js = estimate_conditional(c, TWO_GIRLS, A_GIRL_NAMED).to_json(c)
    assert set(js) >= {"config", "analytic", "p_hat", "stderr", "z"}
    assert js["config"] == {"regime": "i2", "r": "1/50", "n": 10_000, "seed": 2024, "mode": "direct"}
    assert Fraction(js["analytic"]) == Fraction(1, 2)


def test_no_family_satisfies_condition():
    with pytest.raises(SimulationError):
        # possible analytically, but only 3 families at r = 1/1000
        estimate_conditional(cfg(I1, "1/1000", 3), TWO_GIRLS, E("E.fN & Y.fN"))
    with pytest.raises(SimulationError):
        estimate_conditional(cfg(I2, "1/50", 10), TWO_GIRLS, E("E.fN & Y.fN"))


@pytest.mark.parametrize(
    "regime, r, a, b",
    [
        (I0, 0, TWO_BOYS, A_BOY),
        (I1, "3/10", TWO_GIRLS, A_GIRL_NAMED),
        (I2, "1/5", TWO_GIRLS, A_GIRL_NAMED),
        (I2, "1/5", TWO_GIRLS, E("E.fN")),
    ],
)
def test_calibration(regime, r, a, b):
    zs = [estimate_conditional(cfg(regime, r, 100_000, seed=s), a, b).z_score for s in range(100)]
    frac = sum(abs(z) > 1.96 for z in zs) / len(zs)
    assert 0.01 <= frac <= 0.10, frac


def test_convergence():
    for regime, r, a, b in [(I1, "3/10", TWO_GIRLS, A_GIRL_NAMED), (I0, 0, TWO_BOYS, A_BOY)]:
        for n in (10**3, 10**4, 10**5, 10**6):
            est = estimate_conditional(cfg(regime, r, n, seed=99), a, b)
            assert abs(est.p_hat - float(est.analytic)) <= 5 * est.stderr, (n, est)


@pytest.mark.parametrize("slot", ["E", "Y"])
def test_unique_name_sampler_marginals(slot):
    c = cfg(I2, "3/10", 1_000_000)
    sim = simulate(c)
    est = slot_marginal_estimate(c, E(f"{slot}.fN"), sim)
    assert est.analytic == Fraction(3, 20)
    assert est.within(4), est


def test_expected_counts_footnote():
    ec = expected_counts(cfg(I1, "1/50", 10_000))
    labels = ec.labels
    grid = [[ec.analytic[(e, y)] for y in labels] for e in labels]
    assert grid == [row[:3] for row in FOOTNOTE_COUNTS["rows"]]
    assert sum(ec.empirical.values()) == 10_000


def test_expected_counts_unique_names_center():
    ec = expected_counts(cfg(I2, "1/50", 10_000))
    assert ec.analytic[("fN", "fN")] == 0 and ec.empirical[("fN", "fN")] == 0
    assert sum(expected_counts(cfg(I2, "1/50", 1)).empirical.values()) == 1


def test_expected_counts_round_half_even():
    # r = 1/2, n = 2: cell (fN, fN) is 1/16 * 2 = 1/8 -> 0; (m, m) 1/2 -> 0
    ec = expected_counts(cfg(I1, "1/2", 2))
    assert ec.analytic[("m", "m")] == 0


def test_reject_mode_disagrees():
    c = cfg(I2, "3/10", 1_000_000, mode="reject")
    sim = simulate(c)
    assert sim.rejected > 0 and sim.table()[("fN", "fN")] == 0
    est = estimate_conditional(c, TWO_GIRLS, A_GIRL_NAMED, sim=sim)
    assert est.analytic == Fraction(1, 2)
    assert not est.within(4)
    # the rejected model is the shared-name table renormalised: (1 - r)/(2 - r)
    renorm = make_estimate(est.successes, est.trials, Fraction(7, 17))
    assert renorm.within(4), renorm


def test_boy_names_unique():
    reg = Regime(RegimeKind.I2, named=Gender.MALE)
    c = cfg(reg, "1/5", 500_000)
    assert simulate(c).table()[("mN", "mN")] == 0
    est = estimate_conditional(c, TWO_BOYS, E("E.mN + Y.mN"))
    assert est.analytic == Fraction(1, 2) and est.within(4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**70), st.integers(1, 5000), st.sampled_from([I0, I1, I2]))
def test_counts_sum_and_support(seed, n, regime):
    sim = simulate(SimConfig(regime, Fraction(1, 5), n, seed))
    assert sim.kept == n
    assert all(c >= 0 for c in sim.counts)
