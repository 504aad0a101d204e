"""Certificate chains: growth constants, upper and lower time bounds."""

import math

import numpy as np
import pytest

from beamblow import (
    ModelParams,
    Thm31Chain,
    construct_energy_level,
    energy_E,
    full_report,
    growth_functional,
    growth_series,
    inner,
    make_grid,
    norm_lq,
    preset,
    simulate,
    StepControls,
    summary_row,
    report_items,
    thm31_check,
    thm31_constants,
    thm32_upper,
    thm33_upper,
    thm34_lower,
    thm35_lower,
)
from beamblow.bounds import _lower_34_integral, fmt


@pytest.fixture(scope="module")
def chain_r1():
    prm = ModelParams(p=3.0, r=1.0, gamma=0.5, beta=1.0)
    return thm31_constants(prm, 1.0 / math.pi)


def test_thm31_chain_frozen_values(chain_r1):
    # independent closed form at p=3, r=1, B1=1/pi: theta = 0 so the
    # admissibility reduces to 64 eps^2 + 6 pi^2 eps - 12 pi^2 <= 0
    root = (-6 * math.pi**2 + math.sqrt(36 * math.pi**4 + 3072 * math.pi**2)) / 128.0
    assert chain_r1.feasible
    assert chain_r1.delta0 == 1.0
    assert chain_r1.delta3 == pytest.approx(root, rel=1e-9)
    assert chain_r1.delta3 == pytest.approx(0.9742284922350992, rel=1e-12)
    assert chain_r1.eps0 == pytest.approx(0.5 * chain_r1.delta3, rel=1e-15)
    assert chain_r1.A == pytest.approx(9.46517318220759, rel=1e-10)
    assert chain_r1.B == pytest.approx(1.0264532478472017, rel=1e-10)
    # B equals the damping cap at eps0
    assert chain_r1.B == pytest.approx(
        chain_r1.r / ((chain_r1.r + 1.0) * chain_r1.eps0), rel=1e-14)
    assert chain_r1.self_consistent()


def test_thm31_small_eps_limit(chain_r1):
    # as eps -> 0 the growth weight B(eps) approaches
    # (p+1) B1 / sqrt((p+3)(p-1))
    limit = 4.0 * (1.0 / math.pi) / math.sqrt(6.0 * 2.0)
    assert limit == pytest.approx(0.3675525969478614, rel=1e-14)
    assert chain_r1.B_of(1e-6) == pytest.approx(limit, rel=1e-5)
    assert chain_r1.B_of(1e-6) == pytest.approx(0.367552688836045, rel=1e-12)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
@pytest.mark.parametrize("r", [1.0, 1.5, 2.0])
def test_thm31_interval_nesting(p, r):
    prm = ModelParams(p=p, r=r, gamma=0.4, beta=1.0)
    chain = thm31_constants(prm, 1.0 / math.pi)
    assert chain.feasible
    assert 0.0 < chain.eps0 < chain.delta3
    assert chain.delta3 <= chain.delta2 <= chain.delta1 <= chain.delta0 <= 1.0
    assert chain.A > 0.0 and chain.B > 0.0
    assert chain.self_consistent()
    # growth functional sanity at eps0
    assert chain.g(chain.eps0) > 0.0
    assert chain.h(chain.eps0) > 0.0


def test_thm31_check_verdicts(grid48, params, consts48):
    chain = thm31_constants(params, consts48.B1)
    u = np.zeros(grid48.size)
    assert thm31_check(grid48, u, u, params, chain, -1.0) == "case_i"
    # positive energy with enough velocity correlation
    data = construct_energy_level(grid48, params, 5.0, chain.B)
    E0 = energy_E(grid48, data.u0, data.u1, params)
    assert E0 >= 0.0
    assert thm31_check(grid48, data.u0, data.u1, params, chain, E0) == "case_ii"
    # resting data at positive energy: no certificate
    bump = preset("sine_bump", grid48, params, amplitude=0.1)
    E0b = energy_E(grid48, bump.u0, bump.u1, params)
    assert E0b > 0.0
    assert thm31_check(grid48, bump.u0, bump.u1, params, chain, E0b) == "not-applicable"


def test_growth_functional_series(grid48, params, consts48):
    chain = thm31_constants(params, consts48.B1)
    data = preset("negative_energy", grid48, params)
    traj = simulate(grid48, params, data.u0, data.u1, StepControls(),
                    t_max=0.01)
    series = growth_series(traj, chain)
    first = growth_functional(grid48, data.u0, data.u1, chain,
                              energy_E(grid48, data.u0, data.u1, params))
    assert series[0] == pytest.approx(first, rel=1e-12)
    assert len(series) == len(traj.records)


def test_thm32_on_case_ii_data(grid48, params, consts48):
    chain31 = thm31_constants(params, consts48.B1)
    data = construct_energy_level(grid48, params, 10.0, chain31.B)
    chain32 = thm32_upper(grid48, data.u0, data.u1, params, consts48)
    assert chain32.applicable
    assert chain32.alpha == pytest.approx(0.25, rel=1e-14)
    assert chain32.T_upper is not None and chain32.T_upper > 0.0
    # larger safety factor weakens (lengthens) the bound
    loose = thm32_upper(grid48, data.u0, data.u1, params, consts48,
                        m_safety=8.0)
    assert loose.T_upper > chain32.T_upper


def test_thm32_needs_positive_energy(grid48, params, consts48):
    data = preset("negative_energy", grid48, params)
    chain32 = thm32_upper(grid48, data.u0, data.u1, params, consts48)
    assert not chain32.applicable
    assert "needs E(0) > 0" in chain32.note


def test_thm33_on_negative_energy(grid48, params, consts48):
    data = preset("negative_energy", grid48, params)
    chain33 = thm33_upper(grid48, data.u0, data.u1, params, consts48)
    assert chain33.applicable
    # alpha = min((p-r)/((p+1)r), (p-1)/(2(p+1)), gamma/(gamma+1))
    assert chain33.alpha == pytest.approx(0.125, rel=1e-14)
    assert chain33.H0 == pytest.approx(
        -energy_E(grid48, data.u0, data.u1, params), rel=1e-12)
    assert chain33.T_upper > 0.0


def test_thm33_needs_negative_energy(grid48, params, consts48):
    bump = preset("sine_bump", grid48, params, amplitude=0.1)
    chain33 = thm33_upper(grid48, bump.u0, bump.u1, params, consts48)
    assert not chain33.applicable


def test_lower_34_integral_closed_form():
    # K1 = 0: int_1^inf dF/(F + K2 F^3) = ln(1 + 1/K2)/2; K2 = 1/4
    # gives ln(5)/2
    truncated, with_tail = _lower_34_integral(1.0, 0.0, 0.25, 3.0)
    assert truncated <= with_tail
    assert with_tail == pytest.approx(0.5 * math.log(5.0), abs=1e-8)
    assert truncated == pytest.approx(0.5 * math.log(5.0), abs=1e-7)


def test_thm34_lower_formulas(grid48, params, consts48):
    data = preset("negative_energy", grid48, params)
    res = thm34_lower(grid48, data.u0, data.u1, params, consts48.B_star)
    p = params.p
    assert res.F0 == pytest.approx(
        norm_lq(grid48, data.u0, p + 1) ** (p + 1), rel=1e-12)
    # negative energy drops the energy terms from K1 entirely
    assert res.varpi < 0.0
    assert res.K1 == 0.0
    assert res.K2 == pytest.approx(
        consts48.B_star ** (2 * p) * 2.0 ** (2 * p - 2) * (p + 1) ** (-p), rel=1e-13)
    assert 0.0 < res.T_lower_34_truncated <= res.T_lower_34_with_tail
    with pytest.raises(ValueError):
        thm34_lower(grid48, data.u0, data.u1, params, 0.0)


def test_thm34_positive_energy_k1(grid48, params, consts48):
    bump = preset("sine_bump", grid48, params, amplitude=0.5)
    res = thm34_lower(grid48, bump.u0, bump.u1, params, consts48.B_star)
    w = res.varpi
    assert w > 0.0
    p = params.p
    expect = (p + 1) * (w + consts48.B_star ** (2 * p) * 2.0 ** (p - 2) * (2 * w) ** p)
    assert res.K1 == pytest.approx(expect, rel=1e-13)


def test_thm35_lower_closed_form():
    # single node, u0 = 0, ||u1||^2 = 2: G0 = 1; constants chosen so
    # C_eff = 1, hence T = G0^{1-p} / (p-1) = 1/2
    g = make_grid(1, 1)
    prm = ModelParams(p=3.0, r=1.0, gamma=0.5, beta=1.0)
    res = thm35_lower(g, np.array([0.0]), np.array([2.0]), prm,
                      2.0 ** -0.5, 1.0)
    assert res.G0 == pytest.approx(1.0, rel=1e-14)
    assert res.C_eff == pytest.approx(1.0, rel=1e-14)
    assert res.T_lower_35 == pytest.approx(0.5, rel=1e-14)
    zero = thm35_lower(g, np.array([0.0]), np.array([0.0]), prm, 1.0, 1.0)
    assert math.isinf(zero.T_lower_35)
    with pytest.raises(ValueError):
        thm35_lower(g, np.array([0.0]), np.array([2.0]), prm, -1.0, 1.0)


def test_full_report_without_blowup(grid48, params, consts48):
    data = preset("negative_energy", grid48, params)
    traj = simulate(grid48, params, data.u0, data.u1, StepControls(),
                    t_max=0.01)
    report = full_report(grid48, data.u0, data.u1, params, consts48, traj,
                         thresholds=(1e20, 1e21))
    assert report.thm31_verdict == "case_i"
    assert report.verdicts["thm31_case_i"]
    assert not report.blowup_detected
    assert report.T_num is None
    assert report.sandwich_ok  # vacuous without detection
    assert report.T_upper is not None  # thm33 applies


def test_report_formatting(grid48, params, consts48):
    data = preset("negative_energy", grid48, params)
    report = full_report(grid48, data.u0, data.u1, params, consts48, None)
    items = dict(report_items(report))
    assert items["thm31_verdict"] == "case_i"
    assert items["T_num"] == "none"
    row = summary_row(report)
    assert row["thm31_case_i"] == "true"
    assert row["sandwich_ok"] == "true"
    assert float(row["E0"]) == pytest.approx(report.E0, rel=1e-15)
    assert fmt(None) == "none"
    assert fmt(True) == "true"
    assert fmt(False) == "false"
    assert fmt(0.5) == "0.5"
    assert fmt("abc") == "abc"
