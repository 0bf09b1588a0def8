import numpy as np
import pytest

from conftest import all_kinds, random_step_rule
from ammdesign import (AllocationRule, Exponential, TruncatedNormal, Uniform, UpdateRule,
                       expected_profit_direct, expected_profit_virtual,
                       oracle_monotone_rule_search, oracle_threshold_search,
                       profit_breakdown, solve)

U = Uniform(0.2, 2.0)
NOISE = UpdateRule.noise()


def zero_rule(d, p0):
    return AllocationRule.bang_bang(p0, None, None, d.lo, d.hi)


def test_zero_rule_zero_profit():
    for d in all_kinds():
        r = zero_rule(d, 1.0)
        assert expected_profit_direct(r, d, NOISE) == 0.0
        assert expected_profit_virtual(r, d, NOISE) == 0.0


def test_uniform_noise_optimum():
    r = AllocationRule.bang_bang(1.1, 0.65, 1.55, 0.2, 2.0)
    assert expected_profit_direct(r, U, NOISE) == pytest.approx(0.225, abs=1e-12)
    assert expected_profit_virtual(r, U, NOISE) == pytest.approx(0.225, abs=1e-12)


def test_suboptimal_thresholds():
    r = AllocationRule.bang_bang(1.1, 0.5, 1.7, 0.2, 2.0)
    b = profit_breakdown(r, U, NOISE)
    assert b.direct < 0.225 and b.consistent
    assert b.direct == pytest.approx(0.2, abs=1e-12)
    assert abs(b.direct - b.virtual_welfare) <= 1e-6


def test_perfect_info_never_profitable(rng):
    pi = UpdateRule.perfect_info()
    for _ in range(20):
        r = random_step_rule(rng, 1.1, 0.2, 2.0)
        v = expected_profit_direct(r, U, pi)
        assert v <= 1e-12
        if np.any(r.x(np.linspace(0.2, 2.0, 1001)) != 0):
            assert v < 0


def test_breakdown_truncation_boundary_term():
    # the only gap left is the parts boundary term (1 - F(hi)) * (hi - p_h)
    d = Exponential(2.0)
    r = AllocationRule.bang_bang(1.0, 0.4, 1.5, 0.0, d.hi)
    rep = profit_breakdown(r, d, NOISE).to_dict()
    assert rep["consistent"]
    assert rep["abs_gap"] == pytest.approx(float(d.sf(d.hi)) * (d.hi - 1.5), rel=1e-3)
    assert rep["quadrature_error_estimate"] >= 0


def test_equivalence_on_cpmm():
    from ammdesign import DemandCurve, allocation_from_demand
    d = Uniform(0.25, 4.0)
    rule = allocation_from_demand(DemandCurve.cpmm(1.0, 0.25, 4.0), 1.0)
    for u in (NOISE, UpdateRule.linear(0.5), UpdateRule.perfect_info()):
        assert profit_breakdown(rule, d, u).consistent


def test_oracle_uniform_noise():
    res = oracle_threshold_search(U, NOISE, 1.1, grid_n=512)
    h = res.grid_spacing
    assert abs(res.best_pl - 0.65) <= h and abs(res.best_ph - 1.55) <= h
    assert res.best_profit <= 0.225 + 1e-12


def test_oracle_exponential_noise():
    d = Exponential(2.0)
    res = oracle_threshold_search(d, NOISE, 1.0, grid_n=512)
    step_l = 1.0 / 511
    step_h = (d.hi - 1.0) / 511
    assert abs(res.best_ph - 1.5) <= step_h
    assert abs(res.best_pl - 0.396) <= step_l


def test_oracle_perfect_info_sentinels():
    for d in all_kinds():
        res = oracle_threshold_search(d, UpdateRule.perfect_info(), 1.0, grid_n=64)
        assert res.best_pl is None and res.best_ph is None and res.best_profit == 0.0


def test_oracle_surface():
    res = oracle_threshold_search(U, NOISE, 1.1, grid_n=64, keep_surface=True)
    rows = list(res.surface_rows())
    assert len(rows) == 65 * 65
    assert max(r[2] for r in rows) == res.best_profit
    assert rows[0][:2] == (None, None) and rows[0][2] == 0.0
    with pytest.raises(ValueError):
        list(oracle_threshold_search(U, NOISE, 1.1, grid_n=64).surface_rows())
    with pytest.raises(ValueError):
        oracle_threshold_search(U, NOISE, 1.1, grid_n=32)


def test_oracle_nonnegative():
    for d in all_kinds():
        for u in (NOISE, UpdateRule.linear(0.5)):
            assert oracle_threshold_search(d, u, 1.0, grid_n=64).best_profit >= 0.0


def test_monotone_search_bang_bang():
    res = oracle_monotone_rule_search(U, NOISE, 1.1, grid_n=64, level_steps=4)
    assert res.is_bang_bang and res.levels_used == [-1.0, 0.0, 1.0]
    assert res.best_profit == pytest.approx(0.225, abs=0.01)
    # the reported rule earns what the DP says it does
    assert expected_profit_direct(res.rule, U, NOISE) == pytest.approx(res.best_profit, abs=1e-9)


def test_monotone_search_perfect_info():
    res = oracle_monotone_rule_search(U, UpdateRule.perfect_info(), 1.1)
    assert res.levels_used == [0.0] and res.best_profit == 0.0
    assert np.all(res.rule.x(np.linspace(0.2, 2.0, 101)) == 0.0)


def test_monotone_search_linear_close_to_solver():
    u = UpdateRule.linear(0.5)
    res = oracle_monotone_rule_search(U, u, 1.1, grid_n=64, level_steps=4)
    exact = solve(U, u, 1.1, check_consistency=False).expected_profit
    assert res.is_bang_bang
    assert exact - 0.01 <= res.best_profit <= exact + 1e-9


def test_monotone_search_limits():
    with pytest.raises(ValueError):
        oracle_monotone_rule_search(U, NOISE, 1.1, grid_n=65)
    with pytest.raises(ValueError):
        oracle_monotone_rule_search(U, NOISE, 1.1, level_steps=3)


@pytest.mark.parametrize("d,p0", [(U, 1.1), (Exponential(1.0), 0.8),
                                  (TruncatedNormal(1.0, 0.4, 0.1, 2.5), 1.0)])
def test_solver_dominates_oracle(d, p0):
    for u in (NOISE, UpdateRule.linear(0.5)):
        m = solve(d, u, p0, check_consistency=False)
        res = oracle_threshold_search(d, u, p0, grid_n=128)
        assert m.expected_profit >= res.best_profit - 1e-6
