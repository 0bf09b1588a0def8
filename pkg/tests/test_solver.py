import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import all_kinds
from ammdesign import (AssumptionWarning, Exponential, PiecewiseLinear, TruncatedNormal,
                       Uniform, UpdateRule, VirtualValues, check_regularity, find_thresholds,
                       gap_monotone, oracle_threshold_search, solve, sweep_lambda,
                       verify_ic, virtual_lower, virtual_upper)
from ammdesign.solver import _scan_roots

U = Uniform(0.2, 2.0)
NOISE = UpdateRule.noise()
# density spike right of p0 then a trough: three sign changes of the upper virtual value
SPIKE_NEAR = PiecewiseLinear(((0.2, 0.3), (1.4, 0.3), (1.5, 4.0), (1.6, 0.05), (2.4, 0.05),
                              (2.5, 0.3), (3.0, 0.3)))
SPIKE_FAR = PiecewiseLinear(((0.2, 0.5), (1.45, 0.5), (1.5, 3.0), (1.55, 0.02), (2.5, 0.02),
                             (2.6, 0.5), (3.2, 0.5)))


def test_virtual_values_uniform():
    v = VirtualValues(U, NOISE, 1.1)
    s = np.linspace(1.1, 1.99, 50)
    assert np.allclose(virtual_upper(v, s), 2 * s - 1.1 - 2.0, atol=1e-12)
    assert virtual_upper(v, 1.55) == pytest.approx(0.0, abs=1e-12)
    assert virtual_lower(v, 0.65) == pytest.approx(0.0, abs=1e-12)


def test_virtual_values_exponential():
    v = VirtualValues(Exponential(2.0), NOISE, 1.0)
    s = np.linspace(1.0, 5.0, 50)
    assert np.allclose(v.upper(s), s - 0.5 - 1.0, atol=1e-12)
    assert v.upper(1.5) == pytest.approx(0.0, abs=1e-12)


def test_perfect_info_virtual_upper_nonpositive(any_dist):
    v = VirtualValues(any_dist, UpdateRule.perfect_info(), 1.0)
    s = np.linspace(any_dist.lo, any_dist.hi, 501)[1:-1]
    assert np.all(v.upper(s) <= 0.0) and np.all(v.lower(s) <= 0.0)


def test_endpoint_identities(any_dist):
    for u in (NOISE, UpdateRule.linear(0.4), UpdateRule.perfect_info()):
        v = VirtualValues(any_dist, u, 1.0)
        f = any_dist.pdf(1.0)
        assert v.upper(1.0) == pytest.approx(-any_dist.sf(1.0) / f, abs=1e-12)
        assert v.lower(1.0) == pytest.approx(-any_dist.cdf(1.0) / f, abs=1e-12)
        assert v.upper(1.0) <= 0 and v.lower(1.0) <= 0


def test_compact_endpoint_signs():
    for u in (NOISE, UpdateRule.linear(0.3), UpdateRule.perfect_info()):
        v = VirtualValues(U, u, 1.1)
        assert v.upper(2.0) == pytest.approx(2.0 - u.apply(1.1, 2.0))
        assert v.upper(2.0) >= 0 and v.lower(0.2) >= 0


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_uniform_linear_regular(lam):
    assert check_regularity(VirtualValues(U, UpdateRule.linear(lam), 1.1)).regular


def test_exponential_noise_regular():
    assert check_regularity(VirtualValues(Exponential(2.0), NOISE, 1.0)).regular


def test_trough_is_irregular():
    rep = check_regularity(VirtualValues(SPIKE_NEAR, NOISE, 1.0))
    assert not rep.regular_upper and rep.regular_lower
    a, b = rep.interval_upper
    assert 1.5 <= a < b <= 1.6 + 1e-9      # the falling flank of the spike
    assert rep.worst_upper > 0
    with pytest.raises(ValueError):
        check_regularity(VirtualValues(U, NOISE, 1.1), grid_n=8)


def test_thresholds_uniform_noise():
    th = find_thresholds(VirtualValues(U, NOISE, 1.1))
    assert th.p_l == pytest.approx(0.65, abs=1e-10) and th.p_h == pytest.approx(1.55, abs=1e-10)


def test_thresholds_exponential_noise():
    th = find_thresholds(VirtualValues(Exponential(2.0), NOISE, 1.0))
    assert th.p_h == pytest.approx(1.5, abs=1e-9)
    assert round(th.p_l, 3) == 0.396


def test_perfect_info_no_trade(any_dist):
    m = solve(any_dist, UpdateRule.perfect_info(), 1.0, check_consistency=False)
    assert m.p_l is None and m.p_h is None
    assert m.degenerate_sides == ["lower", "upper"]
    assert m.expected_profit == 0.0
    assert np.all(m.x(np.linspace(any_dist.lo, any_dist.hi, 301)) == 0.0)
    assert m.gap_length == pytest.approx(any_dist.hi - any_dist.lo)


def test_solve_uniform_allocation():
    m = solve(U, NOISE, 1.1)
    assert m.expected_profit == pytest.approx(0.225, abs=1e-12)
    p = np.array([0.2, 0.4, 0.65, 0.651, 1.0, 1.549, 1.55, 1.8, 2.0])
    assert list(m.x(p)) == [-1, -1, -1, 0, 0, 0, 1, 1, 1]
    assert m.payment(1.8) == pytest.approx(1.55) and m.payment(0.3) == pytest.approx(-0.65)
    d = m.to_dict()
    assert d["gap_length"] == pytest.approx(0.9)
    assert d["roots"] == {"upper": [pytest.approx(1.55)], "lower": [pytest.approx(0.65)]}
    assert d["degenerate_sides"] == []


def test_solve_curve():
    p, x, y = solve(U, NOISE, 1.1).curve(1001)
    assert len(p) == 1001 and p[0] == 0.2 and p[-1] == 2.0
    assert set(np.unique(x)) == {-1.0, 0.0, 1.0}
    assert np.all(y[x == 1.0] == pytest.approx(1.55))


def test_solve_linear_half():
    m = solve(U, UpdateRule.linear(0.5), 1.1)
    assert m.p_l == pytest.approx(0.5, abs=1e-10) and m.p_h == pytest.approx(1.7, abs=1e-10)


def test_solve_requires_interior_p0():
    for p0 in (0.2, 2.0, 3.0):
        with pytest.raises(ValueError):
            solve(U, NOISE, p0)


def test_inconsistent_prior_warns():
    with pytest.warns(AssumptionWarning):
        m = solve(U, UpdateRule.linear(0.5), 1.4)
    assert m.p_l is not None
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve(U, UpdateRule.linear(0.5), 1.1)


def test_root_residuals_and_ordering():
    cases = [(U, 1.1), (Exponential(2.0), 1.0), (Exponential(0.5), 2.0),
             (TruncatedNormal(1.0, 0.4, 0.1, 2.5), 1.0), (TruncatedNormal(1.0, 0.4, 0.1, 2.5), 1.3)]
    for d, p0 in cases:
        for u in (NOISE, UpdateRule.linear(0.25), UpdateRule.linear(0.75)):
            m = solve(d, u, p0, check_consistency=False)
            v = VirtualValues(d, u, p0)
            assert d.lo <= m.effective_pl <= p0 <= m.effective_ph <= d.hi
            if m.p_h is not None:
                assert abs(v.upper(m.p_h)) <= 1e-8
                assert v.upper(p0) <= 0 <= v.upper(d.hi)
            if m.p_l is not None:
                assert abs(v.lower(m.p_l)) <= 1e-8
                assert v.lower(p0) <= 0 <= v.lower(d.lo)
            assert m.expected_profit >= 0
            assert verify_ic(m.allocation, 201, lo=d.lo, hi=d.hi).passed


@pytest.mark.parametrize("d,expect_near", [(SPIKE_NEAR, True), (SPIKE_FAR, False)])
def test_multi_root_picks_profit_argmax(d, expect_near):
    m = solve(d, NOISE, 1.0, check_consistency=False)
    roots = m.thresholds.roots_upper
    assert len(roots) == 3
    assert m.p_h == (roots[0] if expect_near else roots[-1])
    res = oracle_threshold_search(d, NOISE, 1.0, grid_n=512)
    assert abs(res.best_ph - m.p_h) <= res.grid_spacing
    assert m.expected_profit >= res.best_profit - 1e-6


def test_scan_roots_flat_segment():
    # -1 .. 0 ramp, zero on [1, 2], then rising: both ends of the flat run are candidates
    def fn(s):
        s = np.asarray(s)
        return np.clip(s - 1.0, -1.0, 0.0) + np.clip(s - 2.0, 0.0, 1.0)

    roots, flat = _scan_roots(fn, 0.0, 3.0, 31)
    assert flat and roots == [pytest.approx(1.0), pytest.approx(2.0)]


def test_sweep_uniform():
    rows = sweep_lambda(U, 1.1, [round(0.1 * k, 1) for k in range(11)])
    assert len(rows) == 11 and gap_monotone(rows)
    assert rows[0].gap == pytest.approx(1.8) and rows[0].degenerate == ["lower", "upper"]
    assert rows[-1].gap == pytest.approx(0.9)
    half = rows[5]
    assert (half.p_l, half.p_h) == (pytest.approx(0.5), pytest.approx(1.7))
    assert rows[0].csv_fields(0.2, 2.0) == [0.0, 0.2, 2.0, pytest.approx(1.8), "lower+upper"]


def test_gap_monotone_detects_violation():
    rows = sweep_lambda(U, 1.1, [0.2, 0.8])
    assert gap_monotone(rows)
    rows[1].gap = rows[0].gap + 0.1
    assert not gap_monotone(rows)


def test_nested_uniform_gaps():
    inner = solve(Uniform(0.5, 1.7), NOISE, 1.1).gap_length
    outer = solve(Uniform(0.2, 2.0), NOISE, 1.1).gap_length
    assert inner <= outer


@settings(max_examples=20, deadline=None)
@given(lo=st.floats(0.0, 2.0), width=st.floats(0.1, 5.0), frac=st.floats(0.02, 0.98))
def test_uniform_closed_form_property(lo, width, frac):
    hi = lo + width
    p0 = lo + frac * width
    m = solve(Uniform(lo, hi), NOISE, p0)
    assert abs(m.p_l - (lo + p0) / 2) <= 1e-9 and abs(m.p_h - (p0 + hi) / 2) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(rate=st.floats(0.1, 10.0), rp0=st.floats(0.05, 2.5))
def test_exponential_closed_form_property(rate, rp0):
    p0 = rp0 / rate
    m = solve(Exponential(rate), NOISE, p0)
    assert abs(m.p_h - (p0 + 1 / rate)) <= 1e-7


@settings(max_examples=15, deadline=None)
@given(l1=st.floats(0.0, 1.0), l2=st.floats(0.0, 1.0))
def test_gap_monotone_pairwise(l1, l2):
    a, b = sorted((l1, l2))
    d = TruncatedNormal(1.0, 0.5, 0.1, 2.2)
    ga = solve(d, UpdateRule.linear(a), 1.0, check_consistency=False).gap_length
    gb = solve(d, UpdateRule.linear(b), 1.0, check_consistency=False).gap_length
    assert ga >= gb - 1e-9
