"""Expected market-maker profit, computed two independent ways, plus brute-force oracles.

``expected_profit_direct`` integrates the realised profit
``y(p_hat) - pi(p0, p_hat) * x(p_hat)`` against the trader density.
``expected_profit_virtual`` integrates ``|x|`` against the virtual values in
their multiplied-through form ``phi * f`` (no division by the density), so
truncated tails never produce ``0 * inf``.  The two share no code beyond the
distribution and update rule, which lets one certify the other.

The oracles only ever use the direct path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mechanism import AllocationRule
from .quadrature import integrate_pieces

QUAD_TOL = 1e-10


@dataclass
class ProfitBreakdown:
    direct: float
    virtual_welfare: float
    abs_gap: float
    quadrature_error_estimate: float

    @property
    def consistent(self):
        return self.abs_gap <= max(1e-6, 1e-6 * abs(self.direct))

    def to_dict(self):
        return {"direct": self.direct, "virtual_welfare": self.virtual_welfare,
                "abs_gap": self.abs_gap,
                "quadrature_error_estimate": self.quadrature_error_estimate,
                "consistent": self.consistent}


def _split_points(rule, dist):
    lo, hi = dist.lo, dist.hi
    inner = [t for t in (*rule.kinks, *dist.kinks) if lo < t < hi]
    return [lo, *inner, hi]


def _direct(rule, dist, upd):
    p0 = rule.p0

    def integrand(s):
        return (rule.payment(s) - upd.apply(p0, s) * rule.x(s)) * dist.pdf(s)

    v, e = integrate_pieces(integrand, _split_points(rule, dist), abs_tol=QUAD_TOL)
    return float(v), float(e)


def upper_weight(dist, upd, p0, s):
    """``phi_u(s) * f(s) = (s - pi(p0, s)) f(s) - (1 - F(s))``."""
    return (s - upd.apply(p0, s)) * dist.pdf(s) - dist.sf(s)


def lower_weight(dist, upd, p0, s):
    """``phi_l(s) * f(s) = (pi(p0, s) - s) f(s) - F(s)``."""
    return (upd.apply(p0, s) - s) * dist.pdf(s) - dist.cdf(s)


def _virtual(rule, dist, upd):
    p0 = rule.p0

    def integrand(s):
        w = np.where(s >= p0, upper_weight(dist, upd, p0, s), lower_weight(dist, upd, p0, s))
        return np.abs(rule.x(s)) * w

    v, e = integrate_pieces(integrand, _split_points(rule, dist), abs_tol=QUAD_TOL)
    return float(v), float(e)


def expected_profit_direct(rule: AllocationRule, dist, upd) -> float:
    return _direct(rule, dist, upd)[0]


def expected_profit_virtual(rule: AllocationRule, dist, upd) -> float:
    return _virtual(rule, dist, upd)[0]


def profit_breakdown(rule: AllocationRule, dist, upd) -> ProfitBreakdown:
    d, ed = _direct(rule, dist, upd)
    v, ev = _virtual(rule, dist, upd)
    return ProfitBreakdown(d, v, abs(d - v), ed + ev)


def _over(func, dist, a, b, tol):
    # integrate on [a, b], split at the density's kinks
    pts = [a, *(t for t in dist.kinks if a < t < b), b]
    return float(integrate_pieces(func, pts, abs_tol=tol)[0])


def side_profit_virtual(dist, upd, p0, side, threshold) -> float:
    """Virtual-welfare profit of trading the full unit beyond ``threshold`` on one side."""
    if side == "upper":
        if threshold is None or threshold >= dist.hi:
            return 0.0
        return _over(lambda s: upper_weight(dist, upd, p0, s), dist, threshold, dist.hi,
                     QUAD_TOL)
    if threshold is None or threshold <= dist.lo:
        return 0.0
    return _over(lambda s: lower_weight(dist, upd, p0, s), dist, dist.lo, threshold, QUAD_TOL)


@dataclass
class OracleResult:
    best_pl: Optional[float]
    best_ph: Optional[float]
    best_profit: float
    grid_spacing: float
    pl_grid: np.ndarray = field(repr=False)
    ph_grid: np.ndarray = field(repr=False)
    profit_surface: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        return {"best_pl": self.best_pl, "best_ph": self.best_ph,
                "best_profit": self.best_profit, "grid_spacing": self.grid_spacing,
                "grid_n": len(self.pl_grid) - 1}

    def surface_rows(self):
        """``(p_l, p_h, profit)`` rows; sentinels are reported as None."""
        if self.profit_surface is None:
            raise ValueError("surface was not kept; pass keep_surface=True")
        for i, pl in enumerate(self.pl_grid):
            for j, ph in enumerate(self.ph_grid):
                yield (None if np.isnan(pl) else float(pl),
                       None if np.isnan(ph) else float(ph),
                       float(self.profit_surface[i, j]))


def oracle_threshold_search(dist, upd, p0, grid_n=512, keep_surface=False) -> OracleResult:
    """Exhaustive search over bang-bang rules with thresholds on a price grid.

    A bang-bang rule's realised profit is supported on disjoint price ranges
    for its two sides, so the direct profit of ``(p_l, p_h)`` is the sum of the
    direct profits of the one-sided rules ``(p_l, -)`` and ``(-, p_h)``.  Each
    one-sided rule is evaluated with ``expected_profit_direct``; the surface is
    their outer sum.  Index 0 on each axis (NaN) is the never-trade sentinel.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    lo, hi = dist.lo, dist.hi
    pl = np.concatenate([[np.nan], np.linspace(lo, p0, grid_n)])
    ph = np.concatenate([[np.nan], np.linspace(p0, hi, grid_n)])

    def one_sided(p_l, p_h):
        rule = AllocationRule.bang_bang(p0, p_l, p_h, lo, hi)
        return expected_profit_direct(rule, dist, upd)

    low = np.array([0.0] + [one_sided(t, None) for t in pl[1:]])
    up = np.array([0.0] + [one_sided(None, t) for t in ph[1:]])
    surface = low[:, None] + up[None, :]

    # argmax, ties -> smaller gap, then lower p_l
    best = surface.max()
    cand = np.argwhere(surface >= best)
    eff_pl = np.where(np.isnan(pl), lo, pl)
    eff_ph = np.where(np.isnan(ph), hi, ph)
    i, j = min(cand, key=lambda ij: (eff_ph[ij[1]] - eff_pl[ij[0]], eff_pl[ij[0]]))
    spacing = max((p0 - lo), (hi - p0)) / (grid_n - 1)
    return OracleResult(
        None if np.isnan(pl[i]) else float(pl[i]),
        None if np.isnan(ph[j]) else float(ph[j]),
        float(surface[i, j]), spacing, pl, ph,
        surface if keep_surface else None)


@dataclass
class MonotoneSearchResult:
    best_profit: float
    levels_used: list
    rule: AllocationRule
    cell_edges: np.ndarray = field(repr=False)

    @property
    def is_bang_bang(self):
        return set(self.levels_used) <= {-1.0, 0.0, 1.0}


def _monotone_dp(weights, levels):
    """Maximise ``sum(levels[k_i] * weights[i])`` over non-decreasing index paths ``k``.

    Ties prefer the lowest level index so that flat stretches stay at the
    smaller magnitude.
    """
    n, m = len(weights), len(levels)
    score = np.empty((n, m))
    arg = np.zeros((n, m), dtype=int)
    for i in range(n):
        gain = weights[i] * np.asarray(levels)
        if i == 0:
            score[0] = gain
            continue
        # running best over k' <= k
        best_k = 0
        for k in range(m):
            if score[i - 1, k] > score[i - 1, best_k]:
                best_k = k
            arg[i, k] = best_k
            score[i, k] = gain[k] + score[i - 1, best_k]
    path = [int(np.argmax(score[-1]))]
    for i in range(n - 1, 0, -1):
        path.append(int(arg[i, path[-1]]))
    path.reverse()
    return float(score[-1].max()), path


def oracle_monotone_rule_search(dist, upd, p0, grid_n=64, level_steps=4) -> MonotoneSearchResult:
    """Dynamic program over all monotone step rules on a grid.

    Each side of ``p0`` is cut into ``grid_n`` cells.  A rule is constant on
    every cell with a level from ``{-1, -1 + 2/level_steps, ..., 1}``, zero at
    ``p0``, non-decreasing in price, and sign-constrained per side.  Its
    profit is the sum of cell virtual welfares ``|x| * int_cell phi f``.
    """
    if grid_n > 64 or level_steps > 8:
        raise ValueError("desk-scale search only: grid_n <= 64, level_steps <= 8")
    if level_steps % 2:
        raise ValueError("level_steps must be even so that 0 is a level")
    mags = [k * 2.0 / level_steps for k in range(level_steps // 2 + 1)]
    up_edges = np.linspace(p0, dist.hi, grid_n + 1)
    dn_edges = np.linspace(p0, dist.lo, grid_n + 1)   # walking away from p0
    w_up = [_over(lambda s: upper_weight(dist, upd, p0, s), dist, a, b, 1e-12)
            for a, b in zip(up_edges[:-1], up_edges[1:])]
    w_dn = [_over(lambda s: lower_weight(dist, upd, p0, s), dist, b, a, 1e-12)
            for a, b in zip(dn_edges[:-1], dn_edges[1:])]
    v_up, k_up = _monotone_dp(w_up, mags)
    v_dn, k_dn = _monotone_dp(w_dn, mags)

    x_dn = [-mags[k] for k in reversed(k_dn)]
    x_up = [mags[k] for k in k_up]
    edges = np.concatenate([dn_edges[::-1], up_edges[1:]])
    levels = x_dn + x_up
    # merge equal neighbours so that p0 sits inside a zero interval when possible
    bps, lv = [edges[0]], []
    for e, v in zip(edges[1:], levels):
        if lv and lv[-1] == v:
            bps[-1] = e
        else:
            lv.append(v)
            bps.append(e)
    rule = _rule_from_cells(p0, bps, lv)
    used = sorted({float(v) + 0.0 for v in levels})
    return MonotoneSearchResult(v_up + v_dn, used, rule, edges)


def _rule_from_cells(p0, bps, levels):
    # the atom at p0 belongs to the sell side, so a buy level touching p0 from
    # the left needs a zero-level sliver (p0 - ulp, p0] to keep x(p0) = 0
    bps = list(bps)
    levels = list(levels)
    if p0 in bps[1:-1]:
        k = bps.index(p0)
        if levels[k - 1] != 0.0:
            bps.insert(k, float(np.nextafter(p0, -np.inf)))
            levels.insert(k, 0.0)
    return AllocationRule.steps(p0, bps, levels)
