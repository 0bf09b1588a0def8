"""Virtual values, regularity checks and the profit-maximising bang-bang mechanism."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .dist import DENSITY_FLOOR, EndpointSingularity
from .mechanism import AllocationRule
from .profit import (expected_profit_direct, lower_weight, side_profit_virtual,
                     upper_weight)
from .update import UpdateRule, validate_assumption1

ROOT_XTOL = 1e-12
REGULARITY_TOL = 1e-10
SCAN_N = 4096
SCAN_MAX = 2 ** 20
PROFIT_TOL = 1e-8


class AssumptionWarning(UserWarning):
    """The prior is not consistent with the update rule at this ``p0``."""


class VirtualValues:
    """Upper and lower virtual value functions for one ``(dist, rule, p0)``.

    ``upper`` is meant for ``s >= p0`` and ``lower`` for ``s <= p0``; both can
    be evaluated anywhere in the support for plotting.
    """

    def __init__(self, dist, rule: UpdateRule, p0: float):
        self.dist = dist
        self.rule = rule
        self.p0 = float(p0)

    def _density(self, s):
        f = np.asarray(self.dist.pdf(s), dtype=float)
        if np.any(f < DENSITY_FLOOR):
            raise EndpointSingularity("density vanishes; virtual value undefined")
        return f

    def upper(self, s):
        s = np.asarray(s, dtype=float)
        f = self._density(s)
        return (s - self.dist.sf(s) / f - self.rule.apply(self.p0, s))[()]

    def lower(self, s):
        s = np.asarray(s, dtype=float)
        f = self._density(s)
        return (self.rule.apply(self.p0, s) - s - self.dist.cdf(s) / f)[()]

    # multiplied through by f: same sign and roots, no division
    def upper_scaled(self, s):
        return upper_weight(self.dist, self.rule, self.p0, np.asarray(s, dtype=float))

    def lower_scaled(self, s):
        return lower_weight(self.dist, self.rule, self.p0, np.asarray(s, dtype=float))


def virtual_upper(v: VirtualValues, s):
    return v.upper(s)


def virtual_lower(v: VirtualValues, s):
    return v.lower(s)


@dataclass
class RegularityReport:
    regular_upper: bool
    regular_lower: bool
    worst_upper: float
    worst_lower: float
    interval_upper: Optional[tuple]
    interval_lower: Optional[tuple]
    grid_n: int

    @property
    def regular(self):
        return self.regular_upper and self.regular_lower

    def to_dict(self):
        return {"regular": self.regular, "regular_upper": self.regular_upper,
                "regular_lower": self.regular_lower, "worst_upper": self.worst_upper,
                "worst_lower": self.worst_lower,
                "interval_upper": self.interval_upper, "interval_lower": self.interval_lower,
                "grid_n": self.grid_n}


def check_regularity(v: VirtualValues, grid_n: int = SCAN_N) -> RegularityReport:
    """Grid check that ``phi_u`` rises on ``[p0, hi]`` and ``phi_l`` falls on ``[lo, p0]``.

    The worst violation is the largest wrong-way step between neighbours;
    the interval reported is where it happens.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    d = v.dist
    up = np.linspace(v.p0, d.hi, grid_n)
    dn = np.linspace(d.lo, v.p0, grid_n)
    with np.errstate(divide="ignore", invalid="ignore"):
        drop = -np.diff(v.upper(up))    # positive where phi_u decreases
        rise = np.diff(v.lower(dn))     # positive where phi_l increases
    drop = np.nan_to_num(drop, nan=np.inf)
    rise = np.nan_to_num(rise, nan=np.inf)
    iu, il = int(np.argmax(drop)), int(np.argmax(rise))
    wu, wl = float(drop[iu]), float(rise[il])
    ok_u, ok_l = wu <= REGULARITY_TOL, wl <= REGULARITY_TOL
    return RegularityReport(
        ok_u, ok_l, wu if wu > 0.0 else 0.0, wl if wl > 0.0 else 0.0,
        None if ok_u else (float(up[iu]), float(up[iu + 1])),
        None if ok_l else (float(dn[il]), float(dn[il + 1])),
        grid_n)


@dataclass
class Thresholds:
    p_l: Optional[float]
    p_h: Optional[float]
    roots_upper: list = field(default_factory=list)
    roots_lower: list = field(default_factory=list)
    flat_upper: bool = False
    flat_lower: bool = False
    scan_n: int = 0


def _scan_roots(fn, a, b, n):
    """All roots of ``fn`` on a grid of ``n`` points, refined by bracketing.

    Exact zeros are kept as-is; a run of zeros (a flat segment) contributes
    both of its endpoints.
    """
    grid = np.linspace(a, b, n)
    vals = np.asarray(fn(grid), dtype=float)
    roots, flat = [], False
    zero = vals == 0.0
    i = 0
    while i < n:
        if zero[i]:
            j = i
            while j + 1 < n and zero[j + 1]:
                j += 1
            roots.append(float(grid[i]))
            if j > i:
                roots.append(float(grid[j]))
                flat = True
            i = j + 1
            continue
        if i + 1 < n and not zero[i + 1] and vals[i] * vals[i + 1] < 0.0:
            roots.append(brentq(fn, grid[i], grid[i + 1], xtol=ROOT_XTOL))
        i += 1
    return sorted(set(roots)), flat


def _best_root(v, side, roots):
    # candidates compared by the side's virtual-welfare profit; ties -> nearest p0
    if not roots:
        return None
    scored = [(side_profit_virtual(v.dist, v.rule, v.p0, side, r), r) for r in roots]
    best = max(p for p, _ in scored)
    if best <= 0.0:
        return None
    tied = [r for p, r in scored if p >= best - 1e-12]
    return min(tied, key=lambda r: abs(r - v.p0))


def _side_irregular(v, side):
    fn = v.upper_scaled if side == "upper" else v.lower_scaled
    a, b = (v.p0, v.dist.hi) if side == "upper" else (v.dist.lo, v.p0)
    n = SCAN_N
    roots, flat = _scan_roots(fn, a, b, n)
    choice = _best_root(v, side, roots)
    prev = side_profit_virtual(v.dist, v.rule, v.p0, side, choice)
    while n < SCAN_MAX:
        n2 = 2 * n - 1  # nested grid
        roots2, flat2 = _scan_roots(fn, a, b, n2)
        choice2 = _best_root(v, side, roots2)
        cur = side_profit_virtual(v.dist, v.rule, v.p0, side, choice2)
        n, roots, flat, choice = n2, roots2, flat or flat2, choice2
        if abs(cur - prev) <= PROFIT_TOL:
            break
        prev = cur
    return choice, roots, flat, n


def _side_regular(v, side):
    if side == "upper":
        a, b, fn = v.p0, v.dist.hi, v.upper_scaled
        fa, fb = float(fn(a)), float(fn(b))
        if fb <= 0.0:
            return None, []
    else:
        a, b, fn = v.dist.lo, v.p0, v.lower_scaled
        fa, fb = float(fn(a)), float(fn(b))
        if fa <= 0.0:
            return None, []
    if fa == 0.0:
        return a, [a]
    if fb == 0.0:
        return b, [b]
    r = brentq(fn, a, b, xtol=ROOT_XTOL)
    return r, [r]


def find_thresholds(v: VirtualValues, regularity: Optional[RegularityReport] = None) -> Thresholds:
    """Optimal ``(p_l, p_h)``; ``None`` marks a side that never trades.

    A regular side has a single sign change and is solved by bracketed root
    finding.  An irregular side is scanned for every sign change and the root
    with the largest one-sided profit wins.
    """
    reg = regularity or check_regularity(v)
    out = Thresholds(None, None, scan_n=0)
    if reg.regular_upper:
        out.p_h, out.roots_upper = _side_regular(v, "upper")
    else:
        out.p_h, out.roots_upper, out.flat_upper, n = _side_irregular(v, "upper")
        out.scan_n = max(out.scan_n, n)
    if reg.regular_lower:
        out.p_l, out.roots_lower = _side_regular(v, "lower")
    else:
        out.p_l, out.roots_lower, out.flat_lower, n = _side_irregular(v, "lower")
        out.scan_n = max(out.scan_n, n)
    return out


@dataclass
class OptimalMechanism:
    p0: float
    p_l: Optional[float]
    p_h: Optional[float]
    lo: float
    hi: float
    allocation: AllocationRule = field(repr=False)
    expected_profit: float
    regularity: RegularityReport = field(repr=False)
    thresholds: Thresholds = field(repr=False)

    @property
    def degenerate_sides(self):
        return [s for s, t in (("lower", self.p_l), ("upper", self.p_h)) if t is None]

    @property
    def effective_pl(self):
        return self.lo if self.p_l is None else self.p_l

    @property
    def effective_ph(self):
        return self.hi if self.p_h is None else self.p_h

    @property
    def gap_length(self):
        return self.effective_ph - self.effective_pl

    def x(self, p_hat):
        return self.allocation.x(p_hat)

    def payment(self, p_hat):
        return self.allocation.payment(p_hat)

    def curve(self, n=1001):
        """``(p_hat, x_star, y)`` arrays sampled over the support."""
        p = np.linspace(self.lo, self.hi, n)
        return p, np.asarray(self.x(p), dtype=float), np.asarray(self.payment(p), dtype=float)

    def to_dict(self):
        return {
            "p0": self.p0,
            "p_l": self.p_l,
            "p_h": self.p_h,
            "gap_length": self.gap_length,
            "expected_profit": self.expected_profit,
            "degenerate_sides": self.degenerate_sides,
            "roots": {"upper": [float(r) for r in self.thresholds.roots_upper],
                      "lower": [float(r) for r in self.thresholds.roots_lower]},
            "support": [self.lo, self.hi],
            "regularity": self.regularity.to_dict(),
        }


def solve(dist, rule: UpdateRule, p0: float, check_consistency: bool = True) -> OptimalMechanism:
    """Profit-maximising IC mechanism for trader beliefs ``dist`` at price ``p0``."""
    p0 = float(p0)
    if not dist.lo < p0 < dist.hi:
        raise ValueError(f"p0={p0} must lie strictly inside [{dist.lo}, {dist.hi}]")
    if check_consistency:
        rep = validate_assumption1(rule, dist, p0)
        if not rep.consistency:
            warnings.warn(f"E[pi(p0, p_hat)] = {rep.expected_update:.6g} differs from "
                          f"p0 = {p0:.6g}; solving anyway", AssumptionWarning, stacklevel=2)
    v = VirtualValues(dist, rule, p0)
    reg = check_regularity(v)
    th = find_thresholds(v, reg)
    alloc = AllocationRule.bang_bang(p0, th.p_l, th.p_h, dist.lo, dist.hi)
    profit = expected_profit_direct(alloc, dist, rule)
    return OptimalMechanism(p0, th.p_l, th.p_h, dist.lo, dist.hi, alloc, profit, reg, th)


@dataclass
class SweepRow:
    lam: float
    p_l: Optional[float]
    p_h: Optional[float]
    gap: float
    degenerate: list
    regular: bool

    def csv_fields(self, lo, hi):
        mark = "+".join(self.degenerate)
        pl = lo if self.p_l is None else self.p_l
        ph = hi if self.p_h is None else self.p_h
        return [self.lam, pl, ph, self.gap, mark]


def sweep_lambda(dist, p0: float, lambdas) -> list:
    """Solve the linear-update mechanism for each weight, in the given order."""
    rows = []
    for lam in lambdas:
        m = solve(dist, UpdateRule.linear(lam), p0, check_consistency=False)
        rows.append(SweepRow(float(lam), m.p_l, m.p_h, m.gap_length,
                             m.degenerate_sides, m.regularity.regular))
    return rows


def gap_monotone(rows, tol=1e-9) -> bool:
    """True when the gap never widens as the weight grows."""
    ordered = sorted(rows, key=lambda r: r.lam)
    return all(b.gap <= a.gap + tol for a, b in zip(ordered, ordered[1:]))
