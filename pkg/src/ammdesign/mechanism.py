"""Demand curves, allocation rules and incentive-compatible payments.

A demand curve ``g`` is stored piecewise: strictly increasing breakpoints and
one segment per interval.  Segments are either a constant level or an
analytic constant-product form ``offset + c / sqrt(p)``.  Jumps are allowed at
breakpoints.

Allocation to a trader reporting ``p_hat`` against reference price ``p0`` is
``x(p_hat) = g(p0) - g(p_hat)``.  At a jump ``t`` the trade side owns the atom:
``x(t)`` is the left limit for ``t < p0`` and the right limit for ``t > p0``,
and a jump sitting exactly on ``p0`` belongs to the sell side.  The payment is
the Stieltjes integral ``y(p_hat) = int_{p0}^{p_hat} s dx(s)``: each jump
contributes ``t * dx(t)`` and analytic pieces are integrated numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import integrate

IC_TOL = 1e-9
_BOUND_TOL = 1e-12


class NonMonotoneDemand(ValueError):
    pass


class UnitDemandViolation(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    level: float
    analytic = False

    def g(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.level)

    def dg(self, p):
        return np.zeros_like(np.asarray(p, dtype=float))

    def to_dict(self):
        return {"kind": "constant", "level": self.level}


@dataclass(frozen=True)
class CPMM:
    """Constant-product holdings ``offset + c / sqrt(p)``."""

    c: float
    offset: float = 0.0
    analytic = True

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("cpmm liquidity constant must be positive")

    def g(self, p):
        return self.offset + self.c / np.sqrt(np.asarray(p, dtype=float))

    def dg(self, p):
        return -0.5 * self.c * np.asarray(p, dtype=float) ** -1.5

    def to_dict(self):
        return {"kind": "cpmm", "c": self.c, "offset": self.offset}


def _segment_from_dict(obj):
    kind = obj.get("kind")
    if kind == "constant" and set(obj) == {"kind", "level"}:
        return Constant(float(obj["level"]))
    if kind == "cpmm" and set(obj) - {"offset"} == {"kind", "c"}:
        return CPMM(float(obj["c"]), float(obj.get("offset", 0.0)))
    raise ValueError(f"bad demand segment {obj!r}")


@dataclass(frozen=True)
class DemandCurve:
    breakpoints: tuple
    segments: tuple

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        if len(b) != len(self.segments) + 1 or len(self.segments) == 0:
            raise ValueError("need len(breakpoints) == len(segments) + 1 >= 2")
        if np.any(np.diff(b) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if b[0] <= 0.0 and any(s.analytic for s in self.segments):
            raise ValueError("analytic demand segments need positive prices")
        if any(isinstance(s, Constant) and s.level < 0.0 for s in self.segments):
            raise ValueError("demand levels must be non-negative")
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in b))
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def cpmm(cls, c, lo, hi):
        return cls((lo, hi), (CPMM(c),))

    @classmethod
    def steps(cls, breakpoints, levels):
        return cls(tuple(breakpoints), tuple(Constant(float(v)) for v in levels))

    @property
    def lo(self):
        return self.breakpoints[0]

    @property
    def hi(self):
        return self.breakpoints[-1]

    def _index(self, p, side):
        b = np.asarray(self.breakpoints)
        if side == "right":   # b_i <= p < b_{i+1}
            i = np.searchsorted(b, p, side="right") - 1
        else:                 # b_i < p <= b_{i+1}
            i = np.searchsorted(b, p, side="left") - 1
        return np.clip(i, 0, len(self.segments) - 1)

    def value(self, p, side="right"):
        """``g(p)``; at a breakpoint ``side`` picks the right or left limit."""
        p = np.clip(np.asarray(p, dtype=float), self.lo, self.hi)
        idx = self._index(p, side)
        out = np.empty_like(p)
        for i, seg in enumerate(self.segments):
            m = idx == i
            if np.any(m):
                out[m] = seg.g(p[m])
        return out[()]

    def jumps(self):
        """Interior ``(t, g(t-) - g(t+))`` pairs; positive means a downward jump."""
        out = []
        for i, t in enumerate(self.breakpoints[1:-1]):
            left = float(self.segments[i].g(t))
            right = float(self.segments[i + 1].g(t))
            if left != right:
                out.append((t, left - right))
        return out

    def check_non_increasing(self, grid_per_segment=257):
        """Return ``(ok, where, amount)`` for the worst increase found."""
        worst, where = 0.0, None
        for t, drop in self.jumps():
            if -drop > worst:
                worst, where = -drop, t
        for (a, b), seg in zip(zip(self.breakpoints[:-1], self.breakpoints[1:]), self.segments):
            if not seg.analytic:
                continue
            s = np.linspace(a, b, grid_per_segment)
            rise = np.diff(seg.g(s))
            k = int(np.argmax(rise))
            if rise[k] > worst:
                worst, where = float(rise[k]), float(s[k])
        return worst <= _BOUND_TOL, where, worst

    def to_dict(self):
        if len(self.segments) == 1 and isinstance(self.segments[0], CPMM) \
                and self.segments[0].offset == 0.0:
            return {"kind": "cpmm", "c": self.segments[0].c, "lo": self.lo, "hi": self.hi}
        if all(isinstance(s, Constant) for s in self.segments):
            return {"kind": "steps", "breakpoints": list(self.breakpoints),
                    "levels": [s.level for s in self.segments]}
        return {"kind": "piecewise", "breakpoints": list(self.breakpoints),
                "segments": [s.to_dict() for s in self.segments]}


def demand_from_dict(obj: dict) -> DemandCurve:
    kind = obj.get("kind")
    keys = set(obj)
    if kind == "cpmm" and keys == {"kind", "c", "lo", "hi"}:
        return DemandCurve.cpmm(float(obj["c"]), float(obj["lo"]), float(obj["hi"]))
    if kind == "steps" and keys == {"kind", "breakpoints", "levels"}:
        return DemandCurve.steps(obj["breakpoints"], obj["levels"])
    if kind == "piecewise" and keys == {"kind", "breakpoints", "segments"}:
        return DemandCurve(tuple(obj["breakpoints"]),
                           tuple(_segment_from_dict(s) for s in obj["segments"]))
    raise ValueError(f"bad demand curve object {obj!r}")


@dataclass(frozen=True)
class AllocationRule:
    """``x(p_hat) = g(p0) - g(p_hat)`` with its IC payment rule attached."""

    demand: DemandCurve
    p0: float
    _g_ref: float = field(init=False, repr=False)
    _sell: tuple = field(init=False, repr=False)
    _buy: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.demand.lo <= self.p0 <= self.demand.hi:
            raise ValueError("p0 outside the demand curve's price interval")
        object.__setattr__(self, "_g_ref", float(self.demand.value(self.p0, "left")))
        jumps = self.demand.jumps()
        sell = [(t, d) for t, d in jumps if t >= self.p0]
        buy = [(t, d) for t, d in jumps if t < self.p0]
        object.__setattr__(self, "_sell", _jump_table(sell))
        object.__setattr__(self, "_buy", _jump_table(buy))

    # -- construction helpers ---------------------------------------------
    @classmethod
    def steps(cls, p0, breakpoints, levels):
        """Step rule from allocation levels per interval (level 0 where p0 sits)."""
        # g = 1 - x keeps the demand curve non-negative
        rule = cls(DemandCurve.steps(breakpoints, [1.0 - float(v) for v in levels]), p0)
        if rule._g_ref != 1.0:
            raise ValueError("the interval containing p0 must have allocation level 0")
        return rule

    @classmethod
    def bang_bang(cls, p0, p_l, p_h, lo, hi):
        """-1 on ``[lo, p_l]``, 0 between, +1 on ``[p_h, hi]``; None disables a side."""
        bps, levels = [lo], []
        if p_l is not None and p_l >= p0:
            # a jump on p0 belongs to the sell side; the buy threshold is its left limit
            p_l = float(np.nextafter(p0, -np.inf))
        if p_l is not None and p_l > lo:
            bps.append(p_l)
            levels.append(-1.0)
        levels.append(0.0)
        if p_h is not None and p_h < hi:
            bps.append(p_h)
            levels.append(1.0)
        bps.append(hi)
        return cls.steps(p0, bps, levels)

    @property
    def lo(self):
        return self.demand.lo

    @property
    def hi(self):
        return self.demand.hi

    @property
    def is_step(self):
        return not any(s.analytic for s in self.demand.segments)

    @property
    def kinks(self):
        """All points where x or y may fail to be smooth."""
        return tuple(sorted(set(self.demand.breakpoints) | {self.p0}))

    @property
    def jump_points(self):
        return tuple(self._buy[0]) + tuple(self._sell[0])

    # -- evaluation ---------------------------------------------------------
    def x(self, p_hat):
        p = np.asarray(p_hat, dtype=float)
        right = self._g_ref - np.asarray(self.demand.value(p, "right"))
        left = self._g_ref - np.asarray(self.demand.value(p, "left"))
        return np.where(p > self.p0, right, np.where(p < self.p0, left, 0.0))[()]

    def levels(self):
        """Distinct allocation levels of a step rule."""
        if not self.is_step:
            raise ValueError("levels are only defined for step rules")
        return sorted({self._g_ref - s.level for s in self.demand.segments})

    def _continuous(self, a, b):
        # int_a^b s * (-g'(s)) ds over the analytic pieces, a <= b
        total = 0.0
        bps = self.demand.breakpoints
        for (u, v), seg in zip(zip(bps[:-1], bps[1:]), self.demand.segments):
            if not seg.analytic:
                continue
            lo, hi = max(a, u), min(b, v)
            if lo < hi:
                val, _ = integrate(lambda s: -s * seg.dg(s), lo, hi,
                                   abs_tol=1e-14, rel_tol=1e-14)
                total += val
        return total

    def payment(self, p_hat):
        p = np.asarray(p_hat, dtype=float)
        flat = np.atleast_1d(p).ravel()
        out = np.zeros_like(flat)
        st, sc = self._sell[0], self._sell[2]
        bt, bc = self._buy[0], self._buy[2]
        up = flat > self.p0
        if len(st):
            k = np.searchsorted(st, flat[up], side="right")
            out[up] = np.where(k > 0, sc[np.maximum(k - 1, 0)], 0.0)
        dn = flat < self.p0
        if len(bt):
            # sum over buy jumps t in [p_hat, p0): suffix sums of t * dx
            k = np.searchsorted(bt, flat[dn], side="left")
            suffix = np.concatenate([np.cumsum((bt * self._buy[1])[::-1])[::-1], [0.0]])
            out[dn] = -suffix[k]
        if not self.is_step:
            for i in np.flatnonzero(up):
                out[i] += self._continuous(self.p0, min(flat[i], self.hi))
            for i in np.flatnonzero(dn):
                out[i] -= self._continuous(max(flat[i], self.lo), self.p0)
        return out.reshape(p.shape)[()]

    def to_dict(self):
        return {"p0": self.p0, "demand": self.demand.to_dict()}


def _jump_table(pairs):
    t = np.array([p for p, _ in pairs], dtype=float)
    dx = np.array([d for _, d in pairs], dtype=float)
    return t, dx, np.cumsum(t * dx)


def allocation_from_demand(g: DemandCurve, p0: float) -> AllocationRule:
    """Allocation rule of ``g`` at reference price ``p0``; rejects non-IC or oversize curves."""
    ok, where, amount = g.check_non_increasing()
    if not ok:
        raise NonMonotoneDemand(f"demand curve increases by {amount:.3g} near p={where}")
    rule = AllocationRule(g, p0)
    x_lo, x_hi = float(rule.x(g.lo)), float(rule.x(g.hi))
    if x_lo < -1.0 - _BOUND_TOL or x_hi > 1.0 + _BOUND_TOL:
        raise UnitDemandViolation(
            f"allocation range [{x_lo:.6g}, {x_hi:.6g}] exceeds unit demand")
    return rule


def payment(rule: AllocationRule, p_hat):
    return rule.payment(p_hat)


def trader_utility(rule: AllocationRule, true_p, reported_p, payment=None):
    """``true_p * x(reported) - y(reported)``; ``payment`` overrides the IC payment."""
    y = rule.payment(reported_p) if payment is None else payment(reported_p)
    return np.asarray(true_p) * rule.x(reported_p) - y


@dataclass
class ICReport:
    passed: bool
    worst_violation: float
    at_true_p: float
    at_reported_p: float
    grid_n: int

    def to_dict(self):
        return {"passed": self.passed, "worst_violation": self.worst_violation,
                "at_true_p": self.at_true_p, "at_reported_p": self.at_reported_p,
                "grid_n": self.grid_n}


def verify_ic(rule: AllocationRule, grid_n: int = 201, payment=None, tol: float = IC_TOL,
              lo=None, hi=None) -> ICReport:
    """Exhaustively compare truthful and misreported utility on a price grid.

    The grid spans ``[lo, hi]`` (the rule's domain by default) and always
    contains every jump point and ``p0``.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    lo = rule.lo if lo is None else lo
    hi = rule.hi if hi is None else hi
    grid = np.unique(np.concatenate([np.linspace(lo, hi, grid_n),
                                     [t for t in rule.jump_points if lo <= t <= hi],
                                     [rule.p0]]))
    x = np.asarray(rule.x(grid), dtype=float)
    y = np.asarray(rule.payment(grid) if payment is None else payment(grid), dtype=float)
    # util[i, j]: true price grid[i], report grid[j]
    util = grid[:, None] * x[None, :] - y[None, :]
    gain = util - np.diag(util)[:, None]
    i, j = np.unravel_index(int(np.argmax(gain)), gain.shape)
    worst = float(gain[i, j])
    return ICReport(worst <= tol, worst, float(grid[i]), float(grid[j]), len(grid))
