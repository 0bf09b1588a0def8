"""Sequential trading: each round's posterior estimate becomes the next round's prior.

The trader-belief distribution is a shift family that follows the market
maker's current estimate ``p0``.  Uniform and truncated-normal shapes are
re-centred so that their mean (``mu`` for the truncated normal) equals the
current ``p0``; exponential and piecewise shapes keep their configured offset
from ``p0`` and translate with it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .dist import PriceDistribution, TruncatedNormal, Uniform
from .solver import solve
from .update import UpdateRule

LEDGER_COLUMNS = ("round", "p0_before", "p_hat", "x", "y", "p0_after", "pnl")


@dataclass(frozen=True)
class MarketConfig:
    shape: PriceDistribution
    rule: UpdateRule
    initial_p0: float
    rounds: int
    seed: int = 0
    resolve_each_round: bool = True

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")

    def distribution_at(self, p0: float) -> PriceDistribution:
        base = self.shape
        if isinstance(base, Uniform):
            return base.shifted(p0 - base.mean)
        if isinstance(base, TruncatedNormal):
            return base.shifted(p0 - base.mu)
        return base.shifted(p0 - self.initial_p0)


@dataclass(frozen=True)
class TradeRecord:
    round: int
    p0_before: float
    p_hat: float
    x: float
    y: float
    p0_after: float
    pnl: float


@dataclass
class SimulationState:
    current_p0: float
    inventory: float = 0.0
    cash: float = 0.0
    ledger: list = field(default_factory=list)
    halted: bool = False
    diagnostic: str = ""

    def ledger_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LEDGER_COLUMNS)
        for r in self.ledger:
            w.writerow([r.round] + [repr(float(v)) for v in
                                    (r.p0_before, r.p_hat, r.x, r.y, r.p0_after, r.pnl)])
        return buf.getvalue()


def _shift_thresholds(mech, delta):
    pl = None if mech.p_l is None else mech.p_l + delta
    ph = None if mech.p_h is None else mech.p_h + delta
    return pl, ph


def run(config: MarketConfig) -> SimulationState:
    """Simulate ``config.rounds`` trades; deterministic for a given seed.

    Halts early, keeping the partial ledger, if the re-centred distribution
    would put mass on negative prices or stop containing ``p0`` in its interior.
    """
    rng = np.random.default_rng(config.seed)
    state = SimulationState(float(config.initial_p0))
    first = None
    cache = {}
    for t in range(config.rounds):
        p0 = state.current_p0
        try:
            d = config.distribution_at(p0)
        except ValueError as exc:
            state.halted, state.diagnostic = True, f"round {t}: {exc}"
            break
        if not d.lo < p0 < d.hi:
            state.halted = True
            state.diagnostic = f"round {t}: p0={p0} escaped ({d.lo}, {d.hi})"
            break
        if config.resolve_each_round or first is None:
            if p0 not in cache:
                cache[p0] = solve(d, config.rule, p0, check_consistency=False)
            mech = cache[p0]
            if first is None:
                first = mech
            pl, ph = mech.p_l, mech.p_h
        else:
            pl, ph = _shift_thresholds(first, p0 - first.p0)

        p_hat = float(d.sample(rng))
        if ph is not None and p_hat >= ph:
            x, y = 1.0, ph
        elif pl is not None and p_hat <= pl:
            x, y = -1.0, -pl
        else:
            x, y = 0.0, 0.0
        post = float(config.rule.apply(p0, p_hat))
        pnl = y - post * x
        state.ledger.append(TradeRecord(t, p0, p_hat, x, y, post, pnl))
        state.inventory -= x
        state.cash += y
        state.current_p0 = post
    return state


@dataclass
class SummaryStats:
    rounds: int
    trades: int
    no_trade_fraction: float
    mean_pnl: float
    var_pnl: float
    final_inventory: float
    final_cash: float
    final_p0: float
    halted: bool

    @property
    def pnl_stderr(self):
        return math.sqrt(self.var_pnl / self.rounds)

    def to_dict(self):
        d = asdict(self)
        d["pnl_stderr"] = self.pnl_stderr
        return d


def summarize(state: SimulationState) -> SummaryStats:
    if not state.ledger:
        raise ValueError("empty ledger")
    x = np.array([r.x for r in state.ledger])
    pnl = np.array([r.pnl for r in state.ledger])
    n = len(pnl)
    return SummaryStats(
        rounds=n,
        trades=int(np.count_nonzero(x)),
        no_trade_fraction=float(np.mean(x == 0.0)),
        mean_pnl=float(pnl.mean()),
        var_pnl=float(pnl.var(ddof=1)) if n > 1 else 0.0,
        final_inventory=state.inventory,
        final_cash=state.cash,
        final_p0=state.current_p0,
        halted=state.halted,
    )
