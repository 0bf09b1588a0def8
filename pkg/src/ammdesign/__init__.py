"""Profit-maximising incentive-compatible market making for a single liquidity provider."""

from .dist import (EndpointSingularity, Exponential, PiecewiseLinear, PriceDistribution,
                   Support, TruncatedNormal, Uniform)
from .dist import from_dict as distribution_from_dict
from .update import Assumption1Report, UpdateRule, lambda_from_variances, validate_assumption1
from .update import from_dict as update_from_dict
from .mechanism import (CPMM, AllocationRule, Constant, DemandCurve, ICReport,
                        NonMonotoneDemand, UnitDemandViolation, allocation_from_demand,
                        demand_from_dict, payment, trader_utility, verify_ic)
from .profit import (MonotoneSearchResult, OracleResult, ProfitBreakdown,
                     expected_profit_direct, expected_profit_virtual,
                     oracle_monotone_rule_search, oracle_threshold_search, profit_breakdown)
from .solver import (AssumptionWarning, OptimalMechanism, RegularityReport, SweepRow,
                     Thresholds, VirtualValues, check_regularity, find_thresholds,
                     gap_monotone, solve, sweep_lambda, virtual_lower, virtual_upper)
from .sim import MarketConfig, SimulationState, SummaryStats, TradeRecord, run, summarize

__version__ = "0.1.0"
