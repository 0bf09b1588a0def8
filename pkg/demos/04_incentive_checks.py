# Checking the mechanism from the outside.
#
# 1. A constant-product pool as a demand curve, with its payment rule.
# 2. Incentive compatibility on a price grid, and what breaks it.
# 3. Profit computed from payments and from virtual values agree.

import math

import numpy as np

from ammdesign import (AllocationRule, DemandCurve, Uniform, UpdateRule, allocation_from_demand,
                       profit_breakdown, solve, trader_utility, verify_ic)

# 1 ---------------------------------------------------------------------------
pool = allocation_from_demand(DemandCurve.cpmm(1.0, 0.25, 4.0), 1.0)
for p in (0.25, 0.5, 2.0, 4.0):
    print(f"report {p}: receives x = {pool.x(p):+.4f}, pays y = {pool.payment(p):+.6f}, "
          f"c(sqrt p - sqrt p0) = {math.sqrt(p) - 1:+.6f}")

# 2 ---------------------------------------------------------------------------
m = solve(Uniform(0.2, 2.0), UpdateRule.noise(), 1.1)
rule = m.allocation
print("solved rule:", verify_ic(rule, 201).to_dict())
print("pool:       ", verify_ic(pool, 201).to_dict())

free = verify_ic(rule, 201, payment=lambda p: np.zeros_like(np.asarray(p, dtype=float)))
print("free trades:", free.to_dict())
print("  a trader at", free.at_true_p, "gains", round(free.worst_violation, 4),
      "by reporting", free.at_reported_p)

print("u(1.8, 1.8) =", trader_utility(rule, 1.8, 1.8), " u(1.8, 1.0) =", trader_utility(rule, 1.8, 1.0))

# 3 ---------------------------------------------------------------------------
d = Uniform(0.2, 2.0)
for u in (UpdateRule.noise(), UpdateRule.linear(0.5), UpdateRule.perfect_info()):
    for pl, ph in ((0.65, 1.55), (0.5, 1.7), (0.9, 1.2)):
        b = profit_breakdown(AllocationRule.bang_bang(1.1, pl, ph, 0.2, 2.0), d, u)
        print(f"{u.kind:12s} ({pl}, {ph}): direct {b.direct:+.8f}  virtual {b.virtual_welfare:+.8f}")
