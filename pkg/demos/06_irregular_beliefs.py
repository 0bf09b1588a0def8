# Beliefs with a spike and a trough.
#
# When the density is not monotone enough the upper virtual value can
# cross zero several times.  The solver scans for every crossing and keeps
# the one with the highest profit; the brute-force oracle agrees.

from ammdesign import (PiecewiseLinear, UpdateRule, VirtualValues, check_regularity,
                       oracle_threshold_search, solve)
from ammdesign.profit import side_profit_virtual

noise = UpdateRule.noise()
shapes = {
    "narrow spike": PiecewiseLinear(((0.2, 0.3), (1.4, 0.3), (1.5, 4.0), (1.6, 0.05),
                                     (2.4, 0.05), (2.5, 0.3), (3.0, 0.3))),
    "thin spike, deep trough": PiecewiseLinear(((0.2, 0.5), (1.45, 0.5), (1.5, 3.0),
                                                (1.55, 0.02), (2.5, 0.02), (2.6, 0.5),
                                                (3.2, 0.5))),
}

for name, d in shapes.items():
    v = VirtualValues(d, noise, 1.0)
    reg = check_regularity(v)
    print(name)
    print("  upper side regular:", reg.regular_upper, " worst drop near", reg.interval_upper)
    m = solve(d, noise, 1.0, check_consistency=False)
    for r in m.thresholds.roots_upper:
        print(f"  candidate p_h = {r:.5f}  one-sided profit {side_profit_virtual(d, noise, 1.0, 'upper', r):.6f}")
    print(f"  chosen p_h = {m.p_h:.5f}, p_l = {m.p_l:.5f}, profit {m.expected_profit:.6f}")
    o = oracle_threshold_search(d, noise, 1.0, grid_n=512)
    print(f"  oracle     ({o.best_pl:.5f}, {o.best_ph:.5f}) profit {o.best_profit:.6f}"
          f"  grid step {o.grid_spacing:.4f}")
