# Pure noise trading against uniform beliefs.
#
# Traders' private prices are uniform on [0.2, 2.0]; the market maker's
# estimate p0 = 1.1 does not move after a trade.  The profit-maximising
# mechanism sells a full unit above one price, buys a full unit below
# another, and refuses to trade in between.

import csv
from pathlib import Path

from ammdesign import Uniform, UpdateRule, solve

out = Path("demo_output")
out.mkdir(exist_ok=True)

d = Uniform(0.2, 2.0)
m = solve(d, UpdateRule.noise(), 1.1)

print(f"buy below   p_l = {m.p_l:.4f}   (midpoint of lo and p0: {(0.2 + 1.1) / 2})")
print(f"sell above  p_h = {m.p_h:.4f}   (midpoint of p0 and hi: {(1.1 + 2.0) / 2})")
print(f"no-trade gap    = {m.gap_length:.4f}")
print(f"expected profit = {m.expected_profit:.6f}")

# the allocation jumps straight from -1 to 0 to +1
p, x, y = m.curve(1001)
print("levels used:", sorted({float(v) for v in x}))

# a trader who believes 1.8 and reports it pays p_h for one unit
print("payment at 1.8:", m.payment(1.8), " at 0.3:", m.payment(0.3))

with open(out / "noise_uniform_curve.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["p_hat", "x_star", "y"])
    w.writerows(zip(p, x, y))
print("wrote", out / "noise_uniform_curve.csv")

# exponential beliefs: the sell threshold sits one mean above p0
from ammdesign import Exponential

for rate in (0.5, 1.0, 2.0):
    me = solve(Exponential(rate), UpdateRule.noise(), 1.0)
    print(f"rate {rate}: p_h = {me.p_h:.6f}  (p0 + 1/rate = {1 + 1 / rate})  p_l = {me.p_l:.6f}")
