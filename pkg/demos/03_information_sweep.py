# How informative trades widen the no-trade gap.
#
# With the linear update pi = lam * p0 + (1 - lam) * p_hat the market maker
# moves its estimate toward each report.  lam = 1 is pure noise, lam = 0
# means every report is the truth and the market maker should not trade.

from ammdesign import TruncatedNormal, Uniform, gap_monotone, lambda_from_variances, sweep_lambda

lams = [round(0.1 * k, 1) for k in range(11)]

for name, d, p0 in (("uniform(0.2, 2.0)", Uniform(0.2, 2.0), 1.1),
                    ("truncnorm(1, 0.4) on [0.1, 2.5]", TruncatedNormal(1.0, 0.4, 0.1, 2.5), 1.0)):
    rows = sweep_lambda(d, p0, lams)
    print(name)
    print("  lambda    p_l      p_h      gap   degenerate")
    for r in rows:
        lam, pl, ph, gap, mark = r.csv_fields(d.lo, d.hi)
        print(f"  {lam:5.1f}  {pl:7.4f}  {ph:7.4f}  {gap:7.4f}  {mark}")
    print("  gap non-increasing:", gap_monotone(rows))

# where lam comes from: Gaussian prior with variance s0, report noise variance se
for s0, se in ((1.0, 0.25), (1.0, 1.0), (1.0, 4.0)):
    print(f"prior var {s0}, noise var {se}: lambda = {lambda_from_variances(s0, se):.3f}")
