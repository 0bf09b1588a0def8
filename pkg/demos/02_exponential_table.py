# Lower thresholds for exponential beliefs under noise trading.
#
# There is no closed form for p_l here; it is the root of
# (p0 - s) f(s) - F(s) = 0 on [0, p0].  The table below is what the
# `ammdesign table-fig2` command prints, with unrounded values alongside.

from ammdesign.cli import TABLE_P0, TABLE_RATES, lower_threshold_table, round3

table = lower_threshold_table()
print("p0     " + "".join(f"rate={r:<14}" for r in TABLE_RATES))
for p0 in TABLE_P0:
    cells = [f"{round3(table[(p0, r)])} ({table[(p0, r)]:.6f})" for r in TABLE_RATES]
    print(f"{p0:<6} " + "  ".join(cells))

# a faster-decaying belief (higher rate) pushes the buy threshold down:
# fewer traders sit far below p0, so it pays to demand a deeper discount
for p0 in TABLE_P0:
    row = [table[(p0, r)] for r in TABLE_RATES]
    assert row == sorted(row, reverse=True)
