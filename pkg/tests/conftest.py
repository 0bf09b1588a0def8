import numpy as np
import pytest

from ammdesign import Exponential, PiecewiseLinear, TruncatedNormal, Uniform


def all_kinds():
    return [
        Uniform(0.2, 2.0),
        Exponential(2.0),
        TruncatedNormal(1.0, 0.4, 0.1, 2.5),
        PiecewiseLinear(((0.2, 0.5), (0.8, 1.5), (1.6, 0.7), (2.4, 0.2))),
    ]


@pytest.fixture(params=all_kinds(), ids=lambda d: d.kind)
def any_dist(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_step_rule(rng, p0, lo, hi, max_steps=4):
    """Monotone step allocation on [lo, hi] with level 0 around p0."""
    from ammdesign import AllocationRule

    nb = int(rng.integers(0, max_steps + 1))
    ns = int(rng.integers(0, max_steps + 1))
    buy_pts = np.sort(rng.uniform(lo, p0, nb))[::-1]      # walking away from p0
    sell_pts = np.sort(rng.uniform(p0, hi, ns))
    buy_lv = -np.sort(rng.uniform(0.0, 1.0, nb))          # more negative further down
    sell_lv = np.sort(rng.uniform(0.0, 1.0, ns))
    bps = [lo, *buy_pts[::-1], *sell_pts, hi]
    levels = [*buy_lv[::-1], 0.0, *sell_lv]
    # drop empty cells from coincident draws
    keep_b, keep_l = [bps[0]], []
    for b, v in zip(bps[1:], levels):
        if b > keep_b[-1]:
            keep_b.append(b)
            keep_l.append(v)
    return AllocationRule.steps(p0, keep_b, keep_l)
