import math

import numpy as np
import pytest

from cellpop.allocation import AllocationConfig, allocate_objectives, compute_share
from cellpop.errors import BudgetTooSmall, DegenerateDomain
from cellpop.rng import StreamKey


def test_compute_share():
    assert compute_share(AllocationConfig(50, n_total=1000)) == (1000, 900)
    assert compute_share(AllocationConfig(50, n_obj_usr=20)) == (1000, 900)
    with pytest.raises(BudgetTooSmall):
        compute_share(AllocationConfig(50, n_total=100))
    with pytest.raises(BudgetTooSmall):
        compute_share(AllocationConfig(50, n_obj_usr=2))


def test_config_needs_exactly_one_mode():
    with pytest.raises(ValueError):
        AllocationConfig(5)
    with pytest.raises(ValueError):
        AllocationConfig(5, n_total=100, n_obj_usr=10)


def _alloc(e_r, s, n_share, seed=0):
    return allocate_objectives(np.asarray(e_r, float), np.asarray(s, float), n_share,
                               StreamKey(seed).stream())


def test_single_cell_gets_everything():
    assert _alloc([3.0], [1.0], 900).tolist() == [900]


def test_integer_share_is_exact():
    # q = 0.5 -> 5.0 exactly
    for seed in range(20):
        assert _alloc([1.0, 1.0], [0.0, 0.0], 10, seed).tolist() == [5, 5]


def test_fail_safe_floor():
    n = _alloc([1e-6, 1000.0], [1e-6, 0.0], 900)
    assert n[0] >= 2


def test_empty_cells_get_zero():
    n = _alloc([0.0, 1.0, 0.0], [0.0, 1.0, 0.0], 90)
    assert n[0] == 0 and n[2] == 0 and n[1] == 90


def test_all_zero_snapshot():
    with pytest.raises(DegenerateDomain):
        _alloc([0.0, 0.0], [0.0, 0.0], 10)


def test_proportional_in_expectation():
    rng = np.random.default_rng(0)
    e_r = rng.uniform(1.0, 5.0, 20)
    s = rng.uniform(0.5, 2.0, 20)
    n_share = 333
    q = (e_r + s) / (e_r + s).sum()
    trials = 10_000
    base = StreamKey(5)
    draws = np.array([allocate_objectives(e_r, s, n_share, base.derive(t).stream())
                      for t in range(trials)])
    mean = draws.mean(axis=0)
    expect = q * n_share
    frac = expect - np.floor(expect)
    se = np.sqrt(frac * (1 - frac) / trials)
    assert np.all(np.abs(mean - expect) <= 4 * se + 1e-12)
    total = draws.sum(axis=1)
    assert abs(total.mean() - n_share) <= 4 * total.std(ddof=1) / math.sqrt(trials) + 1e-12
