import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import const_quadratic
from onlinecd.core import make_partition, uniform_partition
from onlinecd.engine import (
    SelectionRule,
    cd_step,
    run_online,
    run_online_multistep,
    select_cyclic,
    select_gauss_southwell,
    select_random,
)
from onlinecd.problems import estimate_constants, gen_quadratic_sequence, replication_rng
from onlinecd.schedules import Schedule


def test_random_single_block():
    rng = replication_rng(0)
    assert all(select_random(1, rng) == 1 for _ in range(50))


def test_random_frequencies_binomial():
    rng = replication_rng(7)
    draws = rng.integers(1, 5, size=10**5)
    counts = np.bincount(draws, minlength=5)[1:]
    sigma = np.sqrt(10**5 * 0.25 * 0.75)
    assert np.all(np.abs(counts - 25000) < 4 * sigma)
    # the selector consumes the same stream one draw at a time
    rng2 = replication_rng(7)
    assert [select_random(4, rng2) for _ in range(100)] == draws[:100].tolist()


def test_random_reproducible():
    a, b = SelectionRule("random", 6, seed=11), SelectionRule("random", 6, seed=11)
    assert [a.select(None, None) for _ in range(200)] == [b.select(None, None) for _ in range(200)]


def test_random_rule_needs_seed():
    with pytest.raises(ValueError):
        SelectionRule("random", 3)
    with pytest.raises(ValueError):
        SelectionRule("lottery", 3)


@pytest.mark.parametrize("prev, P, expected", [(3, 3, 1), (1, 3, 2), (1, 1, 1)])
def test_cyclic(prev, P, expected):
    assert select_cyclic(prev, P) == expected


def test_cyclic_rule_starts_at_one_by_default():
    r = SelectionRule("cyclic", 4)
    assert [r.select(None, None) for _ in range(6)] == [1, 2, 3, 4, 1, 2]
    r = SelectionRule("cyclic", 4, start=2)
    assert r.select(None, None) == 3


def test_gauss_southwell_examples():
    assert select_gauss_southwell(np.array([0.5, -2.0, 1.0]), uniform_partition(3, 3)) == 2
    assert select_gauss_southwell(np.array([3.0, 4.0, 4.9]), make_partition(3, [2, 1])) == 1
    assert select_gauss_southwell(np.zeros(4), uniform_partition(4, 4)) == 1


def test_gauss_southwell_tie_lowest():
    assert select_gauss_southwell(np.array([1.0, -3.0, 3.0]), uniform_partition(3, 3)) == 2


def test_cd_step_examples():
    p = uniform_partition(2, 2)
    assert cd_step(np.array([1.0, 2.0]), np.array([4.0, 6.0]), 1, 0.5, p).tolist() == [-1.0, 2.0]
    x = np.array([1.0, 2.0])
    assert np.array_equal(cd_step(x, np.array([4.0, 6.0]), 2, 0.0, p), x)
    g = np.array([4.0, 6.0])
    assert np.array_equal(cd_step(x, g, 1, 0.3, make_partition(2, [2])), x - 0.3 * g)
    with pytest.raises(ValueError):
        cd_step(x, g, 1, -0.1, p)


def test_start_at_minimizer_is_stationary():
    seq = const_quadratic(np.diag([2.0, 4.0, 1.0]), [2.0, 4.0, 1.0], T=30)
    x0 = seq.minimizer(1)
    for rule in ("random", "cyclic", "gauss_southwell", "full"):
        tr = run_online(seq, rule, Schedule.constant(0.1), 30, x0, seed=0)
        assert np.all(tr.xs == x0)
        assert np.all(tr.costs == seq.value(1, x0))


@pytest.mark.parametrize("sched", [Schedule.constant(0.01), Schedule.doubling(), Schedule.inv_sqrt()])
def test_single_block_collapse(sched):
    seq = gen_quadratic_sequence(8, 200, seed=1)
    p = uniform_partition(8, 1)
    x0 = np.full(8, 0.5)
    full = run_online(seq, "full", sched, 200, x0, p)
    for rule in ("random", "cyclic", "gauss_southwell"):
        tr = run_online(seq, rule, sched, 200, x0, p, seed=3)
        assert np.array_equal(tr.xs, full.xs)
        assert np.array_equal(tr.costs, full.costs)
        assert np.array_equal(tr.final_x, full.final_x)
        assert np.all(tr.blocks == 1)
    assert np.all(full.blocks == 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["random", "cyclic", "gauss_southwell"]),
       st.lists(st.integers(1, 3), min_size=2, max_size=5))
def test_single_block_purity(seed, rule, sizes):
    n = sum(sizes)
    seq = gen_quadratic_sequence(n, 25, seed)
    p = make_partition(n, sizes)
    tr = run_online(seq, rule, Schedule.constant(0.01), 25, np.ones(n), p, seed=seed)
    it = tr.iterates()
    for t in range(tr.T):
        mask = np.ones(n, bool)
        mask[p.slice(int(tr.blocks[t]))] = False
        assert np.array_equal(it[t + 1][mask], it[t][mask])


def test_gauss_southwell_beats_average_block():
    seq = gen_quadratic_sequence(10, 100, seed=2)
    p = uniform_partition(10, 5)
    tr = run_online(seq, "gauss_southwell", Schedule.constant(0.01), 100, np.zeros(10), p)
    for t in range(1, 101):
        g = seq.gradient(t, tr.xs[t - 1])
        gi = g[p.slice(int(tr.blocks[t - 1]))]
        assert gi @ gi >= (g @ g) / p.P * (1 - 1e-12)


def test_cost_recorded_before_update():
    seq = gen_quadratic_sequence(4, 10, seed=0)
    tr = run_online(seq, "cyclic", Schedule.constant(0.05), 10, np.ones(4))
    for t in range(1, 11):
        assert tr.costs[t - 1] == seq.value(t, tr.xs[t - 1])


def test_determinism():
    seq = gen_quadratic_sequence(6, 50, seed=0)
    a = run_online(seq, "random", Schedule.inv_sqrt(), 50, np.zeros(6), seed=5)
    b = run_online(seq, "random", Schedule.inv_sqrt(), 50, np.zeros(6), seed=5)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.blocks, b.blocks)
    assert a.seed == 5


def test_prepare_errors():
    seq = gen_quadratic_sequence(3, 5, 0)
    with pytest.raises(ValueError):
        run_online(seq, "cyclic", Schedule.constant(0.1), 6, np.zeros(3))
    with pytest.raises(ValueError):
        run_online(seq, "cyclic", Schedule.constant(0.1), 5, np.zeros(2))
    with pytest.raises(ValueError):
        run_online(seq, "cyclic", Schedule.constant(0.1), 5, np.zeros(3), uniform_partition(4, 2))


@pytest.mark.parametrize("rule", ["cyclic", "gauss_southwell"])
def test_multistep_k1_matches_single(rule):
    seq = gen_quadratic_sequence(6, 60, seed=8)
    p = uniform_partition(6, 3)
    a = run_online(seq, rule, Schedule.constant(0.02), 60, np.ones(6), p)
    b = run_online_multistep(seq, rule, Schedule.constant(0.02), 60, 1, np.ones(6), p)
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.blocks, b.blocks)


def test_multistep_cyclic_full_rounds():
    seq = gen_quadratic_sequence(6, 10, seed=8)
    p = uniform_partition(6, 3)
    tr = run_online_multistep(seq, "cyclic", Schedule.constant(0.02), 10, 3, np.ones(6), p)
    assert tr.inner_blocks.tolist() == [[1, 2, 3]] * 10
    tr = run_online_multistep(seq, "cyclic", Schedule.constant(0.02), 4, 2, np.ones(6), p)
    # the pointer carries over between time steps
    assert tr.inner_blocks.tolist() == [[1, 2], [3, 1], [2, 3], [1, 2]]


def test_multistep_gs_reevaluates_gradient():
    seq = const_quadratic(np.eye(2), [1.0, 1.0], T=1)
    p = uniform_partition(2, 2)
    tr = run_online_multistep(seq, "gauss_southwell", Schedule.constant(1.0), 1, 2, np.zeros(2), p)
    # both coordinates tie at first; after block 1 is solved block 2 is the only one left
    assert tr.inner_blocks.tolist() == [[1, 2]]
    assert np.allclose(tr.final_x, [1, 1])


def test_multistep_rejects_other_rules():
    seq = gen_quadratic_sequence(3, 5, 0)
    with pytest.raises(ValueError):
        run_online_multistep(seq, "full", Schedule.constant(0.1), 5, 2, np.zeros(3))
    with pytest.raises(ValueError):
        run_online_multistep(seq, "cyclic", Schedule.constant(0.1), 5, 0, np.zeros(3))


def test_multistep_contraction_cyclic():
    from onlinecd.bounds import contraction_factor, smallest_k
    from onlinecd.problems import QuadraticSequence
    base = gen_quadratic_sequence(6, 1, seed=0, ridge=5.0)
    seq = QuadraticSequence(T=40, Q=base.matrix(1), b=base.b)
    p = make_partition(6, [2, 2, 2])
    c = estimate_constants(seq, p, sample_ts=[1])
    alpha = 1 / c.L_max
    k = smallest_k(c.mu, c.L, c.L_max, p.P, alpha, "cyclic")
    B = contraction_factor(c.mu, c.L, c.L_max, p.P, alpha, k, "cyclic")
    tr = run_online_multistep(seq, "cyclic", Schedule.constant(alpha), 40, k, np.full(6, 3.0), p)
    xs = seq.minimizer(1)
    d = np.linalg.norm(tr.iterates() - xs, axis=1)
    assert np.all(d[1:] <= B * d[:-1] + 1e-9)


def test_block_descent_inequality():
    seq = gen_quadratic_sequence(10, 1, seed=3)
    p = uniform_partition(10, 5)
    c = estimate_constants(seq, p)
    alpha = 1.5 / c.L_max
    x = np.full(10, 2.0)
    for _ in range(200):
        g = seq.gradient(1, x)
        i = select_gauss_southwell(g, p)
        nxt = cd_step(x, g, i, alpha, p)
        gi = g[p.slice(i)]
        assert seq.value(1, x) - seq.value(1, nxt) >= (alpha - alpha**2 * c.L_max / 2) * (gi @ gi) - 1e-12
        x = nxt
