import math

import numpy as np
import pytest
from hypothesis import given, settings

from rdrmc.core import explicit_q
from rdrmc.ddr import MuSequence, ddr_cost, ddr_estimate, mu_sequence, naive_schedule, schedule_size, schedule_sizes
from rdrmc.models import sum_model

from conftest import redraw_distributions


@pytest.mark.parametrize(
    "q_hat, mu",
    [([1, 0.6, 0.3], [1, 1, 3]), ([1, 0.5, 0.25], [1, 2, 4]), ([1, 1, 1, 1], [1, 1, 1, 1]),
     ([1, 0.1, 0.01, 0.001], [1, 10, 100, 1000])],
)
def test_mu_sequence_examples(q_hat, mu):
    seq = mu_sequence(q_hat)
    assert seq.mu.tolist() == mu
    assert np.allclose(seq.q_bar, 1 / np.array(mu))


@settings(max_examples=200)
@given(redraw_distributions(max_d=32))
def test_mu_sandwich_and_nesting(q_hat):
    seq = mu_sequence(q_hat)
    assert seq.mu[0] == 1
    assert np.all(seq.mu[1:] % seq.mu[:-1] == 0)
    assert np.all(q_hat <= seq.q_bar * (1 + 1e-12))
    assert np.all(seq.q_bar < 2 * q_hat)


@pytest.mark.parametrize("mu, k, expected", [([1, 2, 4], 4, 3), ([1, 2, 4], 2, 2), ([1, 2, 4], 1, 1),
                                             ([1, 1, 3], 3, 3), ([1, 1, 3], 2, 2), ([1, 1, 1], 7, 3)])
def test_schedule_size_examples(mu, k, expected):
    assert schedule_size(k, MuSequence(np.array(mu))) == expected


@settings(max_examples=30, deadline=None)
@given(redraw_distributions(max_d=32))
def test_divisibility_identity(q_hat):
    seq = mu_sequence(q_hat)
    sizes = schedule_sizes(10**4, seq)
    k = np.arange(1, 10**4 + 1)
    for i in range(seq.d):
        assert np.array_equal(sizes > i, k % seq.mu[i] == 0)


def test_each_window_of_mu_has_one_deep_redraw():
    seq = mu_sequence(explicit_q("harmonic", 9))
    sizes = schedule_sizes(5000, seq)
    for i, period in enumerate(seq.mu):
        deep = (sizes > i).astype(int)
        windows = np.convolve(deep, np.ones(period, dtype=int), mode="valid")
        assert np.all(windows == 1)


def test_vectorized_schedule_matches_definition():
    seq = mu_sequence([1, 0.7, 0.3, 0.3, 0.08])
    assert schedule_sizes(300, seq).tolist() == [schedule_size(k, seq) for k in range(1, 301)]


def test_cost_formula_examples():
    seq = MuSequence(np.array([1, 2, 4]))
    assert ddr_cost(seq, 5) == 10
    assert ddr_cost(seq, 1) == 3
    res = ddr_estimate(sum_model(3), seq, 5, np.random.default_rng(0))
    assert res.total_cost == 10
    assert ddr_estimate(sum_model(3), seq, 1, np.random.default_rng(0)).total_cost == 3


@settings(max_examples=40, deadline=None)
@given(redraw_distributions(max_d=20))
def test_realized_cost_is_deterministic_and_matches_formula(q_hat):
    seq = mu_sequence(q_hat)
    model = sum_model(seq.d)
    t = np.arange(seq.d + 1.0)
    for n in (1, 2, 17, 200):
        expected = t[-1] + np.sum(np.floor((n - 1) * seq.q_bar + 1e-9) * np.diff(t))
        assert ddr_estimate(model, seq, n, np.random.default_rng(n)).total_cost == expected


def test_naive_schedule_examples():
    assert naive_schedule([1, 0.5], 4).tolist() == [1, 1, 2, 2]
    assert naive_schedule([1, 1, 1, 0.5], 8).tolist() == [3, 3, 3, 3, 4, 4, 4, 4]


def _n_var(schedule_fn, n, reps, seed):
    model = sum_model(4)
    rng = np.random.default_rng(seed)
    est = np.empty(reps)
    for r in range(reps):
        values, _ = model.run_schedule(schedule_fn(n), rng)
        est[r] = values.mean()
    return n * est.var(ddof=1), n * est.var(ddof=1) * math.sqrt(2 / (reps - 1))


def test_naive_schedule_variance_grows_while_divisibility_schedule_plateaus():
    q = explicit_q("log_optimal", 4)
    seq = mu_sequence(q)
    naive = [_n_var(lambda n: naive_schedule(q, n)[: n - 1], n, 3000, 10 + n) for n in (64, 256, 1024)]
    ddr = [_n_var(lambda n: schedule_sizes(n - 1, seq), n, 3000, 20 + n) for n in (64, 256, 1024)]
    assert naive[0][0] + 3 * naive[0][1] < naive[1][0] - 3 * naive[1][1]
    assert naive[1][0] + 3 * naive[1][1] < naive[2][0] - 3 * naive[2][1]
    c = (4 - np.arange(5)) / 4
    bound = np.sum(-np.diff(c) / seq.q_bar)
    for value, se in ddr:
        assert value <= bound * 1.05 + 3 * se


def test_variance_limit_and_work_normalized_factor_two():
    d, n, reps = 8, 512, 20_000
    q_hat = explicit_q("log_optimal", d)
    seq = mu_sequence(q_hat)
    model = sum_model(d)
    rng = np.random.default_rng(31)
    sizes = schedule_sizes(n - 1, seq)
    est = np.array([model.run_schedule(sizes, rng)[0].mean() for _ in range(reps)])
    var = est.var(ddof=1)
    se = var * math.sqrt(2 / (reps - 1))
    c = (d - np.arange(d + 1)) / d
    rhs = np.sum(-np.diff(c) / seq.q_bar)
    assert abs(n * var - rhs) <= 0.05 * rhs + 3 * n * se
    t = np.arange(d + 1.0)
    r_hat = np.dot(q_hat, np.diff(t)) * np.sum(-np.diff(c) / q_hat)
    work = ddr_cost(seq, n) * var
    work_se = ddr_cost(seq, n) * se
    assert r_hat / 2 - 3 * work_se <= work <= 2 * r_hat + 3 * work_se
