"""Information measures: analytic values, identities, and validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bias_lab.metrics import (
    ce_shift,
    conditional_entropy,
    conditional_kl,
    entropy,
    entropy_rows,
    kl,
    marginalize,
    validate_conditional_table,
    validate_prob_vector,
)
from bias_lab.rng import SeededRng


def _random_prob(rng, k):
    return rng.dirichlet(np.ones(k))


def test_entropy_extremes():
    assert entropy(np.array([0.0, 1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert entropy(np.full(5, 0.2)) == pytest.approx(np.log(5), abs=1e-12)


def test_entropy_rows_matches_scalar():
    rng = SeededRng(0)
    rows = rng.dirichlet(np.ones(6), size=40)
    batch = entropy_rows(rows)
    for row, h in zip(rows, batch):
        assert h == pytest.approx(entropy(row), abs=1e-12)


def test_kl_identical_is_zero():
    p = SeededRng(1).dirichlet(np.ones(7))
    assert kl(p, p) == pytest.approx(0.0, abs=1e-12)


def test_kl_analytic_value():
    # 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1)
    expected = 0.5 * np.log(0.5 / 0.9) + 0.5 * np.log(0.5 / 0.1)
    assert kl(np.array([0.5, 0.5]), np.array([0.9, 0.1])) == pytest.approx(expected, abs=1e-12)


def test_kl_handles_zero_in_new():
    # one-hot vs uniform: KL = log K
    p = np.array([1.0, 0.0, 0.0])
    q = np.full(3, 1 / 3)
    assert kl(p, q) == pytest.approx(np.log(3), abs=1e-12)


def test_ce_shift_identities():
    p_new = np.array([0.5, 0.5])
    p_old = np.array([0.9, 0.1])
    expected = np.log(2) + kl(p_new, p_old)
    assert ce_shift(p_new, p_old) == pytest.approx(expected, abs=1e-12)
    # Independent recomputation as the plain cross entropy -sum p' log p.
    assert ce_shift(p_new, p_old) == pytest.approx(-(p_new * np.log(p_old)).sum(), abs=1e-12)
    assert ce_shift(p_old, p_old) == pytest.approx(entropy(p_old), abs=1e-12)


def test_ce_shift_onehot_vs_uniform():
    p_new = np.array([0.0, 1.0, 0.0])
    assert ce_shift(p_new, np.full(3, 1 / 3)) == pytest.approx(np.log(3), abs=1e-12)


def test_marginalize_analytic():
    p1 = np.array([0.25, 0.75])
    cond = np.array([[0.9, 0.1], [0.2, 0.8]])
    out = marginalize(p1, cond)
    assert np.allclose(out, [0.25 * 0.9 + 0.75 * 0.2, 0.25 * 0.1 + 0.75 * 0.8])
    validate_prob_vector(out)


def test_conditional_entropy_weighted_sum():
    weights = np.array([0.3, 0.7])
    cond = np.array([[0.5, 0.5], [1.0, 0.0]])
    assert conditional_entropy(weights, cond) == pytest.approx(0.3 * np.log(2), abs=1e-12)


def test_conditional_kl_matches_bruteforce():
    rng = SeededRng(2)
    for trial in range(20):
        k = 3
        w = _random_prob(rng, k)
        new = rng.dirichlet(np.ones(k), size=k)
        old = rng.dirichlet(np.ones(k), size=k)
        brute = 0.0
        for j in range(k):
            for i in range(k):
                brute += w[j] * new[j, i] * np.log(new[j, i] / old[j, i])
        assert conditional_kl(w, new, old) == pytest.approx(brute, abs=1e-10)


def test_conditional_kl_chain_rule():
    """KL of the joint = KL of the parent marginal + conditional KL."""
    rng = SeededRng(3)
    k = 4
    w_new, w_old = _random_prob(rng, k), _random_prob(rng, k)
    t_new = rng.dirichlet(np.ones(k), size=k)
    t_old = rng.dirichlet(np.ones(k), size=k)
    joint_new = (w_new[:, None] * t_new).reshape(-1)
    joint_old = (w_old[:, None] * t_old).reshape(-1)
    lhs = kl(joint_new, joint_old)
    rhs = kl(w_new, w_old) + conditional_kl(w_new, t_new, t_old)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_validate_prob_vector_rejects():
    with pytest.raises(ValueError):
        validate_prob_vector(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        validate_prob_vector(np.array([-0.1, 1.1]))
    with pytest.raises(ValueError):
        validate_prob_vector(np.ones((2, 2)))


def test_validate_conditional_table_rejects():
    with pytest.raises(ValueError):
        validate_conditional_table(np.ones((2, 3)))
    bad = np.array([[0.5, 0.5], [0.9, 0.2]])
    with pytest.raises(ValueError):
        validate_conditional_table(bad)


@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=2, max_value=12))
@settings(max_examples=50, deadline=None)
def test_kl_nonnegative_and_entropy_bounded(seed, k):
    rng = SeededRng(seed)
    p = rng.dirichlet(np.full(k, 0.3))
    q = rng.dirichlet(np.full(k, 0.3))
    assert kl(p, q) >= -1e-12
    assert -1e-12 <= entropy(p) <= np.log(k) + 1e-12
