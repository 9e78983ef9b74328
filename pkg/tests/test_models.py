"""Toy models: gates, losses, exact gradients, Adam, and the training loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bias_lab.models import (
    CM,
    MM,
    Adam,
    GateParams,
    TrainConfig,
    batch_loss,
    cm_forward,
    cm_loss_grads,
    gate_weights,
    gradients,
    gumbel_softmax_gate,
    kaiming_uniform,
    mm_forward,
    mm_loss_grads,
    pair_counts_from_samples,
    softmax,
    train_population,
    train_run,
    _segments,
)
from bias_lab.rng import SeededRng
from bias_lab.scm import SamplePair
from bias_lab.testing import check_toy_gradients, rel_err


def test_gate_weights_sum_to_one_and_interior():
    rng = SeededRng(0)
    z = rng.uniform(size=(200, 2)) * 10 - 5
    g = rng.gumbel(size=(200, 2))
    c = gate_weights(z, g, 2.0)
    assert np.allclose(c.sum(-1), 1.0, atol=1e-12)
    assert np.all(c > 0) and np.all(c < 1)


def test_gate_zero_logits_zero_noise_is_half():
    c = gate_weights(np.zeros(2), np.zeros(2), 2.0)
    assert np.allclose(c, 0.5)


def test_gate_temperature_flattens():
    z = np.array([1.0, 0.0])
    sharp = gate_weights(z, np.zeros(2), 0.5)
    flat = gate_weights(z, np.zeros(2), 8.0)
    assert sharp[0] > flat[0] > 0.5


def test_gumbel_softmax_gate_uses_fresh_noise():
    gate = GateParams(z1=0.5, z2=0.5)
    rng = SeededRng(1)
    draws = {gumbel_softmax_gate(gate, rng) for _ in range(10)}
    assert len(draws) == 10
    with pytest.raises(ValueError):
        GateParams(z1=0.0, z2=0.0, tau=0.0)


def test_mm_forward_shared_vector():
    i = np.arange(5.0)
    x1_hat, x2_hat = mm_forward(i, (0.3, 0.7))
    assert np.allclose(x1_hat, 0.7 * i)
    assert np.allclose(x2_hat, 0.3 * i)


def test_cm_forward_reads_columns_of_shared_matrix():
    w = np.arange(16.0).reshape(4, 4)
    x1_hat, x2_hat = cm_forward(w, SamplePair(1, 2), (0.25, 0.75))
    assert np.allclose(x1_hat, 0.75 * w[:, 2])
    assert np.allclose(x2_hat, 0.25 * w[:, 1])
    with pytest.raises(IndexError):
        cm_forward(w, SamplePair(4, 0), (0.5, 0.5))


def test_batch_loss_matches_counts_core_mm():
    rng = SeededRng(2)
    k, b = 5, 64
    pairs = [SamplePair(int(a), int(c)) for a, c in
             zip(rng.categorical(np.full(k, 0.2), size=b), rng.categorical(np.full(k, 0.2), size=b))]
    i = rng.uniform(size=k)
    z = np.array([0.4, -0.2])
    g = rng.gumbel(size=2)
    c = gate_weights(z, g, 2.0)
    x1_hat, x2_hat = mm_forward(i, (c[0], c[1]))
    per_sample = batch_loss(x1_hat, x2_hat, [p.x1 for p in pairs], [p.x2 for p in pairs])
    n = pair_counts_from_samples(pairs, k)
    loss, _, _, _ = mm_loss_grads(i, z, g, 2.0, n.sum(-1), n.sum(-2), b)
    assert per_sample == pytest.approx(float(loss), abs=1e-12)


def test_batch_loss_matches_counts_core_cm():
    rng = SeededRng(3)
    k, b = 4, 32
    pairs = [SamplePair(int(a), int(c)) for a, c in
             zip(rng.categorical(np.full(k, 0.25), size=b), rng.categorical(np.full(k, 0.25), size=b))]
    w = kaiming_uniform(rng, k)
    z = np.array([0.1, 0.9])
    g = rng.gumbel(size=2)
    c = gate_weights(z, g, 2.0)
    total = 0.0
    for p in pairs:
        x1_hat, x2_hat = cm_forward(w, p, (c[0], c[1]))
        total += batch_loss(x1_hat, x2_hat, [p.x1], [p.x2])
    n = pair_counts_from_samples(pairs, k)
    loss, _, _, _ = cm_loss_grads(w, z, g, 2.0, n, b)
    assert total / b == pytest.approx(float(loss), abs=1e-10)


@pytest.mark.parametrize("kind", [MM, CM])
def test_gradients_match_finite_differences(kind):
    rng = SeededRng(4)
    worst = max(check_toy_gradients(kind, rng.spawn(i)) for i in range(20))
    assert worst < 1e-5


def test_gradients_wrapper_agrees_with_cores():
    rng = SeededRng(5)
    k, b = 5, 32
    pairs = [SamplePair(int(a), int(c)) for a, c in
             zip(rng.categorical(np.full(k, 0.2), size=b), rng.categorical(np.full(k, 0.2), size=b))]
    gate = GateParams(z1=0.5, z2=0.5)
    g = rng.gumbel(size=2)
    i = rng.uniform(size=k)
    loss, d_p, d_z1, d_z2 = gradients(MM, i, gate, g, pairs)
    assert np.isfinite(loss) and d_p.shape == (k,)
    assert d_z1 == pytest.approx(-d_z2, abs=1e-15)
    with pytest.raises(ValueError):
        gradients("other", i, gate, g, pairs)


def test_mirror_symmetry_mm():
    """Relabeling the variables and swapping gate slots mirrors everything."""
    rng = SeededRng(6)
    k, b = 5, 64
    counts = rng.multinomial(b, np.full(k * k, 1 / (k * k))).reshape(k, k).astype(float)
    i = rng.uniform(size=k)
    z = np.array([0.8, -0.3])
    g = rng.gumbel(size=2)
    loss, d_i, d_z, c = mm_loss_grads(i, z, g, 2.0, counts.sum(-1), counts.sum(-2), b)
    loss_m, d_i_m, d_z_m, c_m = mm_loss_grads(
        i, z[::-1], g[::-1], 2.0, counts.sum(-2), counts.sum(-1), b
    )
    assert loss_m == pytest.approx(float(loss), abs=1e-12)
    assert np.allclose(d_i_m, d_i, atol=1e-12)
    assert np.allclose(d_z_m, d_z[::-1], atol=1e-12)
    assert np.allclose(c_m, c[::-1], atol=1e-15)


def test_mirror_symmetry_cm():
    rng = SeededRng(7)
    k, b = 4, 64
    counts = rng.multinomial(b, np.full(k * k, 1 / (k * k))).reshape(k, k).astype(float)
    w = kaiming_uniform(rng, k)
    z = np.array([0.2, 0.6])
    g = rng.gumbel(size=2)
    loss, d_w, d_z, _ = cm_loss_grads(w, z, g, 2.0, counts, b)
    loss_m, d_w_m, d_z_m, _ = cm_loss_grads(w, z[::-1], g[::-1], 2.0, counts.T, b)
    assert loss_m == pytest.approx(float(loss), abs=1e-12)
    assert np.allclose(d_w_m, d_w, atol=1e-12)
    assert np.allclose(d_z_m, d_z[::-1], atol=1e-12)


def test_mm_loss_floor_is_entropy_sum():
    """The marginal model has no conditioning path, so its best attainable
    expected loss on related data is H(X1) + H(X2) of the empirical marginals."""
    from bias_lab.metrics import entropy

    rng = SeededRng(8)
    k, b = 5, 128
    counts = rng.multinomial(b, np.full(k * k, 1 / (k * k))).reshape(k, k).astype(float)
    n1, n2 = counts.sum(-1), counts.sum(-2)
    floor = entropy(n1 / b) + entropy(n2 / b)
    for trial in range(200):
        i = rng.uniform(size=k) * 4 - 2
        z = rng.uniform(size=2) * 4 - 2
        g = rng.gumbel(size=2)
        loss, _, _, _ = mm_loss_grads(i, z, g, 2.0, n1, n2, b)
        assert float(loss) >= floor - 1e-9


def test_loss_finite_under_extreme_logits():
    k, b = 5, 32
    counts = np.zeros((k, k))
    counts[0, 0] = b
    z = np.array([500.0, -500.0])
    g = np.zeros(2)
    w = np.full((k, k), 300.0)
    loss, d_w, d_z, c = cm_loss_grads(w, z, g, 2.0, counts, b)
    assert np.isfinite(loss) and np.all(np.isfinite(d_w)) and np.all(np.isfinite(d_z))
    assert np.allclose(c.sum(), 1.0)


def test_adam_first_step_size_equals_lr():
    params = {"x": np.array([1.0, -2.0])}
    opt = Adam(params, lr=0.1)
    opt.step({"x": np.array([3.0, -0.5])})
    # Bias-corrected Adam's first step has magnitude lr (up to eps).
    assert np.allclose(np.abs(params["x"] - np.array([1.0, -2.0])), 0.1, atol=1e-6)


def test_adam_matches_reference_implementation():
    rng = SeededRng(9)
    x = rng.uniform(size=4)
    params = {"x": x.copy()}
    opt = Adam(params, lr=0.05)
    ref = x.copy()
    m = np.zeros(4)
    v = np.zeros(4)
    for t in range(1, 20):
        g = rng.uniform(size=4) * 2 - 1
        opt.step({"x": g})
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        mh = m / (1 - 0.9**t)
        vh = v / (1 - 0.999**t)
        ref -= 0.05 * mh / (np.sqrt(vh) + 1e-8)
        assert np.allclose(params["x"], ref, atol=1e-12)


def test_kaiming_uniform_bounds():
    draws = np.stack([kaiming_uniform(SeededRng(s), 5) for s in range(50)])
    bound = np.sqrt(6.0 / 5.0)
    assert draws.min() >= -bound and draws.max() <= bound
    assert draws.std() > 0.5 * bound / np.sqrt(3)  # actually spread out


def test_segments_cover_run_exactly():
    cfg = TrainConfig(epochs=3, batches_per_epoch=8, mode="interventional",
                      batches_per_intervention=5, warmup_batches=6).validate()
    segs = _segments(cfg)
    assert sum(n for n, _ in segs) == 24
    assert segs[0] == (6, False)
    assert all(flag for _, flag in segs[1:])
    assert all(n == 5 for n, _ in segs[1:-1])
    obs = _segments(TrainConfig(epochs=3, batches_per_epoch=8).validate())
    assert obs == [(24, False)]


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(k=1).validate()
    with pytest.raises(ValueError):
        TrainConfig(mode="weird").validate()
    with pytest.raises(ValueError):
        TrainConfig(lam=1.5).validate()
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.0).validate()


@pytest.mark.parametrize("kind", [MM, CM])
def test_train_run_bit_reproducible(kind):
    cfg = TrainConfig(epochs=4, batches_per_epoch=4, batch_size=32)
    a = train_run(kind, cfg, SeededRng(123))
    b = train_run(kind, cfg, SeededRng(123))
    assert a.final_c1 == b.final_c1
    assert np.array_equal(a.c1_trajectory, b.c1_trajectory)


@pytest.mark.parametrize("kind", [MM, CM])
def test_population_matches_independent_runs(kind):
    """Lockstep population training is bitwise identical to one-at-a-time runs."""
    cfg = TrainConfig(epochs=3, batches_per_epoch=4, batch_size=32,
                      mode="interventional", lam=0.3, batches_per_intervention=4)
    seeds = [11, 22, 33]
    pop = train_population(kind, cfg, [SeededRng(s) for s in seeds])
    for rec, seed in zip(pop, seeds):
        solo = train_run(kind, cfg, SeededRng(seed))
        assert solo.final_c1 == rec.final_c1
        assert np.array_equal(solo.c1_trajectory, rec.c1_trajectory)


def test_run_record_fields_and_trajectory_range():
    cfg = TrainConfig(epochs=5, batches_per_epoch=4, batch_size=32)
    rec = train_run(MM, cfg, SeededRng(3))
    assert rec.model == MM and rec.mode == "observational"
    assert rec.c1_trajectory.shape == (5,)
    assert np.all((rec.c1_trajectory > 0) & (rec.c1_trajectory < 1))
    assert 0.0 < rec.final_c1 < 1.0


def test_train_population_rejects_unknown_model():
    with pytest.raises(ValueError):
        train_population("other", TrainConfig(epochs=1), [SeededRng(0)])


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=20, deadline=None)
def test_gate_weights_always_normalized(seed):
    rng = SeededRng(seed)
    z = rng.uniform(size=2) * 20 - 10
    g = rng.gumbel(size=2)
    c = gate_weights(z, g, 2.0)
    assert abs(c.sum() - 1.0) < 1e-12 and np.all(c > 0)
