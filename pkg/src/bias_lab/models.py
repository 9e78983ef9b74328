"""Marginal (MM) and conditional (CM) illustrator models with a Gumbel-Softmax
structural gate, hand-derived gradients, Adam, and the per-run training loop.

The training math runs on batch sufficient statistics (pair-count matrices):
both models' scores depend on the sample only through its category, so the
cross-entropy loss and every gradient are exact functions of the counts. All
core functions broadcast over arbitrary leading axes, which lets a sweep train
a whole population of independent runs in lockstep; a single run is the
population of size one, so the two paths are bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SeededRng
from .scm import BivariateScm, choose_target, intervene, make_scm, sample_pair_counts

MM = "mm"
CM = "cm"


@dataclass
class GateParams:
    z1: float
    z2: float
    tau: float = 2.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")


@dataclass
class TrainConfig:
    k: int = 5
    epsilon: float = 1.0
    lam: float = 0.0
    mode: str = "observational"  # or "interventional"
    epochs: int = 300
    batches_per_epoch: int = 32
    batch_size: int = 128
    lr: float = 0.1
    tau: float = 2.0
    batches_per_intervention: int = 32
    warmup_batches: int = 0

    def validate(self) -> "TrainConfig":
        if self.k < 2 or self.epochs < 1 or self.batches_per_epoch < 1 or self.batch_size < 1:
            raise ValueError("counts must be >= 1 and k >= 2")
        if self.mode not in ("observational", "interventional"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if not self.epsilon > 0 or not self.tau > 0 or not self.lr > 0:
            raise ValueError("epsilon, tau, lr must be > 0")
        if self.batches_per_intervention < 1 or self.warmup_batches < 0:
            raise ValueError("invalid intervention pacing")
        return self


@dataclass
class RunRecord:
    run_id: int
    model: str
    epsilon: float
    lam: float
    mode: str
    seed: int
    final_c1: float
    c1_trajectory: np.ndarray  # per-epoch mean of the sampled gate weight


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def gate_weights(z: np.ndarray, noise: np.ndarray, tau: float) -> np.ndarray:
    """Soft gate (c1, c2) = softmax((z + g) / tau) along the last axis."""
    return softmax((z + noise) / tau)


def gumbel_softmax_gate(gate: GateParams, rng: SeededRng) -> tuple[float, float]:
    """One noisy gate evaluation with fresh Gumbel draws."""
    c = gate_weights(np.array([gate.z1, gate.z2]), rng.gumbel(size=2), gate.tau)
    return float(c[0]), float(c[1])


def mm_forward(i: np.ndarray, c: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Raw scores (x1_hat, x2_hat) = (c2 * i, c1 * i); softmax lives in the loss."""
    c1, c2 = c
    return c2 * i, c1 * i


def cm_forward(w: np.ndarray, pair, c: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Scores from the shared matrix: x1_hat = c2 * W[:, x2], x2_hat = c1 * W[:, x1]."""
    c1, c2 = c
    k = w.shape[0]
    if not (0 <= pair.x1 < k and 0 <= pair.x2 < k):
        raise IndexError("sample indices out of range")
    return c2 * w[:, pair.x2], c1 * w[:, pair.x1]


def batch_loss(x1_scores: np.ndarray, x2_scores: np.ndarray, x1, x2) -> float:
    """Mean cross-entropy over the batch, both prediction heads summed."""
    x1 = np.atleast_1d(np.asarray(x1))
    x2 = np.atleast_1d(np.asarray(x2))
    b = x1.size
    s1 = np.broadcast_to(np.atleast_2d(x1_scores), (b, np.atleast_2d(x1_scores).shape[-1]))
    s2 = np.broadcast_to(np.atleast_2d(x2_scores), (b, np.atleast_2d(x2_scores).shape[-1]))
    logq1 = np.log(softmax(s1))
    logq2 = np.log(softmax(s2))
    rows = np.arange(b)
    return float(-(logq1[rows, x1].sum() + logq2[rows, x2].sum()) / b)


# -- counts-based loss/gradient cores ---------------------------------------


def mm_loss_grads(i, z, noise, tau, n1, n2, b):
    """Loss and exact gradients (d_i, d_z) for the marginal model.

    `i` has shape (..., K); `z`, `noise` shape (..., 2); `n1`, `n2` are the
    per-batch category counts of X1 and X2.
    """
    c = gate_weights(z, noise, tau)
    c1, c2 = c[..., 0], c[..., 1]
    q1 = softmax(c2[..., None] * i)
    q2 = softmax(c1[..., None] * i)
    loss = -((n1 * np.log(q1)).sum(-1) + (n2 * np.log(q2)).sum(-1)) / b
    r1 = q1 - n1 / b  # summed score-gradient of head 1
    r2 = q2 - n2 / b
    d_i = c2[..., None] * r1 + c1[..., None] * r2
    d_c1 = (r2 * i).sum(-1)
    d_c2 = (r1 * i).sum(-1)
    d_z1 = (d_c1 - d_c2) * c1 * c2 / tau
    d_z = np.stack([d_z1, -d_z1], axis=-1)
    return loss, d_i, d_z, c


def cm_loss_grads(w, z, noise, tau, pair_counts, b):
    """Loss and exact gradients (d_w, d_z) for the conditional model.

    `w` has shape (..., K, K); `pair_counts[..., a, b]` counts samples with
    (x1 = a, x2 = b). Both heads read columns of the shared matrix.
    """
    c = gate_weights(z, noise, tau)
    c1, c2 = c[..., 0], c[..., 1]
    wt = np.swapaxes(w, -1, -2)  # wt[..., a, j] = w[..., j, a]
    n = pair_counts
    nt = np.swapaxes(n, -1, -2)
    n1 = n.sum(-1)
    n2 = n.sum(-2)
    q2 = softmax(c1[..., None, None] * wt)  # rows: P(x2 | x1 = a)
    q1 = softmax(c2[..., None, None] * wt)  # rows: P(x1 | x2 = b)
    loss = -((n * np.log(q2)).sum((-1, -2)) + (nt * np.log(q1)).sum((-1, -2))) / b
    r2 = n1[..., :, None] * q2 - n  # head-2 score residuals, row per parent value
    r1 = n2[..., :, None] * q1 - nt
    d_wt = (c1[..., None, None] * r2 + c2[..., None, None] * r1) / b
    d_w = np.swapaxes(d_wt, -1, -2)
    d_c1 = (r2 * wt).sum((-1, -2)) / b
    d_c2 = (r1 * wt).sum((-1, -2)) / b
    d_z1 = (d_c1 - d_c2) * c1 * c2 / tau
    d_z = np.stack([d_z1, -d_z1], axis=-1)
    return loss, d_w, d_z, c


def pair_counts_from_samples(pairs, k: int) -> np.ndarray:
    """K x K count matrix with [a, b] = #(x1 = a, x2 = b)."""
    n = np.zeros((k, k))
    for p in pairs:
        n[p.x1, p.x2] += 1
    return n


def gradients(model_kind, params, gate: GateParams, noise, pairs):
    """Exact gradients of the batch loss for every learnable, incl. the gate path.

    `noise` is the fixed per-batch Gumbel pair; `pairs` the sample batch.
    Returns (loss, d_param, d_z1, d_z2).
    """
    k = params.shape[-1]
    n = pair_counts_from_samples(pairs, k)
    z = np.array([gate.z1, gate.z2])
    g = np.asarray(noise, dtype=float)
    b = len(pairs)
    if model_kind == MM:
        loss, d_p, d_z, _ = mm_loss_grads(params, z, g, gate.tau, n.sum(-1), n.sum(-2), b)
    elif model_kind == CM:
        loss, d_p, d_z, _ = cm_loss_grads(params, z, g, gate.tau, n, b)
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")
    return float(loss), d_p, float(d_z[0]), float(d_z[1])


class Adam:
    """Bias-corrected Adam over a dict of parameter arrays, updated in place."""

    def __init__(self, params: dict, lr: float = 0.1, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key, g in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            self.params[key] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def kaiming_uniform(rng: SeededRng, k: int) -> np.ndarray:
    """Uniform on +-sqrt(6 / fan_in) with fan_in = K."""
    bound = np.sqrt(6.0 / k)
    return (rng.uniform(size=(k, k)) * 2.0 - 1.0) * bound


def _segments(cfg: TrainConfig) -> list[tuple[int, bool]]:
    """(n_batches, intervene_first) blocks covering the whole run."""
    total = cfg.epochs * cfg.batches_per_epoch
    if cfg.mode == "observational":
        return [(total, False)]
    segs: list[tuple[int, bool]] = []
    if cfg.warmup_batches > 0:
        segs.append((min(cfg.warmup_batches, total), False))
    done = sum(n for n, _ in segs)
    while done < total:
        n = min(cfg.batches_per_intervention, total - done)
        segs.append((n, True))
        done += n
    return segs


def train_population(model_kind: str, cfg: TrainConfig, rngs: list[SeededRng]) -> list[RunRecord]:
    """Train independent runs in lockstep; run r consumes only rngs[r]."""
    cfg.validate()
    r = len(rngs)
    k = cfg.k
    scms: list[BivariateScm] = [make_scm(k, cfg.epsilon, rng) for rng in rngs]
    z = np.full((r, 2), 0.5)
    if model_kind == MM:
        theta = np.tile(np.full(k, 1.0 / k), (r, 1))
    elif model_kind == CM:
        theta = np.stack([kaiming_uniform(rng, k) for rng in rngs])
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")
    opt = Adam({"theta": theta, "z": z}, lr=cfg.lr)
    total = cfg.epochs * cfg.batches_per_epoch
    c1_sum = np.zeros((r, cfg.epochs))
    batch_idx = 0
    for n_batches, intervene_first in _segments(cfg):
        counts = np.empty((r, n_batches, k, k), dtype=np.int64)
        noise = np.empty((r, n_batches, 2))
        for j, (scm, rng) in enumerate(zip(scms, rngs)):
            if intervene_first:
                intervene(scm, choose_target(cfg.lam, rng), rng)
            counts[j] = sample_pair_counts(scm, cfg.batch_size, rng, size=n_batches)
            noise[j] = rng.gumbel(size=(n_batches, 2))
        for b in range(n_batches):
            n = counts[:, b].astype(float)
            if model_kind == MM:
                _, d_t, d_z, c = mm_loss_grads(
                    theta, z, noise[:, b], cfg.tau, n.sum(-1), n.sum(-2), cfg.batch_size
                )
            else:
                _, d_t, d_z, c = cm_loss_grads(theta, z, noise[:, b], cfg.tau, n, cfg.batch_size)
            opt.step({"theta": d_t, "z": d_z})
            c1_sum[:, batch_idx // cfg.batches_per_epoch] += c[:, 0]
            batch_idx += 1
    assert batch_idx == total
    traj = c1_sum / cfg.batches_per_epoch
    final = softmax(z / cfg.tau)[:, 0]  # noise-free structural belief at the end
    return [
        RunRecord(
            run_id=j,
            model=model_kind,
            epsilon=cfg.epsilon,
            lam=cfg.lam,
            mode=cfg.mode,
            seed=rngs[j].seed,
            final_c1=float(final[j]),
            c1_trajectory=traj[j].copy(),
        )
        for j in range(r)
    ]


def train_run(model_kind: str, cfg: TrainConfig, rng: SeededRng) -> RunRecord:
    """One seeded training run; identical to its slot in a population sweep."""
    return train_population(model_kind, cfg, [rng])[0]
