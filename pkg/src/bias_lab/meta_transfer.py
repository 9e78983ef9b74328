"""Bivariate tabular reproduction of the regret-driven direction learner.

Two factorization models (X1->X2 and X2->X1) are pretrained to the same
observational joint, then repeatedly adapted online to post-intervention
distributions. The structural logit gamma is updated from the accumulated
adaptation likelihoods of the two models via the closed-form regret gradient;
model parameters are restored to the pretrained point after every episode, so
adaptation speed from a common start is the only signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .models import Adam, softmax
from .rng import SeededRng
from .scm import (
    BivariateScm,
    choose_target,
    intervene,
    make_scm,
    observational_joint,
)

X1_TO_X2 = "x1->x2"
X2_TO_X1 = "x2->x1"


def sigmoid(x):
    """Numerically stable logistic; no overflow for large |x|."""
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


@dataclass
class FactorizationModel:
    direction: str
    marginal_logits: np.ndarray  # parent variable, length K
    conditional_logits: np.ndarray  # row = parent value -> child logits

    @classmethod
    def fresh(cls, direction: str, k: int) -> "FactorizationModel":
        return cls(direction, np.zeros(k), np.zeros((k, k)))

    def oriented_counts(self, pair_counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(parent category counts, parent-by-child count table)."""
        if self.direction == X1_TO_X2:
            table = pair_counts
        else:
            table = pair_counts.T
        return table.sum(axis=1), table

    def oriented_joint(self, joint: np.ndarray) -> np.ndarray:
        """Joint as a parent-by-child table."""
        return joint if self.direction == X1_TO_X2 else joint.T

    def log_likelihood(self, pair_counts: np.ndarray) -> float:
        """Total log-likelihood of the counted samples under current parameters."""
        parent, table = self.oriented_counts(pair_counts)
        lm = np.log(softmax(self.marginal_logits))
        lc = np.log(softmax(self.conditional_logits, axis=1))
        return float((parent * lm).sum() + (table * lc).sum())

    def nll_per_sample(self, pair_counts: np.ndarray) -> float:
        return -self.log_likelihood(pair_counts) / pair_counts.sum()

    def expected_nll(self, joint: np.ndarray) -> float:
        """Exact per-sample NLL under a known joint distribution."""
        table = self.oriented_joint(joint)
        parent = table.sum(axis=1)
        lm = np.log(softmax(self.marginal_logits))
        lc = np.log(softmax(self.conditional_logits, axis=1))
        return float(-(parent * lm).sum() - (table * lc).sum())

    def grad_step_counts(self, pair_counts: np.ndarray, lr: float) -> None:
        """One plain gradient-descent step on the mean NLL of a counted batch."""
        parent, table = self.oriented_counts(pair_counts)
        b = pair_counts.sum()
        qm = softmax(self.marginal_logits)
        qc = softmax(self.conditional_logits, axis=1)
        self.marginal_logits -= lr * (qm - parent / b)
        self.conditional_logits -= lr * (parent[:, None] * qc - table) / b

    def expected_grads(self, joint: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        table = self.oriented_joint(joint)
        parent = table.sum(axis=1)
        qm = softmax(self.marginal_logits)
        qc = softmax(self.conditional_logits, axis=1)
        return qm - parent, parent[:, None] * qc - table

    def snapshot(self) -> tuple[np.ndarray, np.ndarray]:
        return self.marginal_logits.copy(), self.conditional_logits.copy()

    def restore(self, snap: tuple[np.ndarray, np.ndarray]) -> None:
        self.marginal_logits = snap[0].copy()
        self.conditional_logits = snap[1].copy()


@dataclass
class MetaParams:
    gamma: float = 0.0
    meta_lr: float = 0.1
    adapt_lr: float = 0.1
    adapt_steps: int = 10

    def validate(self) -> "MetaParams":
        if not (self.meta_lr > 0 and self.adapt_lr > 0 and self.adapt_steps >= 1):
            raise ValueError("learning rates must be > 0 and adapt_steps >= 1")
        return self


@dataclass
class MetaConfig:
    k: int = 5
    epsilon: float = 1.0
    lam: float = 0.0
    episodes: int = 300
    batch_size: int = 128
    pretrain_steps: int = 6000
    pretrain_tol: float = 1e-5
    meta: MetaParams = field(default_factory=MetaParams)


@dataclass
class EpisodeRecord:
    episode: int
    sigma_gamma: float
    cum_loglik_diff: float


def pretrain(
    models: tuple[FactorizationModel, FactorizationModel],
    scm: BivariateScm,
    n_steps: int,
    tol: float = 1e-5,
) -> bool:
    """Fit both factorizations to the exact observational joint.

    Full-distribution gradient steps with Adam; converged when each model's
    expected NLL is within `tol` nats of the joint entropy (the attainable
    optimum for both factorizations). Returns the convergence flag.
    """
    joint = observational_joint(scm)
    nz = joint > 0
    h_joint = float(-(joint[nz] * np.log(joint[nz])).sum())
    opts = [
        Adam({"m": m.marginal_logits, "c": m.conditional_logits}, lr=0.1) for m in models
    ]
    for _ in range(n_steps):
        gap = 0.0
        for m, opt in zip(models, opts):
            gm, gc = m.expected_grads(joint)
            opt.step({"m": gm, "c": gc})
            gap = max(gap, m.expected_nll(joint) - h_joint)
        if gap < tol:
            return True
    return False


def regret_gradient(gamma: float, log_l12: float, log_l21: float) -> float:
    """Closed-form d regret / d gamma from the accumulated log-likelihoods."""
    return float(sigmoid(gamma) - sigmoid(gamma + log_l12 - log_l21))


def regret_value(gamma: float, log_l12: float, log_l21: float) -> float:
    """-log[sigma(g) L12 + (1 - sigma(g)) L21], evaluated in log space."""
    a = np.log(sigmoid(gamma)) + log_l12
    b = np.log(sigmoid(-gamma)) + log_l21
    hi = max(a, b)
    return float(-(hi + np.log(np.exp(a - hi) + np.exp(b - hi))))


def episode(
    models: tuple[FactorizationModel, FactorizationModel],
    meta: MetaParams,
    scm: BivariateScm,
    batch_size: int,
    rng: SeededRng,
) -> tuple[float, float, float]:
    """Adapt both models online to the current (post-intervention) distribution.

    Accumulates each model's log-likelihood of the fresh batches before every
    adaptation step, updates gamma by one descent step on the regret, and
    restores the pretrained parameters. Returns (logL12, logL21, new gamma).
    """
    from .scm import sample_pair_counts

    snaps = [m.snapshot() for m in models]
    log_l = [0.0, 0.0]
    for _ in range(meta.adapt_steps):
        counts = sample_pair_counts(scm, batch_size, rng)
        for idx, m in enumerate(models):
            log_l[idx] += m.log_likelihood(counts)
            m.grad_step_counts(counts, meta.adapt_lr)
    meta.gamma -= meta.meta_lr * regret_gradient(meta.gamma, log_l[0], log_l[1])
    for m, snap in zip(models, snaps):
        m.restore(snap)
    return log_l[0], log_l[1], meta.gamma


def run_meta(cfg: MetaConfig, rng: SeededRng) -> tuple[list[EpisodeRecord], bool]:
    """Pretrain once, then intervene / adapt / update gamma per episode.

    The config's MetaParams are copied so repeated runs from one config start
    from the same gamma.
    """
    meta = replace(cfg.meta.validate())
    scm = make_scm(cfg.k, cfg.epsilon, rng)
    models = (
        FactorizationModel.fresh(X1_TO_X2, cfg.k),
        FactorizationModel.fresh(X2_TO_X1, cfg.k),
    )
    converged = pretrain(models, scm, cfg.pretrain_steps, cfg.pretrain_tol)
    records: list[EpisodeRecord] = []
    for ep in range(cfg.episodes):
        intervene(scm, choose_target(cfg.lam, rng), rng)
        l12, l21, gamma = episode(models, meta, scm, cfg.batch_size, rng)
        records.append(EpisodeRecord(ep, float(sigmoid(gamma)), l12 - l21))
    return records, converged
