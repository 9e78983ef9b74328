"""Bivariate edge-existence / edge-orientation learner with likelihood-probing
gradients.

Edge beliefs sigma(gamma12), sigma(gamma21) and the orientation belief
sigma(theta12) (theta21 = -theta12 by antisymmetry) are fitted from batches
tagged with their intervention target. Both structural gradients compare
likelihoods of the SAME variable with and without the candidate edge, and the
contribution of the intervened-upon variable is suppressed, which is what
makes the method insensitive to marginal-entropy asymmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .meta_transfer import sigmoid
from .models import Adam, softmax
from .rng import SeededRng
from .scm import (
    BivariateScm,
    X1,
    X2,
    choose_target,
    intervene,
    make_scm,
    observational_joint,
    sample_pair_counts,
)


def _dsigmoid(x: float) -> float:
    s = sigmoid(x)
    return float(s * (1.0 - s))


@dataclass
class EncoParams:
    gamma12: float = 0.0
    gamma21: float = 0.0
    theta12: float = 0.0
    lambda_sparse: float = 0.002
    lam: float = 0.0  # proportion of interventions on X2: p(I_X2) = lam

    @property
    def p_i1(self) -> float:
        return 1.0 - self.lam

    @property
    def p_i2(self) -> float:
        return self.lam


@dataclass
class EncoDistNets:
    """Per-variable marginal and conditional (given the other variable) tables."""

    marg1: np.ndarray  # logits for X1
    marg2: np.ndarray  # logits for X2
    cond2_given_1: np.ndarray  # row x1 -> logits over X2
    cond1_given_2: np.ndarray  # row x2 -> logits over X1

    @classmethod
    def fresh(cls, k: int) -> "EncoDistNets":
        return cls(np.zeros(k), np.zeros(k), np.zeros((k, k)), np.zeros((k, k)))


def nll_terms(nets: EncoDistNets, counts: np.ndarray) -> dict[str, float]:
    """Batch-mean negative log-likelihoods of each variable, with/without its edge.

    Keys: cond2 / marg2 are the NLLs of X2 with and without the edge X1->X2;
    cond1 / marg1 likewise for X1 and the edge X2->X1.
    """
    b = counts.sum()
    n1 = counts.sum(axis=1)
    n2 = counts.sum(axis=0)
    lm1 = np.log(softmax(nets.marg1))
    lm2 = np.log(softmax(nets.marg2))
    lc21 = np.log(softmax(nets.cond2_given_1, axis=1))
    lc12 = np.log(softmax(nets.cond1_given_2, axis=1))
    return {
        "marg1": float(-(n1 * lm1).sum() / b),
        "marg2": float(-(n2 * lm2).sum() / b),
        "cond2": float(-(counts * lc21).sum() / b),
        "cond1": float(-(counts.T * lc12).sum() / b),
    }


def distribution_fit_stage(
    nets: EncoDistNets,
    scm: BivariateScm,
    n_batches: int,
    batch_size: int,
    rng: SeededRng,
    opt: Adam | None = None,
) -> EncoDistNets:
    """Fit all four tables to sampled batches of the current related mechanism.

    Observational batches are drawn from the underlying mechanism (current p1
    through the invariant conditional), ignoring any active X2 pin.
    """
    if opt is None:
        opt = Adam(
            {
                "m1": nets.marg1,
                "m2": nets.marg2,
                "c21": nets.cond2_given_1,
                "c12": nets.cond1_given_2,
            },
            lr=0.1,
        )
    joint = observational_joint(scm)
    flat = joint.reshape(-1) / joint.sum()
    for _ in range(n_batches):
        counts = rng.multinomial(batch_size, flat).reshape(scm.k, scm.k).astype(float)
        b = counts.sum()
        n1 = counts.sum(axis=1)
        n2 = counts.sum(axis=0)
        qm1 = softmax(nets.marg1)
        qm2 = softmax(nets.marg2)
        qc21 = softmax(nets.cond2_given_1, axis=1)
        qc12 = softmax(nets.cond1_given_2, axis=1)
        opt.step(
            {
                "m1": qm1 - n1 / b,
                "m2": qm2 - n2 / b,
                "c21": (n1[:, None] * qc21 - counts) / b,
                "c12": (n2[:, None] * qc12 - counts.T) / b,
            }
        )
    return nets


def gamma_gradient_from_terms(params: EncoParams, terms: dict, intervened: str) -> tuple[float, float]:
    g12 = 0.0
    g21 = 0.0
    if intervened != X2:
        diff2 = terms["cond2"] - terms["marg2"] + params.lambda_sparse
        g12 = _dsigmoid(params.gamma12) * sigmoid(params.theta12) * diff2
    if intervened != X1:
        diff1 = terms["cond1"] - terms["marg1"] + params.lambda_sparse
        g21 = _dsigmoid(params.gamma21) * sigmoid(-params.theta12) * diff1
    return g12, g21


def gamma_gradient(
    nets: EncoDistNets, params: EncoParams, counts: np.ndarray, intervened: str
) -> tuple[float, float]:
    """(d/d gamma12, d/d gamma21) for one tagged batch.

    Each edge's gradient is sigma'(gamma) * sigma(orientation) times the mean
    likelihood difference of the CHILD variable with vs. without the edge plus
    the sparsity penalty; it is zeroed when the child was intervened upon.
    """
    return gamma_gradient_from_terms(params, nll_terms(nets, counts), intervened)


def theta_gradient_from_terms(params: EncoParams, terms: dict, intervened: str) -> float:
    ds = _dsigmoid(params.theta12)
    if intervened == X1:
        return ds * params.p_i1 * sigmoid(params.gamma12) * (terms["cond2"] - terms["marg2"])
    return -ds * params.p_i2 * sigmoid(params.gamma21) * (terms["cond1"] - terms["marg1"])


def theta_gradient(
    nets: EncoDistNets, params: EncoParams, counts: np.ndarray, intervened: str
) -> float:
    """d/d theta12 for one tagged batch.

    Batches intervened on X1 contribute the direct causal term through X2's
    likelihood difference; batches intervened on X2 contribute the invariance
    term through X1's, with opposite sign.
    """
    return theta_gradient_from_terms(params, nll_terms(nets, counts), intervened)


@dataclass
class EncoConfig:
    k: int = 5
    epsilon: float = 1.0
    lam: float = 0.0
    stages: int = 100
    obs_batches_per_stage: int = 20
    int_batches_per_stage: int = 20
    batch_size: int = 128
    struct_lr: float = 0.05
    lambda_sparse: float = 0.002


@dataclass
class StageRecord:
    stage: int
    sigma_gamma12: float
    sigma_gamma21: float
    sigma_theta12: float


def run_enco(cfg: EncoConfig, rng: SeededRng) -> list[StageRecord]:
    """Alternate distribution fitting and structural updates; record beliefs."""
    scm = make_scm(cfg.k, cfg.epsilon, rng)
    nets = EncoDistNets.fresh(cfg.k)
    params = EncoParams(lambda_sparse=cfg.lambda_sparse, lam=cfg.lam)
    opt = Adam(
        {
            "m1": nets.marg1,
            "m2": nets.marg2,
            "c21": nets.cond2_given_1,
            "c12": nets.cond1_given_2,
        },
        lr=0.1,
    )
    records: list[StageRecord] = []
    for stage in range(cfg.stages):
        distribution_fit_stage(
            nets, scm, cfg.obs_batches_per_stage, cfg.batch_size, rng, opt=opt
        )
        for _ in range(cfg.int_batches_per_stage):
            target = choose_target(cfg.lam, rng)
            intervene(scm, target, rng)
            counts = sample_pair_counts(scm, cfg.batch_size, rng).astype(float)
            g12, g21 = gamma_gradient(nets, params, counts, target)
            gt = theta_gradient(nets, params, counts, target)
            params.gamma12 -= cfg.struct_lr * g12
            params.gamma21 -= cfg.struct_lr * g21
            params.theta12 -= cfg.struct_lr * gt
        records.append(
            StageRecord(
                stage,
                float(sigmoid(params.gamma12)),
                float(sigmoid(params.gamma21)),
                float(sigmoid(params.theta12)),
            )
        )
    return records
