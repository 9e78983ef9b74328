"""Finite-difference gradient verification shared by tests and `verify`.

Every analytic gradient in the package is checked coordinate-wise against a
central difference of the corresponding scalar loss with a fixed step.
"""

from __future__ import annotations

import numpy as np

from .enco import EncoDistNets, EncoParams, gamma_gradient_from_terms, nll_terms, theta_gradient_from_terms
from .meta_transfer import regret_gradient, regret_value, sigmoid
from .models import CM, MM, cm_loss_grads, mm_loss_grads
from .rng import SeededRng
from .scm import X1, X2

FD_STEP = 1e-5


def central_diff(f, x: float, step: float = FD_STEP) -> float:
    return (f(x + step) - f(x - step)) / (2.0 * step)


def central_diff_array(f, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    flat = x.reshape(-1)
    ofl = out.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + step
        hi = f(x)
        flat[idx] = orig - step
        lo = f(x)
        flat[idx] = orig
        ofl[idx] = (hi - lo) / (2.0 * step)
    return out


def rel_err(analytic, numeric) -> float:
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
    return float(np.max(np.abs(a - n) / denom))


def _random_counts(rng: SeededRng, k: int, b: int) -> np.ndarray:
    p = rng.dirichlet(np.ones(k * k))
    return rng.multinomial(b, p).reshape(k, k).astype(float)


def check_toy_gradients(kind: str, rng: SeededRng, k: int = 4, b: int = 32) -> float:
    """Max coordinate-wise relative error between analytic and FD gradients."""
    counts = _random_counts(rng, k, b)
    z = np.array([rng.uniform() * 2 - 1, rng.uniform() * 2 - 1])
    g = rng.gumbel(size=2)
    tau = 2.0
    if kind == MM:
        theta = np.asarray(rng.uniform(size=k) * 2 - 1)
        n1, n2 = counts.sum(-1), counts.sum(-2)

        def loss_t(t):
            return float(mm_loss_grads(t, z, g, tau, n1, n2, b)[0])

        def loss_z(zz):
            return float(mm_loss_grads(theta, zz, g, tau, n1, n2, b)[0])

        _, d_t, d_z, _ = mm_loss_grads(theta, z, g, tau, n1, n2, b)
    elif kind == CM:
        theta = np.asarray(rng.uniform(size=(k, k)) * 2 - 1)

        def loss_t(t):
            return float(cm_loss_grads(t, z, g, tau, counts, b)[0])

        def loss_z(zz):
            return float(cm_loss_grads(theta, zz, g, tau, counts, b)[0])

        _, d_t, d_z, _ = cm_loss_grads(theta, z, g, tau, counts, b)
    else:
        raise ValueError(kind)
    err_t = rel_err(d_t, central_diff_array(loss_t, theta))
    err_z = rel_err(d_z, central_diff_array(loss_z, z))
    return max(err_t, err_z)


def check_meta_gamma_gradient(rng: SeededRng) -> float:
    """Closed-form regret gradient vs. FD of the log-space regret value."""
    gamma = rng.uniform() * 4 - 2
    log_l12 = rng.uniform() * 6 - 3
    log_l21 = rng.uniform() * 6 - 3
    analytic = regret_gradient(gamma, log_l12, log_l21)
    numeric = central_diff(lambda gm: regret_value(gm, log_l12, log_l21), gamma)
    return rel_err(analytic, numeric)


def check_enco_gradients(rng: SeededRng, k: int = 4, b: int = 64) -> float:
    """FD of the per-parameter surrogate losses vs. the printed gradient forms."""
    counts = _random_counts(rng, k, b)
    nets = EncoDistNets(
        np.asarray(rng.uniform(size=k) - 0.5),
        np.asarray(rng.uniform(size=k) - 0.5),
        np.asarray(rng.uniform(size=(k, k)) - 0.5),
        np.asarray(rng.uniform(size=(k, k)) - 0.5),
    )
    params = EncoParams(
        gamma12=rng.uniform() * 2 - 1,
        gamma21=rng.uniform() * 2 - 1,
        theta12=rng.uniform() * 2 - 1,
        lam=rng.uniform(),
    )
    terms = nll_terms(nets, counts)
    diff2 = terms["cond2"] - terms["marg2"] + params.lambda_sparse
    diff1 = terms["cond1"] - terms["marg1"] + params.lambda_sparse
    errs = []

    g12, g21 = gamma_gradient_from_terms(params, terms, X1)

    def surrogate_g12(gm):
        return sigmoid(gm) * sigmoid(params.theta12) * diff2

    errs.append(rel_err(g12, central_diff(surrogate_g12, params.gamma12)))

    g12b, g21b = gamma_gradient_from_terms(params, terms, X2)

    def surrogate_g21(gm):
        return sigmoid(gm) * sigmoid(-params.theta12) * diff1

    errs.append(rel_err(g21b, central_diff(surrogate_g21, params.gamma21)))

    e1 = terms["cond2"] - terms["marg2"]
    e2 = terms["cond1"] - terms["marg1"]

    def surrogate_theta(th):
        return (
            sigmoid(th) * params.p_i1 * sigmoid(params.gamma12) * e1
            + sigmoid(-th) * params.p_i2 * sigmoid(params.gamma21) * e2
        )

    analytic_theta = theta_gradient_from_terms(params, terms, X1) + theta_gradient_from_terms(
        params, terms, X2
    )
    errs.append(rel_err(analytic_theta, central_diff(surrogate_theta, params.theta12)))
    return max(errs)


def max_gradient_error(rng: SeededRng, instances: int = 100) -> float:
    worst = 0.0
    for i in range(instances):
        worst = max(
            worst,
            check_toy_gradients(MM, rng.spawn(4 * i)),
            check_toy_gradients(CM, rng.spawn(4 * i + 1)),
            check_meta_gamma_gradient(rng.spawn(4 * i + 2)),
            check_enco_gradients(rng.spawn(4 * i + 3)),
        )
    return worst


def enco_shift_invariance_error(rng: SeededRng, k: int = 5, shift: float = 0.7) -> float:
    """Gamma-gradient change when a constant is added to one variable's
    log-likelihood terms; must cancel exactly in the difference."""
    counts = _random_counts(rng, k, 128)
    nets = EncoDistNets.fresh(k)
    params = EncoParams(gamma12=0.3, gamma21=-0.2, theta12=0.4, lam=0.3)
    terms = nll_terms(nets, counts)
    shifted = dict(terms)
    shifted["cond2"] += shift
    shifted["marg2"] += shift
    base = gamma_gradient_from_terms(params, terms, X1)
    moved = gamma_gradient_from_terms(params, shifted, X1)
    return max(abs(base[0] - moved[0]), abs(base[1] - moved[1]))
