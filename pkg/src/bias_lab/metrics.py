"""Information measures over categorical distributions, in nats.

Conventions: 0 * log 0 = 0, and denominators inside KL ratios are floored at
1e-12. Dirichlet draws can be arbitrarily small and interventions never assign
exact zeros, so the floor is a pure numerical guard, not a modelling choice.
"""

from __future__ import annotations

import numpy as np

PROB_ATOL = 1e-12
_FLOOR = 1e-12


def validate_prob_vector(p: np.ndarray) -> np.ndarray:
    """Check entries in [0, 1] and sum == 1 within 1e-12; returns the array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError("probability vector must be 1-D")
    if np.any(p < -PROB_ATOL) or np.any(p > 1 + PROB_ATOL):
        raise ValueError("probability entries must lie in [0, 1]")
    if abs(p.sum() - 1.0) > PROB_ATOL * max(1, p.size):
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def validate_conditional_table(table: np.ndarray) -> np.ndarray:
    """Check a square table whose rows are valid probability vectors."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise ValueError("conditional table must be square (K rows of length K)")
    for row in table:
        validate_prob_vector(row)
    return table


def entropy(p: np.ndarray) -> float:
    """H(p) = -sum p_i log p_i, in [0, log K]."""
    p = np.asarray(p, dtype=float)
    nz = p > 0
    return float(-(p[nz] * np.log(p[nz])).sum())


def entropy_rows(p: np.ndarray) -> np.ndarray:
    """Entropy along the last axis, vectorized for Monte Carlo estimates."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.maximum(p, _FLOOR)), 0.0)
    return -terms.sum(axis=-1)


def conditional_entropy(weights: np.ndarray, cond: np.ndarray) -> float:
    """H(X_i | X_j) = -sum_j P(x_j) sum_i P(x_i|x_j) log P(x_i|x_j)."""
    weights = np.asarray(weights, dtype=float)
    cond = np.asarray(cond, dtype=float)
    return float((weights * entropy_rows(cond)).sum())


def kl(p_new: np.ndarray, p_old: np.ndarray) -> float:
    """D_KL(p_new || p_old), with p_old floored at 1e-12."""
    p_new = np.asarray(p_new, dtype=float)
    p_old = np.maximum(np.asarray(p_old, dtype=float), _FLOOR)
    nz = p_new > 0
    return float((p_new[nz] * (np.log(p_new[nz]) - np.log(p_old[nz]))).sum())


def conditional_kl(weights_new: np.ndarray, table_new: np.ndarray, table_old: np.ndarray) -> float:
    """Conditional KL weighted by the NEW joint.

    sum_{x_i, x_j} P'(x_i, x_j) log [P'(x_i|x_j) / P(x_i|x_j)] with the joint
    factored as P'(x_j) * P'(x_i|x_j); `weights_new` is P'(x_j) over rows.
    """
    weights_new = np.asarray(weights_new, dtype=float)
    table_new = np.asarray(table_new, dtype=float)
    table_old = np.maximum(np.asarray(table_old, dtype=float), _FLOOR)
    nz = table_new > 0
    ratio = np.zeros_like(table_new)
    ratio[nz] = np.log(table_new[nz]) - np.log(table_old[nz])
    return float((weights_new[:, None] * table_new * ratio).sum())


def marginalize(p1: np.ndarray, cond: np.ndarray) -> np.ndarray:
    """P(X2)[x2] = sum_{x1} P(x1) * cond[x1][x2]."""
    return np.asarray(p1, dtype=float) @ np.asarray(cond, dtype=float)


def ce_shift(p_new: np.ndarray, p_old: np.ndarray) -> float:
    """Per-variable cross-entropy term H(p_new) + D_KL(p_new || p_old).

    Pairwise differences of this quantity give the cross-entropy variant of
    the shift asymmetry.
    """
    return entropy(p_new) + kl(p_new, p_old)
