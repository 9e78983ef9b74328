"""Bivariate categorical SCM with Dirichlet priors and soft interventions.

The generator is a two-state machine. In the Related state, X2 is ancestrally
sampled through the fixed conditional table; intervening on X2 pins it to a
fresh independent marginal (IndependentX2). A later intervention on X1
releases that pin and restores the conditional, which is sampled once at
construction and never mutated.

epsilon controls how far the conditional's Dirichlet prior deviates from the
equivalence point: row concentrations are (1 / (epsilon * K)) * 1_K, so
epsilon = 1 matches the marginal prior's equivalent sample size and the two
variables are entropy-symmetric on average.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .metrics import marginalize, validate_conditional_table, validate_prob_vector
from .rng import InvalidParameterError, SeededRng


class DependencyState(enum.Enum):
    RELATED = "related"
    INDEPENDENT_X2 = "independent_x2"


class InterventionCase(enum.IntEnum):
    """Target x prior-state classification of a soft intervention."""

    CASE1 = 1  # target X1, was Related
    CASE2 = 2  # target X1, was IndependentX2 (conditional restored)
    CASE3 = 3  # target X2, was Related
    CASE4 = 4  # target X2, was IndependentX2


X1 = "X1"
X2 = "X2"

_BAYES_FLOOR = 1e-12


@dataclass
class SamplePair:
    x1: int
    x2: int


@dataclass
class BivariateScm:
    k: int
    epsilon: float
    p1: np.ndarray
    cond: np.ndarray  # row x1 = P(X2 | X1 = x1); never mutated after construction
    state: DependencyState = DependencyState.RELATED
    fixed_p2: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        validate_prob_vector(self.p1)
        validate_conditional_table(self.cond)
        if (self.state is DependencyState.INDEPENDENT_X2) != (self.fixed_p2 is not None):
            raise ValueError("fixed_p2 must be present iff state is IndependentX2")


def conditional_alpha(k: int, epsilon: float) -> np.ndarray:
    """Row concentration vector (1 / (epsilon * K)) * 1_K for the conditional prior."""
    return np.full(k, 1.0 / (epsilon * k))


def make_scm(k: int, epsilon: float, rng: SeededRng) -> BivariateScm:
    """Fresh generator in the Related state.

    p1 ~ Dirichlet(1_K); each conditional row independently from the
    epsilon-scaled prior.
    """
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}")
    p1 = rng.dirichlet(np.ones(k))
    cond = rng.dirichlet(conditional_alpha(k, epsilon), size=k)
    return BivariateScm(k=k, epsilon=float(epsilon), p1=p1, cond=cond, seed=rng.seed)


def choose_target(lam: float, rng: SeededRng) -> str:
    """X2 with probability lam, X1 otherwise, independently per call."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError(f"lambda must lie in [0, 1], got {lam}")
    return X2 if rng.uniform() < lam else X1


def intervene(scm: BivariateScm, target: str, rng: SeededRng) -> InterventionCase:
    """Apply a soft intervention and return its case classification.

    Targeting X1 resamples p1 and, if X2 was pinned, restores the conditional.
    Targeting X2 pins X2 to a fresh marginal drawn from the same prior as p1.
    The conditional table itself is never touched.
    """
    was_related = scm.state is DependencyState.RELATED
    if target == X1:
        scm.p1 = rng.dirichlet(np.ones(scm.k))
        case = InterventionCase.CASE1 if was_related else InterventionCase.CASE2
        scm.fixed_p2 = None
        scm.state = DependencyState.RELATED
    elif target == X2:
        scm.fixed_p2 = rng.dirichlet(np.ones(scm.k))
        case = InterventionCase.CASE3 if was_related else InterventionCase.CASE4
        scm.state = DependencyState.INDEPENDENT_X2
    else:
        raise InvalidParameterError(f"unknown intervention target {target!r}")
    return case


def current_marginals(scm: BivariateScm) -> tuple[np.ndarray, np.ndarray]:
    """(P1, P2): P2 marginalized through the conditional when Related, else the pin."""
    if scm.state is DependencyState.RELATED:
        return scm.p1, marginalize(scm.p1, scm.cond)
    return scm.p1, scm.fixed_p2


def current_conditionals(scm: BivariateScm) -> tuple[np.ndarray, np.ndarray]:
    """(P(X2|X1) table, P(X1|X2) table) for the current state.

    The reverse table comes from Bayes on the current joint, with
    denominators floored at 1e-12. Under IndependentX2 both tables have
    constant rows.
    """
    k = scm.k
    if scm.state is DependencyState.RELATED:
        forward = scm.cond
        joint = scm.p1[:, None] * scm.cond  # joint[x1, x2]
        p2 = joint.sum(axis=0)
        reverse = (joint / np.maximum(p2, _BAYES_FLOOR)[None, :]).T
        reverse = reverse / reverse.sum(axis=1, keepdims=True)
    else:
        forward = np.tile(scm.fixed_p2, (k, 1))
        reverse = np.tile(scm.p1, (k, 1))
    return forward, reverse


def sample_batch(scm: BivariateScm, b: int, rng: SeededRng) -> list[SamplePair]:
    """b ancestral (Related) or independent (IndependentX2) sample pairs."""
    if b < 1:
        raise InvalidParameterError(f"batch size must be >= 1, got {b}")
    x1 = rng.categorical(scm.p1, size=b)
    if scm.state is DependencyState.RELATED:
        u = rng.uniform(size=b)
        cdf = np.cumsum(scm.cond, axis=1)
        cdf[:, -1] = 1.0
        x2 = (u[:, None] > cdf[x1]).sum(axis=1)
    else:
        x2 = rng.categorical(scm.fixed_p2, size=b)
    return [SamplePair(int(a), int(c)) for a, c in zip(x1, x2)]


def joint_distribution(scm: BivariateScm) -> np.ndarray:
    """Current joint P(x1, x2) as a K x K matrix."""
    if scm.state is DependencyState.RELATED:
        return scm.p1[:, None] * scm.cond
    return scm.p1[:, None] * scm.fixed_p2[None, :]


def observational_joint(scm: BivariateScm) -> np.ndarray:
    """Joint of the underlying related mechanism (current p1 through cond),
    ignoring any X2 pin."""
    return scm.p1[:, None] * scm.cond


def sample_pair_counts(scm: BivariateScm, b: int, rng: SeededRng, size=None) -> np.ndarray:
    """K x K pair-count matrices for batches of size b.

    Sufficient statistics of `sample_batch` for the tabular models: counts
    are drawn multinomially from the current joint, which is distributionally
    identical to binning b sampled pairs.
    """
    joint = joint_distribution(scm)
    k = scm.k
    flat = joint.reshape(-1)
    counts = rng.multinomial(b, flat / flat.sum(), size=size)
    if size is None:
        return counts.reshape(k, k)
    return counts.reshape(tuple(np.atleast_1d(size)) + (k, k))


# -- snapshot serialization -------------------------------------------------

_FMT = "%.17g"


def _vec(v: np.ndarray) -> list[str]:
    return [_FMT % x for x in v]


def dump_scm(scm: BivariateScm) -> str:
    """Human-readable snapshot with fixed field order and 17-significant-digit floats."""
    doc = {
        "k": scm.k,
        "epsilon": _FMT % scm.epsilon,
        "seed": scm.seed,
        "state": scm.state.value,
        "p1": _vec(scm.p1),
        "cond": [_vec(row) for row in scm.cond],
        "fixed_p2": _vec(scm.fixed_p2) if scm.fixed_p2 is not None else None,
    }
    return json.dumps(doc, indent=2)


def load_scm(text: str) -> BivariateScm:
    doc = json.loads(text)
    fixed = doc["fixed_p2"]
    return BivariateScm(
        k=int(doc["k"]),
        epsilon=float(doc["epsilon"]),
        p1=np.array([float(x) for x in doc["p1"]]),
        cond=np.array([[float(x) for x in row] for row in doc["cond"]]),
        state=DependencyState(doc["state"]),
        fixed_p2=np.array([float(x) for x in fixed]) if fixed is not None else None,
        seed=doc["seed"],
    )
