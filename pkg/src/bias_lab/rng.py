"""Seeded sampling primitives: uniform, Gamma, Dirichlet, Gumbel, categorical.

Everything stochastic in the system goes through :class:`SeededRng`, a thin
wrapper around a counter-based Philox generator. Counter-based state means a
(seed, stream) pair fully determines the draw sequence, independent of how
many other generators exist or in which order runs execute, so per-run
sub-streams stay reproducible under parallel sweeps.
"""

from __future__ import annotations

import numpy as np

# Uniform draws are clamped away from {0, 1} before any log transform so the
# Gumbel and boost transforms never produce +-inf.
_U_FLOOR = 1e-12


class InvalidParameterError(ValueError):
    """Raised for out-of-domain sampler parameters (e.g. non-positive Gamma shape)."""


class SeededRng:
    """Deterministic generator with independent integer-indexed sub-streams.

    One instance per run; instances are single-owner and must not be shared
    across concurrent contexts.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        mask = (1 << 64) - 1
        self._gen = np.random.Generator(
            np.random.Philox(key=[self.seed & mask, self.stream & mask])
        )

    def spawn(self, index: int) -> "SeededRng":
        """Independent sub-stream for run/chain `index` (distinct Philox key)."""
        return SeededRng(self.seed, self.stream + 1 + int(index))

    # -- primitives ---------------------------------------------------------

    def uniform(self, size=None):
        """Uniform on (0, 1), clamped to [1e-12, 1 - 1e-12]."""
        u = self._gen.uniform(size=size)
        return np.clip(u, _U_FLOOR, 1.0 - _U_FLOOR)

    def gamma(self, shape: float, size=None):
        """Gamma(shape, 1) via Marsaglia-Tsang; valid for all shape > 0.

        Shapes below 1 use the boost transform: draw Gamma(shape + 1) and
        multiply by U^(1/shape), exact for the whole range without rejection
        pathologies.
        """
        if not shape > 0:
            raise InvalidParameterError(f"gamma shape must be > 0, got {shape}")
        scalar = size is None
        n = 1 if scalar else int(np.prod(size))
        if shape < 1.0:
            base = self._gamma_mt(shape + 1.0, n)
            u = self.uniform(size=n)
            out = base * u ** (1.0 / shape)
        else:
            out = self._gamma_mt(shape, n)
        if scalar:
            return float(out[0])
        return out.reshape(size)

    def _gamma_mt(self, shape: float, n: int) -> np.ndarray:
        """Marsaglia-Tsang squeeze-rejection for shape >= 1, vectorized."""
        d = shape - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(n)
        todo = np.arange(n)
        while todo.size:
            x = self._gen.standard_normal(todo.size)
            v = (1.0 + c * x) ** 3
            u = self.uniform(size=todo.size)
            ok = v > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                accept = ok & (
                    np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0))
                )
            out[todo[accept]] = d * v[accept]
            todo = todo[~accept]
        return out

    def dirichlet(self, alpha: np.ndarray, size=None) -> np.ndarray:
        """Dirichlet(alpha) by normalized independent Gamma draws.

        `size=None` gives one length-K vector; an int or tuple prepends draw
        axes. Requires all concentrations strictly positive.
        """
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim != 1 or alpha.size < 1:
            raise InvalidParameterError("alpha must be a 1-D vector")
        if not np.all(alpha > 0):
            raise InvalidParameterError("all Dirichlet concentrations must be > 0")
        k = alpha.size
        shape = (k,) if size is None else (tuple(np.atleast_1d(size)) + (k,))
        if np.all(alpha == alpha[0]):
            g = self.gamma(float(alpha[0]), size=shape)
        else:
            cols = [self.gamma(float(a), size=shape[:-1] or (1,)) for a in alpha]
            g = np.stack(cols, axis=-1)
            if size is None:
                g = g[0]
        g = np.maximum(g, 1e-300)
        return g / g.sum(axis=-1, keepdims=True)

    def categorical(self, p: np.ndarray, size=None):
        """Index draw(s) from a categorical distribution via CDF inversion."""
        p = np.asarray(p, dtype=float)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        u = self._gen.uniform(size=size)
        idx = np.searchsorted(cdf, u, side="right")
        idx = np.minimum(idx, p.size - 1)
        if size is None:
            return int(idx)
        return idx

    def gumbel(self, size=None):
        """Standard Gumbel(0, 1) draw(s): -log(-log(U)) with clamped U."""
        return gumbel_from_uniform(self.uniform(size=size))

    def multinomial(self, n: int, p: np.ndarray, size=None) -> np.ndarray:
        """Category counts for `n` categorical draws (batch sufficient statistics)."""
        return self._gen.multinomial(n, np.asarray(p, dtype=float), size=size)


def gumbel_from_uniform(u):
    """Deterministic Gumbel transform, exposed for analytic fixed-point checks."""
    return -np.log(-np.log(u))
