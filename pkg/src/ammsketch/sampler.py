"""Sampling distributions over column indices and the outer-product estimator.

Indices are 0-based throughout. A distribution's *support* is the set of
indices with ``p_i > 0``; only those may be sampled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, IndexOutOfSupport, OutOfRange, ZeroMatrix
from .matcore import PairedMatrices, as_matrix, spectral_norm, spectral_norms


class SamplingScheme(str, enum.Enum):
    PROPOSED = "proposed"
    DKM = "dkm"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value) -> "SamplingScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise OutOfRange(f"unknown scheme {value!r}; expected one of {names}") from None


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    """Probabilities ``p`` over ``n`` column indices plus their cumulative table.

    The constructor does not check the invariants, so that a corrupted
    distribution (e.g. one read from disk) can still be passed to the
    verifiers; ``build_distribution`` is the normal way to get one.
    """

    probabilities: np.ndarray
    scheme: SamplingScheme | None = None

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=np.float64).ravel()
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)
        cum = np.cumsum(p)
        support = np.flatnonzero(p > 0)
        if support.size and abs(cum[-1] - 1.0) <= 1e-12:
            # absorb rounding so the inverse-CDF lookup never falls off the end
            cum[support[-1]:] = 1.0
        cum.flags.writeable = False
        object.__setattr__(self, "cumulative", cum)

    @property
    def n(self) -> int:
        return self.probabilities.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probabilities > 0)


@dataclass(frozen=True, eq=False)
class SketchEstimate:
    estimate: np.ndarray
    m: int
    indices: np.ndarray
    seed: int | None = None


def _renormalized(weights: np.ndarray) -> np.ndarray:
    total = weights.sum()
    if not total > 0:
        raise DegenerateWeights("all sampling weights are zero")
    return weights / total


def build_distribution(P: PairedMatrices, scheme=SamplingScheme.PROPOSED) -> SamplingDistribution:
    """Sampling distribution over the columns of ``P`` for ``scheme``.

    proposed
        ``p_i = (||a_i||^2 / ||A||_F^2 + ||b_i||^2 / ||B||_F^2) / 2``
    dkm
        ``p_i`` proportional to ``||a_i|| ||b_i||``
    uniform
        equal mass on every index whose outer product is nonzero
    """
    scheme = SamplingScheme.parse(scheme)
    if scheme is SamplingScheme.PROPOSED:
        sa = P.col_norms_a**2
        sb = P.col_norms_b**2
        weights = 0.5 * (sa / sa.sum() + sb / sb.sum())
    elif scheme is SamplingScheme.DKM:
        weights = P.atom_norms.copy()
    else:
        weights = (P.atom_norms > 0).astype(np.float64)
    return SamplingDistribution(_renormalized(weights), scheme)


def indices_from_uniforms(dist: SamplingDistribution, u) -> np.ndarray:
    """Map uniforms in ``[0, 1)`` to indices by inverse-CDF binary search.

    Feeding the same ``u`` to several distributions gives common random
    numbers across schemes.
    """
    u = np.asarray(u, dtype=np.float64)
    idx = np.searchsorted(dist.cumulative, u, side="right")
    # only reachable when the table does not end at exactly 1
    return np.minimum(idx, dist.support[-1])


def sample_indices(dist: SamplingDistribution, m: int, seed: int) -> np.ndarray:
    """Draw ``m`` i.i.d. indices from ``dist``, with replacement."""
    if m < 1:
        raise OutOfRange("m must be at least 1")
    u = np.random.default_rng(seed).random(m)
    return indices_from_uniforms(dist, u)


def estimate_product(P: PairedMatrices, dist: SamplingDistribution, indices, seed=None) -> SketchEstimate:
    """``(1/m) sum_j a_{i_j} b_{i_j}^T / p_{i_j}`` over the given indices."""
    indices = np.asarray(indices, dtype=np.intp).ravel()
    m = indices.size
    if m < 1:
        raise OutOfRange("need at least one index")
    if np.any(indices < 0) or np.any(indices >= dist.n):
        raise IndexOutOfSupport("index outside [0, n)")
    p = dist.probabilities
    if np.any(p[indices] <= 0):
        bad = indices[p[indices] <= 0][0]
        raise IndexOutOfSupport(f"index {bad} has zero probability")
    counts = np.bincount(indices, minlength=dist.n).astype(np.float64)
    coef = np.zeros(dist.n)
    hit = counts > 0
    coef[hit] = counts[hit] / (m * p[hit])
    estimate = (P.A * coef) @ P.B.T
    indices = indices.copy()
    indices.flags.writeable = False
    return SketchEstimate(estimate, m, indices, seed)


def sketch(P: PairedMatrices, scheme, m: int, seed: int) -> SketchEstimate:
    """Build the distribution, draw ``m`` indices and form the estimate."""
    dist = build_distribution(P, scheme)
    return estimate_product(P, dist, sample_indices(dist, m, seed), seed=seed)


def expected_estimate(P: PairedMatrices, dist: SamplingDistribution) -> np.ndarray:
    """``sum_i p_i * (a_i b_i^T / p_i)`` over the support: the mean of one draw."""
    s = dist.support
    p = dist.probabilities[s]
    coef = p * (1.0 / p)
    return (P.A[:, s] * coef) @ P.B[:, s].T


def _norm_scale(P: PairedMatrices) -> float:
    scale = P.stats_a.spectral_norm * P.stats_b.spectral_norm
    if scale == 0:
        raise ZeroMatrix("A or B is the zero matrix")
    return scale


def relative_spectral_error(est, P: PairedMatrices) -> float:
    """``||estimate - A B^T|| / (||A|| ||B||)``.

    ``est`` may be a ``SketchEstimate`` or a bare matrix.
    """
    M = est.estimate if isinstance(est, SketchEstimate) else as_matrix(est)
    return spectral_norm(M - P.product) / _norm_scale(P)


def relative_spectral_errors(estimates, P: PairedMatrices) -> np.ndarray:
    """Vectorized ``relative_spectral_error`` over a ``(N, d_A, d_B)`` stack."""
    stack = np.asarray(estimates, dtype=np.float64) - P.product
    return spectral_norms(stack) / _norm_scale(P)
