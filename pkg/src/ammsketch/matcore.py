"""Dense matrices, norms, stable rank and synthetic instances.

Matrices are plain 2-d ``float64`` numpy arrays. ``as_matrix`` is the single
validation point: it rejects non-2-d input, empty shapes and non-finite
entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NonConvergence, OutOfRange, ZeroMatrix

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000

# fixed seed for the start-vector perturbation; keeps spectral_norm deterministic
_START_SEED = 0x5EED
_START_NOISE = 1e-2
# members still unconverged after this many steps get one jump by G^(2^_SQUARINGS)
_ACCEL_AFTER = 200
_SQUARINGS = 40


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a validated 2-d float64 array."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got ndim={M.ndim}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionMismatch(f"matrix must have positive shape, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise OutOfRange("matrix has non-finite entries")
    return M


@dataclass(frozen=True)
class SpectralStats:
    spectral_norm: float
    frobenius_norm: float
    stable_rank: float

    @classmethod
    def of(cls, M) -> "SpectralStats":
        M = as_matrix(M)
        spec = spectral_norm(M)
        frob = frobenius_norm(M)
        sr = _clamped_sr(frob, spec, M.shape) if spec > 0 else 0.0
        return cls(spec, frob, sr)


@dataclass(frozen=True, eq=False)
class PairedMatrices:
    """The two factors of ``A @ B.T``: ``A`` is d_A x n, ``B`` is d_B x n.

    Column ``i`` of ``A`` and column ``i`` of ``B`` form the outer product
    ``a_i b_i^T``; the estimator samples these. Derived quantities are cached.
    """

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A).copy()
        B = as_matrix(self.B).copy()
        if A.shape[1] != B.shape[1]:
            raise DimensionMismatch(
                f"A has {A.shape[1]} columns but B has {B.shape[1]}"
            )
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if not np.any(self.atom_norms > 0):
            raise ZeroMatrix("every outer product a_i b_i^T is zero")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @cached_property
    def col_norms_a(self) -> np.ndarray:
        return np.sqrt(np.sum(self.A * self.A, axis=0))

    @cached_property
    def col_norms_b(self) -> np.ndarray:
        return np.sqrt(np.sum(self.B * self.B, axis=0))

    @cached_property
    def atom_norms(self) -> np.ndarray:
        """``||a_i|| * ||b_i||``, the spectral norm of each outer product."""
        return self.col_norms_a * self.col_norms_b

    @cached_property
    def stats_a(self) -> SpectralStats:
        return SpectralStats.of(self.A)

    @cached_property
    def stats_b(self) -> SpectralStats:
        return SpectralStats.of(self.B)

    @cached_property
    def product(self) -> np.ndarray:
        C = self.A @ self.B.T
        C.flags.writeable = False
        return C


def frobenius_norm(M) -> float:
    M = as_matrix(M)
    return float(np.sqrt(np.sum(M * M)))


def _start_vector(k: int) -> np.ndarray:
    rng = np.random.default_rng(_START_SEED)
    x = np.ones(k) / math.sqrt(k) + _START_NOISE * rng.standard_normal(k) / math.sqrt(k)
    return x / np.linalg.norm(x)


def _gram_stack(stack: np.ndarray) -> np.ndarray:
    # smaller of M^T M and M M^T
    if stack.shape[1] >= stack.shape[2]:
        return np.einsum("nij,nik->njk", stack, stack)
    return np.einsum("nji,nki->njk", stack, stack)


def spectral_norms(stack, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """Largest singular value of every matrix in a ``(N, rows, cols)`` stack.

    Runs power iteration on the Gram matrix of the smaller side, all members
    of the stack in lockstep. A member is finished once its Rayleigh-quotient
    residual ``||G x - lam x||`` is at most ``tol * lam``, which puts ``lam``
    within relative ``tol`` of an eigenvalue of ``G`` and the returned
    ``sqrt(lam)`` within ``tol / 2`` of a singular value.

    Members that are slow to converge (a top eigenvalue of ``G`` nearly, but
    not exactly, repeated) are multiplied once by ``G^(2^40)``, formed by
    repeated normalized squaring, after which iteration resumes.

    Raises
    ------
    NonConvergence
        if some member is still unfinished after ``max_iter`` iterations.
    """
    if tol <= 0:
        raise OutOfRange("tol must be positive")
    stack = np.asarray(stack, dtype=np.float64)
    if stack.ndim != 3:
        raise DimensionMismatch("expected a (N, rows, cols) stack")
    G = _gram_stack(stack)
    N, k, _ = G.shape
    X = np.tile(_start_vector(k), (N, 1))
    lam = np.zeros(N)
    active = np.arange(N)
    for it in range(max_iter):
        if active.size == 0:
            break
        if it == _ACCEL_AFTER:
            X[active] = _squaring_jump(G[active], X[active])
        Xa = X[active]
        Y = np.einsum("nij,nj->ni", G[active], Xa)
        la = np.einsum("ni,ni->n", Xa, Y)
        res = np.linalg.norm(Y - la[:, None] * Xa, axis=1)
        lam[active] = la
        done = res <= tol * la
        ynorm = np.linalg.norm(Y, axis=1)
        # G x == 0 only for a zero matrix (the start vector has full support)
        done |= ynorm == 0
        keep = ~done
        X[active[keep]] = Y[keep] / ynorm[keep, None]
        active = active[keep]
    else:
        if active.size:
            raise NonConvergence(
                f"{active.size} matrices not converged after {max_iter} iterations"
            )
    return np.sqrt(np.maximum(lam, 0.0))


def _squaring_jump(G: np.ndarray, X: np.ndarray) -> np.ndarray:
    H = G / np.linalg.norm(G, axis=(1, 2), keepdims=True)
    for _ in range(_SQUARINGS):
        H = H @ H
        H /= np.linalg.norm(H, axis=(1, 2), keepdims=True)
    Y = np.einsum("nij,nj->ni", H, X)
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def spectral_norm(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Largest singular value of ``M`` by power iteration (see ``spectral_norms``)."""
    M = as_matrix(M)
    return float(spectral_norms(M[None], tol=tol, max_iter=max_iter)[0])


def _clamped_sr(frob: float, spec: float, shape) -> float:
    # rounding can push the ratio a few ulps outside its exact range
    return min(max((frob / spec) ** 2, 1.0), float(min(shape)))


def stable_rank(M) -> float:
    """``||M||_F^2 / ||M||^2``; lies in ``[1, rank(M)]``."""
    M = as_matrix(M)
    spec = spectral_norm(M)
    if spec == 0:
        raise ZeroMatrix("stable rank of the zero matrix is undefined")
    return _clamped_sr(frobenius_norm(M), spec, M.shape)


def exact_product(P: PairedMatrices) -> np.ndarray:
    """The exact ``A @ B.T``, used as ground truth for every error measurement."""
    return P.product


def generate_matrix(rows: int, cols: int, singular_values, seed: int) -> np.ndarray:
    """Return ``U diag(s) V^T`` with seeded random orthonormal ``U`` and ``V``.

    The factors come from QR of Gaussian matrices, with column signs fixed so
    that ``R`` has a positive diagonal. Identical arguments give identical
    bytes.
    """
    s = np.asarray(singular_values, dtype=np.float64).ravel()
    if rows < 1 or cols < 1:
        raise DimensionMismatch("rows and cols must be positive")
    if s.size > min(rows, cols):
        raise DimensionMismatch(
            f"{s.size} singular values do not fit a {rows}x{cols} matrix"
        )
    if np.any(s < 0) or np.any(np.diff(s) > 0) or not np.all(np.isfinite(s)):
        raise OutOfRange("singular values must be finite, nonnegative and nonincreasing")
    if s.size == 0:
        return np.zeros((rows, cols))
    rng = np.random.default_rng(seed)
    U = _orthonormal(rng.standard_normal((rows, s.size)))
    V = _orthonormal(rng.standard_normal((cols, s.size)))
    return (U * s) @ V.T


def _orthonormal(G: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def spectrum_for_target_sr(target_sr: float, count: int) -> np.ndarray:
    """Singular values ``(1, s, ..., s)`` of length ``count`` whose squares sum to ``target_sr``."""
    if count < 1:
        raise OutOfRange("count must be at least 1")
    if not 1.0 <= target_sr <= count:
        raise OutOfRange(f"target stable rank {target_sr} not in [1, {count}]")
    sigma = np.zeros(count)
    sigma[0] = 1.0
    if count > 1:
        sigma[1:] = math.sqrt((target_sr - 1.0) / (count - 1))
    return sigma
