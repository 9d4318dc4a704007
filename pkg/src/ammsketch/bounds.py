"""Bernstein certificate quantities, tail bounds, sample-size planning, and
exact (enumeration-based) checks of the three lemmas behind the tail bound.

Notation: ``sr`` is stable rank, ``||.||`` spectral norm, ``||.||_F``
Frobenius norm, ``C = A B^T``. The estimator is the mean of ``m`` i.i.d.
draws ``X = a_i b_i^T / p_i``.

* almost-sure bound ``b_bar = ||A||_F ||B||_F + ||A|| ||B||`` on
  ``||X - C||``;
* variance bound ``sigma2_bar = 2 max(sr_A, sr_B) ||A||^2 ||B||^2`` on the
  second moment of the symmetric dilation of ``X - C``;
* intrinsic dimension ``k_bar = 2 min(sr_A, sr_B)``, chosen so that
  ``sigma2_bar * k_bar`` bounds the trace of that second moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange, SupportMismatch, ZeroMatrix
from .matcore import PairedMatrices, frobenius_norm, spectral_norm, spectral_norms
from .sampler import SamplingDistribution, build_distribution, expected_estimate

CLAIM_RTOL = 1e-8
PSD_RTOL = 1e-8
UNBIASED_RTOL = 1e-10
SUM_TOL = 1e-12


@dataclass(frozen=True)
class BernsteinCertificate:
    b_bar: float
    sigma2_bar: float
    k_bar: float
    sr_a: float
    sr_b: float
    norm_a: float
    norm_b: float

    @property
    def scale(self) -> float:
        """``||A|| ||B||``, the unit the relative deviations are measured in."""
        return self.norm_a * self.norm_b

    def to_dict(self) -> dict:
        return {
            "b_bar": self.b_bar,
            "sigma2_bar": self.sigma2_bar,
            "k_bar": self.k_bar,
            "sr_a": self.sr_a,
            "sr_b": self.sr_b,
            "norm_a": self.norm_a,
            "norm_b": self.norm_b,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BernsteinCertificate":
        return cls(**{k: float(d[k]) for k in cls.__dataclass_fields__})


@dataclass(frozen=True, eq=False)
class DilationSecondMoment:
    """The two diagonal blocks of ``E Z^2``; the off-diagonal blocks vanish."""

    top_block: np.ndarray
    bottom_block: np.ndarray

    @property
    def spectral_norm(self) -> float:
        return max(spectral_norm(self.top_block), spectral_norm(self.bottom_block))

    @property
    def trace(self) -> float:
        return float(np.trace(self.top_block) + np.trace(self.bottom_block))


@dataclass(frozen=True)
class TailEvaluation:
    t: float
    m: int
    deviation: float
    failure_prob: float
    form: str

    @property
    def vacuous(self) -> bool:
        return self.failure_prob >= 1.0


@dataclass(frozen=True)
class SampleSizePlan:
    epsilon: float
    c: float
    m_required: int
    sr_a: float
    sr_b: float
    t: float
    tail: TailEvaluation


@dataclass(frozen=True)
class ComplexityComparison:
    """Sample-count expressions with all constants set to 1."""

    proposed: float
    dkm: float
    rotation: float


def certificate(P: PairedMatrices) -> BernsteinCertificate:
    sa, sb = P.stats_a, P.stats_b
    if sa.spectral_norm == 0 or sb.spectral_norm == 0:
        raise ZeroMatrix("A and B must both be nonzero")
    scale2 = (sa.spectral_norm * sb.spectral_norm) ** 2
    return BernsteinCertificate(
        b_bar=sa.frobenius_norm * sb.frobenius_norm + sa.spectral_norm * sb.spectral_norm,
        sigma2_bar=2.0 * max(sa.stable_rank, sb.stable_rank) * scale2,
        k_bar=2.0 * min(sa.stable_rank, sb.stable_rank),
        sr_a=sa.stable_rank,
        sr_b=sb.stable_rank,
        norm_a=sa.spectral_norm,
        norm_b=sb.spectral_norm,
    )


def _check_tail_args(m: int, t: float):
    if m < 1:
        raise OutOfRange("m must be at least 1")
    if not t > 0:
        raise OutOfRange("t must be positive")


def tail_ratio(t: float) -> float:
    """``t / (e^t - t - 1)`` evaluated without cancellation or overflow."""
    if t < 1e-3:
        denom = t * t * (0.5 + t * (1 / 6 + t * (1 / 24 + t / 120)))
        return t / denom
    if t > 50:
        q = math.exp(-t)
        return t * q / (1.0 - (t + 1.0) * q)
    return t / (math.expm1(t) - t)


def tail_bound(cert: BernsteinCertificate, m: int, t: float) -> TailEvaluation:
    """The headline tail bound, deviation relative to ``||A|| ||B||``.

    deviation = sqrt(4 max(sr) t / m) + (sqrt(sr_A sr_B) + 1) t / m
    failure   = 4 min(sr) t / (e^t - t - 1)
    """
    _check_tail_args(m, t)
    hi, lo = max(cert.sr_a, cert.sr_b), min(cert.sr_a, cert.sr_b)
    deviation = math.sqrt(4.0 * hi * t / m) + (math.sqrt(cert.sr_a * cert.sr_b) + 1.0) * t / m
    return TailEvaluation(t, m, deviation, 4.0 * lo * tail_ratio(t), "theorem")


def proof_form_tail(cert: BernsteinCertificate, m: int, t: float) -> TailEvaluation:
    """The Bernstein bound as it falls out of the certificate, before the
    linear term is loosened by a factor of 3.

    deviation = (sqrt(2 sigma2_bar t / m) + b_bar t / (3 m)) / (||A|| ||B||)
    failure   = 2 k_bar t / (e^t - t - 1)
    """
    _check_tail_args(m, t)
    s = cert.scale
    deviation = math.sqrt(2.0 * cert.sigma2_bar * t / m) / s + cert.b_bar * t / (3.0 * m * s)
    return TailEvaluation(t, m, deviation, 2.0 * cert.k_bar * tail_ratio(t), "proof")


def evaluate_tail(cert: BernsteinCertificate, m: int, t: float, form: str = "theorem") -> TailEvaluation:
    if form == "theorem":
        return tail_bound(cert, m, t)
    if form == "proof":
        return proof_form_tail(cert, m, t)
    raise OutOfRange(f"unknown bound form {form!r}")


def clamped_log(x: float) -> float:
    """``max(log x, 1)``; keeps sample counts positive when a stable rank is 1."""
    return max(math.log(x), 1.0)


def default_t(sr_a: float, sr_b: float) -> float:
    """A tail parameter growing like ``log(min sr)``: ``log(4 min(sr)) + 5``.

    Puts the headline failure probability around 0.04 to 0.07 for any
    stable ranks.
    """
    return math.log(4.0 * min(sr_a, sr_b)) + 5.0


def required_samples(sr_a: float, sr_b: float, epsilon: float, c: float = 4.0, t: float | None = None) -> SampleSizePlan:
    """Smallest ``m`` with
    ``m >= c (max(sr)/eps^2 + sqrt(sr_A sr_B)/eps) max(log min(sr), 1)``.

    The plan also carries the headline tail bound at ``m_required`` for
    tail parameter ``t`` (``default_t`` if not given), since the sample count
    alone promises no particular failure probability.
    """
    if not 0 < epsilon < 1:
        raise OutOfRange("epsilon must lie in (0, 1)")
    if not c > 0:
        raise OutOfRange("c must be positive")
    if sr_a < 1 or sr_b < 1:
        raise OutOfRange("stable ranks are at least 1")
    hi, lo = max(sr_a, sr_b), min(sr_a, sr_b)
    rhs = c * (hi / epsilon**2 + math.sqrt(sr_a * sr_b) / epsilon) * clamped_log(lo)
    m = max(1, math.ceil(round(rhs, 9)))
    if t is None:
        t = default_t(sr_a, sr_b)
    cert = BernsteinCertificate(0.0, 0.0, 2.0 * lo, sr_a, sr_b, 1.0, 1.0)
    return SampleSizePlan(epsilon, c, m, sr_a, sr_b, t, tail_bound(cert, m, t))


def competing_bounds(sr_a: float, sr_b: float, epsilon: float, n: int) -> ComplexityComparison:
    """Sample counts needed for relative spectral error ``epsilon`` by three schemes.

    proposed  max(sr) log(min(sr)) / eps^2
    dkm       sr_A sr_B log(sr_A sr_B) / eps^2
    rotation  (max(sr) + log n) log(max(sr)) / eps^2  (random rotation, then uniform sampling)

    Constants are 1 and every ``log`` of a stable-rank expression is clamped
    below at 1.
    """
    if not 0 < epsilon < 1:
        raise OutOfRange("epsilon must lie in (0, 1)")
    if sr_a <= 0 or sr_b <= 0 or n < 1:
        raise OutOfRange("stable ranks and n must be positive")
    hi, lo = max(sr_a, sr_b), min(sr_a, sr_b)
    e2 = epsilon**2
    return ComplexityComparison(
        proposed=hi * clamped_log(lo) / e2,
        dkm=sr_a * sr_b * clamped_log(sr_a * sr_b) / e2,
        rotation=(hi + math.log(n)) * clamped_log(hi) / e2,
    )


# ---------------------------------------------------------------- exact checks


def _check_support(P: PairedMatrices, dist: SamplingDistribution):
    if dist.n != P.n:
        raise SupportMismatch(f"distribution has {dist.n} entries, matrices have {P.n} columns")
    missing = np.flatnonzero((P.atom_norms > 0) & ~(dist.probabilities > 0))
    if missing.size:
        raise SupportMismatch(f"nonzero outer products outside the support: {missing[:10].tolist()}")


def exact_second_moment(P: PairedMatrices, dist: SamplingDistribution) -> DilationSecondMoment:
    """Exact ``E Z^2`` by summing over all ``n`` outcomes.

    top    = sum_i ||b_i||^2 a_i a_i^T / p_i - C C^T
    bottom = sum_i ||a_i||^2 b_i b_i^T / p_i - C^T C
    """
    _check_support(P, dist)
    s = dist.support
    p = dist.probabilities[s]
    A, B, C = P.A[:, s], P.B[:, s], P.product
    top = (A * (P.col_norms_b[s] ** 2 / p)) @ A.T - C @ C.T
    bottom = (B * (P.col_norms_a[s] ** 2 / p)) @ B.T - C.T @ C
    return DilationSecondMoment(top, bottom)


@dataclass
class Claim1Report:
    b_bar: float
    indices: np.ndarray
    atom_deviation: np.ndarray
    margins: np.ndarray = field(init=False)

    def __post_init__(self):
        self.margins = self.b_bar - self.atom_deviation

    @property
    def violations(self) -> np.ndarray:
        return self.indices[self.atom_deviation > self.b_bar * (1 + CLAIM_RTOL)]

    @property
    def passed(self) -> bool:
        return self.violations.size == 0


def atom_deviations(P: PairedMatrices, dist: SamplingDistribution, indices=None) -> np.ndarray:
    """``||a_i b_i^T / p_i - C||`` for each index (default: the whole support)."""
    idx = dist.support if indices is None else np.asarray(indices, dtype=np.intp)
    p = dist.probabilities[idx]
    out = np.empty(idx.size)
    # chunk so the (chunk, d_A, d_B) stack stays small
    for lo in range(0, idx.size, 256):
        j = idx[lo:lo + 256]
        atoms = np.einsum("ik,jk->kij", P.A[:, j] / p[lo:lo + 256], P.B[:, j])
        out[lo:lo + 256] = spectral_norms(atoms - P.product)
    return out


def verify_claim1(P: PairedMatrices, dist: SamplingDistribution) -> Claim1Report:
    """Check the almost-sure bound on every outcome in the support."""
    cert = certificate(P)
    s = dist.support
    return Claim1Report(cert.b_bar, s, atom_deviations(P, dist, s))


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""


@dataclass
class ClaimsReport:
    checks: list[CheckResult]
    claim1: Claim1Report | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def check_distribution(P: PairedMatrices, dist: SamplingDistribution) -> list[CheckResult]:
    p = dist.probabilities
    checks = [
        CheckResult("dist_size", float(dist.n), float(P.n), dist.n == P.n),
    ]
    if dist.n != P.n:
        return checks
    total = float(p.sum())
    uncovered = np.flatnonzero((P.atom_norms > 0) & ~(p > 0))
    checks += [
        CheckResult("dist_sum", total, 1.0, abs(total - 1.0) <= SUM_TOL),
        CheckResult("dist_nonnegative", float(p.min()), 0.0, bool(p.min() >= 0)),
        CheckResult(
            "dist_covers_atoms", float(uncovered.size), 0.0, uncovered.size == 0,
            "" if uncovered.size == 0 else f"uncovered indices {uncovered[:10].tolist()}",
        ),
    ]
    return checks


def amgm_margin(P: PairedMatrices, dist: SamplingDistribution) -> float:
    """``min_i (p_i - ||a_i|| ||b_i|| / (||A||_F ||B||_F))``; nonnegative for the proposed scheme."""
    floor = P.atom_norms / (P.stats_a.frobenius_norm * P.stats_b.frobenius_norm)
    return float(np.min(dist.probabilities - floor))


def verify_claims(P: PairedMatrices, dist: SamplingDistribution | None = None) -> ClaimsReport:
    """Run every exact check against ``dist`` (default: the proposed distribution).

    Checks: the distribution itself, unbiasedness of one draw, the almost-sure
    bound on every outcome, positive semidefiniteness of both second-moment
    blocks, the variance bound and the trace bound. Violations are reported,
    never raised.
    """
    if dist is None:
        dist = build_distribution(P)
    checks = check_distribution(P, dist)
    by_name = {c.name: c for c in checks}
    if not by_name["dist_size"].passed or not by_name["dist_covers_atoms"].passed:
        # the exact sums below are undefined without full support
        return ClaimsReport(checks)

    cert = certificate(P)
    C = P.product
    scale2 = cert.scale**2

    cnorm = frobenius_norm(C)
    bias = float(np.sqrt(np.sum((expected_estimate(P, dist) - C) ** 2)))
    rel = bias / cnorm if cnorm > 0 else bias
    checks.append(CheckResult("unbiased", rel, UNBIASED_RTOL, rel <= UNBIASED_RTOL))

    c1 = verify_claim1(P, dist)
    worst = float(c1.atom_deviation.max())
    checks.append(CheckResult(
        "claim1_as_bound", worst, c1.b_bar, c1.passed,
        "" if c1.passed else f"violating indices {c1.violations[:10].tolist()}",
    ))

    moment = exact_second_moment(P, dist)
    for name, block in (("psd_top", moment.top_block), ("psd_bottom", moment.bottom_block)):
        sym = block + block.T
        lam_min = float(np.linalg.eigvalsh(0.5 * sym)[0])
        floor = -PSD_RTOL * spectral_norm(block)
        checks.append(CheckResult(name, lam_min, floor, lam_min >= floor))

    var_bound = 2.0 * max(cert.sr_a, cert.sr_b) * scale2
    vnorm = moment.spectral_norm
    checks.append(CheckResult("claim2_variance", vnorm, var_bound, vnorm <= var_bound * (1 + CLAIM_RTOL)))

    tr_bound = 4.0 * cert.sr_a * cert.sr_b * scale2
    tr = moment.trace
    checks.append(CheckResult("claim3_trace", tr, tr_bound, tr <= tr_bound * (1 + CLAIM_RTOL)))
    return ClaimsReport(checks, c1)
