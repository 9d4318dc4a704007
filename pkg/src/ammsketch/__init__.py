"""Approximate ``A @ B.T`` by sampling outer products ``a_i b_i^T``.

The default ("proposed") distribution mixes the squared column norms of
both factors, ``p_i = (||a_i||^2/||A||_F^2 + ||b_i||^2/||B||_F^2) / 2``,
which gives spectral-norm error guarantees in terms of stable ranks.
"""

from .bounds import (
    BernsteinCertificate,
    DilationSecondMoment,
    SampleSizePlan,
    TailEvaluation,
    certificate,
    competing_bounds,
    exact_second_moment,
    proof_form_tail,
    required_samples,
    tail_bound,
    verify_claim1,
    verify_claims,
)
from .errors import (
    AmmError,
    ConfigError,
    DegenerateWeights,
    DimensionMismatch,
    IndexOutOfSupport,
    MatrixFormatError,
    NonConvergence,
    OutOfRange,
    SupportMismatch,
    ZeroMatrix,
)
from .harness import ExperimentConfig, MatrixSpec, TrialReport, compare_schemes, run_experiment
from .matcore import (
    PairedMatrices,
    SpectralStats,
    exact_product,
    frobenius_norm,
    generate_matrix,
    spectral_norm,
    spectrum_for_target_sr,
    stable_rank,
)
from .sampler import (
    SamplingDistribution,
    SamplingScheme,
    SketchEstimate,
    build_distribution,
    estimate_product,
    relative_spectral_error,
    sample_indices,
    sketch,
)

__version__ = "0.1.0"
