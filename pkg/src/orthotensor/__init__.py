"""Decomposition of symmetric, nearly orthogonally decomposable tensors
via two-mode unfoldings, with a tensor power method baseline, rank
selection, synthetic instance generation, and a benchmark harness.
"""

from .bench import (
    CSV_FIELDS,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    derive_trial_seed,
    parse_config_file,
    read_rows,
    run_experiment,
    summarize,
)
from .linalg import (
    EigPair,
    TruncatedSVDResult,
    canonical_sign,
    orthonormalize,
    top_eig_abs,
    truncated_left_svd,
)
from .metrics import MatchResult, loss_scalar, loss_vec, match_and_score, residual_norms
from .pursuit import (
    AscentState,
    FactorEstimate,
    PursuitExhaustedError,
    PursuitOptions,
    SingularSpaceBasis,
    SnrDiagnostics,
    decompose,
    deflate,
    is_robust_eigenvector,
    postprocess,
    pursue_rank1,
    singular_space,
    snr_diagnostics,
)
from .rank import RankSelectionReport, numerical_rank, select_rank
from .synth import (
    FACTOR_MODES,
    NOISE_MODELS,
    GroundTruth,
    Instance,
    NoiseSpec,
    derive_subseeds,
    gen_instance,
    gen_noise,
    gen_truth,
    sod_tensor,
)
from .tensor import (
    SymmetricTensor,
    contract_all_but_one,
    contract_tail,
    multilinear_eval,
    rank1_tensor,
    spectral_norm_lb,
    subtract_rank1,
    symmetrize,
    tensor_inner,
    unfold,
)
from .tpm import DegenerateStepError, TpmOptions, tpm_decompose, tpm_power_step

__version__ = "0.1.0"

__all__ = [
    "AscentState",
    "CSV_FIELDS",
    "ConfigError",
    "DegenerateStepError",
    "EigPair",
    "ExperimentConfig",
    "FACTOR_MODES",
    "FactorEstimate",
    "GroundTruth",
    "Instance",
    "MatchResult",
    "NOISE_MODELS",
    "NoiseSpec",
    "PursuitExhaustedError",
    "PursuitOptions",
    "RankSelectionReport",
    "ResultRow",
    "SingularSpaceBasis",
    "SnrDiagnostics",
    "SymmetricTensor",
    "TpmOptions",
    "TruncatedSVDResult",
    "canonical_sign",
    "contract_all_but_one",
    "contract_tail",
    "decompose",
    "deflate",
    "derive_subseeds",
    "derive_trial_seed",
    "gen_instance",
    "gen_noise",
    "gen_truth",
    "is_robust_eigenvector",
    "loss_scalar",
    "loss_vec",
    "match_and_score",
    "multilinear_eval",
    "numerical_rank",
    "orthonormalize",
    "parse_config_file",
    "postprocess",
    "pursue_rank1",
    "rank1_tensor",
    "read_rows",
    "residual_norms",
    "run_experiment",
    "select_rank",
    "singular_space",
    "snr_diagnostics",
    "sod_tensor",
    "spectral_norm_lb",
    "subtract_rank1",
    "summarize",
    "symmetrize",
    "tensor_inner",
    "top_eig_abs",
    "tpm_decompose",
    "tpm_power_step",
    "truncated_left_svd",
    "unfold",
]
