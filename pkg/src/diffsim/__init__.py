"""Diffusion-geometric similarity measures for neural-network representations.

The pipeline: representation matrices -> pairwise similarity matrices (RSMs)
-> row-stochastic embeddings -> powered or fused diffusion operators ->
scalar similarity scores, plus the benchmark protocols that correlate those
scores with functional differences between models.
"""

from .errors import (
    DataError,
    DegenerateBandwidthError,
    DegenerateInputError,
    DegenerateRSMError,
    DiffsimError,
    FormatError,
    FusionDepthExceededError,
    IngestionError,
    ValidationError,
    ZeroVarianceError,
)
from .kernels import (
    KERNEL_DISTANCE,
    KERNEL_IDS,
    KERNEL_LINEAR,
    KERNEL_RBF,
    RSM,
    RepMatrix,
    build_rsm,
    distance_rsm,
    linear_rsm,
    rbf_rsm,
)
from .centering import ProbVector, center_uniform, center_weighted, uniform_prob
from .markov import (
    MAX_FUSION_DEPTH,
    MarkovMatrix,
    RepresentationSet,
    ad_fuse,
    alpha,
    degeneration_diagnostic,
    markov_embed,
    matrix_power,
)
from .measures import (
    MEASURE_IDS,
    MeasureScore,
    ad_cka,
    ad_distcorr,
    blended_ms_distcorr,
    cka,
    cka_via_markov,
    distcorr,
    distcorr_via_markov,
    fused_markov,
    hsic,
    ms_cka,
    ms_distcorr,
)
from .evaluation import (
    EvalReport,
    MeasureConfig,
    ModelRecord,
    PairResult,
    accuracy_diff,
    disagreement,
    jsd_diff,
    kendall_tau,
    model_accuracy,
    run_grs_bench4,
    run_resi_test,
    spearman,
)
from .matrixio import read_array, read_matrix, write_matrix
from .manifest import EvalManifest, ManifestModel, load_manifest, load_models

__version__ = "0.1.0"
