"""Spectral band importance for multichannel recordings.

The pipeline: band-pass filter each recording, estimate a per-channel power
spectral density matrix, cut it into fixed-width spectral blocks, and reduce
every block to the Von Neumann entropy of its sample-covariance eigenvalues.
The resulting features are partitioned into frequency bands; weak classifiers
trained on each band's complement cast votes whose fitted weights, once
redistributed per band, quantify how much each band contributes to telling the
classes apart. Bands can then be emphasized by replicating their features in
proportion to the discretized weight before final classification.
"""

__version__ = "0.1.0"

from .augment import AugmentedFeatureVector, WeightLevels, augment, discretize
from .classify import ConfusionMatrix, KnnClassifier, LinearSvm, RunMetrics, evaluate, make_classifier
from .errors import (
    BandvoteError,
    BlockingError,
    ConvergenceError,
    DegenerateDataError,
    DimensionError,
    FeasibilityError,
    InsufficientDataError,
    NotPsdError,
    ParameterError,
    ShapeError,
    SingularMatrixError,
    SymmetryError,
)
from .experiment import (
    Dataset,
    ExperimentConfig,
    ExperimentResult,
    PipelineParams,
    build_dataset,
    paper_profile,
    run_experiment,
    tiny_profile,
    write_report,
)
from .les import FeatureVector, extract_features, les_entropy, sample_covariance, standardize
from .qp import QpProblem, QpSolution, check_kkt, solve_simplex_qp, solve_unconstrained
from .signal_prep import (
    BlockingScheme,
    Recording,
    SpectralBlock,
    SpectrumMatrix,
    bandpass_filter,
    compute_psd,
    split_blocks,
)
from .synth import BandBoost, SynthSpec, generate, generate_iter
from .voting import (
    FeaturePartition,
    WeightVector,
    build_label_matrix,
    equal_band_ranges,
    fit_weights,
    partition_features,
    redistribute,
    train_weak_classifiers,
    vote_scores,
)

__all__ = [name for name in dir() if not name.startswith("_")]
