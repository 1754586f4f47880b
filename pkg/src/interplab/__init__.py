"""interplab: a numerical laboratory for interpolating predictors.

Modules
-------
rng         deterministic per-purpose random substreams
numlin      validated dense linear algebra (eig, svd, pinv, solves)
datagen     synthetic classification/regression sources, label corruption
kernelmach  interpolating kernel machines and random-feature sweeps
direct      nearest-neighbor, simplicial, and simplex-geometry predictors
netmodels   small dense nets: exact jacobians, hessians, tangent kernels
optim       full/mini-batch gradient descent with convergence certificates
labcli      experiment runner behind the ``interplab`` command
"""

from . import datagen, direct, errors, kernelmach, labcli, netmodels, numlin, optim, rng
from .datagen import (
    CorruptionSpec,
    Dataset,
    MnistSubset,
    NoisyLine,
    TwoGaussians,
    UniformSimplex,
    bayes_risk,
    bayes_rule,
    corrupt,
    load_idx,
    make_dataset,
    sample,
)
from .direct import (
    build_simplicial,
    knn_predict,
    knn_predict_batch,
    make_neighbor_predictor,
    simplex_minority_volume,
    simplicial_predict,
)
from .errors import InterpLabError
from .kernelmach import (
    KernelMachine,
    KernelSpec,
    RFFModel,
    double_descent_sweep,
    fit_interpolating,
    kernel_matrix,
    kernel_predict,
    rff_fit_minnorm,
    rff_predict,
    rkhs_norm_sq,
)
from .labcli import ExperimentConfig, main
from .netmodels import (
    ArchTemplate,
    MLPModel,
    hessian_norm,
    init_mlp,
    linearity_scan,
    tangent_kernel,
)
from .optim import (
    OptimTrace,
    critical_batch_scan,
    gd,
    linear_objective,
    mlp_objective,
    plstar_ratio,
    rate_fit,
    sgd,
)
from .rng import substream

__version__ = "0.1.0"

__all__ = [
    "ArchTemplate",
    "CorruptionSpec",
    "Dataset",
    "ExperimentConfig",
    "InterpLabError",
    "KernelMachine",
    "KernelSpec",
    "MLPModel",
    "MnistSubset",
    "NoisyLine",
    "OptimTrace",
    "RFFModel",
    "TwoGaussians",
    "UniformSimplex",
    "bayes_risk",
    "bayes_rule",
    "build_simplicial",
    "corrupt",
    "critical_batch_scan",
    "datagen",
    "direct",
    "double_descent_sweep",
    "errors",
    "fit_interpolating",
    "gd",
    "hessian_norm",
    "init_mlp",
    "kernel_matrix",
    "kernel_predict",
    "knn_predict",
    "knn_predict_batch",
    "labcli",
    "linear_objective",
    "linearity_scan",
    "load_idx",
    "main",
    "make_dataset",
    "make_neighbor_predictor",
    "mlp_objective",
    "netmodels",
    "numlin",
    "optim",
    "plstar_ratio",
    "rate_fit",
    "rff_fit_minnorm",
    "rff_predict",
    "rkhs_norm_sq",
    "rng",
    "sample",
    "sgd",
    "simplex_minority_volume",
    "simplicial_predict",
    "substream",
    "tangent_kernel",
]
