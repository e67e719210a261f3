"""Label-aware spectral embedding (CCDR) with an out-of-sample extension.

The package bundles the embedding itself, classical baselines (PCA, MDS,
LDA, Laplacian eigenmaps), two downstream classifiers, and a sweep harness
with a small command line front end.
"""

from .dataset import (
    LabeledDataset,
    ClassIndicator,
    SATIMAGE_REMAP,
    PASSTHROUGH_REMAP,
    identity_remap,
    read_points,
    load_statlog,
    save_statlog,
    to_csv,
    make_indicator,
    class_counts,
    gen_circles,
    column_stats,
    apply_standardize,
)
from .graph import (
    NeighborGraph,
    WeightMatrix,
    knn_graph,
    heat_weights,
    median_eps,
    kernel_row,
    kernel_rows,
    export_edges_csv,
)
from .spectral import EigenSolution, generalized_eig, sym_eig_desc
from .embedding import (
    AugmentedLaplacian,
    CcdrModel,
    build_augmented,
    fit,
    embed_oos,
    embed_many,
    refit_embed,
    cost,
    constraint_residuals,
    shrink,
    save_model,
    load_model,
)
from .baselines import (
    LinearEmbedding,
    pca_fit,
    pca_energy_dim,
    mds_fit,
    lda_fit,
    laplacian_eigenmap,
)
from .classify import (
    LinearClassifier,
    KnnClassifier,
    linear_fit,
    linear_predict,
    knn_predict,
    error_rate,
    accuracy,
)
from .harness import (
    ExperimentConfig,
    SweepRow,
    SweepReport,
    PipelineFit,
    fit_pipeline,
    run_sweep,
    confidence_interval,
    emit_report,
)

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset",
    "ClassIndicator",
    "SATIMAGE_REMAP",
    "PASSTHROUGH_REMAP",
    "identity_remap",
    "read_points",
    "load_statlog",
    "save_statlog",
    "to_csv",
    "make_indicator",
    "class_counts",
    "gen_circles",
    "column_stats",
    "apply_standardize",
    "NeighborGraph",
    "WeightMatrix",
    "knn_graph",
    "heat_weights",
    "median_eps",
    "kernel_row",
    "kernel_rows",
    "export_edges_csv",
    "EigenSolution",
    "generalized_eig",
    "sym_eig_desc",
    "AugmentedLaplacian",
    "CcdrModel",
    "build_augmented",
    "fit",
    "embed_oos",
    "embed_many",
    "refit_embed",
    "cost",
    "constraint_residuals",
    "shrink",
    "save_model",
    "load_model",
    "LinearEmbedding",
    "pca_fit",
    "pca_energy_dim",
    "mds_fit",
    "lda_fit",
    "laplacian_eigenmap",
    "LinearClassifier",
    "KnnClassifier",
    "linear_fit",
    "linear_predict",
    "knn_predict",
    "error_rate",
    "accuracy",
    "ExperimentConfig",
    "SweepRow",
    "SweepReport",
    "PipelineFit",
    "fit_pipeline",
    "run_sweep",
    "confidence_interval",
    "emit_report",
]
