"""Gaussian Bayesian networks over SNP genotypes and quantitative traits."""

from gnbn._core import (
    CvReport,
    Dag,
    DataError,
    Dataset,
    GaussianBn,
    GenotypeMatrix,
    JointGaussian,
    LocalDistribution,
    Model,
    ModelMetadata,
    Node,
    NumericalError,
    QueryResult,
    TargetSummary,
    TraitCvSummary,
    TraitMatrix,
    TraitPredictions,
    UsageError,
    average,
    cross_validate,
    filter_maf,
    learn,
    load_dataset,
    load_genotype_matrix,
    load_trait_matrix,
    parse_model,
    predict,
    prune_correlated,
    query,
    read_model,
    simulate,
    to_joint,
)

__all__ = [
    "CvReport",
    "Dag",
    "DataError",
    "Dataset",
    "GaussianBn",
    "GenotypeMatrix",
    "JointGaussian",
    "LocalDistribution",
    "Model",
    "ModelMetadata",
    "Node",
    "NumericalError",
    "QueryResult",
    "TargetSummary",
    "TraitCvSummary",
    "TraitMatrix",
    "TraitPredictions",
    "UsageError",
    "average",
    "cross_validate",
    "filter_maf",
    "learn",
    "load_dataset",
    "load_genotype_matrix",
    "load_trait_matrix",
    "parse_model",
    "predict",
    "prune_correlated",
    "query",
    "read_model",
    "simulate",
    "to_joint",
]
