"""Python bindings for the genolm C++ core."""

from ._core import (
    BpeTokenizer,
    GenolmError,
    KmerRidgePredictor,
    KmerTokenizer,
    MarkovLm,
    UniformLm,
    auprc,
    auroc,
    conditioned_generate,
    contribution_scores,
    fit_kmer_ridge,
    generate,
    marginal_nucleotide_prob,
    mcc,
    parse_genbank,
    pca_project,
    pearson_r,
    profile_embedding,
    quantile_labels,
    recovery_accuracy,
    silhouette,
    translate,
    vep_score,
    weighted_f1,
)

__all__ = [name for name in dir() if not name.startswith("_")]
