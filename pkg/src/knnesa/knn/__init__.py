"""kNN label ranking: candidate features, learners and label-count strategies."""

from knnesa.knn.classifier import DEFAULT_K, Prediction, classify, rank_document
from knnesa.knn.discretize import discretize_apply, discretize_fit, mdl_cut_points
from knnesa.knn.features import (
    CandidateLabel,
    TrainingInstance,
    assemble_training_set,
    collect_candidates,
    extract_candidates,
    lexical_features,
    neighbor_features,
)
from knnesa.knn.models import RankerModel, train
from knnesa.knn.selection import (
    rank,
    score_candidates,
    select,
    select_average_size,
    select_cutoff,
    select_threshold,
)

__all__ = [
    "DEFAULT_K",
    "CandidateLabel",
    "Prediction",
    "RankerModel",
    "TrainingInstance",
    "assemble_training_set",
    "classify",
    "collect_candidates",
    "discretize_apply",
    "discretize_fit",
    "extract_candidates",
    "lexical_features",
    "mdl_cut_points",
    "neighbor_features",
    "rank",
    "rank_document",
    "score_candidates",
    "select",
    "select_average_size",
    "select_cutoff",
    "select_threshold",
    "train",
]
