"""From-scratch classifiers: KNN, Gaussian naive Bayes, SMO-trained RBF SVM,
and the one-vs-all ensemble used by the labelling loop."""

from .base import LabeledPoint, euclidean_distance, model_size_bytes
from .knn import KnnModel, knn_fit, knn_predict, select_k
from .logistic import LogisticModel, logistic_fit
from .naive_bayes import NbModel, nb_fit, nb_posterior
from .ova import OvaEnsemble, SvmScorer, ova_add_class, ova_fit, ova_predict, ova_scores
from .svm import (
    SvmModel,
    SvmParams,
    default_gamma,
    dual_objective,
    kkt_max_violation,
    rbf_kernel,
    smo_solve,
    svm_decision,
    svm_fit,
)

__all__ = [
    "LabeledPoint",
    "euclidean_distance",
    "model_size_bytes",
    "KnnModel",
    "knn_fit",
    "knn_predict",
    "select_k",
    "LogisticModel",
    "logistic_fit",
    "NbModel",
    "nb_fit",
    "nb_posterior",
    "OvaEnsemble",
    "SvmScorer",
    "ova_add_class",
    "ova_fit",
    "ova_predict",
    "ova_scores",
    "SvmModel",
    "SvmParams",
    "default_gamma",
    "dual_objective",
    "kkt_max_violation",
    "rbf_kernel",
    "smo_solve",
    "svm_decision",
    "svm_fit",
]
