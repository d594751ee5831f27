"""From-scratch learning kernels: scaling, SVM, SMOTE, bagging, forest."""

from .scaling import Standardizer, fit_standardizer
from .metrics import ClassificationMetrics, classification_metrics
from .smote import smote_balance
from .svm import SvmModel, rbf_gram, svm_decision, svm_predict, svm_train
from .forest import ForestModel, forest_train, forest_predict
from .bagging import BaggingEnsemble, bagging_train, bagging_predict
from .pipeline import (
    PipelineConfig,
    TrainedPipeline,
    pipeline_from_dict,
    pipeline_predict,
    pipeline_to_dict,
    train_pipeline,
)

__all__ = [
    "Standardizer", "fit_standardizer",
    "ClassificationMetrics", "classification_metrics",
    "smote_balance",
    "SvmModel", "rbf_gram", "svm_decision", "svm_predict", "svm_train",
    "ForestModel", "forest_train", "forest_predict",
    "BaggingEnsemble", "bagging_train", "bagging_predict",
    "PipelineConfig", "TrainedPipeline", "train_pipeline",
    "pipeline_predict", "pipeline_to_dict", "pipeline_from_dict",
]
