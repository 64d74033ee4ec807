"""Sharia-compliance screening for cryptocurrencies.

Pipeline: fetch project copy, reduce it to stems, extract binary
compliance features, classify with one of three trained models, and
explain the ruling. Scholar-reviewed rulings override machine output.
"""

from .corpus import (
    CoinRecord,
    Dataset,
    DatasetFormatError,
    FeatureId,
    Priority,
    Ruling,
    SynthesisError,
    dataset_hash,
    load_dataset,
    save_dataset,
    synthesize_fixture,
    validate_constraints,
)
from .evaluation import EvaluationError, compare_report, cross_validate, stratified_folds
from .featurex import (
    Explanation,
    FeatureVector,
    Lexicon,
    LexiconError,
    default_lexicon,
    explain,
    extract,
    load_lexicon,
)
from .learners import (
    ModelChecksumError,
    ModelFormatError,
    ModelVersionError,
    Prediction,
    TrainedModel,
    TrainingError,
    load_model,
    predict,
    save_model,
    train,
    train_lr,
    train_nb,
    train_svm,
)
from .market import (
    CoinMetadata,
    FetchError,
    MarketClient,
    MarketError,
    MissingApiKeyError,
    UnknownCoinError,
)
from .pipeline import ClassifyResult, UndecodableContentError, classify_query
from .porter import stem_word
from .rulestore import AuthError, RuleStore, RuleStoreError, RulingDraft, RulingEntry
from .service import ServiceConfig, create_app
from .textprep import RawDocument, preprocess, strip_html, tokenize

__version__ = "0.1.0"

__all__ = [
    "AuthError",
    "ClassifyResult",
    "CoinMetadata",
    "CoinRecord",
    "Dataset",
    "DatasetFormatError",
    "EvaluationError",
    "Explanation",
    "FeatureId",
    "FeatureVector",
    "FetchError",
    "Lexicon",
    "LexiconError",
    "MarketClient",
    "MarketError",
    "MissingApiKeyError",
    "ModelChecksumError",
    "ModelFormatError",
    "ModelVersionError",
    "Prediction",
    "Priority",
    "RawDocument",
    "RuleStore",
    "RuleStoreError",
    "Ruling",
    "RulingDraft",
    "RulingEntry",
    "ServiceConfig",
    "SynthesisError",
    "TrainedModel",
    "TrainingError",
    "UndecodableContentError",
    "UnknownCoinError",
    "classify_query",
    "compare_report",
    "create_app",
    "cross_validate",
    "dataset_hash",
    "default_lexicon",
    "explain",
    "extract",
    "load_dataset",
    "load_lexicon",
    "load_model",
    "predict",
    "preprocess",
    "save_dataset",
    "save_model",
    "stem_word",
    "stratified_folds",
    "strip_html",
    "synthesize_fixture",
    "tokenize",
    "train",
    "train_lr",
    "train_nb",
    "train_svm",
    "validate_constraints",
]
