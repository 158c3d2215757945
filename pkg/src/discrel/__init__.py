"""Implicit discourse relation classification with averaged per-feature-type
logistic regression classifiers and semantic-role features."""

__version__ = "0.1.0"

from .corpus import (RELATIONS, UNK, BrownLexicon, InstancePair, SegmentAnnotation, Token,
                     cluster_of, load_brown_lexicon, load_instances, save_instances)
from .ensemble import (ClassifierSuite, MemberSpec, RelationEnsemble, ensemble_score, load_suite,
                       predict, predict_all, save_suite, train_allfeats, train_suite)
from .errors import DiscrelError
from .eval import EvalReport, evaluate, format_table
from .features import (FeatureType, FeatureUnion, FeatureVector, Vocabulary, build_vocabulary,
                       extract, parse_feature_type, vectorize)
from .inspection import explain, top_weights
from .linmodel import LinearModel, TrainConfig, load_model, loss_and_gradient, save_model, score, train
from .selection import SelectionConfig, greedy_select, select_all
from .synth import SynthConfig, generate_corpus, synth_lexicon

__all__ = [
    "RELATIONS", "UNK", "BrownLexicon", "InstancePair", "SegmentAnnotation", "Token", "cluster_of",
    "load_brown_lexicon", "load_instances", "save_instances",
    "ClassifierSuite", "MemberSpec", "RelationEnsemble", "ensemble_score", "load_suite", "predict",
    "predict_all", "save_suite", "train_allfeats", "train_suite",
    "DiscrelError", "EvalReport", "evaluate", "format_table",
    "FeatureType", "FeatureUnion", "FeatureVector", "Vocabulary", "build_vocabulary", "extract",
    "parse_feature_type", "vectorize",
    "explain", "top_weights",
    "LinearModel", "TrainConfig", "load_model", "loss_and_gradient", "save_model", "score", "train",
    "SelectionConfig", "greedy_select", "select_all",
    "SynthConfig", "generate_corpus", "synth_lexicon",
]
