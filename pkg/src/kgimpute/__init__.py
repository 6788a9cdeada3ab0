"""Impute word embeddings for out-of-vocabulary words.

The pipeline builds a knowledge graph from definition-text overlap,
trains a small graph convolutional network to regress node outputs onto
pre-trained vectors, assigns the trained outputs to OOV words, and
scores the result on word-pair similarity benchmarks.
"""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, load_embeddings, save_embeddings
from .evaluate import (EvalResult, SimilarityDataset, evaluate_dataset,
                       load_dataset, pearson, score_pairs, spearman)
from .gcn import (ForwardTrace, GcnModel, aggregate, backward, forward,
                  forward_dense_oracle, init_model, load_model, save_model)
from .graphbuild import (KnowledgeGraph, build_graph, jaccard, load_graph,
                         save_graph)
from .grounding import (FrequencyList, GroundingRecord, VocabSelection,
                        load_frequency_list, load_grounding_corpus,
                        select_vocabulary, tokenize)
from .imputer import ImputationResult, impute
from .trainer import TrainConfig, TrainReport, mse_loss, train
from .wikifetch import FetchCacheEntry, FetchClient, FetchConfig, build_corpus

__all__ = [
    "EmbeddingTable", "load_embeddings", "save_embeddings",
    "GroundingRecord", "FrequencyList", "VocabSelection", "tokenize",
    "load_grounding_corpus", "load_frequency_list", "select_vocabulary",
    "KnowledgeGraph", "jaccard", "build_graph", "save_graph", "load_graph",
    "GcnModel", "ForwardTrace", "init_model", "aggregate", "forward",
    "backward", "forward_dense_oracle", "save_model", "load_model",
    "TrainConfig", "TrainReport", "mse_loss", "train",
    "ImputationResult", "impute",
    "SimilarityDataset", "EvalResult", "load_dataset", "score_pairs",
    "pearson", "spearman", "evaluate_dataset",
    "FetchCacheEntry", "FetchClient", "FetchConfig", "build_corpus",
    "__version__",
]
