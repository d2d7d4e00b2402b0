"""dupfinder: deduplication toolkit for short-text title corpora.

Candidate pairs come from five blocking strategies, get scored under three
distance families (edit distance, bag-of-words cosine, precomputed
sentence-embedding cosine), and are evaluated against human-annotated
ground truth collected through the bundled annotation service.
"""

from .corpus import (
    Corpus,
    TitleRecord,
    detect_language,
    load_corpus,
    mode_word_count,
    normalize_title,
    tokenize,
)
from .distance import (
    PairScores,
    cosine_similarity,
    levenshtein,
    levenshtein_normalized,
    score_pair,
    score_stream,
    token_count_vector,
)
from .embedding import EmbeddingStore, embed_similarity, load_embeddings, save_embeddings
from .evaluation import (
    EvalReport,
    GroundTruthLabel,
    Measure,
    Verdict,
    classify,
    confusion,
    correlate,
    export_scatter,
    sample_pairs,
)
from .pairing import CandidatePair, PairingConfig, Strategy, generate

__version__ = "0.1.0"

__all__ = [
    "CandidatePair",
    "Corpus",
    "EmbeddingStore",
    "EvalReport",
    "GroundTruthLabel",
    "Measure",
    "PairScores",
    "PairingConfig",
    "Strategy",
    "TitleRecord",
    "Verdict",
    "classify",
    "confusion",
    "correlate",
    "cosine_similarity",
    "detect_language",
    "embed_similarity",
    "export_scatter",
    "generate",
    "levenshtein",
    "levenshtein_normalized",
    "load_corpus",
    "load_embeddings",
    "mode_word_count",
    "normalize_title",
    "sample_pairs",
    "save_embeddings",
    "score_pair",
    "score_stream",
    "token_count_vector",
    "tokenize",
]
