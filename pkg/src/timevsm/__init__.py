"""Time-reflective tf-idf vector space model for tracking semantic change."""

from timevsm.context import ContextMask, ContextSpec, build_context_mask, window_context
from timevsm.corpus import IngestConfig, bin_timestamp, build_vocabulary, extract_phrases, ingest_documents, ingest_file
from timevsm.errors import (
    CorpusError,
    IndexCorruptionError,
    ParameterError,
    TimestampError,
    TimeVSMError,
    UndefinedMetricError,
    UnknownWordError,
)
from timevsm.index import Document, TemporalIndex, load_index, save_index
from timevsm.monotony import (
    MonotonyReport,
    SweepReport,
    absolute_monotony,
    average_monotony,
    jaccard,
    monotony_for,
    sensitivity_sweep,
)
from timevsm.neighborhood import (
    DiffusedVector,
    Evolution,
    Neighborhood,
    cosine_similarity,
    nearest_neighbors,
    track_evolution,
    word_vector,
)
from timevsm.synth import DriftSpec, generate_drift_corpus, planted_drift
from timevsm.weighting import DiffusionParams, diffused_weight, doc_normalizer, gaussian_factor, raw_tfidf

__version__ = "0.1.0"
