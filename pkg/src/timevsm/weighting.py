"""Gaussian time diffusion of cosine-normalized tf-idf weights.

A word ``w`` in document ``d`` (published in bin ``t_d``) gets weight

    g(t_d - t) * (1 + ln f) * ln(N / df) / norm(d)

when viewed from bin ``t``, where ``g`` is the normal density with standard
deviation ``sigma`` (zero beyond the truncation radius) and ``norm(d)`` is the
Euclidean norm of the document's raw tf-idf vector.  Logarithms are natural.

No boundary correction is applied: bins near either end of the timeline
receive kernel mass from one side only, so their diffused weights are smaller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from timevsm.errors import IndexCorruptionError, ParameterError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DiffusionParams:
    """Kernel settings.

    ``truncation_radius`` defaults to ``ceil(4 * sigma)`` bins.  With
    ``literal_denominator`` the document normalizer is the plain sum of
    squared raw weights instead of its square root.
    """

    sigma: float = 1.0
    truncation_radius: Optional[int] = None
    literal_denominator: bool = False

    def __post_init__(self):
        if not (isinstance(self.sigma, (int, float)) and math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError(f"sigma must be a positive finite number, got {self.sigma!r}")
        if self.truncation_radius is not None:
            if int(self.truncation_radius) != self.truncation_radius or self.truncation_radius < 0:
                raise ParameterError(f"truncation_radius must be a non-negative integer, got {self.truncation_radius!r}")

    @property
    def radius(self) -> int:
        return default_radius(self.sigma) if self.truncation_radius is None else int(self.truncation_radius)


def default_radius(sigma: float) -> int:
    return math.ceil(4.0 * sigma)


def gaussian_factor(t_d, t, sigma: float, truncation_radius: Optional[int] = None):
    """Normal density at offset ``t_d - t``; exactly zero past the radius.

    Accepts scalars or broadcastable arrays.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma!r}")
    radius = default_radius(sigma) if truncation_radius is None else truncation_radius
    off = np.subtract(t_d, t, dtype=np.float64)
    val = np.exp(-(off * off) / (2.0 * sigma * sigma)) / (_SQRT_2PI * sigma)
    val = np.where(np.abs(off) > radius, 0.0, val)
    return float(val) if val.ndim == 0 else val


def raw_tfidf(f, df, num_docs) -> float:
    """Sublinear tf times idf: ``(1 + ln f) * ln(num_docs / df)``, zero for ``f == 0``."""
    if df < 1 or df > num_docs:
        raise IndexCorruptionError(f"document frequency {df} outside [1, {num_docs}]")
    if f < 0:
        raise IndexCorruptionError(f"negative term frequency {f}")
    if f == 0:
        return 0.0
    return (1.0 + math.log(f)) * math.log(num_docs / df)


def _raw_matrix(index):
    tf = index.term_freq
    idf = np.log(index.num_docs / index.doc_freq)
    data = (1.0 + np.log(tf.data.astype(np.float64))) * idf[tf.indices]
    return sparse.csr_matrix((data, tf.indices.copy(), tf.indptr.copy()), shape=tf.shape)


def doc_norms(index, literal_denominator: bool = False) -> np.ndarray:
    """Per-document normalizer of the raw tf-idf vector (0 for degenerate documents)."""

    def build():
        raw = _raw_matrix(index)
        sq = np.asarray(raw.multiply(raw).sum(axis=1)).ravel()
        return sq if literal_denominator else np.sqrt(sq)

    return index.memo(("doc_norms", bool(literal_denominator)), build)


def degenerate_documents(index) -> np.ndarray:
    """Ids of documents whose words all have zero idf."""
    return np.flatnonzero(doc_norms(index) == 0)


def doc_normalizer(d: int, index, literal_denominator: bool = False) -> float:
    """Normalizer of document ``d``, recomputed from its term frequencies."""
    if not 0 <= d < index.num_docs:
        raise IndexCorruptionError(f"document {d} not in index")
    row = index.term_freq[d]
    total = 0.0
    for w, f in zip(row.indices, row.data):
        total += raw_tfidf(int(f), int(index.doc_freq[w]), index.num_docs) ** 2
    return total if literal_denominator else math.sqrt(total)


def normalized_weights(index, literal_denominator: bool = False) -> sparse.csr_matrix:
    """Documents x words matrix of raw tf-idf divided by the document normalizer.

    Zero entries (zero idf, degenerate documents) are not stored.
    """

    def build():
        raw = _raw_matrix(index)
        norms = doc_norms(index, literal_denominator)
        inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
        out = sparse.csr_matrix(sparse.diags(inv) @ raw)
        out.eliminate_zeros()
        out.sort_indices()
        return out

    return index.memo(("weights", bool(literal_denominator)), build)


def diffused_weight(w: int, d: int, t: int, params: DiffusionParams, index) -> float:
    """Weight of word ``w`` in document ``d`` as seen from bin ``t``."""
    w = index.word_id(w)
    if not 0 <= d < index.num_docs:
        raise IndexCorruptionError(f"document {d} not in index")
    g = gaussian_factor(int(index.doc_bins[d]), t, params.sigma, params.radius)
    if g == 0.0:
        return 0.0
    f = int(index.term_freq[d, w])
    if f == 0:
        return 0.0
    norm = doc_normalizer(d, index, params.literal_denominator)
    if norm == 0.0:
        return 0.0
    return g * raw_tfidf(f, int(index.doc_freq[w]), index.num_docs) / norm
