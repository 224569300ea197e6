"""Per-bin nearest neighbours of a word in the diffused term-document space.

A word's vector at bin ``t`` is its row of the diffused term-document matrix:
one entry per document, weighted by the Gaussian kernel around ``t``.  For a
target word, every candidate's vector keeps only the documents where the
candidate lies in the target's context; the target's own vector is left
unfiltered.  Neighbours are ranked by cosine similarity.

Because the kernel weight of a document is shared by every word of that
document, all bins can be scored at once: with ``G`` the (bins x documents)
matrix of squared kernel weights restricted to the target's documents and
``F`` the filtered candidate weights,

    dot  = G @ (n_target * F)        |cand|^2 = G @ F**2        |target|^2 = G @ n_target**2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from timevsm.context import ContextSpec, build_context_mask
from timevsm.errors import ParameterError
from timevsm.weighting import DiffusionParams, gaussian_factor, normalized_weights

# Scores are rounded to this many mantissa bits (~12 significant digits) so
# that values differing only by float rounding fall back to the phrase tie-break.
SCORE_BITS = 40

SELECTIONS = ("per-bin", "peak")


@dataclass(frozen=True)
class DiffusedVector:
    word: int
    bin: int
    entries: dict

    def norm(self):
        return math.sqrt(sum(v * v for v in self.entries.values()))


@dataclass(frozen=True)
class Neighborhood:
    """Top-``k`` neighbours of ``target`` at ``bin``, best first."""

    target: int
    bin: int
    k: int
    members: tuple  # ((word id, score), ...)

    @property
    def ids(self):
        return [w for w, _ in self.members]

    @property
    def scores(self):
        return [s for _, s in self.members]

    def __len__(self):
        return len(self.members)


@dataclass
class Evolution:
    """Result of :func:`track_evolution`.

    ``series`` maps word id to its score at each entry of ``bins``.
    """

    target: int
    k: int
    spec: ContextSpec
    params: DiffusionParams
    bins: np.ndarray
    neighborhoods: list
    series: dict = field(default_factory=dict)
    selection: str = "per-bin"

    def neighborhood_rows(self, index):
        """(target, bin, rank, neighbor, score) tuples."""
        t = index.phrases[self.target]
        return [
            (t, index.bin_labels[nb.bin], rank, index.phrases[w], s)
            for nb in self.neighborhoods
            for rank, (w, s) in enumerate(nb.members, 1)
        ]

    def series_rows(self, index):
        """(target, neighbor, bin, score) tuples, zero-filled."""
        t = index.phrases[self.target]
        return [
            (t, index.phrases[w], index.bin_labels[b], float(s))
            for w, values in self.series.items()
            for b, s in zip(self.bins, values)
        ]


def _check_params(params):
    if params is None:
        return DiffusionParams()
    if not isinstance(params, DiffusionParams):
        raise ParameterError("params must be a DiffusionParams")
    return params


def _check_k(k):
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k!r}")
    return int(k)


def _check_bins(index, bins):
    if bins is None:
        return index.timestamps
    bins = np.asarray([index.bin_index(b) for b in bins], dtype=np.int64)
    if len(bins) == 0:
        raise ParameterError("no timestamp bins selected")
    return bins


def word_vector(word, bin, params, index):
    """Diffused vector of ``word`` at ``bin`` as a sparse document map."""
    params = _check_params(params)
    w = index.word_id(word)
    t = index.bin_index(bin)
    weights = normalized_weights(index, params.literal_denominator)
    col = weights[:, w].tocoo()
    g = gaussian_factor(index.doc_bins[col.row], t, params.sigma, params.radius)
    vals = g * col.data
    keep = vals > 0
    return DiffusedVector(w, t, dict(zip(col.row[keep].tolist(), vals[keep].tolist())))


def cosine_similarity(u, v):
    """Cosine of two sparse vectors given as ``{dimension: value}`` maps.

    Zero when either vector is empty or all-zero; clipped to at most 1.
    """
    if isinstance(u, DiffusedVector):
        u = u.entries
    if isinstance(v, DiffusedVector):
        v = v.entries
    if len(u) > len(v):
        u, v = v, u
    dot = sum(x * v[d] for d, x in u.items() if d in v)
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return min(1.0, dot / (nu * nv))


def similarity_table(index, target, spec, params, bins=None):
    """Cosine of every context candidate against ``target`` at each bin.

    Returns ``(candidates, scores)``: candidate word ids (ascending) and a
    ``len(bins) x len(candidates)`` array.  Candidates are words with at least
    one entry surviving the context filter; the target is excluded.
    """
    params = _check_params(params)
    w = index.word_id(target)
    bins = _check_bins(index, bins)
    mask = build_context_mask(index, w, spec)
    docs = mask.docs

    weights = normalized_weights(index, params.literal_denominator)
    rows = weights[docs]
    n_target = np.asarray(rows[:, w].todense()).ravel()
    filtered = rows.multiply(mask.matrix).tocsc()
    filtered.eliminate_zeros()
    candidates = np.flatnonzero(np.diff(filtered.indptr))
    candidates = candidates[candidates != w]
    if len(candidates) == 0:
        return candidates, np.zeros((len(bins), 0))
    filtered = filtered[:, candidates].tocsr()

    g = gaussian_factor(index.doc_bins[docs][None, :], bins[:, None], params.sigma, params.radius)
    g2 = g * g
    target_sq = g2 @ (n_target * n_target)
    dot = np.asarray((sparse.diags(n_target) @ filtered).T @ g2.T).T
    cand_sq = np.asarray(filtered.multiply(filtered).T @ g2.T).T

    denom = np.sqrt(target_sq)[:, None] * np.sqrt(cand_sq)
    scores = np.divide(dot, denom, out=np.zeros_like(dot), where=(denom > 0) & (dot > 0))
    np.minimum(scores, 1.0, out=scores)
    return candidates, snap(scores)


def snap(x):
    """Round to :data:`SCORE_BITS` mantissa bits."""
    m, e = np.frexp(x)
    return np.ldexp(np.round(m * 2.0**SCORE_BITS) / 2.0**SCORE_BITS, e)


def _phrase_order(index):
    def build():
        order = np.empty(index.vocab_size, dtype=np.int64)
        order[sorted(range(index.vocab_size), key=index.phrases.__getitem__)] = np.arange(index.vocab_size)
        return order

    return index.memo("phrase_order", build)


def rank(candidates, scores, k, index):
    """Top ``k`` ``(word, score)`` pairs with positive score.

    Ordered by score descending, then phrase ascending.
    """
    pos = np.flatnonzero(scores > 0)
    order = pos[np.lexsort((_phrase_order(index)[candidates[pos]], -scores[pos]))][:k]
    return tuple((int(candidates[i]), float(scores[i])) for i in order)


def nearest_neighbors(target, bin, k, spec, params, index):
    """The ``k`` nearest context-filtered neighbours of ``target`` at ``bin``."""
    k = _check_k(k)
    w = index.word_id(target)
    t = index.bin_index(bin)
    cands, scores = similarity_table(index, w, spec, params, [t])
    return Neighborhood(w, t, k, rank(cands, scores[0], k, index))


def track_evolution(target, k, spec, params, index, bins=None, selection="per-bin"):
    """Neighbourhoods of ``target`` at every bin plus per-word score series.

    With ``selection="per-bin"`` the series cover every word that enters any
    bin's top ``k``.  With ``selection="peak"`` they cover the ``k`` words
    whose plain (undiffused) tf-idf cosine with the target is highest at any
    bin, tracked through the diffused model.
    """
    k = _check_k(k)
    if selection not in SELECTIONS:
        raise ParameterError(f"selection must be one of {SELECTIONS}, got {selection!r}")
    params = _check_params(params)
    w = index.word_id(target)
    bins = _check_bins(index, bins)
    cands, scores = similarity_table(index, w, spec, params, bins)
    neighborhoods = [Neighborhood(w, int(b), k, rank(cands, scores[i], k, index)) for i, b in enumerate(bins)]

    column = {int(c): j for j, c in enumerate(cands)}
    if selection == "per-bin":
        chosen = {v for nb in neighborhoods for v in nb.ids}
        chosen = sorted(chosen, key=lambda v: (-scores[:, column[v]].max(), index.phrases[v]))
    else:
        plain = DiffusionParams(params.sigma, 0, params.literal_denominator)
        pc, ps = similarity_table(index, w, spec, plain, bins)
        chosen = [v for v, _ in rank(pc, ps.max(axis=0) if ps.size else np.zeros(0), k, index)]

    series = {}
    for v in chosen:
        series[v] = scores[:, column[v]].copy() if v in column else np.zeros(len(bins))
    return Evolution(w, k, spec, params, bins, neighborhoods, series, selection)
