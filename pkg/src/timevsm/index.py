"""Read-only term/document statistics over a binned corpus, plus on-disk storage.

A :class:`TemporalIndex` keeps every document as a run of word ids inside one
flat token array.  Term frequencies live in a documents x words CSR matrix and
occurrence positions in a word-major postings table, so both document-wise and
word-wise access are slices.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from timevsm.errors import IndexCorruptionError, ParameterError, UnknownWordError

FORMAT_VERSION = 1

_ARRAYS = (
    "tokens",
    "doc_offsets",
    "doc_bins",
    "tf_indptr",
    "tf_indices",
    "tf_data",
    "post_ptr",
    "post_doc",
    "post_pos",
)


@dataclass(frozen=True)
class Document:
    """One retained document: identifier, bin index and word-id sequence."""

    doc_id: str
    timestamp_bin: int
    tokens: tuple

    @property
    def distinct(self):
        return frozenset(self.tokens)


class TemporalIndex:
    """Vocabulary, frequency tables and term positions over a binned timeline.

    Instances are treated as immutable once built; the only mutable state is a
    private memo of derived tables (document norms, context masks) which is
    guarded by a lock so concurrent readers can share one index.
    """

    def __init__(
        self,
        phrases,
        doc_ids,
        doc_bins,
        bin_labels,
        tokens,
        doc_offsets,
        term_freq=None,
        postings=None,
        config=None,
        stats=None,
    ):
        self.phrases = list(phrases)
        self.word_ids = {p: i for i, p in enumerate(self.phrases)}
        self.doc_ids = list(doc_ids)
        self.doc_bins = np.asarray(doc_bins, dtype=np.int64)
        self.bin_labels = list(bin_labels)
        self.tokens = np.asarray(tokens, dtype=np.int32)
        self.doc_offsets = np.asarray(doc_offsets, dtype=np.int64)
        self.config = dict(config or {})
        self.stats = dict(stats or {})

        if term_freq is None or postings is None:
            term_freq, postings = _derive_tables(self.tokens, self.doc_offsets, len(self.phrases))
        self.term_freq = term_freq
        self.post_ptr, self.post_doc, self.post_pos = postings
        self.doc_freq = np.diff(self.term_freq.tocsc().indptr).astype(np.int64)

        self._memo = {}
        self._lock = threading.Lock()

    # -- sizes -----------------------------------------------------------
    @property
    def num_docs(self):
        return len(self.doc_ids)

    @property
    def vocab_size(self):
        return len(self.phrases)

    @property
    def num_bins(self):
        return len(self.bin_labels)

    @property
    def timestamps(self):
        return np.arange(self.num_bins)

    # -- lookups ---------------------------------------------------------
    def word_id(self, word):
        """Resolve a phrase string or integer id to a word id."""
        if isinstance(word, (int, np.integer)) and not isinstance(word, bool):
            if 0 <= word < self.vocab_size:
                return int(word)
            raise UnknownWordError(word)
        try:
            return self.word_ids[word]
        except KeyError:
            raise UnknownWordError(word, self.phrases) from None

    def bin_index(self, label):
        """Resolve a bin label (or an in-range integer index) to a bin index."""
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if 0 <= label < self.num_bins:
                return int(label)
        elif label in self.bin_labels:
            return self.bin_labels.index(label)
        raise ParameterError(f"unknown timestamp bin: {label!r}")

    def doc_tokens(self, d):
        return self.tokens[self.doc_offsets[d] : self.doc_offsets[d + 1]]

    def document(self, d):
        return Document(self.doc_ids[d], int(self.doc_bins[d]), tuple(int(t) for t in self.doc_tokens(d)))

    def docs_with(self, w):
        """Sorted ids of the documents containing word ``w``."""
        col = self._tf_csc()
        return col.indices[col.indptr[w] : col.indptr[w + 1]]

    def positions(self, w, d):
        """Sorted occurrence positions of word ``w`` in document ``d``."""
        lo, hi = self.post_ptr[w], self.post_ptr[w + 1]
        docs = self.post_doc[lo:hi]
        a, b = np.searchsorted(docs, [d, d + 1])
        return self.post_pos[lo + a : lo + b]

    def occurrences(self, w):
        """(doc, position) arrays for every occurrence of ``w``, sorted."""
        lo, hi = self.post_ptr[w], self.post_ptr[w + 1]
        return self.post_doc[lo:hi], self.post_pos[lo:hi]

    @property
    def docs_by_bin(self):
        order = np.argsort(self.doc_bins, kind="stable")
        cuts = np.searchsorted(self.doc_bins[order], np.arange(1, self.num_bins))
        return np.split(order, cuts)

    def memo(self, key, factory):
        """Return a cached derived table, building it once on first use."""
        try:
            return self._memo[key]
        except KeyError:
            pass
        value = factory()
        with self._lock:
            return self._memo.setdefault(key, value)

    def _tf_csc(self):
        return self.memo("tf_csc", lambda: self.term_freq.tocsc())

    # -- integrity -------------------------------------------------------
    def validate(self):
        """Cross-check the frequency tables; raise IndexCorruptionError on mismatch."""
        D, V = self.num_docs, self.vocab_size
        problems = []
        if len(self.word_ids) != V:
            problems.append("duplicate phrases in vocabulary")
        if len(set(self.doc_ids)) != D:
            problems.append("duplicate document ids")
        if self.doc_offsets.shape != (D + 1,) or self.doc_offsets[0] != 0 or self.doc_offsets[-1] != len(self.tokens):
            problems.append("document offsets do not cover the token array")
        elif np.any(np.diff(self.doc_offsets) <= 0):
            problems.append("empty document retained")
        if self.doc_bins.shape != (D,) or (D and (self.doc_bins.min() < 0 or self.doc_bins.max() >= self.num_bins)):
            problems.append("document bin outside the timeline")
        if len(self.tokens) and (self.tokens.min() < 0 or self.tokens.max() >= V):
            problems.append("token id outside the vocabulary")
        if self.term_freq.shape != (D, V):
            problems.append("term-frequency table has the wrong shape")
        if problems:
            raise IndexCorruptionError("; ".join(problems))

        tf, postings = _derive_tables(self.tokens, self.doc_offsets, V)
        if (tf != self.term_freq).nnz:
            problems.append("term frequencies disagree with token stream")
        for name, a, b in zip(("pointers", "documents", "positions"), postings, (self.post_ptr, self.post_doc, self.post_pos)):
            if not np.array_equal(a, b):
                problems.append(f"postings {name} disagree with token stream")
        occurrences = np.diff(self.post_ptr)
        if not np.array_equal(occurrences, np.asarray(self.term_freq.sum(axis=0)).ravel()):
            problems.append("position counts disagree with term frequencies")
        if np.any(self.doc_freq < 1) or np.any(self.doc_freq > D):
            problems.append("document frequency outside [1, num_docs]")
        if problems:
            raise IndexCorruptionError("; ".join(problems))


def _derive_tables(tokens, doc_offsets, vocab_size):
    lengths = np.diff(doc_offsets)
    num_docs = len(lengths)
    doc_of = np.repeat(np.arange(num_docs, dtype=np.int64), lengths)
    pos_of = np.arange(len(tokens), dtype=np.int64) - doc_offsets[doc_of]
    tf = sparse.csr_matrix(
        (np.ones(len(tokens), dtype=np.int64), (doc_of, tokens.astype(np.int64))),
        shape=(num_docs, vocab_size),
    )
    tf.sum_duplicates()
    tf.sort_indices()
    order = np.lexsort((pos_of, doc_of, tokens))
    counts = np.bincount(tokens, minlength=vocab_size)
    post_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return tf, (post_ptr, doc_of[order], pos_of[order])


# -- persistence ---------------------------------------------------------------


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def save_index(index, directory):
    """Write ``index`` to ``directory`` and return the manifest dict.

    The layout is one ``.npy`` file per array plus JSON tables; the manifest
    records the format version, the ingestion config, corpus counts and a
    SHA-256 for every file.  Output is byte-identical for identical indexes.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    tf = index.term_freq
    arrays = {
        "tokens": index.tokens,
        "doc_offsets": index.doc_offsets,
        "doc_bins": index.doc_bins,
        "tf_indptr": tf.indptr.astype(np.int64),
        "tf_indices": tf.indices.astype(np.int32),
        "tf_data": tf.data.astype(np.int64),
        "post_ptr": index.post_ptr,
        "post_doc": index.post_doc,
        "post_pos": index.post_pos,
    }
    files = {}
    for name in _ARRAYS:
        path = out / f"{name}.npy"
        np.save(path, np.ascontiguousarray(arrays[name]), allow_pickle=False)
        files[path.name] = _sha256(path)
    for name, obj in (
        ("vocabulary.json", index.phrases),
        ("documents.json", index.doc_ids),
        ("bins.json", index.bin_labels),
    ):
        _dump_json(out / name, obj)
        files[name] = _sha256(out / name)

    manifest = {
        "format_version": FORMAT_VERSION,
        "config": index.config,
        "counts": {
            "num_docs": index.num_docs,
            "vocab_size": index.vocab_size,
            "num_bins": index.num_bins,
            "num_tokens": int(len(index.tokens)),
        },
        "stats": index.stats,
        "files": files,
    }
    _dump_json(out / "manifest.json", manifest)
    return manifest


def read_manifest(directory):
    path = Path(directory) / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"no index manifest at {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def load_index(directory, verify=True):
    """Load an index written by :func:`save_index`."""
    src = Path(directory)
    manifest = read_manifest(src)
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise IndexCorruptionError(f"index format version {version!r} is not supported (expected {FORMAT_VERSION})")
    if verify:
        for name, digest in manifest["files"].items():
            if _sha256(src / name) != digest:
                raise IndexCorruptionError(f"checksum mismatch for {name}")

    a = {name: np.load(src / f"{name}.npy", allow_pickle=False) for name in _ARRAYS}
    phrases = json.loads((src / "vocabulary.json").read_text(encoding="utf-8"))
    doc_ids = json.loads((src / "documents.json").read_text(encoding="utf-8"))
    bins = json.loads((src / "bins.json").read_text(encoding="utf-8"))
    tf = sparse.csr_matrix((a["tf_data"], a["tf_indices"], a["tf_indptr"]), shape=(len(doc_ids), len(phrases)))
    index = TemporalIndex(
        phrases,
        doc_ids,
        a["doc_bins"],
        bins,
        a["tokens"],
        a["doc_offsets"],
        term_freq=tf,
        postings=(a["post_ptr"], a["post_doc"], a["post_pos"]),
        config=manifest.get("config"),
        stats=manifest.get("stats"),
    )
    if verify:
        index.validate()
    return index
