"""Which words count as context of a target word, document by document."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from timevsm.errors import ParameterError

CONTEXT_KINDS = ("document", "window")


@dataclass(frozen=True)
class ContextSpec:
    """Document-level context, or a window of ``window_size`` tokens per side."""

    kind: str = "window"
    window_size: Optional[int] = 2

    def __post_init__(self):
        if self.kind not in CONTEXT_KINDS:
            raise ParameterError(f"context kind must be one of {CONTEXT_KINDS}, got {self.kind!r}")
        if self.kind == "window":
            if self.window_size is None or int(self.window_size) != self.window_size or self.window_size < 1:
                raise ParameterError(f"window context needs window_size >= 1, got {self.window_size!r}")
        else:
            object.__setattr__(self, "window_size", None)

    @classmethod
    def document(cls):
        return cls("document", None)

    @classmethod
    def window(cls, size):
        return cls("window", size)

    @property
    def label(self):
        return "document" if self.kind == "document" else f"window-{self.window_size}"


def window_context(tokens, target, window_size):
    """Words within ``window_size`` positions of any occurrence of ``target``.

    The token sequence is treated as flat; windows cross sentence boundaries.

    The target itself is part of the result.  Returns an empty set when the
    target does not occur.
    """
    tokens = list(tokens)
    found = set()
    for p, tok in enumerate(tokens):
        if tok == target:
            found.update(tokens[max(0, p - window_size) : p + window_size + 1])
    return found


@dataclass(frozen=True)
class ContextMask:
    """Per-document context sets for one target.

    ``docs`` lists the documents containing the target (sorted); row ``i`` of
    the boolean ``matrix`` marks the context words of ``docs[i]``.
    """

    target: int
    spec: ContextSpec
    docs: np.ndarray
    matrix: sparse.csr_matrix

    def __len__(self):
        return len(self.docs)

    def words(self, i):
        m = self.matrix
        return m.indices[m.indptr[i] : m.indptr[i + 1]]

    def as_dict(self):
        return {int(d): frozenset(int(v) for v in self.words(i)) for i, d in enumerate(self.docs)}


def build_context_mask(index, target, spec):
    """Context mask of ``target`` over every document that contains it.

    Masks are memoized on the index per (target, spec).
    """
    w = index.word_id(target)
    return index.memo(("mask", w, spec), lambda: _build_mask(index, w, spec))


def _build_mask(index, w, spec):
    docs = index.docs_with(w)
    V = index.vocab_size
    if spec.kind == "document":
        rows = index.term_freq[docs]
        matrix = sparse.csr_matrix(
            (np.ones(rows.nnz, dtype=bool), rows.indices.copy(), rows.indptr.copy()), shape=(len(docs), V)
        )
        return ContextMask(w, spec, docs, matrix)

    occ_doc, occ_pos = index.occurrences(w)
    k = spec.window_size
    offsets = np.arange(-k, k + 1)
    pos = occ_pos[:, None] + offsets[None, :]
    length = (index.doc_offsets[occ_doc + 1] - index.doc_offsets[occ_doc])[:, None]
    valid = (pos >= 0) & (pos < length)
    flat = (index.doc_offsets[occ_doc][:, None] + pos)[valid]
    rows = np.broadcast_to(np.searchsorted(docs, occ_doc)[:, None], pos.shape)[valid]
    matrix = sparse.csr_matrix(
        (np.ones(len(flat), dtype=np.int64), (rows, index.tokens[flat].astype(np.int64))), shape=(len(docs), V)
    )
    matrix.sum_duplicates()
    matrix.sort_indices()
    matrix.data = np.ones(matrix.nnz, dtype=bool)
    return ContextMask(w, spec, docs, matrix)
