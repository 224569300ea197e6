"""Turn timestamped raw records into a :class:`~timevsm.index.TemporalIndex`.

Records are dicts with ``id``, ``timestamp`` and exactly one of ``text`` or
``tokens``; :func:`read_records` yields them from a JSONL file.  Pre-extracted
phrase lists are the main path.  :func:`extract_phrases` is a small fallback
chunker for plain text.
"""

from __future__ import annotations

import datetime as dt
import json
import re
import warnings
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from timevsm.errors import CorpusError, ParameterError, TimestampError
from timevsm.index import TemporalIndex

GRANULARITIES = ("year", "month", "raw")
TOKENIZER_MODES = ("auto", "tokens", "heuristic")
MAX_BINS = 100_000

# Function words that end a noun-phrase run.
STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are as at be because been before being
    below between both but by can could did do does doing down during each either else ever every
    few for from further had has have having he her here hers herself him himself his how however i
    if in into is it its itself just may me might more most must my myself neither no nor not of off
    on once only or other ought our ours ourselves out over own per same shall she should so some
    such than that the their theirs them themselves then there these they this those through thus to
    too under until up upon us very via was we were what when where whether which while who whom
    whose why will with within without would yet you your yours yourself yourselves
    """.split()
)

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:['\-][a-z0-9]+)*|[^\sa-z0-9]")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class IngestConfig:
    """Ingestion settings.

    ``vocab_size`` is the number of most frequent phrases kept; ``tokenizer``
    chooses between the record's ``tokens`` (``"tokens"``), the heuristic
    chunker (``"heuristic"``) or whichever the record carries (``"auto"``).
    """

    granularity: str = "year"
    vocab_size: int = 10_000
    tokenizer: str = "auto"

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ParameterError(f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}")
        if self.tokenizer not in TOKENIZER_MODES:
            raise ParameterError(f"tokenizer must be one of {TOKENIZER_MODES}, got {self.tokenizer!r}")
        if int(self.vocab_size) < 1:
            raise ParameterError("vocab_size must be >= 1")


def extract_phrases(text):
    """Split raw text into lowercase noun-phrase-like chunks.

    Words are lowercased and punctuation is dropped.  A phrase is a maximal
    run of non-stopword words; stopwords and punctuation both end a run.

    >>> extract_phrases("Gastric cancer, and gastric cancer.")
    ['gastric cancer', 'gastric cancer']
    """
    phrases = []
    run = []
    for tok in _TOKEN_RE.findall(text.lower()):
        if tok[0].isalnum() and tok not in STOPWORDS:
            run.append(tok)
            continue
        if run:
            phrases.append(" ".join(run))
            run = []
    if run:
        phrases.append(" ".join(run))
    return phrases


def normalize_phrase(phrase):
    return _WS_RE.sub(" ", str(phrase).strip().lower())


def build_vocabulary(counts, n):
    """Keep the ``n`` most frequent phrases.

    Ranking is by count descending, then phrase ascending; the returned dict
    maps phrase to its dense id in that order.
    """
    if n < 1:
        raise ParameterError("vocabulary size must be >= 1")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if n > len(ranked):
        warnings.warn(
            f"requested vocabulary of {n} but only {len(ranked)} distinct phrases exist; keeping all",
            stacklevel=2,
        )
    return {phrase: i for i, (phrase, _) in enumerate(ranked[:n])}


_DATE_RE = re.compile(r"^\s*(-?\d{1,6})(?:-(\d{1,2})(?:-(\d{1,2}))?)?(?:[T ].*)?\s*$")


def bin_timestamp(raw, granularity="year"):
    """Map a raw timestamp to an integer bin key.

    Keys are ``year`` for yearly bins, ``12 * year + month - 1`` for monthly
    bins and the integer itself for ``raw``.  Consecutive keys are one bin
    apart, so key differences are time distances in bin units.  Raises
    :class:`TimestampError` when ``raw`` does not parse.
    """
    if granularity not in GRANULARITIES:
        raise ParameterError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")
    if isinstance(raw, bool) or raw is None:
        raise TimestampError(f"unparseable timestamp: {raw!r}")

    if granularity == "raw":
        if isinstance(raw, (int, np.integer)):
            return int(raw)
        if isinstance(raw, float) and raw.is_integer():
            return int(raw)
        if isinstance(raw, str) and re.fullmatch(r"\s*-?\d+\s*", raw):
            return int(raw)
        raise TimestampError(f"unparseable raw timestamp: {raw!r}")

    if isinstance(raw, (dt.date, dt.datetime)):
        year, month = raw.year, raw.month
    elif isinstance(raw, (int, np.integer)):
        if granularity == "month":
            raise TimestampError(f"integer {raw!r} has no month component")
        year, month = int(raw), 1
    elif isinstance(raw, str):
        m = _DATE_RE.match(raw)
        if not m:
            raise TimestampError(f"unparseable timestamp: {raw!r}")
        year = int(m.group(1))
        if m.group(2) is None:
            if granularity == "month":
                raise TimestampError(f"timestamp {raw!r} has no month component")
            month = 1
        else:
            month = int(m.group(2))
        try:
            dt.date(year, month, int(m.group(3) or 1))
        except ValueError as exc:
            raise TimestampError(f"invalid date {raw!r}: {exc}") from None
    else:
        raise TimestampError(f"unparseable timestamp: {raw!r}")

    return year if granularity == "year" else 12 * year + month - 1


def bin_label(key, granularity):
    if granularity == "month":
        year, month = divmod(key, 12)
        return f"{year:04d}-{month + 1:02d}"
    return str(key)


def read_records(path):
    """Yield records from a JSONL file, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise CorpusError(f"{path}:{lineno}: record is not a JSON object")
            yield rec


def _record_phrases(rec, mode):
    has_text, has_tokens = "text" in rec, "tokens" in rec
    if has_text == has_tokens:
        raise CorpusError(f"record {rec.get('id')!r} must carry exactly one of 'text' or 'tokens'")
    if has_tokens:
        if mode == "heuristic":
            raise CorpusError(f"record {rec.get('id')!r} has tokens but tokenizer mode is 'heuristic'")
        toks = rec["tokens"]
        if not isinstance(toks, list) or not all(isinstance(t, str) for t in toks):
            raise CorpusError(f"record {rec.get('id')!r}: 'tokens' must be a list of strings")
        phrases = [normalize_phrase(t) for t in toks]
        return [p for p in phrases if p]
    if mode == "tokens":
        raise CorpusError(f"record {rec.get('id')!r} has text but tokenizer mode is 'tokens'")
    if not isinstance(rec["text"], str):
        raise CorpusError(f"record {rec.get('id')!r}: 'text' must be a string")
    return extract_phrases(rec["text"])


def ingest_documents(source, config=None):
    """Build a :class:`TemporalIndex` from an iterable of raw records.

    Records whose timestamp does not parse are skipped, as are documents left
    empty once restricted to the vocabulary; both are counted in
    ``index.stats``.  The timeline spans every bin from the earliest to the
    latest retained document, including bins with no documents.
    """
    config = config or IngestConfig()
    n_records = 0
    bad_timestamps = 0
    parsed = []  # (doc_id, bin_key, phrases)
    seen = set()
    counts = Counter()
    for rec in source:
        n_records += 1
        doc_id = rec.get("id")
        if not isinstance(doc_id, str):
            raise CorpusError(f"record {n_records}: 'id' must be a string")
        if doc_id in seen:
            raise CorpusError(f"duplicate document id {doc_id!r}")
        seen.add(doc_id)
        phrases = _record_phrases(rec, config.tokenizer)
        try:
            key = bin_timestamp(rec.get("timestamp"), config.granularity)
        except TimestampError:
            bad_timestamps += 1
            continue
        parsed.append((doc_id, key, phrases))
        counts.update(phrases)

    if n_records == 0:
        raise CorpusError("empty corpus")
    if not parsed:
        raise CorpusError("no timestamped documents")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vocab = build_vocabulary(counts, int(config.vocab_size))

    doc_ids, keys, token_runs = [], [], []
    dropped = 0
    for doc_id, key, phrases in parsed:
        ids = [vocab[p] for p in phrases if p in vocab]
        if not ids:
            dropped += 1
            continue
        doc_ids.append(doc_id)
        keys.append(key)
        token_runs.append(ids)
    if not doc_ids:
        raise CorpusError("no documents contain vocabulary phrases")

    keys = np.asarray(keys, dtype=np.int64)
    first, last = int(keys.min()), int(keys.max())
    if last - first >= MAX_BINS:
        raise CorpusError(f"timeline spans {last - first + 1} bins; use a coarser granularity")
    lengths = np.fromiter((len(r) for r in token_runs), dtype=np.int64, count=len(token_runs))
    tokens = np.fromiter((t for r in token_runs for t in r), dtype=np.int32, count=int(lengths.sum()))
    index = TemporalIndex(
        phrases=list(vocab),
        doc_ids=doc_ids,
        doc_bins=keys - first,
        bin_labels=[bin_label(k, config.granularity) for k in range(first, last + 1)],
        tokens=tokens,
        doc_offsets=np.concatenate(([0], np.cumsum(lengths))),
        config=asdict(config),
        stats={
            "records_read": n_records,
            "skipped_timestamps": bad_timestamps,
            "dropped_empty": dropped,
            "distinct_phrases": len(counts),
        },
    )
    index.validate()
    return index


def ingest_file(path, config=None):
    return ingest_documents(read_records(Path(path)), config)
