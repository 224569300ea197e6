import numpy as np
import pytest

from timevsm import IngestConfig, ingest_documents

ACCEPTANCE_RESULTS = []


def records(docs, bins):
    return [{"id": f"d{i}", "timestamp": int(b), "tokens": list(toks)} for i, (toks, b) in enumerate(zip(docs, bins))]


def toy_index(docs, bins):
    return ingest_documents(records(docs, bins), IngestConfig(granularity="raw", vocab_size=10_000))


def random_corpus(rng, max_docs=20, max_words=30, max_bins=5, max_len=12):
    n_docs = int(rng.integers(3, max_docs + 1))
    n_words = int(rng.integers(3, max_words + 1))
    n_bins = int(rng.integers(1, max_bins + 1))
    words = [f"w{i:02d}" for i in range(n_words)]
    docs = [list(rng.choice(words, size=int(rng.integers(1, max_len + 1)))) for _ in range(n_docs)]
    bins = [int(b) for b in rng.integers(0, n_bins, size=n_docs)]
    return docs, bins


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
