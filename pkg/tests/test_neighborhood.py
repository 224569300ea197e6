import math

import numpy as np
import pytest

from conftest import random_corpus, toy_index
from oracle import DenseModel
from timevsm import (
    ContextSpec,
    DiffusionParams,
    ParameterError,
    UnknownWordError,
    cosine_similarity,
    ingest_documents,
    nearest_neighbors,
    track_evolution,
    word_vector,
)
from timevsm.neighborhood import similarity_table
from timevsm.synth import DriftSpec, generate_drift_corpus, make_vocab

W2 = ContextSpec.window(2)


def named(idx, nb):
    return [(idx.phrases[w], s) for w, s in nb.members]


class TestCosine:
    def test_identity(self):
        v = {1: 0.3, 4: 2.0}
        assert cosine_similarity(v, v) == pytest.approx(1.0)
        assert cosine_similarity(v, v) <= 1.0

    def test_disjoint(self):
        assert cosine_similarity({1: 1.0}, {2: 1.0}) == 0.0

    def test_hand_value(self):
        assert cosine_similarity({1: 1.0, 2: 1.0}, {1: 1.0}) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_empty_and_zero(self):
        assert cosine_similarity({}, {1: 1.0}) == 0.0
        assert cosine_similarity({1: 0.0}, {1: 1.0}) == 0.0

    def test_bounds_random(self, rng):
        for _ in range(200):
            u = {int(i): float(x) for i, x in zip(rng.integers(0, 20, 8), rng.random(8))}
            v = {int(i): float(x) for i, x in zip(rng.integers(0, 20, 8), rng.random(8))}
            assert 0.0 <= cosine_similarity(u, v) <= 1.0


class TestWordVector:
    def test_empty_when_far(self):
        idx = toy_index([["a", "b"], ["b"], ["c"]], [0, 0, 9])
        assert word_vector("a", 9, DiffusionParams(1.0), idx).entries == {}

    def test_radius_zero_same_bin_only(self):
        idx = toy_index([["a", "b"], ["a", "c"], ["c"], ["b"]], [0, 1, 2, 1])
        v = word_vector("a", 1, DiffusionParams(0.1, truncation_radius=0), idx)
        assert set(v.entries) == {1}

    def test_matches_dense_oracle(self):
        docs = [["a", "b", "a"], ["b", "c"], ["a", "c", "d"]]
        bins = [0, 1, 2]
        idx = toy_index(docs, bins)
        ref = DenseModel(docs, bins, sigma=1.0)
        for p in ref.words:
            for t in range(3):
                got = word_vector(p, t, DiffusionParams(1.0), idx).entries
                want = ref.vector(p, t)
                for d in range(3):
                    assert got.get(d, 0.0) == pytest.approx(want[d], abs=1e-12)
                assert all(x > 0 for x in got.values())

    def test_unknown(self):
        with pytest.raises(UnknownWordError):
            word_vector("zz", 0, DiffusionParams(), toy_index([["a"]], [0]))


class TestNearestNeighbors:
    def test_single_collocate(self):
        docs = [["t", "v"], ["t", "v"], ["x", "y"], ["y", "x", "z"]]
        idx = toy_index(docs, [0, 0, 0, 0])
        nb = nearest_neighbors("t", 0, 5, W2, DiffusionParams(), idx)
        assert [p for p, _ in named(idx, nb)] == ["v"]
        assert nb.scores[0] == pytest.approx(1.0)

    def test_oracle_five_docs(self):
        docs = [["t", "a", "b", "c"], ["a", "t", "d"], ["b", "e", "t", "a", "f"], ["c", "d"], ["e", "f", "a"]]
        bins = [0, 0, 1, 1, 2]
        idx = toy_index(docs, bins)
        ref = DenseModel(docs, bins, sigma=1.0)
        for t in range(3):
            nb = nearest_neighbors("t", t, 3, ContextSpec.window(1), DiffusionParams(1.0), idx)
            want = ref.neighbors("t", t, 3, "window", 1)
            assert [p for p, _ in named(idx, nb)] == [p for p, _ in want]
            np.testing.assert_allclose(nb.scores, [s for _, s in want], atol=1e-12)

    def test_fewer_than_k(self):
        idx = toy_index([["t", "a", "b"], ["c"]], [0, 0])
        nb = nearest_neighbors("t", 0, 10, W2, DiffusionParams(), idx)
        assert 0 < len(nb) < 10
        assert idx.word_id("t") not in nb.ids

    def test_empty_target_vector(self):
        # target occurs in every document: idf is zero
        idx = toy_index([["t", "a"], ["t", "b"]], [0, 0])
        assert nearest_neighbors("t", 0, 3, W2, DiffusionParams(), idx).members == ()

    def test_ties_break_on_phrase(self):
        idx = toy_index([["b", "t", "a"], ["x"]], [0, 0])
        nb = nearest_neighbors("t", 0, 5, W2, DiffusionParams(), idx)
        assert [p for p, _ in named(idx, nb)] == ["a", "b"]

    def test_scores_sorted_and_bounded(self, rng):
        idx = toy_index(*random_corpus(rng))
        for w in range(idx.vocab_size):
            for t in idx.timestamps:
                nb = nearest_neighbors(w, t, 4, ContextSpec.document(), DiffusionParams(2.0), idx)
                s = nb.scores
                assert all(0 < x <= 1 for x in s) and s == sorted(s, reverse=True)
                assert len(nb) <= 4 and w not in nb.ids

    def test_deterministic(self, rng):
        idx = toy_index(*random_corpus(rng))
        a = [nearest_neighbors(w, 0, 3, W2, DiffusionParams(), idx) for w in range(idx.vocab_size)]
        b = [nearest_neighbors(w, 0, 3, W2, DiffusionParams(), idx) for w in range(idx.vocab_size)]
        assert a == b

    def test_scale_invariance(self, rng):
        docs, bins = random_corpus(rng, max_docs=20)
        idx = toy_index(docs, bins)
        params = DiffusionParams(1.0)
        before = [nearest_neighbors(w, t, 5, W2, params, idx) for w in range(idx.vocab_size) for t in idx.timestamps]
        scaled = toy_index(docs, bins)
        from timevsm.weighting import normalized_weights

        scaled._memo[("weights", False)] = normalized_weights(idx) * 37.5
        after = [nearest_neighbors(w, t, 5, W2, params, scaled) for w in range(idx.vocab_size) for t in idx.timestamps]
        assert [nb.ids for nb in before] == [nb.ids for nb in after]

    def test_bad_k(self):
        idx = toy_index([["a", "b"]], [0])
        for k in (0, -1, 1.5):
            with pytest.raises(ParameterError):
                nearest_neighbors("a", 0, k, W2, DiffusionParams(), idx)

    def test_random_corpora_against_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            docs, bins = random_corpus(rng)
            idx = toy_index(docs, bins)
            sigma = float(rng.choice([0.5, 1.0, 2.0]))
            ref = DenseModel(docs, bins, sigma=sigma)
            for target in ref.words:
                for t in range(ref.num_bins):
                    nb = nearest_neighbors(target, t, 4, ContextSpec.window(1), DiffusionParams(sigma), idx)
                    want = ref.neighbors(target, t, 4, "window", 1)
                    assert [p for p, _ in named(idx, nb)] == [p for p, _ in want]
                    np.testing.assert_allclose(nb.scores, [s for _, s in want], atol=1e-9)


class TestTrackEvolution:
    def test_static_corpus(self):
        base = [["t", "a", "b"], ["a", "c"], ["t", "c", "d"], ["d", "e"], ["e", "t", "a"]]
        docs = [d for _ in range(7) for d in base]
        bins = [b for b in range(7) for _ in base]
        idx = toy_index(docs, bins)
        evo = track_evolution("t", 3, W2, DiffusionParams(1.0), idx)
        assert len(evo.neighborhoods) == 7
        # identical bins: the kernel factors out of every cosine, so even edge bins agree
        ids = [nb.ids for nb in evo.neighborhoods]
        assert len(ids[3]) == 3 and all(x == ids[3] for x in ids)
        np.testing.assert_allclose([nb.scores for nb in evo.neighborhoods], [evo.neighborhoods[3].scores] * 7, atol=1e-12)

    def test_single_bin(self):
        idx = toy_index([["t", "a"], ["b"]], [5, 5])
        evo = track_evolution("t", 2, W2, DiffusionParams(), idx)
        assert len(evo.neighborhoods) == 1
        assert all(len(s) == 1 for s in evo.series.values())
        rows = evo.series_rows(idx)
        assert rows == [("t", "a", "5", pytest.approx(1.0))]

    def test_planted_swap(self):
        vocab = ["target", "u", "v"] + make_vocab(40)
        sched = [{"u": 1.0}] * 5 + [{"v": 1.0}] * 5
        spec = DriftSpec(10, 60, vocab, "target", sched, background_noise=0.5, seed=3)
        idx = ingest_documents(generate_drift_corpus(spec))
        evo = track_evolution("target", 4, ContextSpec.window(1), DiffusionParams(1.0), idx)
        u, v = evo.series[idx.word_id("u")], evo.series[idx.word_id("v")]
        assert u[0] > v[0] and u[9] < v[9]
        assert np.all(np.diff(u[2:8]) < 0) and np.all(np.diff(v[2:8]) > 0)
        tops = [nb.ids[0] for nb in evo.neighborhoods]
        assert tops[:5] == [idx.word_id("u")] * 5 and tops[5:] == [idx.word_id("v")] * 5

    def test_series_cover_all_members_zero_filled(self, rng):
        idx = toy_index(*random_corpus(rng, max_bins=5))
        for w in range(idx.vocab_size):
            evo = track_evolution(w, 2, W2, DiffusionParams(0.5), idx)
            members = {v for nb in evo.neighborhoods for v in nb.ids}
            assert set(evo.series) == members
            for i, nb in enumerate(evo.neighborhoods):
                for v, s in nb.members:
                    assert evo.series[v][i] == pytest.approx(s)
            assert all(len(s) == idx.num_bins for s in evo.series.values())

    def test_peak_selection(self):
        docs = [["t", "a"], ["t", "a"], ["t", "b"], ["c", "t"], ["x"], ["y"]]
        bins = [0, 0, 1, 2, 2, 1]
        idx = toy_index(docs, bins)
        evo = track_evolution("t", 2, W2, DiffusionParams(1.0), idx, selection="peak")
        cands, plain = similarity_table(idx, "t", W2, DiffusionParams(1.0, 0))
        peaks = {idx.phrases[c]: plain[:, j].max() for j, c in enumerate(cands)}
        best = sorted(peaks, key=lambda p: (-peaks[p], p))[:2]
        assert [idx.phrases[v] for v in evo.series] == best
        with pytest.raises(ParameterError):
            track_evolution("t", 2, W2, DiffusionParams(), idx, selection="bogus")

    def test_bin_subset(self):
        idx = toy_index([["t", "a"], ["t", "b"], ["c"]], [0, 1, 2])
        evo = track_evolution("t", 2, W2, DiffusionParams(), idx, bins=[1, 2])
        assert list(evo.bins) == [1, 2] and [nb.bin for nb in evo.neighborhoods] == [1, 2]
