import json

import pytest

from timevsm import ContextSpec, DiffusionParams, IngestConfig, ingest_documents, nearest_neighbors
from timevsm.errors import ParameterError
from timevsm.synth import DriftSpec, generate_drift_corpus, load_spec, make_vocab, planted_drift, write_jsonl


def small(**kw):
    base = dict(num_bins=4, docs_per_bin=30, background_size=40, drift_bin=2)
    base.update(kw)
    return planted_drift(**base)


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_jsonl(generate_drift_corpus(small(seed=7)), a)
        write_jsonl(generate_drift_corpus(small(seed=7)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_seed_matters(self):
        assert generate_drift_corpus(small(seed=1)) != generate_drift_corpus(small(seed=2))

    def test_noise_free_template(self):
        spec = small(background_noise=0.0, target_rate=1.0, high=1.0, low=0.0)
        recs = generate_drift_corpus(spec)
        early = {tuple(r["tokens"]) for r in recs if r["timestamp"] < spec.start + 2}
        late = {tuple(r["tokens"]) for r in recs if r["timestamp"] >= spec.start + 2}
        assert len(early) == 1 and len(late) == 1
        (doc,) = early
        # two (collocate, target, collocate) blocks
        assert len(doc) == spec.min_length + 6
        assert doc.count("target") == 2


class TestLayout:
    def test_counts_and_ids(self):
        spec = small()
        recs = generate_drift_corpus(spec)
        assert len(recs) == spec.num_docs
        assert len({r["id"] for r in recs}) == len(recs)
        assert sorted({r["timestamp"] for r in recs}) == list(range(spec.start, spec.start + spec.num_bins))

    def test_lengths(self):
        spec = small()
        for r in generate_drift_corpus(spec):
            n = sum(1 for t in r["tokens"] if not t.startswith("bg"))
            assert spec.min_length <= len(r["tokens"]) - n <= spec.max_length

    def test_collocates_adjacent(self):
        spec = small(seed=3)
        colloc = set(spec.collocates())
        for r in generate_drift_corpus(spec):
            toks = r["tokens"]
            for p, tok in enumerate(toks):
                if tok in colloc:
                    assert "target" in toks[max(0, p - 1) : p + 2]

    def test_change_bins(self):
        assert small(drift_bin=2).change_bins() == [2]
        assert planted_drift().change_bins() == [5]

    def test_top_neighbor_flips(self):
        spec = small(docs_per_bin=60, seed=0)
        idx = ingest_documents(generate_drift_corpus(spec), IngestConfig(granularity="year"))
        params = DiffusionParams(0.5)
        top = [idx.phrases[nearest_neighbors("target", t, 1, ContextSpec.window(1), params, idx).ids[0]]
               for t in idx.timestamps]
        assert all(w.startswith("a") for w in top[:2])
        assert all(w.startswith("b") for w in top[2:])


class TestValidation:
    def test_lists_every_violation(self):
        with pytest.raises(ParameterError) as exc:
            DriftSpec(1, 0, ["x", "x"], "t", [{"t": 2.0}], background_noise=3.0)
        msg = str(exc.value)
        for part in ("num_bins", "docs_per_bin", "duplicates", "not in vocab", "own collocate", "outside [0, 1]",
                     "background_noise"):
            assert part in msg

    def test_schedule_length(self):
        with pytest.raises(ParameterError, match="expected num_bins=3"):
            DriftSpec(3, 1, ["t", "a", "x"], "t", [{"a": 0.5}])

    def test_make_vocab(self):
        assert make_vocab(3, "bg") == ["bg0", "bg1", "bg2"]
        assert make_vocab(11)[0] == "w00"


class TestConfig:
    def test_phases(self, tmp_path):
        cfg = {
            "num_bins": 4,
            "docs_per_bin": 5,
            "target": "bank",
            "vocab_size": 20,
            "phases": [
                {"bins": [0, 1], "collocates": {"river": 0.8}},
                {"bins": [2, 3], "collocates": {"money": 0.8}},
            ],
        }
        path = tmp_path / "drift.json"
        path.write_text(json.dumps(cfg))
        spec = load_spec(path, seed=5)
        assert spec.seed == 5 and spec.change_bins() == [2]
        assert spec.collocate_schedule[0] == {"river": 0.8}
        assert {"bank", "river", "money"} <= set(spec.vocab)
        assert len(generate_drift_corpus(spec)) == 20

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"num_bins": 2, "colour": "red"}))
        with pytest.raises(ParameterError, match="colour"):
            load_spec(path)

    def test_phase_out_of_range(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"num_bins": 2, "docs_per_bin": 1, "target": "t",
                                    "phases": [{"bins": [1, 2], "collocates": {"a": 1.0}}]}))
        with pytest.raises(ParameterError, match="outside"):
            load_spec(path)
