"""Seeded synthetic corpora with planted collocation drift.

Every document is a short run of filler slots (``min_length``..``max_length``).
A slot holds a Zipf-distributed random background word with probability
``background_noise`` and otherwise a fixed template word.  Documents that
contain the target (probability ``target_rate``) draw each collocate scheduled
for their bin with its probability and place it directly next to a target
occurrence, so collocates always sit within a window of one token.

With ``background_noise == 0`` the document length is ``min_length`` and the
target sits mid-document, so documents follow a fixed template.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from timevsm.errors import ParameterError

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class DriftSpec:
    num_bins: int
    docs_per_bin: int
    vocab: tuple
    target: str
    collocate_schedule: tuple  # one {phrase: probability} mapping per bin
    background_noise: float = 0.5
    seed: int = 0
    target_rate: float = 0.5
    min_length: int = 8
    max_length: int = 32
    zipf_exponent: float = 1.0
    start: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "collocate_schedule", tuple(dict(s) for s in self.collocate_schedule))
        problems = self.violations()
        if problems:
            raise ParameterError("invalid drift spec: " + "; ".join(problems))

    def violations(self):
        out = []
        if not isinstance(self.num_bins, int) or self.num_bins < 2:
            out.append("num_bins must be an integer >= 2")
        if not isinstance(self.docs_per_bin, int) or self.docs_per_bin < 1:
            out.append("docs_per_bin must be an integer >= 1")
        if len(set(self.vocab)) != len(self.vocab):
            out.append("vocab contains duplicates")
        if self.target not in self.vocab:
            out.append(f"target {self.target!r} not in vocab")
        if len(self.collocate_schedule) != self.num_bins:
            out.append(f"collocate_schedule has {len(self.collocate_schedule)} entries, expected num_bins={self.num_bins}")
        for b, sched in enumerate(self.collocate_schedule):
            for phrase, p in sched.items():
                if phrase not in self.vocab:
                    out.append(f"bin {b}: collocate {phrase!r} not in vocab")
                if phrase == self.target:
                    out.append(f"bin {b}: target scheduled as its own collocate")
                if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
                    out.append(f"bin {b}: probability {p!r} for {phrase!r} outside [0, 1]")
        for name in ("background_noise", "target_rate"):
            p = getattr(self, name)
            if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
                out.append(f"{name} must be in [0, 1]")
        if not (1 <= self.min_length <= self.max_length):
            out.append("need 1 <= min_length <= max_length")
        if not self.zipf_exponent >= 0:
            out.append("zipf_exponent must be >= 0")
        if not self.background_words():
            out.append("vocab has no background words besides the target and collocates")
        return out

    def collocates(self):
        return sorted({c for sched in self.collocate_schedule for c in sched})

    def background_words(self):
        special = set(self.collocates()) | {self.target}
        return [w for w in self.vocab if w not in special]

    def change_bins(self):
        """Bins whose collocate schedule differs from the previous bin's."""
        s = self.collocate_schedule
        return [b for b in range(1, len(s)) if s[b] != s[b - 1]]

    @property
    def num_docs(self):
        return self.num_bins * self.docs_per_bin


def make_vocab(size, prefix="w"):
    width = len(str(size - 1))
    return [f"{prefix}{i:0{width}d}" for i in range(size)]


def planted_drift(num_bins=10, docs_per_bin=200, drift_bin=5, n_collocates=4, high=0.9, low=0.1,
                  background_size=300, seed=0, **kwargs):
    """Two-phase spec: collocates ``a*`` dominate before ``drift_bin``, ``b*`` after."""
    early = [f"a{i}" for i in range(n_collocates)]
    late = [f"b{i}" for i in range(n_collocates)]
    vocab = ["target"] + early + late + make_vocab(background_size, "bg")
    before = {**{c: high for c in early}, **{c: low for c in late}}
    after = {**{c: low for c in early}, **{c: high for c in late}}
    schedule = [before if b < drift_bin else after for b in range(num_bins)]
    return DriftSpec(num_bins, docs_per_bin, vocab, "target", schedule, seed=seed, **kwargs)


def generate_drift_corpus(spec):
    """Records (``id``, ``timestamp``, ``tokens``) for every document in ``spec``."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    background = spec.background_words()
    zipf = np.arange(1, len(background) + 1, dtype=np.float64) ** -spec.zipf_exponent
    zipf /= zipf.sum()
    noise = spec.background_noise
    span = spec.max_length - spec.min_length
    width = len(str(spec.docs_per_bin - 1))

    records = []
    for b in range(spec.num_bins):
        sched = sorted(spec.collocate_schedule[b].items())
        for j in range(spec.docs_per_bin):
            length = spec.min_length + int(rng.binomial(span, noise))
            noisy = rng.random(length) < noise
            draws = rng.choice(len(background), size=length, p=zipf)
            tokens = [background[draws[i]] if noisy[i] else background[i % len(background)] for i in range(length)]

            if rng.random() < spec.target_rate:
                drawn = [c for c, p in sched if rng.random() < p]
                blocks = []
                for i in range(max(1, math.ceil(len(drawn) / 2))):
                    right = drawn[2 * i : 2 * i + 1]
                    left = drawn[2 * i + 1 : 2 * i + 2]
                    blocks.append(left + [spec.target] + right)
                if noise == 0:
                    slots = [length // 2] * len(blocks)
                else:
                    slots = sorted(int(s) for s in rng.integers(0, length + 1, size=len(blocks)))
                for block, slot in zip(reversed(blocks), reversed(slots)):
                    tokens[slot:slot] = block

            records.append({"id": f"b{b:03d}-d{j:0{width}d}", "timestamp": spec.start + b, "tokens": tokens})
    return records


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


# -- config files ----------------------------------------------------------------

_CONFIG_KEYS = {
    "num_bins", "docs_per_bin", "vocab", "vocab_size", "target", "collocate_schedule", "phases",
    "background_noise", "seed", "target_rate", "min_length", "max_length", "zipf_exponent", "start",
}


def spec_from_dict(cfg, seed=None):
    """Build a :class:`DriftSpec` from a plain mapping.

    Besides the dataclass fields, the mapping may give ``vocab_size`` instead
    of an explicit ``vocab`` (background words ``w000``... are generated and
    the target and collocates appended) and ``phases`` instead of a per-bin
    ``collocate_schedule``: a list of ``{"bins": [first, last], "collocates":
    {phrase: probability}}`` entries with inclusive bin ranges.
    """
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ParameterError(f"unknown drift config keys: {sorted(unknown)}")
    cfg = dict(cfg)
    num_bins = cfg.get("num_bins")
    if "phases" in cfg:
        if "collocate_schedule" in cfg:
            raise ParameterError("give either 'phases' or 'collocate_schedule', not both")
        schedule = [dict() for _ in range(num_bins or 0)]
        for phase in cfg.pop("phases"):
            first, last = phase["bins"]
            for b in range(first, last + 1):
                if not 0 <= b < len(schedule):
                    raise ParameterError(f"phase bin {b} outside [0, {num_bins})")
                schedule[b].update(phase["collocates"])
        cfg["collocate_schedule"] = schedule
    if "vocab" not in cfg:
        size = cfg.pop("vocab_size", 200)
        named = [cfg.get("target")] + sorted({c for s in cfg.get("collocate_schedule", []) for c in s})
        cfg["vocab"] = [w for w in named if w is not None] + make_vocab(size)
    else:
        cfg.pop("vocab_size", None)
    if seed is not None:
        cfg["seed"] = seed
    missing = {"num_bins", "docs_per_bin", "target", "collocate_schedule"} - set(cfg)
    if missing:
        raise ParameterError(f"drift config is missing {sorted(missing)}")
    return DriftSpec(**cfg)


def load_spec(path, seed=None):
    """Read a JSON drift config (see :func:`spec_from_dict`)."""
    return spec_from_dict(json.loads(Path(path).read_text(encoding="utf-8")), seed=seed)
