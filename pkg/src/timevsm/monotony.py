"""Neighbourhood monotony: Jaccard stability of a word's neighbours over time.

The average is taken over the ``|T| - 1`` consecutive bin pairs.  A pair in
which either neighbourhood is empty is skipped and counted rather than scored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from timevsm.context import ContextSpec
from timevsm.errors import ParameterError, TimeVSMError, UndefinedMetricError
from timevsm.neighborhood import Neighborhood, _check_k, rank, similarity_table
from timevsm.weighting import DiffusionParams

SIGMA_GRID = (0.5, 1.0, 2.0, 3.0, 5.0)
CONTEXT_GRID = (ContextSpec.document(),) + tuple(ContextSpec.window(n) for n in (1, 2, 3, 4))

SWEEP_COLUMNS = (
    "target",
    "sigma",
    "context_kind",
    "window_size",
    "k",
    "average",
    "minimum",
    "minimum_pair",
    "absolute",
    "skipped_pairs",
    "status",
)


def jaccard(a, b):
    """|a & b| / |a | b|, with two empty sets counted as identical (1.0)."""
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _members(nb):
    return set(nb.ids) if isinstance(nb, Neighborhood) else set(nb)


@dataclass
class MonotonyReport:
    """Average, minimum and absolute monotony of one neighbourhood series.

    ``pair_jaccards[i]`` belongs to the consecutive pair ``pairs[i]``, given as
    positions in the input series (bin indices when computed from an index).
    Metrics that cannot be defined are ``None``.
    """

    target: Optional[int]
    k: Optional[int]
    average: Optional[float]
    minimum: Optional[float]
    minimum_pair: Optional[tuple]
    absolute: Optional[float]
    pair_jaccards: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    skipped_pairs: int = 0

    @property
    def defined(self):
        return self.average is not None


def average_monotony(series):
    """Monotony report for a per-bin list of neighbourhoods (or member sets)."""
    series = list(series)
    if len(series) < 2:
        raise ParameterError("monotony needs at least two timestamps")
    sets = [_members(nb) for nb in series]
    jaccards, pairs, skipped = [], [], 0
    for i in range(len(sets) - 1):
        if not sets[i] or not sets[i + 1]:
            skipped += 1
            continue
        jaccards.append(jaccard(sets[i], sets[i + 1]))
        pairs.append((i, i + 1))

    first = series[0]
    target = first.target if isinstance(first, Neighborhood) else None
    k = first.k if isinstance(first, Neighborhood) else None
    if jaccards:
        j = int(np.argmin(jaccards))
        average, minimum, minimum_pair = sum(jaccards) / len(jaccards), jaccards[j], pairs[j]
    else:
        average = minimum = minimum_pair = None
    return MonotonyReport(
        target=target,
        k=k,
        average=average,
        minimum=minimum,
        minimum_pair=minimum_pair,
        absolute=absolute_monotony(sets, strict=False),
        pair_jaccards=jaccards,
        pairs=pairs,
        skipped_pairs=skipped,
    )


def absolute_monotony(series, strict=True):
    """Jaccard similarity of the first and last neighbourhoods.

    Undefined when either is empty: raises with ``strict``, else returns None.
    """
    series = list(series)
    if len(series) < 2:
        raise ParameterError("monotony needs at least two timestamps")
    first, last = _members(series[0]), _members(series[-1])
    if not first or not last:
        if strict:
            raise UndefinedMetricError("absolute monotony is undefined for an empty boundary neighborhood")
        return None
    return jaccard(first, last)


@dataclass
class SweepCell:
    target: str
    sigma: float
    spec: ContextSpec
    k: int
    report: Optional[MonotonyReport]
    error: Optional[str] = None

    @property
    def status(self):
        if self.error:
            return "error"
        if self.report is None or not self.report.defined:
            return "undefined"
        return "ok" if self.report.skipped_pairs == 0 else "partial"


@dataclass
class SweepReport:
    cells: list

    def rows(self, index):
        """Rows in :data:`SWEEP_COLUMNS` order; bin pairs use bin labels."""
        return [cell_row(c, index) for c in self.cells]

    def aggregate(self):
        """Mean metrics across targets for each (sigma, context, k) cell.

        Returns a dict keyed by ``(sigma, spec, k)`` with ``average``,
        ``minimum``, ``absolute`` (None when no target defines the metric)
        and ``n`` (number of targets contributing to ``average``).
        """
        groups = {}
        for c in self.cells:
            groups.setdefault((c.sigma, c.spec, c.k), []).append(c.report)
        out = {}
        for key, reports in groups.items():
            reports = [r for r in reports if r is not None]
            entry = {}
            for name in ("average", "minimum", "absolute"):
                vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
                entry[name] = float(np.mean(vals)) if vals else None
            entry["n"] = sum(1 for r in reports if r.average is not None)
            out[key] = entry
        return out


def _fmt(x):
    return "" if x is None else repr(float(x))


def cell_row(cell, index):
    r = cell.report
    pair = ""
    if r is not None and r.minimum_pair is not None:
        pair = "/".join(index.bin_labels[b] for b in r.minimum_pair)
    return {
        "target": cell.target,
        "sigma": repr(float(cell.sigma)),
        "context_kind": cell.spec.kind,
        "window_size": "" if cell.spec.window_size is None else str(cell.spec.window_size),
        "k": str(cell.k),
        "average": _fmt(r.average if r else None),
        "minimum": _fmt(r.minimum if r else None),
        "minimum_pair": pair,
        "absolute": _fmt(r.absolute if r else None),
        "skipped_pairs": "" if r is None else str(r.skipped_pairs),
        "status": cell.status,
    }


def _report(index, w, k, cands, scores, used):
    k = _check_k(k)
    series = [Neighborhood(w, int(b), k, rank(cands, scores[i], k, index)) for i, b in enumerate(used)]
    report = average_monotony(series)
    # map series positions back to bin indices
    if report.minimum_pair is not None:
        report.minimum_pair = tuple(int(used[i]) for i in report.minimum_pair)
    report.pairs = [tuple(int(used[i]) for i in p) for p in report.pairs]
    return report


def _used_bins(index, bins):
    used = index.timestamps if bins is None else np.asarray([index.bin_index(b) for b in bins], dtype=np.int64)
    if len(used) < 2:
        raise ParameterError("monotony needs at least two timestamps")
    return used


def monotony_for(index, target, k, spec, params, bins=None):
    """Monotony report of ``target`` computed straight from the index."""
    w = index.word_id(target)
    used = _used_bins(index, bins)
    cands, scores = similarity_table(index, w, spec, params, used)
    return _report(index, w, k, cands, scores, used)


def sensitivity_sweep(index, targets, sigmas=SIGMA_GRID, specs=CONTEXT_GRID, ks=(16,), truncation_radius=None,
                      literal_denominator=False, bins=None):
    """Monotony for every (target, sigma, context, k) combination.

    The similarity table is computed once per (target, sigma, context) and
    reused across ``ks``.  Failures are recorded on the cell instead of
    aborting the sweep.  Cells come out in target, sigma, context, k order.
    """
    targets, sigmas, specs, ks = list(targets), list(sigmas), list(specs), list(ks)
    for name, values in (("targets", targets), ("sigmas", sigmas), ("specs", specs), ("ks", ks)):
        if not values:
            raise ParameterError(f"sensitivity sweep needs a nonempty {name} list")

    cells = []
    for target, sigma, spec in itertools.product(targets, sigmas, specs):
        label = index.phrases[target] if isinstance(target, int) and 0 <= target < index.vocab_size else str(target)
        try:
            w = index.word_id(target)
            params = DiffusionParams(sigma, truncation_radius, literal_denominator)
            used = _used_bins(index, bins)
            cands, scores = similarity_table(index, w, spec, params, used)
        except TimeVSMError as exc:
            cells.extend(SweepCell(label, sigma, spec, k, None, str(exc)) for k in ks)
            continue
        for k in ks:
            try:
                cells.append(SweepCell(label, sigma, spec, k, _report(index, w, k, cands, scores, used)))
            except TimeVSMError as exc:
                cells.append(SweepCell(label, sigma, spec, k, None, str(exc)))
    return SweepReport(cells)
