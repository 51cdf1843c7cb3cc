"""Coreference evaluation: MUC, B-cubed, CEAF-e and their average.

All three operate on partitions of the *same* mention set (gold mentions
in, gold mentions out); inputs with differing mention sets are rejected
outright rather than partially matched. Degenerate 0/0 ratios score 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Hashable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MentionSetMismatch, ProtocolError

Partition = Sequence[frozenset]


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float

    @property
    def f1(self) -> float:
        if self.precision + self.recall == 0:
            return 0.0
        return 2 * self.precision * self.recall / (self.precision + self.recall)

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class MetricReport:
    muc: Score
    b3: Score
    ceafe: Score

    @property
    def conll_f1(self) -> float:
        return conll_average((self.muc.f1, self.b3.f1, self.ceafe.f1))

    def to_json(self) -> dict:
        return {"muc": self.muc.to_json(), "b3": self.b3.to_json(),
                "ceafe": self.ceafe.to_json(), "conll_f1": self.conll_f1}


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _check_inputs(key: Partition, response: Partition) -> None:
    for name, part in (("key", key), ("response", response)):
        seen: set[Hashable] = set()
        for cluster in part:
            if not cluster:
                raise ProtocolError("empty cluster in %s partition" % name)
            if seen & cluster:
                raise ProtocolError("clusters overlap in %s partition" % name)
            seen |= cluster
    key_mentions = frozenset().union(*key) if key else frozenset()
    response_mentions = frozenset().union(*response) if response else frozenset()
    if key_mentions != response_mentions:
        raise MentionSetMismatch(sorted(key_mentions - response_mentions),
                                 sorted(response_mentions - key_mentions))


def _owner_index(partition: Partition) -> dict:
    owner = {}
    for i, cluster in enumerate(partition):
        for m in cluster:
            owner[m] = i
    return owner


def muc(key: Partition, response: Partition) -> Score:
    """Link-based score: each cluster of size n carries n-1 links; a
    cluster split into p parts by the other side loses p-1 of them."""
    _check_inputs(key, response)

    def side(a: Partition, b: Partition) -> float:
        owner = _owner_index(b)
        num = sum(len(c) - len({owner[m] for m in c}) for c in a)
        den = sum(len(c) - 1 for c in a)
        return _ratio(num, den)

    return Score(precision=side(response, key), recall=side(key, response))


def b_cubed(key: Partition, response: Partition) -> Score:
    """Per-mention overlap ratios, averaged over all mentions."""
    _check_inputs(key, response)

    def side(a: Partition, b: Partition) -> float:
        lookup = {m: c for c in b for m in c}
        total = sum(len(c & lookup[m]) / len(c) for c in a for m in c)
        count = sum(len(c) for c in a)
        return _ratio(total, count)

    return Score(precision=side(response, key), recall=side(key, response))


def ceaf_e(key: Partition, response: Partition) -> Score:
    """Entity-based CEAF: optimal one-to-one cluster alignment under the
    normalized-overlap similarity phi4 = 2|K∩R| / (|K|+|R|)."""
    _check_inputs(key, response)
    if not key and not response:
        return Score(0.0, 0.0)
    phi = np.zeros((len(key), len(response)))
    for i, k in enumerate(key):
        for j, r in enumerate(response):
            phi[i, j] = 2 * len(k & r) / (len(k) + len(r))
    rows, cols = linear_sum_assignment(phi, maximize=True)
    total = float(phi[rows, cols].sum())
    return Score(precision=_ratio(total, len(response)),
                 recall=_ratio(total, len(key)))


def conll_average(f1s: Sequence[float]) -> float:
    if len(f1s) != 3:
        raise ProtocolError("expected exactly three F1 values, got %d" % len(f1s))
    return sum(f1s) / 3


def score_partitions(key: Partition, response: Partition) -> MetricReport:
    return MetricReport(muc=muc(key, response),
                        b3=b_cubed(key, response),
                        ceafe=ceaf_e(key, response))


def percent(value: float) -> str:
    """Score as a percentage with one decimal, ties rounded up — the
    convention used for all human-readable output."""
    return str((Decimal(repr(value)) * 100).quantize(Decimal("0.1"),
                                                     rounding=ROUND_HALF_UP))
