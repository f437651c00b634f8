"""Top-k data filtering by a quality score, and overlap between selections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidArgument
from .registry import Polarity


@dataclass(frozen=True)
class Selection:
    metric: str
    k: int
    indices: tuple  # row ids, best first

    def __len__(self) -> int:
        return len(self.indices)

    def as_set(self) -> frozenset:
        return frozenset(self.indices)


def topk_filter(scores: Sequence[tuple[int, float]], k: int, polarity: Polarity = Polarity.HIGHER_BETTER,
                metric: str = "") -> Selection:
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    if not scores:
        raise InvalidArgument("no scores to filter")
    ids = [r for r, _ in scores]
    if len(set(ids)) != len(ids):
        raise InvalidArgument("duplicate row ids")
    sign = polarity.sign
    ranked = sorted(scores, key=lambda rs: (-sign * rs[1], rs[0]))
    return Selection(metric, k, tuple(r for r, _ in ranked[:k]))


def jaccard(a: Selection | Iterable, b: Selection | Iterable) -> float:
    sa = a.as_set() if isinstance(a, Selection) else set(a)
    sb = b.as_set() if isinstance(b, Selection) else set(b)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)
