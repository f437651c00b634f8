"""Sentence and corpus level chrF and BLEU.

Both follow the sacreBLEU 2.x definitions with default settings. Text is
assumed to be pre-tokenized: BLEU splits on whitespace (or on characters with
``Tokenizer.CHAR``), chrF removes all whitespace before extracting character
n-grams.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyCorpus, EmptyReference, InvalidArgument


class Smoothing(enum.Enum):
    NONE = "none"
    EXP = "exp"


class Tokenizer(enum.Enum):
    WHITESPACE = "whitespace"
    CHAR = "char"


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 4
    smoothing: Smoothing = Smoothing.EXP
    tokenizer: Tokenizer = Tokenizer.WHITESPACE
    effective_order: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise InvalidArgument("max_order must be >= 1")


def ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def char_ngram_counts(text: str, n: int) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def _check_ref(ref: str) -> None:
    if ref is None or not ref.strip():
        raise EmptyReference("reference must be non-empty")


def chrf_statistics(hyp: str, ref: str, char_order: int = 6) -> list[tuple[int, int, int]]:
    """Per-order ``(hyp_total, ref_total, matches)`` for character n-grams."""
    hyp = "".join(hyp.split())
    ref = "".join(ref.split())
    stats = []
    for n in range(1, char_order + 1):
        h = char_ngram_counts(hyp, n)
        r = char_ngram_counts(ref, n)
        match = sum(min(c, r[g]) for g, c in h.items() if g in r)
        n_ref = max(0, len(ref) - n + 1)
        # hypothesis n-grams of an order the reference is too short for are not counted
        n_hyp = max(0, len(hyp) - n + 1) if n_ref else 0
        stats.append((n_hyp, n_ref, match))
    return stats


def chrf_from_statistics(stats: Iterable[tuple[int, int, int]], beta: float = 2.0) -> float:
    # precision/recall are averaged over orders where both sides have n-grams
    avg_prec = avg_rec = 0.0
    effective = 0
    for n_hyp, n_ref, n_match in stats:
        if n_hyp > 0 and n_ref > 0:
            avg_prec += n_match / n_hyp
            avg_rec += n_match / n_ref
            effective += 1
    if effective == 0:
        return 0.0
    avg_prec /= effective
    avg_rec /= effective
    if avg_prec + avg_rec == 0:
        return 0.0
    factor = beta ** 2
    return 100 * (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec)


def sentence_chrf(hyp: str, ref: str, char_order: int = 6, beta: float = 2.0) -> float:
    _check_ref(ref)
    if char_order < 1:
        raise InvalidArgument("char_order must be >= 1")
    return chrf_from_statistics(chrf_statistics(hyp, ref, char_order), beta)


def corpus_chrf(pairs: Sequence[tuple[str, str]], char_order: int = 6, beta: float = 2.0) -> float:
    if not pairs:
        raise EmptyCorpus("corpus is empty")
    totals = [[0, 0, 0] for _ in range(char_order)]
    for hyp, ref in pairs:
        _check_ref(ref)
        for acc, st in zip(totals, chrf_statistics(hyp, ref, char_order)):
            for i in range(3):
                acc[i] += st[i]
    return chrf_from_statistics([tuple(t) for t in totals], beta)


def tokenize(text: str, tokenizer: Tokenizer) -> list[str]:
    if tokenizer is Tokenizer.CHAR:
        return [c for c in text if not c.isspace()]
    return text.split()


@dataclass
class BleuStats:
    correct: list
    total: list
    hyp_len: int = 0
    ref_len: int = 0

    def __iadd__(self, other: "BleuStats") -> "BleuStats":
        self.correct = [a + b for a, b in zip(self.correct, other.correct)]
        self.total = [a + b for a, b in zip(self.total, other.total)]
        self.hyp_len += other.hyp_len
        self.ref_len += other.ref_len
        return self


def bleu_statistics(hyp: str, ref: str, cfg: BleuConfig) -> BleuStats:
    h = tokenize(hyp, cfg.tokenizer)
    r = tokenize(ref, cfg.tokenizer)
    correct, total = [], []
    for n in range(1, cfg.max_order + 1):
        hc = ngram_counts(h, n)
        rc = ngram_counts(r, n)
        correct.append(sum(min(c, rc[g]) for g, c in hc.items() if g in rc))
        total.append(max(0, len(h) - n + 1))
    return BleuStats(correct, total, len(h), len(r))


def bleu_from_statistics(st: BleuStats, cfg: BleuConfig) -> float:
    # no matching n-gram of any order scores 0 regardless of smoothing
    if st.hyp_len == 0 or st.total[0] == 0 or not any(st.correct):
        return 0.0
    bp = 1.0 if st.hyp_len >= st.ref_len else math.exp(1 - st.ref_len / st.hyp_len)
    order = cfg.max_order
    log_sum = 0.0
    smooth = 1.0
    for n in range(1, cfg.max_order + 1):
        if st.total[n - 1] == 0:
            if cfg.effective_order:
                order = n - 1
                break
            return 0.0
        if st.correct[n - 1] == 0:
            if cfg.smoothing is Smoothing.EXP:
                smooth *= 2
                log_sum += math.log(100.0 / (smooth * st.total[n - 1]))
            else:
                return 0.0
        else:
            log_sum += math.log(100.0 * st.correct[n - 1] / st.total[n - 1])
    return bp * math.exp(log_sum / order)


def sentence_bleu(hyp: str, ref: str, cfg: BleuConfig | None = None) -> float:
    cfg = cfg or BleuConfig()
    _check_ref(ref)
    return bleu_from_statistics(bleu_statistics(hyp, ref, cfg), cfg)


def corpus_bleu(pairs: Sequence[tuple[str, str]], cfg: BleuConfig | None = None) -> float:
    """Micro-averaged BLEU: n-gram counts are summed over the corpus first."""
    cfg = cfg or BleuConfig(effective_order=False)
    if not pairs:
        raise EmptyCorpus("corpus is empty")
    acc = BleuStats([0] * cfg.max_order, [0] * cfg.max_order)
    for hyp, ref in pairs:
        _check_ref(ref)
        acc += bleu_statistics(hyp, ref, cfg)
    return bleu_from_statistics(acc, cfg)


NATIVE_METRICS = {
    "chrf": lambda hyp, ref: sentence_chrf(hyp, ref),
    "bleu": lambda hyp, ref: sentence_bleu(hyp, ref),
}


def get_native_metric(name: str):
    try:
        return NATIVE_METRICS[name]
    except KeyError:
        raise InvalidArgument(f"no native metric {name!r}; choose from {sorted(NATIVE_METRICS)}") from None
