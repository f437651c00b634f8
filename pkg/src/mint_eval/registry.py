"""Data model, metric registry and file ingestion.

Scores live in a long-format :class:`ScoreTable` keyed by
``(lp, system, seg, metric)``. The canonical on-disk form is a TSV with the
header ``lp\\tsystem\\tseg\\tmetric\\tscore``; JSONL with the same keys is also
accepted.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateKey,
    InsufficientOverlap,
    InvalidArgument,
    MalformedRow,
    MissingScores,
    NonFiniteInput,
    UnknownMetric,
)

SCORE_HEADER = ("lp", "system", "seg", "metric", "score")
TRANSLATION_HEADER = ("lp", "system", "seg", "src", "hyp", "ref")
ADJUSTED_PREFIX = "adjusted:"

Key = tuple  # (lp, system, seg, metric)


class Polarity(enum.Enum):
    HIGHER_BETTER = "higher"
    LOWER_BETTER = "lower"

    @property
    def sign(self) -> float:
        return 1.0 if self is Polarity.HIGHER_BETTER else -1.0


class Family(enum.Enum):
    LEXICAL = "lexical"
    NEURAL_REF = "neural_ref"
    NEURAL_QE = "neural_qe"
    ENSEMBLE = "ensemble"
    HUMAN = "human"
    ADJUSTED = "adjusted"


@dataclass(frozen=True)
class MetricSpec:
    name: str
    polarity: Polarity = Polarity.HIGHER_BETTER
    family: Family = Family.NEURAL_REF

    def prefers(self, a: float, b: float) -> bool:
        """True if score ``a`` is strictly better than ``b`` under this metric."""
        return a > b if self.polarity is Polarity.HIGHER_BETTER else a < b

    def oriented(self, values):
        """Return values flipped so that larger always means better."""
        if self.polarity is Polarity.HIGHER_BETTER:
            return values
        return -np.asarray(values, dtype=float)

    def to_dict(self) -> dict:
        return {"name": self.name, "polarity": self.polarity.value, "family": self.family.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "MetricSpec":
        try:
            return cls(d["name"], Polarity(d.get("polarity", "higher")), Family(d.get("family", "neural_ref")))
        except (KeyError, ValueError) as e:
            raise InvalidArgument(f"bad metric spec {dict(d)!r}: {e}") from None


class MetricRegistry:
    """Name -> :class:`MetricSpec` lookup.

    Names of the form ``adjusted:<m>`` resolve automatically once ``m`` is
    registered; they inherit its polarity and get family ``ADJUSTED``.
    """

    def __init__(self, specs: Iterable[MetricSpec] = ()):
        self._specs: dict[str, MetricSpec] = {}
        for s in specs:
            self.register(s)

    def register(self, spec: MetricSpec) -> MetricSpec:
        if spec.name in self._specs and self._specs[spec.name] != spec:
            raise DuplicateKey(spec.name)
        self._specs[spec.name] = spec
        return spec

    def get(self, name: str) -> MetricSpec:
        spec = self._specs.get(name)
        if spec is not None:
            return spec
        if name.startswith(ADJUSTED_PREFIX):
            base = self.get(name[len(ADJUSTED_PREFIX):])
            return MetricSpec(name, base.polarity, Family.ADJUSTED)
        raise UnknownMetric(name)

    def __contains__(self, name: str) -> bool:
        try:
            self.get(name)
        except UnknownMetric:
            return False
        return True

    def __iter__(self) -> Iterator[MetricSpec]:
        return iter(self._specs.values())

    def __len__(self) -> int:
        return len(self._specs)

    def copy(self) -> "MetricRegistry":
        return MetricRegistry(self._specs.values())


def default_registry() -> MetricRegistry:
    H, L = Polarity.HIGHER_BETTER, Polarity.LOWER_BETTER
    return MetricRegistry(
        [
            MetricSpec("chrf", H, Family.LEXICAL),
            MetricSpec("bleu", H, Family.LEXICAL),
            MetricSpec("comet", H, Family.NEURAL_REF),
            MetricSpec("xcomet", H, Family.NEURAL_REF),
            MetricSpec("bleurt", H, Family.NEURAL_REF),
            MetricSpec("metricx", L, Family.NEURAL_REF),
            MetricSpec("cometkiwi", H, Family.NEURAL_QE),
            MetricSpec("metricx_qe", L, Family.NEURAL_QE),
            MetricSpec("human", H, Family.HUMAN),
            MetricSpec("quality", H, Family.HUMAN),
            MetricSpec("autorank", L, Family.ENSEMBLE),
            MetricSpec("autorank_ins", L, Family.ENSEMBLE),
            MetricSpec("metametrics", H, Family.ENSEMBLE),
            MetricSpec("mbr_utility", H, Family.ENSEMBLE),
        ]
    )


def format_score(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


class ScoreTable:
    """Immutable map ``(lp, system, seg, metric) -> score``."""

    def __init__(self, entries: Mapping[Key, float] | None = None, registry: MetricRegistry | None = None):
        self.registry = registry if registry is not None else default_registry()
        data: dict[Key, float] = {}
        for key, score in (entries or {}).items():
            lp, system, seg, metric = key
            self.registry.get(metric)
            score = float(score)
            if not math.isfinite(score):
                raise NonFiniteInput(f"non-finite score for {key!r}")
            data[(str(lp), str(system), int(seg), str(metric))] = score
        self._data = data
        self._index: dict | None = None

    @classmethod
    def from_rows(cls, rows: Iterable[tuple], registry: MetricRegistry | None = None) -> "ScoreTable":
        entries: dict[Key, float] = {}
        for lp, system, seg, metric, score in rows:
            key = (lp, system, int(seg), metric)
            if key in entries:
                raise DuplicateKey(key)
            entries[key] = score
        return cls(entries, registry)

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key) -> bool:
        return key in self._data

    def __getitem__(self, key) -> float:
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other) -> bool:
        return isinstance(other, ScoreTable) and self._data == other._data

    def items(self):
        return self._data.items()

    def get(self, lp, system, seg, metric, default=None):
        return self._data.get((lp, system, seg, metric), default)

    def _build_index(self) -> dict:
        if self._index is None:
            idx: dict = {}
            for (lp, system, seg, metric), score in self._data.items():
                idx.setdefault((lp, system, metric), {})[seg] = score
            self._index = idx
        return self._index

    def lps(self) -> list[str]:
        return sorted({k[0] for k in self._data})

    def systems(self, lp: str | None = None) -> list[str]:
        return sorted({k[1] for k in self._data if lp is None or k[0] == lp})

    def metrics(self, lp: str | None = None) -> list[str]:
        return sorted({k[3] for k in self._data if lp is None or k[0] == lp})

    def segments(self, lp: str, system: str, metric: str) -> dict[int, float]:
        """seg -> score for one (lp, system, metric) column."""
        return dict(self._build_index().get((lp, system, metric), {}))

    def column(self, lp: str, system: str, metric: str, segs: Sequence[int]) -> np.ndarray:
        col = self._build_index().get((lp, system, metric), {})
        missing = [(lp, system, s, metric) for s in segs if s not in col]
        if missing:
            raise MissingScores(missing)
        return np.fromiter((col[s] for s in segs), dtype=float, count=len(segs))

    def spec(self, metric: str) -> MetricSpec:
        return self.registry.get(metric)

    def merged(self, other: "ScoreTable | Mapping[Key, float]", overwrite: bool = False) -> "ScoreTable":
        new = dict(self._data)
        items = other.items()
        for key, score in items:
            if key in new and not overwrite:
                raise DuplicateKey(key)
            new[key] = score
        registry = self.registry
        if isinstance(other, ScoreTable) and other.registry is not registry:
            registry = registry.copy()
            for spec in other.registry:
                if spec.name not in registry:
                    registry.register(spec)
        return ScoreTable(new, registry)

    def filter(self, lp=None, systems=None, metrics=None) -> "ScoreTable":
        systems = set(systems) if systems is not None else None
        metrics = set(metrics) if metrics is not None else None
        keep = {
            k: v
            for k, v in self._data.items()
            if (lp is None or k[0] == lp)
            and (systems is None or k[1] in systems)
            and (metrics is None or k[3] in metrics)
        }
        return ScoreTable(keep, self.registry)

    def sorted_keys(self) -> list[Key]:
        return sorted(self._data)

    def to_tsv(self) -> str:
        lines = ["\t".join(SCORE_HEADER)]
        for key in self.sorted_keys():
            lp, system, seg, metric = key
            lines.append(f"{lp}\t{system}\t{seg}\t{metric}\t{format_score(self._data[key])}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        out = []
        for key in self.sorted_keys():
            lp, system, seg, metric = key
            row = {"lp": lp, "system": system, "seg": seg, "metric": metric,
                   "score": float(format_score(self._data[key]))}
            out.append(json.dumps(row, ensure_ascii=False))
        return "\n".join(out) + ("\n" if out else "")

    def save(self, path) -> None:
        path = Path(path)
        text = self.to_jsonl() if path.suffix == ".jsonl" else self.to_tsv()
        path.write_text(text, encoding="utf-8")


def _parse_score(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(f"unparsable score {text!r}", line) from None
    if not math.isfinite(value):
        raise MalformedRow(f"non-finite score {text!r}", line)
    return value


def _parse_seg(text, line: int) -> int:
    try:
        if isinstance(text, bool):
            raise ValueError
        if isinstance(text, float) and not text.is_integer():
            raise ValueError
        return int(text)
    except (TypeError, ValueError):
        raise MalformedRow(f"segment id {text!r} is not an integer", line) from None


def _check_utf8(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        raise MalformedRow(f"{path}: not valid UTF-8 ({e})") from None


def parse_score_tsv(text: str, registry: MetricRegistry) -> ScoreTable:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or tuple(lines[0].rstrip("\r").split("\t")) != SCORE_HEADER:
        raise MalformedRow("expected header " + "\\t".join(SCORE_HEADER), 1)
    entries: dict[Key, float] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = raw.rstrip("\r").split("\t")
        if len(cols) != 5:
            raise MalformedRow(f"expected 5 columns, got {len(cols)}", lineno)
        lp, system, seg, metric, score = cols
        if metric not in registry:
            raise UnknownMetric(metric, lineno)
        key = (lp, system, _parse_seg(seg, lineno), metric)
        if key in entries:
            raise DuplicateKey(key, lineno)
        entries[key] = _parse_score(score, lineno)
    return ScoreTable(entries, registry)


def parse_score_jsonl(text: str, registry: MetricRegistry) -> ScoreTable:
    entries: dict[Key, float] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
            lp, system, seg, metric, score = (row[k] for k in SCORE_HEADER)
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise MalformedRow(f"bad JSONL row ({e})", lineno) from None
        if metric not in registry:
            raise UnknownMetric(metric, lineno)
        key = (str(lp), str(system), _parse_seg(seg, lineno), str(metric))
        if key in entries:
            raise DuplicateKey(key, lineno)
        if isinstance(score, bool) or not isinstance(score, (int, float, str)):
            raise MalformedRow(f"unparsable score {score!r}", lineno)
        entries[key] = _parse_score(str(score), lineno)
    return ScoreTable(entries, registry)


def load_score_table(path, registry: MetricRegistry | None = None) -> ScoreTable:
    """Load and validate a score file (TSV, or JSONL when the suffix is ``.jsonl``)."""
    registry = registry if registry is not None else default_registry()
    path = Path(path)
    text = _check_utf8(path)
    if path.suffix == ".jsonl":
        return parse_score_jsonl(text, registry)
    return parse_score_tsv(text, registry)


@dataclass(frozen=True)
class AlignedMatrix:
    """Output of :func:`join_segments`: rows are segments, columns (system, metric)."""

    lp: str
    segs: np.ndarray
    columns: tuple
    values: np.ndarray

    def col(self, system: str, metric: str) -> np.ndarray:
        return self.values[:, self.columns.index((system, metric))]


def join_segments(table: ScoreTable, lp: str, systems: Sequence[str], metrics: Sequence[str],
                  min_overlap: int = 2) -> AlignedMatrix:
    if not systems or not metrics:
        raise InvalidArgument("join_segments needs at least one system and one metric")
    shared = None
    for system in systems:
        for metric in metrics:
            segs = set(table.segments(lp, system, metric))
            shared = segs if shared is None else shared & segs
    if len(shared) < min_overlap:
        raise InsufficientOverlap(
            f"{lp}: only {len(shared)} shared segment(s) across systems {list(systems)} "
            f"and metrics {list(metrics)}; need {min_overlap}"
        )
    segs = sorted(shared)
    columns = tuple((s, m) for s in systems for m in metrics)
    values = np.empty((len(segs), len(columns)))
    for j, (s, m) in enumerate(columns):
        values[:, j] = table.column(lp, s, m, segs)
    return AlignedMatrix(lp, np.array(segs, dtype=np.int64), columns, values)


@dataclass(frozen=True)
class TranslationRow:
    lp: str
    system: str
    seg: int
    src: str
    hyp: str
    ref: str | None = None


class TranslationTable:
    def __init__(self, rows: Iterable[TranslationRow]):
        self.rows: list[TranslationRow] = []
        seen = set()
        for r in rows:
            key = (r.lp, r.system, r.seg)
            if key in seen:
                raise DuplicateKey(key)
            if not r.src:
                raise MalformedRow(f"empty source for {key!r}")
            seen.add(key)
            self.rows.append(r)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def load_translation_table(path) -> TranslationTable:
    """Read ``lp, system, seg, src, hyp[, ref]`` TSV rows; an empty ref cell means no reference."""
    text = _check_utf8(Path(path))
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = tuple(lines[0].rstrip("\r").split("\t")) if lines else ()
    if header not in (TRANSLATION_HEADER, TRANSLATION_HEADER[:5]):
        raise MalformedRow("expected header " + "\\t".join(TRANSLATION_HEADER), 1)
    width = len(header)
    rows = []
    seen = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cols = raw.rstrip("\r").split("\t")
        if len(cols) != width:
            raise MalformedRow(f"expected {width} columns, got {len(cols)}", lineno)
        lp, system, seg, src, hyp = cols[:5]
        ref = cols[5] if width == 6 and cols[5] != "" else None
        row = TranslationRow(lp, system, _parse_seg(seg, lineno), src, hyp, ref)
        key = (row.lp, row.system, row.seg)
        if key in seen:
            raise DuplicateKey(key, lineno)
        if not src:
            raise MalformedRow("empty source", lineno)
        seen.add(key)
        rows.append(row)
    return TranslationTable(rows)


@dataclass
class CandidatePool:
    lp: str
    seg: int
    src: str
    candidates: list = field(default_factory=list)
    ref: str | None = None

    def __len__(self) -> int:
        return len(self.candidates)


def load_pools(path) -> list[CandidatePool]:
    pools = []
    text = _check_utf8(Path(path))
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            d = json.loads(raw)
            pool = CandidatePool(str(d["lp"]), _parse_seg(d["seg"], lineno), str(d["src"]),
                                 [str(c) for c in d["candidates"]], d.get("ref"))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise MalformedRow(f"bad pool row ({e})", lineno) from None
        pools.append(pool)
    return pools
