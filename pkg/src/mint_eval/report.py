"""Meta-evaluation report container and rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyReport, InvalidArgument


@dataclass(frozen=True)
class Column:
    name: str
    higher_better: bool = True


@dataclass
class MetaEvalReport:
    """Methods as rows, meta-metrics as columns. ``None`` marks a missing cell."""

    columns: list
    rows: list  # (method, [value | None, ...])
    title: str = ""
    notes: list = field(default_factory=list)

    def __post_init__(self):
        for method, values in self.rows:
            if len(values) != len(self.columns):
                raise InvalidArgument(f"row {method!r} has {len(values)} values for {len(self.columns)} columns")

    def best(self, j: int):
        vals = [r[1][j] for r in self.rows if r[1][j] is not None]
        if not vals:
            return None
        return max(vals) if self.columns[j].higher_better else min(vals)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "columns": [{"name": c.name, "higher_better": c.higher_better} for c in self.columns],
            "rows": [{"method": m, "values": list(v)} for m, v in self.rows],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetaEvalReport":
        try:
            cols = [Column(c["name"], bool(c.get("higher_better", True))) for c in d["columns"]]
            rows = [(r["method"], [None if v is None else float(v) for v in r["values"]]) for r in d["rows"]]
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgument(f"bad report document ({e})") from None
        return cls(cols, rows, d.get("title", ""), list(d.get("notes", [])))

    @classmethod
    def load(cls, path) -> "MetaEvalReport":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as e:
            raise InvalidArgument(f"{path}: invalid JSON ({e})") from None

    @classmethod
    def from_results(cls, results: dict, columns: list, title: str = "") -> "MetaEvalReport":
        """``results[method][column_name] -> value``; rows keep the dict order."""
        rows = [(m, [vals.get(c.name) for c in columns]) for m, vals in results.items()]
        return cls(columns, rows, title)


def _fmt(v, marked: bool, style: str) -> str:
    if v is None:
        return "--"
    s = f"{v:.4f}"
    if marked:
        return f"**{s}**" if style == "markdown" else s + "*"
    return s


def render_report(report: MetaEvalReport, fmt: str = "markdown") -> str:
    """Render as a Markdown table or TSV; the best value in each column is
    marked (bold, or a trailing ``*`` in TSV), and ties are all marked."""
    if not report.rows or not report.columns:
        raise EmptyReport("report has no rows")
    if fmt not in ("markdown", "tsv"):
        raise InvalidArgument(f"unknown report format {fmt!r}")
    best = [report.best(j) for j in range(len(report.columns))]
    body = []
    for method, values in report.rows:
        cells = [_fmt(v, v is not None and v == best[j], fmt) for j, v in enumerate(values)]
        body.append([method] + cells)
    header = ["Method"] + [c.name + (" ↑" if c.higher_better else " ↓") for c in report.columns]

    if fmt == "tsv":
        return "\n".join("\t".join(r) for r in [header] + body) + "\n"

    lines = []
    if report.title:
        lines += [f"### {report.title}", ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join([":---"] + ["---:"] * len(report.columns)) + "|")
    lines += ["| " + " | ".join(r) + " |" for r in body]
    if report.notes:
        lines.append("")
        lines += report.notes
    return "\n".join(lines) + "\n"
