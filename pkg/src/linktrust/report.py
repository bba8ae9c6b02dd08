"""JSON and aligned plain-text rendering of reports."""

from __future__ import annotations

import json
from typing import Any, Sequence


def to_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def table(headers: Sequence[str], rows: Sequence[Sequence[Any]], title: str | None = None) -> str:
    cells = [[_cell(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w)
                               for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return "\n".join(lines) + "\n"


def cv_table(results: dict[str, dict[str, dict]], datasets: Sequence[str]) -> str:
    """Classifier x measure rows, one column per dataset."""
    measures = (("AUC", "auc"), ("F-Measure", "f_measure"),
                ("False-Positive", "false_positive_rate"), ("True-Positive", "true_positive_rate"))
    rows = []
    for family, per_ds in results.items():
        for label, key in measures:
            rows.append([family, label] + [per_ds[d][key] if d in per_ds else "-" for d in datasets])
    return table(["classifier", "measure", *datasets], rows)


def curve_table(curves: dict[str, Any]) -> str:
    ks = sorted({k for c in curves.values() for k, _ in c.points})
    rows = [[k] + [dict(c.points).get(k, "-") for c in curves.values()] for k in ks]
    return table(["k", *curves], rows)
