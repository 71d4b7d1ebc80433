"""Report assembly and rendering (json / csv / table).

JSON reports are ``{"version", "config", "records", "summary"}`` with
sorted keys, so identical configurations (including seeds) reproduce
byte-identical output.
"""

from __future__ import annotations

import json

REPORT_VERSION = 1

__all__ = ["make_report", "render", "render_json", "render_csv", "render_table"]


def _jsonable(value):
    import numpy as np

    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def make_report(config: dict, records: list, summary: dict) -> dict:
    return {
        "version": REPORT_VERSION,
        "config": _jsonable(config),
        "records": _jsonable(records),
        "summary": _jsonable(summary),
    }


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


def render_csv(report: dict) -> str:
    records = report["records"]
    if not records:
        return "\n"
    header = list(records[0].keys())
    lines = [",".join(header)]
    for rec in records:
        lines.append(",".join(_cell(rec.get(k, "")).replace(",", ";")
                              for k in header))
    return "\n".join(lines) + "\n"


def render_table(report: dict, max_rows: int = 40) -> str:
    records = report["records"]
    out = []
    if records:
        header = list(records[0].keys())
        rows = [[_short(rec.get(k, "")) for k in header]
                for rec in records[:max_rows]]
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(header)]
        out.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
        for r in rows:
            out.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        if len(records) > max_rows:
            out.append(f"... ({len(records) - max_rows} more rows)")
    summary = report.get("summary") or {}
    if summary:
        out.append("-- summary --")
        for k in sorted(summary):
            out.append(f"{k}: {_short(summary[k])}")
    return "\n".join(out) + "\n"


def _short(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (list, dict)):
        s = json.dumps(value, sort_keys=True)
        return s if len(s) <= 48 else s[:45] + "..."
    return str(value)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "table":
        return render_table(report)
    raise ValueError(f"unknown output format {fmt!r}")
