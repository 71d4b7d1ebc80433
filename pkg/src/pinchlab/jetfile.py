"""JSON interchange format for user-supplied immersion jets.

Schema::

    {
      "n": <intrinsic dimension>,
      "N": <ambient manifold dimension>,
      "c": 0 | 1,
      "radius": <sphere radius, only when c = 1; default 1.0>,
      "points": [
        {
          "u":   [n floats],
          "f":   [D floats],              D = N (c=0) or N+1 (c=1)
          "df":  [n*D floats],            row-major, row i is df/du_i
          "d2f": [n*(n+1)/2 * D floats]   row-major upper triangle,
                                          rows ordered (i, j), i <= j,
                                          lexicographically
        }, ...
      ]
    }

The upper-triangular layout stores each mixed second derivative once,
so the symmetry d2f[i,j] = d2f[j,i] is structural.  Full square layouts
are rejected: a row count other than n(n+1)/2 is a schema error.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .jets import AmbientSpace, Axis, Chart, Domain, Jet2

__all__ = ["JetFileError", "load_jet_chart", "dump_jet_file", "chart_to_jet_obj"]

FORMAT_VERSION = 1


class JetFileError(ValueError):
    """The jet file violates the documented schema."""


def _tri_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i, n)]


def _require(cond: bool, msg: str):
    if not cond:
        raise JetFileError(msg)


def _parse_point(rec: dict, idx: int, n: int, D: int) -> tuple:
    _require(isinstance(rec, dict), f"point {idx}: expected an object")
    for key in ("u", "f", "df", "d2f"):
        _require(key in rec, f"point {idx}: missing field {key!r}")
    u = np.asarray(rec["u"], dtype=float)
    f = np.asarray(rec["f"], dtype=float)
    df = np.asarray(rec["df"], dtype=float)
    d2f = np.asarray(rec["d2f"], dtype=float)
    _require(u.shape == (n,), f"point {idx}: u must have {n} entries")
    _require(f.shape == (D,), f"point {idx}: f must have {D} entries")
    _require(df.size == n * D,
             f"point {idx}: df must have n*D = {n * D} entries (row-major)")
    tri = n * (n + 1) // 2
    _require(d2f.size == tri * D,
             f"point {idx}: d2f must have n(n+1)/2 * D = {tri * D} entries "
             f"(upper triangle, rows (i,j) with i <= j lexicographic); "
             f"got {d2f.size} — full square or asymmetric layouts are not "
             f"accepted")
    for name, arr in (("u", u), ("f", f), ("df", df), ("d2f", d2f)):
        _require(bool(np.isfinite(arr).all()),
                 f"point {idx}: non-finite value in {name!r}")
    d1 = df.reshape(n, D)
    d2 = np.empty((n, n, D))
    rows = d2f.reshape(tri, D)
    for row, (i, j) in enumerate(_tri_pairs(n)):
        d2[i, j] = rows[row]
        d2[j, i] = rows[row]
    return u, Jet2(pos=f, d1=d1, d2=d2)


def load_jet_chart(path: str) -> Chart:
    """Chart backed by the tabulated points of a jet file.

    The jet provider answers exactly at the listed parameter points (a
    1e-9 matching tolerance absorbs serialization roundoff); the point
    list itself is available as ``chart.meta['points']``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise JetFileError(f"not valid JSON: {exc}") from None
    _require(isinstance(obj, dict), "top level must be an object")
    for key in ("n", "N", "c", "points"):
        _require(key in obj, f"missing top-level field {key!r}")
    n, N, c = int(obj["n"]), int(obj["N"]), int(obj["c"])
    _require(n >= 1, "n must be at least 1")
    _require(c in (0, 1), "c must be 0 or 1")
    _require(N >= n, "ambient dimension N must be at least n")
    radius = float(obj.get("radius", 1.0))
    _require(radius > 0, "radius must be positive")
    D = N if c == 0 else N + 1
    pts = obj["points"]
    _require(isinstance(pts, list) and len(pts) > 0, "points must be a nonempty list")

    table = []
    for idx, rec in enumerate(pts):
        table.append(_parse_point(rec, idx, n, D))
    us = np.stack([u for u, _ in table])

    def jet_at(u: np.ndarray) -> Jet2:
        u = np.asarray(u, dtype=float)
        dist = np.abs(us - u).max(axis=1)
        k = int(np.argmin(dist))
        if dist[k] > 1e-9 * (1.0 + np.abs(u).max()):
            raise JetFileError(
                f"no tabulated jet at u={u.tolist()} (nearest is "
                f"{us[k].tolist()})")
        return table[k][1]

    lo = us.min(axis=0)
    hi = us.max(axis=0)
    pad = 1e-9
    dom = Domain(tuple(Axis(float(a) - pad, float(b) + pad)
                       for a, b in zip(lo, hi)))
    amb = AmbientSpace(dim=N, curvature_flag=c, radius=radius)
    return Chart(n=n, ambient=amb, jet_at=jet_at, domain=dom,
                 name=f"jetfile({path})",
                 meta={"model": "jetfile", "points": [u for u, _ in table]})


def chart_to_jet_obj(chart: Chart, points) -> dict:
    """Serialize evaluated jets of a chart at the given parameter points."""
    n = chart.n
    recs = []
    for u in points:
        jet = chart.jet_at(np.asarray(u, dtype=float))
        tri = [jet.d2[i, j].tolist() for (i, j) in _tri_pairs(n)]
        recs.append({
            "u": np.asarray(u, dtype=float).tolist(),
            "f": jet.pos.tolist(),
            "df": [x for row in jet.d1.tolist() for x in row],
            "d2f": [x for row in tri for x in row],
        })
    obj = {
        "version": FORMAT_VERSION,
        "n": n,
        "N": chart.ambient.dim,
        "c": chart.ambient.curvature_flag,
        "points": recs,
    }
    if chart.ambient.curvature_flag == 1:
        obj["radius"] = chart.ambient.radius
    return obj


def dump_jet_file(path: str, chart: Chart, points) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(chart_to_jet_obj(chart, points), fh, indent=1, sort_keys=True)
        fh.write("\n")
