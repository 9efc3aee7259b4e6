"""Serialization of results to JSON/CSV and static SVG charts.

JSON floats use Python's shortest round-trip repr; NaN becomes ``null``.
CSV floats carry 4 decimals.  Every artifact starts with (CSV: ``#``
comment lines) or contains (JSON: ``manifest``; SVG: ``<metadata>``) the
run manifest.  Nothing time- or host-dependent is written, so equal
manifests give byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from . import __version__
from .errors import DataError

SCHEMA_VERSION = 1
TOOL = "auxmode"


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_manifest(command: str, params: dict, input_path=None) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "params": params,
        "input_sha256": file_digest(input_path) if input_path is not None else None,
    }


def _clean(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _clean(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    if isinstance(obj, float):
        return None if math.isnan(obj) or math.isinf(obj) else obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(payload: dict) -> str:
    return json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"


def document(kind: str, manifest: dict, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "manifest": manifest, **body}


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "NA"
        return f"{v:.4f}"
    return str(v)


def to_csv(manifest: dict, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(_clean(manifest), sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_cell(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def rows_of(items) -> list[dict]:
    return [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in items]


# ---------------------------------------------------------------- SVG charts

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 30, 62, 60
PLOT_W = WIDTH - LEFT - RIGHT
PLOT_H = HEIGHT - TOP - BOTTOM
COLORS = {
    "naive": "#7f7f7f",
    "ratio": "#1f77b4",
    "product": "#2ca02c",
    "transformed_ratio": "#d62728",
    "transformed_product": "#9467bd",
}


def _px(v: float) -> str:
    return f"{v:.2f}"


class _Axis:
    def __init__(self, lo: float, hi: float, start: float, length: float, flip: bool = False):
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DataError("cannot scale an axis over non-finite values")
        if hi == lo:
            pad = abs(lo) * 0.05 or 1.0
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi, self.start, self.length, self.flip = lo, hi, start, length, flip

    def __call__(self, v: float) -> float:
        t = (v - self.lo) / (self.hi - self.lo)
        if self.flip:
            t = 1.0 - t
        return self.start + t * self.length

    def ticks(self, count: int = 5) -> list[float]:
        return [self.lo + i * (self.hi - self.lo) / count for i in range(count + 1)]


def _svg_open(title: str, manifest: dict) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<metadata>{escape(json.dumps(_clean(manifest), sort_keys=True))}</metadata>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
    ]


def _frame(xa: _Axis, ya: _Axis, xlabel: str, ylabel: str, xticks=None) -> list[str]:
    out = [f'<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" '
           'fill="none" stroke="black"/>']
    for v in (xticks if xticks is not None else xa.ticks()):
        x = _px(xa(v))
        out.append(f'<line x1="{x}" y1="{TOP + PLOT_H}" x2="{x}" y2="{TOP + PLOT_H + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + PLOT_H + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{v:.4g}</text>')
    for v in ya.ticks():
        y = _px(ya(v))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                   f'font-family="sans-serif" font-size="11">{v:.4g}</text>')
    out.append(f'<text x="{LEFT + PLOT_W / 2:.0f}" y="{HEIGHT - 18}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + PLOT_H / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {TOP + PLOT_H / 2:.0f})">{escape(ylabel)}</text>')
    return out


def _legend(names) -> list[str]:
    # one row between the title and the plot area
    out = []
    step = PLOT_W / max(len(names), 1)
    for i, name in enumerate(names):
        x = LEFT + i * step
        y = TOP - 14
        out.append(f'<rect x="{_px(x)}" y="{y - 9}" width="12" height="10" fill="{COLORS.get(name, "black")}"/>')
        out.append(f'<text x="{_px(x + 16)}" y="{y}" font-family="sans-serif" font-size="11">{escape(name)}</text>')
    return out


def sweep_x_axis(doc: dict) -> _Axis:
    xs = [r["L1"] for r in doc["rows"]]
    return _Axis(min(xs), max(xs), LEFT, PLOT_W)


def render_sweep(doc: dict, manifest: dict) -> str:
    rows = doc["rows"]
    if not rows:
        raise DataError("sweep report has no grid points")
    ys = [v for r in rows for v in (r["exact_mse"], r["sim_mse"]) if v is not None]
    if not ys:
        raise DataError("sweep report has no finite MSE values")
    xa = sweep_x_axis(doc)
    ya = _Axis(0.0, max(ys) * 1.05, TOP, PLOT_H, flip=True)
    out = _svg_open(f"MSE of the transformed ratio estimator vs L1 (n={doc['n']})", manifest)
    out += _frame(xa, ya, "L1", "MSE")
    series = (("exact_mse", "#d62728", "none"), ("sim_mse", "#1f77b4", "6,4"))
    for key, color, dash in series:
        pts = " ".join(f"{_px(xa(r['L1']))},{_px(ya(r[key]))}" for r in rows if r[key] is not None)
        out.append(f'<polyline class="{key}" points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="2" stroke-dasharray="{dash}"/>')
    opt = doc["L1_opt"]
    opt_row = next(r for r in rows if r["is_opt"])
    out.append(f'<circle id="l1-opt-marker" cx="{_px(xa(opt))}" cy="{_px(ya(opt_row["exact_mse"]))}" '
               f'r="5" fill="black" data-l1="{opt!r}"/>')
    out.append(f'<text x="{_px(xa(opt))}" y="{_px(ya(opt_row["exact_mse"]) - 10)}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="11">L1 opt = {opt:.4f}</text>')
    out.append('<text x="{0}" y="{1}" font-family="sans-serif" font-size="11" fill="#d62728">'
               'exact</text>'.format(LEFT + 10, TOP + 16))
    out.append('<text x="{0}" y="{1}" font-family="sans-serif" font-size="11" fill="#1f77b4">'
               'simulated</text>'.format(LEFT + 10, TOP + 32))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _estimators_and_sizes(doc: dict):
    rows = doc.get("rows") or []
    names = []
    for r in rows:
        if r["estimator"] not in names:
            names.append(r["estimator"])
    if not names:
        raise DataError("report lists no estimators")
    sizes = sorted({r["n"] for r in rows})
    return rows, names, sizes


def render_ci_ladder(doc: dict, manifest: dict) -> str:
    rows, names, sizes = _estimators_and_sizes(doc)
    lows = [r["sim_ci_lower"] for r in rows if r["sim_ci_lower"] is not None]
    highs = [r["sim_ci_upper"] for r in rows if r["sim_ci_upper"] is not None]
    target = doc.get("mode_y")
    lo = min(lows + ([target] if target is not None else []))
    hi = max(highs + ([target] if target is not None else []))
    pad = 0.05 * (hi - lo or 1.0)
    ya = _Axis(lo - pad, hi + pad, TOP, PLOT_H, flip=True)
    group = PLOT_W / len(sizes)
    xa = _Axis(0.0, float(len(sizes)), LEFT, PLOT_W)
    out = _svg_open("Mean simulated confidence intervals", manifest)
    out += _frame(xa, ya, "sample size n", "estimate", xticks=[])
    for gi, n in enumerate(sizes):
        cx = LEFT + group * (gi + 0.5)
        out.append(f'<text x="{_px(cx)}" y="{TOP + PLOT_H + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{n}</text>')
        for ei, name in enumerate(names):
            r = next((r for r in rows if r["n"] == n and r["estimator"] == name), None)
            if r is None or r["sim_ci_lower"] is None:
                continue
            x = cx + (ei - (len(names) - 1) / 2) * min(14.0, group / (len(names) + 1))
            color = COLORS.get(name, "black")
            out.append(f'<line class="ci" data-n="{n}" data-estimator="{name}" x1="{_px(x)}" '
                       f'y1="{_px(ya(r["sim_ci_lower"]))}" x2="{_px(x)}" y2="{_px(ya(r["sim_ci_upper"]))}" '
                       f'stroke="{color}" stroke-width="3"/>')
            out.append(f'<circle cx="{_px(x)}" cy="{_px(ya(r["mean_estimate"]))}" r="3" fill="{color}"/>')
    if target is not None:
        y = _px(ya(target))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + PLOT_W}" y2="{y}" stroke="black" '
                   'stroke-dasharray="3,3"/>')
    out += _legend(names)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_coverage_bars(doc: dict, manifest: dict) -> str:
    rows, names, sizes = _estimators_and_sizes(doc)
    ya = _Axis(0.0, 100.0, TOP, PLOT_H, flip=True)
    xa = _Axis(0.0, float(len(sizes)), LEFT, PLOT_W)
    group = PLOT_W / len(sizes)
    bar = group / (len(names) + 1)
    out = _svg_open("Coverage of the simulated intervals (%)", manifest)
    out += _frame(xa, ya, "sample size n", "coverage (%)", xticks=[])
    for gi, n in enumerate(sizes):
        x0 = LEFT + group * gi + bar / 2
        out.append(f'<text x="{_px(LEFT + group * (gi + 0.5))}" y="{TOP + PLOT_H + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="11">{n}</text>')
        for ei, name in enumerate(names):
            r = next((r for r in rows if r["n"] == n and r["estimator"] == name), None)
            if r is None or r["coverage_percent"] is None:
                continue
            top = ya(r["coverage_percent"])
            out.append(f'<rect class="bar" data-n="{n}" data-estimator="{name}" '
                       f'x="{_px(x0 + ei * bar)}" y="{_px(top)}" width="{_px(bar * 0.9)}" '
                       f'height="{_px(TOP + PLOT_H - top)}" fill="{COLORS.get(name, "black")}"/>')
    out += _legend(names)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_report(report_json_path, out_dir) -> list[Path]:
    """Render a saved JSON report to SVG files in ``out_dir``.

    Every chart is built in memory first; nothing is written unless all of
    them succeed.
    """
    path = Path(report_json_path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise DataError("not a report of a supported schema version")
    manifest = make_manifest("report", {"source_manifest": doc.get("manifest")}, path)
    kind = doc.get("kind")
    try:
        if kind == "sweep":
            charts = {"sweep.svg": render_sweep(doc, manifest)}
        elif kind in ("simulation", "coverage"):
            charts = {"ci_ladder.svg": render_ci_ladder(doc, manifest),
                      "coverage_bars.svg": render_coverage_bars(doc, manifest)}
        else:
            raise DataError(f"no charts for report kind {kind!r}")
    except (KeyError, TypeError, StopIteration) as exc:
        raise DataError(f"malformed {kind} report: {exc!r}") from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in charts.items():
        target = out / name
        target.write_text(text, encoding="utf-8")
        written.append(target)
    return written
