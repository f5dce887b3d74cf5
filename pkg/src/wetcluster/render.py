"""SVG renderings of every artifact the command line writes.

Clusters are drawn as filled regions with G hatched and junctions as dots;
label fields as run-length rectangles; CSV files as line charts; JSON
reports and manifests as text panels.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .arcs import ArcChain, CircArc
from .cluster import G, ArcCluster
from .lattice.field import FORMAT_TAG as FIELD_TAG
from .lattice.field import LabelField
from .serialize import FORMAT_TAG as CLUSTER_TAG
from .serialize import cluster_from_dict

PALETTE = ["#ffffff", "#8fb8de", "#f2b880", "#a8d5a2", "#d8a8d8", "#f0e68c", "#9fd8d8", "#e0a0a0", "#c0c0f0"]
HATCH = (
    '<pattern id="hatch" patternUnits="userSpaceOnUse" width="0.02" height="0.02" patternTransform="rotate(45)">'
    '<rect width="0.02" height="0.02" fill="#e8e8e8"/><line x1="0" y1="0" x2="0" y2="0.02" stroke="#333" '
    'stroke-width="0.006"/></pattern>'
)


def _color(label) -> str:
    if label == G:
        return "url(#hatch)"
    return PALETTE[int(label) % len(PALETTE)]


def _num(x: float) -> str:
    return repr(float(x))


def _arc_cmd(a: CircArc) -> str:
    x, y = _num(a.end.x), _num(a.end.y)
    if a.curvature == 0:
        return f"L {x} {y}"
    r = _num(a.radius)
    large = 1 if a.angle > math.pi else 0
    sweep = 1 if a.curvature > 0 else 0
    return f"A {r} {r} 0 {large} {sweep} {x} {y}"


def chain_path(c: ArcChain) -> str:
    s = c.arcs[0].start
    parts = [f"M {_num(s.x)} {_num(s.y)}"] + [_arc_cmd(a) for a in c.arcs]
    if c.closed:
        parts.append("Z")
    return " ".join(parts)


def _document(body: list[str], box: tuple[float, float, float, float], flip: bool = True, px: int = 640) -> str:
    x0, y0, x1, y1 = box
    w, h = x1 - x0, y1 - y0
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{int(px * h / w)}" '
        f'viewBox="{_num(x0)} {_num(-y1 if flip else y0)} {_num(w)} {_num(h)}">'
    )
    inner = "\n".join(body)
    if flip:
        inner = f'<g transform="scale(1,-1)">\n{inner}\n</g>'
    return f"{head}\n<defs>{HATCH}</defs>\n{inner}\n</svg>\n"


def render_cluster(cl: ArcCluster, domain: str = "ball") -> str:
    body = []
    if domain == "ball":
        body.append('<circle cx="0" cy="0" r="1" fill="#ffffff" stroke="#000" stroke-width="0.006"/>')
    for r in sorted(cl.regions, key=lambda r: r.label == G):
        body.append(f'<path d="{chain_path(r.boundary)}" fill="{_color(r.label)}" stroke="none"/>')
    for i in cl.interfaces:
        width = "0.006" if G in (i.left, i.right) else "0.008"
        body.append(f'<path d="{chain_path(i.chain)}" fill="none" stroke="#000" stroke-width="{width}"/>')
    for j in cl.junctions:
        fill = "#c00000" if j.kind in ("interior-cusp", "boundary-corner") else "#000"
        body.append(f'<circle cx="{_num(j.point.x)}" cy="{_num(j.point.y)}" r="0.014" fill="{fill}"/>')
    return _document(body, (-1.1, -1.1, 1.1, 1.1))


def render_field(f: LabelField) -> str:
    """One rectangle per horizontal run of equal labels."""
    body = []
    lab = f.labels
    runs: dict = {}
    for i in range(lab.shape[0]):
        row = lab[i]
        edges = [0] + [j for j in range(1, len(row)) if row[j] != row[j - 1]] + [len(row)]
        y = f.origin.y + i * f.cell
        for a, b in zip(edges, edges[1:]):
            v = int(row[a])
            if v == 0 and f.kind == "ball":
                continue
            x = f.origin.x + a * f.cell
            runs.setdefault(v, []).append(
                f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num((b - a) * f.cell)}" height="{_num(f.cell)}"/>'
            )
    for v, rects in sorted(runs.items()):
        fill = _color(G if v == f.g_label else v)
        body.append(f'<g fill="{fill}" shape-rendering="crispEdges">' + "".join(rects) + "</g>")
    if f.kind == "ball":
        body.append('<circle cx="0" cy="0" r="1" fill="none" stroke="#000" stroke-width="0.006"/>')
    h, w = f.shape
    return _document(body, (f.origin.x, f.origin.y, f.origin.x + w * f.cell, f.origin.y + h * f.cell))


def render_chart(title: str, x: list[float], series: dict, log: bool = False) -> str:
    """Line chart on a unit box; ``series`` maps a name to y values."""
    def tf(v):
        return math.log10(v) if log else v

    pts = {k: [(tf(a), tf(b)) for a, b in zip(x, ys) if b is not None and (not log or (a > 0 and b > 0))]
           for k, ys in series.items()}
    allp = [p for v in pts.values() for p in v]
    body = [f'<text x="0.02" y="0.06" font-size="0.045">{escape(title)}</text>']
    if allp:
        xs, ys = [p[0] for p in allp], [p[1] for p in allp]
        xa, xb = min(xs), max(xs)
        ya, yb = min(ys), max(ys)
        sx = 0.9 / (xb - xa) if xb > xa else 1.0
        sy = 0.75 / (yb - ya) if yb > ya else 1.0
        body.append('<rect x="0.05" y="0.12" width="0.9" height="0.8" fill="none" stroke="#888" stroke-width="0.003"/>')
        for n, (k, v) in enumerate(pts.items()):
            coords = " ".join(f"{_num(0.05 + (a - xa) * sx)},{_num(0.9 - (b - ya) * sy)}" for a, b in v)
            col = PALETTE[1 + n % (len(PALETTE) - 1)]
            body.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="0.006"/>')
            body.append(f'<text x="0.06" y="{_num(0.97 - 0.04 * n)}" font-size="0.03" fill="{col}">{escape(k)}</text>')
    return _document(body, (0.0, 0.0, 1.0, 1.0), flip=False)


def render_text(title: str, lines: list[str]) -> str:
    body = [f'<text x="0.02" y="0.05" font-size="0.035" font-weight="bold">{escape(title)}</text>']
    for n, line in enumerate(lines):
        body.append(f'<text x="0.02" y="{_num(0.1 + 0.03 * n)}" font-size="0.022" font-family="monospace">'
                    f"{escape(line)}</text>")
    return _document(body, (0.0, 0.0, 1.6, max(1.0, 0.12 + 0.03 * len(lines))), flip=False)


def _render_csv(path: Path) -> str:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return render_text(path.name, ["(empty)"])
    cols = list(rows[0])

    def col(name):
        out = []
        for r in rows:
            try:
                out.append(float(r[name]))
            except (TypeError, ValueError):
                out.append(None)
        return out

    if "sweep" in cols:
        return render_chart(f"{path.name}: energy per sweep", col("sweep"), {"energy": col("energy")})
    if "delta" in cols:
        series = {k: col(k) for k in ("hausdorff_chambers", "hausdorff_G_sigma") if k in cols}
        return render_chart(f"{path.name}: distances vs delta (log-log)", col("delta"), series, log=True)
    return render_text(path.name, [", ".join(cols)] + [", ".join(r.values()) for r in rows])


def render_path(path: str | Path) -> str:
    """SVG for any artifact file written by the command line."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"P5":
        return render_field(LabelField.load(path))
    if path.suffix == ".csv":
        return _render_csv(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(doc, dict) and doc.get("format") == CLUSTER_TAG:
        return render_cluster(cluster_from_dict(doc), doc.get("spec", {}).get("domain", "ball"))
    if isinstance(doc, dict) and doc.get("format") == FIELD_TAG:
        image = Path(str(path)[: -len(".json")])
        return render_field(LabelField.load(image))
    if isinstance(doc, dict) and "checks" in doc:
        lines = [f"{c['name']}: {c['status']} ({c['tier']})" for c in doc["checks"]]
        return render_text(f"verification: {doc.get('subject', '')}", lines + ["ok: " + str(doc.get("ok"))])
    lines = json.dumps(doc, indent=1, sort_keys=True).splitlines()
    return render_text(path.name, lines[:200])
