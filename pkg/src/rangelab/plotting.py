"""Static SVG pictures of regions, point clouds and ellipses, plus CSV/JSON export."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .numrange import ConvexRegion, Ellipse

MAX_CLOUD_POINTS = 20000


def _bounds(chunks, pad=0.08):
    pts = np.concatenate([np.asarray(c, dtype=np.complex128).ravel() for c in chunks] or
                         [np.zeros(0, complex)])
    pts = pts[np.isfinite(pts)]
    if pts.size == 0:
        return -1.0, 1.0, -1.0, 1.0
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    half = max(x1 - x0, y1 - y0, 1e-6) / 2 * (1 + pad)
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    return cx - half, cx + half, cy - half, cy + half


def _path(z, to_px, closed=True) -> str:
    if len(z) == 0:
        return ""
    pts = [to_px(p) for p in z]
    d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in pts)
    return d + (" Z" if closed else "")


def render_svg(regions=(), clouds=(), ellipses=(), targets=(), size: int = 480,
               title: str | None = None) -> str:
    """SVG text with axes, outer polygons of ``regions``, ``clouds`` as dots,
    ``ellipses`` with focus markers and labelled ``targets``.

    ``targets`` is a sequence of ``(label, complex)`` pairs.  Nothing but the
    axes is drawn when every input is empty.
    """
    regions = list(regions)
    clouds = [np.asarray(c, dtype=np.complex128).ravel() for c in clouds]
    ellipses = list(ellipses)
    targets = [(str(lbl), complex(z)) for lbl, z in targets]
    chunks = [r.vertices() for r in regions] + clouds
    chunks += [e.boundary(360) for e in ellipses] + [[z for _, z in targets]]
    x0, x1, y0, y1 = _bounds(chunks)
    s = size / (x1 - x0)

    def to_px(z):
        return (z.real - x0) * s, (y1 - z.imag) * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    if title:
        out.append(f'<title>{escape(title)}</title>')
    ox, oy = to_px(0j)
    if 0 <= ox <= size:
        out.append(f'<line class="axis" x1="{ox:.3f}" y1="0" x2="{ox:.3f}" y2="{size}" '
                   'stroke="#999" stroke-width="0.6"/>')
    if 0 <= oy <= size:
        out.append(f'<line class="axis" x1="0" y1="{oy:.3f}" x2="{size}" y2="{oy:.3f}" '
                   'stroke="#999" stroke-width="0.6"/>')
    for r in regions:
        out.append(f'<path class="region" d="{_path(r.vertices(), to_px)}" fill="#4a7bd0" '
                   'fill-opacity="0.15" stroke="#1f4e9c" stroke-width="1"/>')
    for cloud in clouds:
        if cloud.size > MAX_CLOUD_POINTS:
            cloud = cloud[np.linspace(0, cloud.size - 1, MAX_CLOUD_POINTS).astype(int)]
        for z in cloud:
            x, y = to_px(z)
            out.append(f'<circle class="point" cx="{x:.2f}" cy="{y:.2f}" r="0.8" fill="#333"/>')
    for e in ellipses:
        out.append(f'<path class="ellipse" d="{_path(e.boundary(360), to_px)}" fill="none" '
                   'stroke="#c0392b" stroke-width="1.2"/>')
        for z in (e.focus1, e.focus2):
            x, y = to_px(complex(z))
            out.append(f'<circle class="focus" cx="{x:.3f}" cy="{y:.3f}" r="3" fill="#c0392b"/>')
    for label, z in targets:
        x, y = to_px(z)
        out.append(f'<path class="target" d="M {x - 4:.2f} {y - 4:.2f} L {x + 4:.2f} {y + 4:.2f} '
                   f'M {x - 4:.2f} {y + 4:.2f} L {x + 4:.2f} {y - 4:.2f}" stroke="#0a7d32" '
                   'stroke-width="1.5"/>')
        out.append(f'<text x="{x + 6:.2f}" y="{y - 6:.2f}" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(path, **kw) -> Path:
    path = Path(path)
    try:
        path.write_text(render_svg(**kw))
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path


def write_support_csv(region: ConvexRegion, path) -> Path:
    """``theta,h`` rows with round-trip float formatting."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "h"])
            for t, h in zip(region.directions, region.support):
                w.writerow([repr(float(t)), repr(float(h))])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def read_support_csv(path) -> ConvexRegion:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return ConvexRegion([float(r["theta"]) for r in rows], [float(r["h"]) for r in rows])


def write_points_csv(points, path) -> Path:
    path = Path(path)
    z = np.asarray(points, dtype=np.complex128).ravel()
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for p in z:
                w.writerow([repr(float(p.real)), repr(float(p.imag))])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def write_json(obj, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(obj, indent=2))
    except OSError as exc:
        raise OSError(f"cannot write JSON to {path}: {exc}") from exc
    return path


def ellipse_summary(e: Ellipse) -> dict:
    return {"focus1": [e.focus1.real, e.focus1.imag], "focus2": [e.focus2.real, e.focus2.imag],
            "minor_axis": e.minor_axis, "major_axis": e.major_axis}
