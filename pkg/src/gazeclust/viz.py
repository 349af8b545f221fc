"""Convex-hull overlays of clustered gaze points, rendered as SVG."""
from __future__ import annotations

from dataclasses import dataclass, field
from html import escape

import numpy as np

from .clustering.base import NOISE

PALETTE = (
    "#e6194b",
    "#3cb44b",
    "#ffe119",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
    "#bcf60c",
    "#008080",
)
NOISE_COLOR = "#808080"
FILL_OPACITY = 0.35


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain.  Counter-clockwise (y up), collinear points dropped.

    One distinct point gives a 1-vertex hull, collinear input gives its two endpoints.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("convex hull of an empty point set")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) < 3:
        return np.array(uniq, dtype=float)

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(uniq)
    upper = half(reversed(uniq))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    area = polygon_area(v)
    if len(v) < 3 or abs(area) < 1e-12:
        return v.mean(axis=0)
    nxt = np.roll(v, -1, axis=0)
    c = v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]
    return np.array([((v[:, 0] + nxt[:, 0]) * c).sum(), ((v[:, 1] + nxt[:, 1]) * c).sum()]) / (6 * area)


def smooth_polygon(vertices, iterations: int = 1) -> np.ndarray:
    """Chaikin corner cutting on a closed polygon.  Each pass keeps the 1/4 and 3/4 points of every edge."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return v
    for _ in range(iterations):
        nxt = np.roll(v, -1, axis=0)
        q = 0.75 * v + 0.25 * nxt
        r = 0.25 * v + 0.75 * nxt
        v = np.stack([q, r], axis=1).reshape(-1, 2)
    return v


@dataclass
class HullPolygon:
    vertices: np.ndarray
    cluster_id: int
    proportion: float

    @property
    def centroid(self) -> np.ndarray:
        return polygon_centroid(self.vertices)


def cluster_proportions(labels) -> tuple[dict[int, float], float]:
    lab = np.asarray(labels)
    if lab.size == 0:
        raise ValueError("empty assignment")
    ids, counts = np.unique(lab[lab != NOISE], return_counts=True)
    props = {int(i): c / lab.size for i, c in zip(ids, counts)}
    return props, float(np.count_nonzero(lab == NOISE) / lab.size)


@dataclass
class OverlayScene:
    width: float
    height: float
    hulls: list[HullPolygon]
    noise_proportion: float = 0.0
    noise_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    background: str | None = None
    title: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def colors(self) -> list[str]:
        return [PALETTE[i % len(PALETTE)] for i in range(len(self.hulls))]


def build_scene(points, labels, width, height, background=None, smooth: int = 0, title: str = "",
                metadata=None) -> OverlayScene:
    """Hulls are ordered by descending proportion (ties by cluster id), which fixes their colours."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lab = np.asarray(labels)
    if len(pts) != len(lab):
        raise ValueError("points and labels differ in length")
    props, noise = cluster_proportions(lab)
    order = sorted(props, key=lambda c: (-props[c], c))
    hulls = []
    for c in order:
        hull = convex_hull(pts[lab == c])
        if smooth:
            hull = smooth_polygon(hull, smooth)
        hulls.append(HullPolygon(hull, c, props[c]))
    return OverlayScene(width, height, hulls, noise, pts[lab == NOISE], background, title, dict(metadata or {}))


def _f(x) -> str:
    return f"{float(x):.2f}"


def render_overlay(scene: OverlayScene) -> str:
    if not (scene.width > 0 and scene.height > 0):
        raise ValueError("canvas size must be positive")
    w, h = _f(scene.width), _f(scene.height)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
    ]
    if scene.metadata:
        meta = " ".join(f"{k}={scene.metadata[k]}" for k in sorted(scene.metadata))
        out.append(f"<metadata>{escape(meta)}</metadata>")
    if scene.title:
        out.append(f"<title>{escape(scene.title)}</title>")
    out.append(f"<desc>noise {100 * scene.noise_proportion:.2f}%</desc>")
    if scene.background:
        out.append(f'<image href="{escape(scene.background)}" x="0" y="0" width="{w}" height="{h}"/>')
    else:
        out.append(f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>')
    for hull, color in zip(scene.hulls, scene.colors):
        v = hull.vertices
        cid = f'data-cluster="{hull.cluster_id}"'
        if len(v) == 1:
            out.append(f'<circle {cid} cx="{_f(v[0, 0])}" cy="{_f(v[0, 1])}" r="4" fill="{color}"/>')
        elif len(v) == 2:
            out.append(
                f'<line {cid} x1="{_f(v[0, 0])}" y1="{_f(v[0, 1])}" x2="{_f(v[1, 0])}" y2="{_f(v[1, 1])}" '
                f'stroke="{color}" stroke-width="3"/>'
            )
        else:
            pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in v)
            out.append(
                f'<polygon {cid} points="{pts}" fill="{color}" fill-opacity="{FILL_OPACITY}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
    for x, y in scene.noise_points:
        out.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="2" fill="none" stroke="{NOISE_COLOR}"/>')
    for hull in scene.hulls:
        cx, cy = hull.centroid
        out.append(
            f'<text x="{_f(cx)}" y="{_f(cy)}" font-family="sans-serif" font-size="14" '
            f'text-anchor="middle">{100 * hull.proportion:.2f}%</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_filename(subject_id: str, stimulus_id: str, algorithm) -> str:
    return f"{subject_id}_{stimulus_id}_{getattr(algorithm, 'value', algorithm)}.svg"
