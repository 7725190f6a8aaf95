"""Deterministic SVG drawings of shadows and polytopes.

Points are projected to the plane by a 2×n matrix (default: the first two
coordinates), fitted into the canvas, and written with a fixed number of
decimals so that the same input always yields the same bytes.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .polytope import RationalPolytope
from .shadows import PolygonalShadow

PALETTE = ("#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#17202a")


def default_projection(dim: int) -> np.ndarray:
    P = np.zeros((2, dim))
    P[0, 0] = 1.0
    if dim > 1:
        P[1, 1] = 1.0
    return P


def _points(obj, scale) -> tuple[str, np.ndarray]:
    if isinstance(obj, PolygonalShadow):
        return "polyline", obj.vertices / float(scale)
    if isinstance(obj, RationalPolytope):
        return "polygon", obj.array()
    return "polyline", np.asarray(obj, dtype=float)


def _hull_order(Q: np.ndarray) -> np.ndarray:
    """Convex hull of planar points in counterclockwise order (monotone chain)."""
    pts = sorted(set(map(tuple, np.round(Q, 12).tolist())))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def render_svg(
    objects: Sequence,
    projection: np.ndarray | None = None,
    scales: Sequence | None = None,
    size: int = 480,
    margin: int = 16,
    title: str | None = None,
    decimals: int = 3,
) -> str:
    """SVG document with one polyline per shadow and one polygon per polytope.

    ``scales[i]`` divides the vertices of the i-th shadow (the ``k`` in ``shd_k``).
    """
    if not objects:
        raise ValueError("nothing to draw")
    scales = list(scales) if scales is not None else [1] * len(objects)
    kinds, clouds = [], []
    for obj, s in zip(objects, scales):
        kind, X = _points(obj, s)
        X = np.atleast_2d(X)
        P = default_projection(X.shape[1]) if projection is None else np.asarray(projection, dtype=float)
        if P.shape != (2, X.shape[1]):
            raise ValueError(f"projection must be 2×{X.shape[1]}")
        Q = X @ P.T
        if kind == "polygon":
            Q = _hull_order(Q)
        kinds.append(kind)
        clouds.append(Q)
    allpts = np.concatenate(clouds)
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    f = (size - 2 * margin) / span

    def fmt(q):
        x = margin + (q[0] - lo[0]) * f
        y = size - margin - (q[1] - lo[1]) * f  # y axis points up
        return f"{x:.{decimals}f},{y:.{decimals}f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{title}</title>')
    for i, (kind, Q) in enumerate(zip(kinds, clouds)):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(fmt(q) for q in Q)
        if kind == "polygon":
            out.append(f'<polygon points="{pts}" fill="{colour}" fill-opacity="0.15" stroke="{colour}" stroke-width="1"/>')
        else:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="0.8"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
