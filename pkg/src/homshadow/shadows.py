"""Shadows of words and graph paths, their darkness measures and half points.

A step ``±i`` moves the shadow by ``±e_i``.  The length function only
changes the speed at which a segment is traversed, so the vertex sequence
does not depend on it; the darkness measure does.

Segments are identified by their lower lattice corner and their axis, so
both traversal directions land on the same segment.  Half points are stored
with doubled coordinates to keep them integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .graphs import GraphPath
from .words import Word


def path_steps(p, dim: int | None = None) -> tuple[np.ndarray, int]:
    """Signed steps of a word, graph path or raw sequence, plus ambient dimension."""
    if isinstance(p, GraphPath):
        return np.asarray(p.steps, dtype=np.int64), p.graph.n_edges
    if isinstance(p, Word):
        a = p.array.astype(np.int64)
    else:
        a = np.asarray(p, dtype=np.int64).reshape(-1)
    if dim is None:
        dim = int(np.abs(a).max()) if a.size else 1
    elif a.size and np.abs(a).max() > dim:
        raise ValueError("step index exceeds the dimension")
    return a, dim


def _step_matrix(a: np.ndarray, dim: int) -> np.ndarray:
    D = np.zeros((a.size, dim), dtype=np.int64)
    if a.size:
        D[np.arange(a.size), np.abs(a) - 1] = np.sign(a)
    return D


@dataclass(frozen=True)
class PolygonalShadow:
    vertices: np.ndarray  # (len+1, dim) integer lattice points
    steps: np.ndarray
    times: tuple | None = None  # cumulative lengths when a length function is given

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def __len__(self) -> int:
        return int(self.steps.size)

    def rescaled(self, k) -> np.ndarray:
        return self.vertices / float(k)


def parametrized_shadow(p, lengths: Sequence | None = None, dim: int | None = None) -> PolygonalShadow:
    a, dim = path_steps(p, dim)
    V = np.zeros((a.size + 1, dim), dtype=np.int64)
    if a.size:
        np.cumsum(_step_matrix(a, dim), axis=0, out=V[1:])
    times = None
    if lengths is not None:
        acc = [lengths[0] * 0]
        for s in a:
            acc.append(acc[-1] + lengths[abs(int(s)) - 1])
        times = tuple(acc)
    return PolygonalShadow(V, a, times)


def segment_keys(a: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower corners and axes (0-based) of the segments crossed by each step."""
    V = np.zeros((a.size + 1, dim), dtype=np.int64)
    if a.size:
        np.cumsum(_step_matrix(a, dim), axis=0, out=V[1:])
    axes = np.abs(a) - 1
    base = V[:-1].copy()
    neg = a < 0
    base[neg, axes[neg]] -= 1
    return base, axes


@dataclass
class SegmentMeasure:
    """Weighted lattice segments; the support of each is scaled by ``1/scale``."""

    bases: np.ndarray  # (m, dim) integer lower corners
    axes: np.ndarray  # (m,) 0-based axis
    masses: list  # exact masses (Fraction or field elements)
    scale: object = 1
    approx: np.ndarray | None = None  # float masses, when computed alongside

    @property
    def dim(self) -> int:
        return self.bases.shape[1]

    def total(self):
        return sum(self.masses[1:], self.masses[0])

    def as_dict(self) -> dict:
        return {(tuple(int(x) for x in b), int(ax)): m for b, ax, m in zip(self.bases, self.axes, self.masses)}

    def float_masses(self) -> np.ndarray:
        if self.approx is None:
            self.approx = np.array([float(m) for m in self.masses])
        return self.approx

    def rescale(self, k) -> "SegmentMeasure":
        return SegmentMeasure(self.bases, self.axes, self.masses, self.scale * k, self.approx)

    def midpoints(self) -> np.ndarray:
        P = self.bases.astype(float)
        P[np.arange(len(self.axes)), self.axes] += 0.5
        return P / float(self.scale)

    def mean(self) -> np.ndarray:
        return self.float_masses() @ self.midpoints()


def darkness_measure(p, lengths: Sequence | None = None, k=1, dim: int | None = None) -> SegmentMeasure:
    """Normalised time spent on each segment, pushed forward by ``x -> x/k``."""
    a, dim = path_steps(p, dim)
    if a.size == 0:
        raise ValueError("darkness of an empty path is undefined")
    base, axes = segment_keys(a, dim)
    keys = np.concatenate([base, axes[:, None]], axis=1)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    if lengths is None:
        n = int(a.size)
        masses = [Fraction(int(c), n) for c in counts]
        approx = counts / float(n)
    else:
        per_axis = np.bincount(axes, minlength=dim)
        zero = lengths[0] * 0
        total = sum((int(per_axis[i]) * lengths[i] for i in range(dim) if per_axis[i]), zero)
        ratios = [lengths[i] / total for i in range(dim)]
        masses = [int(c) * ratios[int(ax)] for c, ax in zip(counts, uniq[:, -1])]
        approx = counts * np.array([float(r) for r in ratios])[uniq[:, -1]]
    return SegmentMeasure(uniq[:, :-1].copy(), uniq[:, -1].copy(), masses, k, approx)


@dataclass(frozen=True)
class HalfPointSet:
    doubled: frozenset  # integer tuples 2x

    def __len__(self) -> int:
        return len(self.doubled)

    def points(self) -> set[tuple[Fraction, ...]]:
        return {tuple(Fraction(c, 2) for c in x) for x in self.doubled}

    def array(self) -> np.ndarray:
        if not self.doubled:
            return np.zeros((0, 0))
        return np.array(sorted(self.doubled), dtype=float) / 2.0

    def __le__(self, other: "HalfPointSet") -> bool:
        return self.doubled <= other.doubled


def half_points(p, lengths: Sequence | None = None, dim: int | None = None) -> HalfPointSet:
    """Midpoints of the distinct segments the shadow traverses."""
    if lengths is not None and any(x != 1 for x in lengths):
        raise ValueError("half points are defined for unit lengths only")
    a, dim = path_steps(p, dim)
    base, axes = segment_keys(a, dim)
    D = 2 * base
    D[np.arange(a.size), axes] += 1
    return HalfPointSet(frozenset(map(tuple, np.unique(D, axis=0).tolist())))


def densify(shadow: PolygonalShadow, samples: int = 4, k=1) -> np.ndarray:
    """Points of the shadow: vertices plus ``samples`` evenly spaced points per segment."""
    V = shadow.vertices
    a = shadow.steps
    if a.size == 0:
        return V.astype(float) / float(k)
    base, axes = segment_keys(a, V.shape[1])
    keys = np.unique(np.concatenate([base, axes[:, None]], axis=1), axis=0)
    base, axes = keys[:, :-1].astype(float), keys[:, -1]
    pts = [np.unique(V, axis=0).astype(float)]
    for j in range(1, samples):
        P = base.copy()
        P[np.arange(len(axes)), axes] += j / samples
        pts.append(P)
    return np.unique(np.concatenate(pts), axis=0) / float(k)


def hausdorff_distance(X, Y) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.size == 0 or Y.size == 0:
        raise ValueError("Hausdorff distance of an empty set")
    dxy = cKDTree(Y).query(X)[0].max()
    dyx = cKDTree(X).query(Y)[0].max()
    return float(max(dxy, dyx))


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _is_rational(x) -> bool:
    return isinstance(x, Rational)


def ball_mass(mu: SegmentMeasure, center, radius):
    """Measure of the closed ball; exact when the clipping is rational."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if len(center) != mu.dim:
        raise ValueError(f"center has dimension {len(center)}, measure lives in dimension {mu.dim}")
    exact = _is_rational(radius) and all(_is_rational(c) for c in center) and len(mu.masses) <= 200_000
    if exact:
        out = _ball_mass_exact(mu, [Fraction(c) for c in center], Fraction(radius))
        if out is not None:
            return out
    return _ball_mass_float(mu, np.asarray([float(c) for c in center]), float(radius))


def _ball_mass_exact(mu: SegmentMeasure, c, r):
    k = Fraction(mu.scale) if _is_rational(mu.scale) else None
    if k is None:
        return None
    # work in unscaled coordinates: the ball becomes B(k c, k r)
    c = [k * x for x in c]
    r2 = (k * r) ** 2
    total = mu.masses[0] * 0
    for b, ax, m in zip(mu.bases.tolist(), mu.axes.tolist(), mu.masses):
        off = r2 - sum((b[j] - c[j]) ** 2 for j in range(len(b)) if j != ax)
        if off < 0:
            continue
        s = _rational_sqrt(off)
        if s is None:
            return None
        lo = max(Fraction(0), c[ax] - b[ax] - s)
        hi = min(Fraction(1), c[ax] - b[ax] + s)
        if hi > lo:
            total = total + m * (hi - lo)
    return total


def _ball_mass_float(mu: SegmentMeasure, c: np.ndarray, r: float) -> float:
    k = float(mu.scale)
    B = mu.bases.astype(float)
    ax = mu.axes
    idx = np.arange(len(ax))
    d = B - k * c
    d2 = (d * d).sum(axis=1) - d[idx, ax] ** 2
    off = (k * r) ** 2 - d2
    ok = off >= 0
    s = np.sqrt(np.where(ok, off, 0.0))
    t = k * c[ax] - B[idx, ax]
    lo = np.maximum(0.0, t - s)
    hi = np.minimum(1.0, t + s)
    frac = np.where(ok, np.clip(hi - lo, 0.0, 1.0), 0.0)
    return float((mu.float_masses() * frac).sum())
