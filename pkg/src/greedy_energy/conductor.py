"""Finite candidate sets standing in for conductors.

Every minimization over a conductor A becomes a minimum over one of these sets.
Refinement studies (larger M) replace the continuum limit.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .kernel import as_points


@dataclass(frozen=True)
class CandidateSet:
    points: np.ndarray
    mesh_scale: float
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = as_points(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not np.isfinite(pts).all():
            raise ValueError("candidate points must be finite")
        n_distinct = np.unique(pts, axis=0).shape[0]
        if n_distinct < 2:
            raise ValueError("a candidate set needs at least 2 distinct points")
        if not self.mesh_scale > 0:
            raise ValueError(f"mesh scale must be > 0, got {self.mesh_scale}")

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def diameter(self) -> float:
        if self.dimension == 1:
            return float(np.ptp(self.points[:, 0]))
        hull_pts = self.points
        if len(hull_pts) > 2000:
            # farthest pair lies on the convex hull
            from scipy.spatial import ConvexHull
            try:
                hull_pts = hull_pts[ConvexHull(hull_pts).vertices]
            except Exception:  # degenerate (e.g. coplanar) sets
                pass
        d = 0.0
        for chunk in np.array_split(hull_pts, max(1, len(hull_pts) // 1000)):
            diff = chunk[:, None, :] - hull_pts[None, :, :]
            d = max(d, float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max())))
        return d

    def nearest_index(self, x) -> int:
        """Index of the candidate closest to ``x`` (lowest index on ties)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = np.linalg.norm(self.points - x[None, :], axis=1)
        return int(np.argmin(d))


def _grid_axis(a: float, b: float, m: int) -> np.ndarray:
    # (a*(m-1-i) + b*i)/(m-1) is exactly symmetric when a == -b
    i = np.arange(m, dtype=float)
    return (a * (m - 1 - i) + b * i) / (m - 1)


def interval_grid(a: float, b: float, M: int) -> CandidateSet:
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if M < 2:
        raise ValueError(f"need M >= 2, got {M}")
    x = _grid_axis(a, b, M)
    return CandidateSet(x[:, None], (b - a) / (M - 1), label=f"interval[{a},{b}]x{M}",
                        meta={"kind": "interval", "a": a, "b": b, "M": M})


def box_grid(lower, upper, M_per_axis: int) -> CandidateSet:
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape:
        raise ValueError("lower and upper corners differ in dimension")
    if not (lower < upper).all():
        raise ValueError("degenerate box: need lower < upper in every coordinate")
    if M_per_axis < 2:
        raise ValueError("need at least 2 points per axis")
    axes = [_grid_axis(lo, hi, M_per_axis) for lo, hi in zip(lower, upper)]
    # first coordinate varies slowest
    pts = np.array(list(itertools.product(*axes)), dtype=float)
    h = float(np.max((upper - lower) / (M_per_axis - 1)))
    return CandidateSet(pts, h, label=f"box{lower.tolist()}-{upper.tolist()}x{M_per_axis}",
                        meta={"kind": "box", "M": M_per_axis})


def ball_grid(radius: float, p: int, M_per_axis: int) -> CandidateSet:
    """Tensor grid on [-radius, radius]^p restricted to the closed ball."""
    if not radius > 0:
        raise ValueError("radius must be > 0")
    if p not in (2, 3):
        raise ValueError(f"ball_grid supports p in {{2, 3}}, got {p}")
    if M_per_axis < 2:
        raise ValueError("need at least 2 points per axis")
    axis = _grid_axis(-radius, radius, M_per_axis)
    mesh = np.meshgrid(*([axis] * p), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.einsum("ij,ij->i", pts, pts) <= radius * radius * (1 + 1e-12)
    pts = pts[keep]
    if len(pts) < 2:
        raise ValueError(f"grid with {M_per_axis} points per axis leaves fewer than 2 "
                         f"points inside the ball of radius {radius}")
    return CandidateSet(pts, 2 * radius / (M_per_axis - 1),
                        label=f"ball(r={radius},p={p})x{M_per_axis}",
                        meta={"kind": "ball", "radius": radius, "M": M_per_axis})


def sphere_points(p: int = 3, M: int = 100) -> CandidateSet:
    """Fibonacci spiral on the unit sphere S^2."""
    if p != 3:
        raise ValueError(f"sphere_points supports p = 3 only, got {p}")
    if M < 4:
        raise ValueError("need M >= 4")
    k = np.arange(M, dtype=float) + 0.5
    z = 1.0 - 2.0 * k / M
    rho = np.sqrt(1.0 - z * z)
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return CandidateSet(pts, min_pairwise_distance(pts), label=f"sphere x{M}",
                        meta={"kind": "sphere", "M": M})


def min_pairwise_distance(points: np.ndarray) -> float:
    """Smallest positive distance between rows (duplicates are ignored)."""
    pts = np.unique(as_points(points), axis=0)
    if len(pts) < 2:
        raise ValueError("need at least 2 distinct points")
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def load_points(path) -> CandidateSet:
    """Read a CSV with one point per row.

    A single leading header row (any non-numeric first line) is skipped so that
    files written by :func:`save_points` load back unchanged.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            if not rows and lineno == 1 and not all(_is_number(c) for c in cells):
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: cannot parse {row!r}") from exc
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} columns, "
                                 f"got {len(rows[-1])}")
    if not rows:
        raise ValueError(f"{path}: no points")
    pts = np.array(rows, dtype=float)
    if np.unique(pts, axis=0).shape[0] < 2:
        raise ValueError(f"{path}: fewer than 2 distinct points")
    return CandidateSet(pts, min_pairwise_distance(pts), label=path.name,
                        meta={"kind": "file", "path": str(path)})


def format_float(x: float) -> str:
    return repr(float(x))


def save_points(path, points: np.ndarray, header: bool = True) -> None:
    """Write points as CSV, one per row, in the given order."""
    pts = as_points(points)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(pts.shape[1])])
        for row in pts:
            w.writerow([format_float(v) for v in row])
