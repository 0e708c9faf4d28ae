"""Riesz and logarithmic pair interactions, and discrete energies of point sets.

Values are extended reals: coincident points interact with ``+inf`` for every
``s >= 0`` and any infinite summand makes an energy infinite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    """Riesz s-kernel; ``s == 0`` selects ``-log|x - y|``."""

    s: float

    def __post_init__(self):
        if not np.isfinite(self.s) or self.s < 0:
            raise ValueError(f"Riesz exponent must be finite and >= 0, got {self.s}")

    @property
    def is_log(self) -> bool:
        return self.s == 0

    def profile(self, t):
        """K(t; s) for distances ``t >= 0`` (array or scalar)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.is_log:
                out = -np.log(t)
            else:
                out = np.power(t, -self.s)
        # t == 0 gives +inf in both branches already; keep it explicit
        return np.where(t == 0.0, np.inf, out)


@dataclass(frozen=True)
class Configuration:
    """Ordered, possibly repeating, list of points in R^p."""

    points: np.ndarray

    def __post_init__(self):
        pts = as_points(self.points)
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def as_points(x, dimension: int | None = None) -> np.ndarray:
    """Coerce to a float array of shape (n, p).

    A flat sequence is read as n points in R^1 unless ``dimension`` says otherwise.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if dimension is not None and dimension > 1:
            arr = arr.reshape(-1, dimension)
        else:
            arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"points must be 1-D or 2-D, got shape {arr.shape}")
    if dimension is not None and arr.shape[1] != dimension:
        raise ValueError(f"dimension mismatch: expected {dimension}, got {arr.shape[1]}")
    return arr


def _as_point(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def kernel_eval(spec: KernelSpec, x, y) -> float:
    x, y = _as_point(x), _as_point(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(spec.profile(np.linalg.norm(x - y)))


def distances_to(points: np.ndarray, y) -> np.ndarray:
    """Euclidean distances from every row of ``points`` to the single point ``y``."""
    diff = points - _as_point(y)[None, :]
    if points.shape[1] == 1:
        return np.abs(diff[:, 0])
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def kernel_to_point(spec: KernelSpec, points: np.ndarray, y) -> np.ndarray:
    """Vector of k(x_i, y) over the rows x_i of ``points``."""
    return spec.profile(distances_to(points, y))


def pairwise_distances(a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    b = a if b is None else b
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Dense kernel matrix; the diagonal of a self-matrix is +inf."""
    return spec.profile(pairwise_distances(a, b))


def _config_points(cfg) -> np.ndarray:
    if isinstance(cfg, Configuration):
        return cfg.points
    return as_points(cfg)


def energy(spec: KernelSpec, cfg) -> float:
    """E(omega_N): sum of k(x_i, x_j) over ordered pairs i != j."""
    pts = _config_points(cfg)
    n = pts.shape[0]
    if n < 2:
        raise ValueError(f"energy needs at least 2 points, got {n}")
    iu = np.triu_indices(n, k=1)
    vals = kernel_matrix(spec, pts)[iu]
    if np.isinf(vals).any():
        return np.inf
    return float(2.0 * vals.sum())


def weighted_energy(spec: KernelSpec, field, cfg) -> float:
    """E_f(omega_N) = E(omega_N) + 2 (N - 1) sum_i f(x_i)."""
    pts = _config_points(cfg)
    n = pts.shape[0]
    base = energy(spec, pts)
    fvals = field.evaluate(pts)
    if np.isinf(base) or np.isinf(fvals).any():
        return np.inf
    return float(base + 2.0 * (n - 1) * fvals.sum())
