"""Diagnostics of greedy traces against equilibrium references.

Limits are estimated by tail means over the last quarter of a trajectory.
Weak-star convergence is measured by KS distance (1-D and radial) or by cell
masses on a box partition (2-D).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conductor import CandidateSet
from .equilibrium import EquilibriumReference, ReferenceKind
from .field import FieldSpec
from .kernel import KernelSpec, as_points, pairwise_distances
from .selector import GreedyTrace

ONE_D_KINDS = (ReferenceKind.RIESZ_INTERVAL, ReferenceKind.JACOBI)


def tail_mean(values, fraction: float = 0.25) -> float:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if len(v) == 0:
        return np.nan
    k = max(1, int(np.ceil(fraction * len(v))))
    return float(v[-k:].mean())


# -- trajectories -------------------------------------------------------------

def energy_trajectory(trace: GreedyTrace, kernel: KernelSpec = None, field: FieldSpec = None,
                      cand: CandidateSet = None):
    """(n, E_f(alpha_n) / n^2) from the trace's running energies.

    Block traces are sampled at whole blocks only, n = m N, so the value is
    E_f / (m N)^2. ``kernel``, ``field`` and ``cand`` are accepted for API
    symmetry; the trace already carries everything needed.
    """
    n = np.arange(1, len(trace) + 1)
    mask = n >= 2
    if trace.block_size > 1:
        mask &= n % trace.block_size == 0
    return n[mask], trace.energy_prefix[mask] / n[mask] ** 2


def robin_trajectory(trace: GreedyTrace):
    """(n, U_n(a_n) / n) for n >= 2."""
    n = np.arange(1, len(trace) + 1)
    return n[1:], trace.u_values[1:] / n[1:]


def block_trajectory(trace: GreedyTrace):
    """(N, U_{mN}^{(f,m)}(block N+1) / N) for N >= 1; tends to m^2 (V_f - int f dmu)."""
    if trace.block_size < 2:
        raise ValueError("not a block trace")
    N = np.arange(1, len(trace.block_values))
    return N, trace.block_values[1:] / N


def sequence_diagnostics(kernel: KernelSpec, field: FieldSpec, points):
    """Recompute U_n(b_n) and E_f of every prefix of an arbitrary point sequence.

    Independent of the greedy engine: a dense pair matrix and cumulative sums.
    Returns (u, energy) with u[n-1] = sum_{i<n} k(b_n, b_i) + (n-1) f(b_n) and
    energy[n-1] = E_f(b_1..b_n); both NaN at n = 1.
    """
    pts = as_points(points, field.dimension)
    n = len(pts)
    K = kernel.profile(pairwise_distances(pts))
    row = np.tril(K, k=-1).sum(axis=1)  # sum_{i<n} k(b_n, b_i)
    f = field.evaluate(pts)
    idx = np.arange(n)
    with np.errstate(invalid="ignore"):
        u = row + idx * f
        energy = 2.0 * np.cumsum(row) + 2.0 * idx * np.cumsum(f)
    u[0] = np.nan
    energy[0] = np.nan
    return u, energy


def energy_identity_error(trace: GreedyTrace) -> float:
    """Largest relative defect of E_f(alpha_N) = 2 sum_{i>=2} U_i(a_i) + 2 sum_i (N - i) f(a_i).

    The defect is relative to the sum of absolute values of the terms, which is
    the scale of accumulated rounding.
    """
    u = np.nan_to_num(trace.u_values, nan=0.0)
    f = trace.field_values
    worst = 0.0
    cu = np.cumsum(u)
    cabs = np.cumsum(np.abs(u))
    cf = np.cumsum(f)
    cif = np.cumsum(np.arange(1, len(f) + 1) * f)
    cfa = np.cumsum(np.abs(f))
    cifa = np.cumsum(np.arange(1, len(f) + 1) * np.abs(f))
    for N in range(2, len(trace) + 1):
        j = N - 1
        rhs = 2.0 * cu[j] + 2.0 * (N * cf[j] - cif[j])
        scale = 2.0 * cabs[j] + 2.0 * (N * cfa[j] - cifa[j])
        lhs = trace.energy_prefix[j]
        denom = max(abs(lhs), scale, np.finfo(float).tiny)
        worst = max(worst, abs(lhs - rhs) / denom)
    return worst


# -- distribution distances ---------------------------------------------------

def ks_statistic(samples, cdf) -> float:
    """sup_i max(|F(x_i) - i/N|, |F(x_i) - (i-1)/N|) over the sorted sample."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.abs(F - i / n).max(), np.abs(F - (i - 1) / n).max()))


def ks_distance_1d(points, ref: EquilibriumReference) -> float:
    if ref.kind not in ONE_D_KINDS or ref.cdf is None:
        raise ValueError(f"{ref.kind.value} reference has no 1-D CDF")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 2:
        if pts.shape[1] != 1:
            raise ValueError("ks_distance_1d needs points on the line")
        pts = pts[:, 0]
    return ks_statistic(pts, ref.cdf)


def ks_distance_radial(points, ref: EquilibriumReference) -> float:
    """KS distance between the law of |x_i| and the radial CDF of the reference."""
    if ref.kind is not ReferenceKind.RADIAL_NEWTONIAN:
        raise ValueError("ks_distance_radial needs a radial reference")
    p = ref.params["p"]
    pts = as_points(points)
    if pts.shape[1] != p:
        raise ValueError(f"dimension mismatch: reference lives in R^{p}, "
                         f"points in R^{pts.shape[1]}")
    return ks_statistic(np.linalg.norm(pts, axis=1), ref.cdf)


def cell_frequencies(points, lower, upper, cells: int = 4) -> np.ndarray:
    """Fraction of points in each cell of a cells^p partition of the box."""
    pts = as_points(points)
    return cell_masses(pts, np.full(len(pts), 1.0 / len(pts)), lower, upper, cells)


def cell_masses(points, weights, lower, upper, cells: int = 4) -> np.ndarray:
    """Weight per cell; points on an inner cell boundary belong to the upper cell."""
    pts = as_points(points)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rel = (pts - lower) / (upper - lower)
    ids = np.clip(np.floor(rel * cells).astype(int), 0, cells - 1)
    flat = np.ravel_multi_index(tuple(ids.T), (cells,) * pts.shape[1])
    return np.bincount(flat, weights=weights, minlength=cells ** pts.shape[1])


def cell_discrepancy(points, ref: EquilibriumReference, lower, upper, cells: int = 4) -> float:
    """Max-norm gap between point frequencies and a discrete reference's cell masses."""
    if ref.weights is None or ref.candidates is None:
        raise ValueError("cell discrepancy needs a discrete reference")
    freq = cell_frequencies(points, lower, upper, cells)
    mass = cell_masses(ref.candidates.points, ref.weights, lower, upper, cells)
    return float(np.abs(freq - mass).max())


# -- support membership -------------------------------------------------------

def support_excess(ref: EquilibriumReference, field: FieldSpec, points) -> np.ndarray:
    """U^mu(x) + f(x) - W_f at each point; <= 0 inside the essential support."""
    if ref.potential is None or ref.W_f is None:
        raise ValueError("reference has no potential or W_f")
    pts = as_points(points, field.dimension)
    with np.errstate(invalid="ignore"):
        return ref.potential(pts) + field.evaluate(pts) - ref.W_f


def support_violation(trace: GreedyTrace, ref: EquilibriumReference, field: FieldSpec,
                      cand: CandidateSet) -> float:
    """max over a_n, n >= 2, of U^mu(a_n) + f(a_n) - W_f."""
    if len(trace) < 2:
        return -np.inf
    return float(support_excess(ref, field, cand.points[trace.selected[1:]]).max())


# -- limit diagnostic for arbitrary sequences -------------------------------

@dataclass
class LimitCheck:
    """Whether T_n(b_n)/n settles near W_f and E_f/N^2 near V_f."""

    n: np.ndarray
    t_values: np.ndarray
    e_values: np.ndarray
    t_tail: float
    e_tail: float
    target_W: float
    target_V: float
    hypothesis_ok: bool
    conclusion_ok: bool
    in_support_fraction: float = np.nan


def robin_limit_check(points, kernel: KernelSpec, field: FieldSpec,
                        cand: CandidateSet | None, ref: EquilibriumReference,
                        tol_t: float = 0.08, tol_e: float = 0.06, tail: float = 0.25,
                        support_slack: float = 0.05) -> LimitCheck:
    """Diagnostic pairing of the Robin-type hypothesis and the energy conclusion.

    ``points`` are candidate indices when ``cand`` is given, coordinates
    otherwise. Not a proof: it compares tail means with the stated tolerances.
    """
    if ref.W_f is None or ref.V_f is None:
        raise ValueError("reference carries no V_f / W_f targets")
    if cand is not None:
        coords = cand.points[np.asarray(points, dtype=np.int64)]
    else:
        coords = as_points(points, field.dimension)
    u, energy = sequence_diagnostics(kernel, field, coords)
    n = np.arange(1, len(coords) + 1)
    t_vals = u / n
    e_vals = energy / n ** 2
    t_tail = _strict_tail(t_vals[1:], tail)
    e_tail = _strict_tail(e_vals[1:], tail)
    in_support = np.nan
    if ref.potential is not None:
        excess = support_excess(ref, field, coords)
        in_support = float(np.mean(excess <= support_slack))
    return LimitCheck(n[1:], t_vals[1:], e_vals[1:], t_tail, e_tail, ref.W_f, ref.V_f,
                      bool(abs(t_tail - ref.W_f) <= tol_t),
                      bool(abs(e_tail - ref.V_f) <= tol_e), in_support)


def _strict_tail(values, fraction):
    # unlike tail_mean, an infinite tail must stay infinite
    v = np.asarray(values, dtype=float)
    k = max(1, int(np.ceil(fraction * len(v))))
    return float(v[-k:].mean())


def van_der_corput(n: int, base: int = 2) -> np.ndarray:
    """First n terms of the van der Corput sequence in (0, 1), starting at 1/2."""
    out = np.empty(n)
    for i in range(n):
        k, denom, x = i + 1, 1.0, 0.0
        while k:
            k, digit = divmod(k, base)
            denom *= base
            x += digit / denom
        out[i] = x
    return out


# -- report --------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    N_values: np.ndarray
    normalized_energy: np.ndarray
    robin_values: np.ndarray
    ks_distances: np.ndarray
    target_Vf: float | None
    target_Wf: float | None
    support_violation: float | None
    extras: dict = field(default_factory=dict)

    def final(self) -> dict:
        def last(a):
            a = np.asarray(a, dtype=float)
            return float(a[-1]) if len(a) else None
        return {
            "N": int(self.N_values[-1]) if len(self.N_values) else None,
            "normalized_energy": last(self.normalized_energy),
            "robin_value": last(self.robin_values),
            "robin_tail_mean": tail_mean(self.robin_values),
            "ks_distance": last(self.ks_distances),
            "target_Vf": self.target_Vf,
            "target_Wf": self.target_Wf,
            "support_violation": self.support_violation,
            **self.extras,
        }


def convergence_report(trace: GreedyTrace, kernel: KernelSpec, field: FieldSpec,
                       cand: CandidateSet, ref: EquilibriumReference | None = None,
                       ks_every: int = 1) -> ConvergenceReport:
    """Trajectories sampled at every prefix (every block for block traces)."""
    N, energy = energy_trajectory(trace, kernel, field, cand)
    if trace.block_size > 1:
        bN, bvals = block_trajectory(trace)
        robin = np.full(len(N), np.nan)
        # row for n = m N' carries the diagnostic of the block that follows it
        robin[: len(bvals)] = bvals
    else:
        _, robin = robin_trajectory(trace)
    ks = np.full(len(N), np.nan)
    pts = trace.points(cand)
    if ref is not None and ref.cdf is not None:
        measure = ks_distance_radial if ref.kind is ReferenceKind.RADIAL_NEWTONIAN \
            else ks_distance_1d
        for j, n in enumerate(N):
            if j % ks_every == 0 or j == len(N) - 1:
                ks[j] = measure(pts[:n], ref)
    violation = None
    if ref is not None and ref.potential is not None and ref.W_f is not None:
        violation = support_violation(trace, ref, field, cand)
    return ConvergenceReport(N, energy, robin, ks,
                             None if ref is None else ref.V_f,
                             None if ref is None else ref.W_f, violation)
