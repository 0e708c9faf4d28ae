"""Greedy energy sequences and the brute-force optimal-configuration oracle.

All selections are candidate indices. Ties are broken by the lowest candidate
index, and for block steps by the lexicographically smallest sorted index tuple.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conductor import CandidateSet
from .field import FieldSpec
from .kernel import KernelSpec, distances_to, kernel_to_point

#: PRNG used for the multi-start block heuristic (numpy's PCG64).
PRNG_NAME = "PCG64"

MAX_TUPLES = 10_000_000


class GuardExceeded(RuntimeError):
    """A brute-force enumeration would exceed its tuple budget."""


class SelectionError(RuntimeError):
    """No candidate has a finite score."""


class BlockStrategy(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    ALTERNATING = "alternating"


@dataclass
class GreedyTrace:
    """Selected indices a_1..a_N and per-step diagnostics.

    ``u_values[n - 1]`` holds U_n(a_n) = sum_{i<n} k(a_n, a_i) + (n - 1) f(a_n)
    (NaN for n = 1); ``energy_prefix[n - 1]`` holds E_f of the first n points
    (NaN for n = 1).
    """

    selected: np.ndarray
    u_values: np.ndarray
    energy_prefix: np.ndarray
    field_values: np.ndarray
    block_size: int = 1
    block_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    accumulator: np.ndarray | None = None

    def __len__(self):
        return len(self.selected)

    def points(self, cand: CandidateSet) -> np.ndarray:
        return cand.points[self.selected]


# -- single-point greedy ------------------------------------------------------

class _Scorer:
    """Running potential S(x) = sum_i k(x, a_i) over the candidate set.

    With ``threads > 1`` the candidate range is split into contiguous slices;
    per-slice minima are reduced on (score, index) so the result does not depend
    on the partition.
    """

    def __init__(self, kernel: KernelSpec, points: np.ndarray, threads: int = 1):
        self.kernel = kernel
        self.points = points
        self.S = np.zeros(len(points))
        threads = max(1, int(threads))
        bounds = np.linspace(0, len(points), threads + 1).astype(int)
        self.slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        self.pool = ThreadPoolExecutor(len(self.slices)) if len(self.slices) > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def _step(self, sl, y, weights, n):
        S = self.S[sl]
        S += self.kernel.profile(distances_to(self.points[sl], y))
        with np.errstate(invalid="ignore"):
            score = S + n * weights[sl]
        i = int(np.argmin(score))
        return float(score[i]), sl.start + i

    def add_and_argmin(self, y, weights, n):
        """Add k(., y) to S and return (min, argmin) of S + n * weights."""
        if self.pool is None:
            return self._step(self.slices[0], y, weights, n)
        parts = self.pool.map(lambda sl: self._step(sl, y, weights, n), self.slices)
        return min(parts)


def _resolve_start(start, fvals: np.ndarray) -> int:
    if start is None or start == "auto":
        if not np.isfinite(fvals).any():
            raise SelectionError("field is +inf on every candidate")
        return int(np.argmin(fvals))
    idx = int(start)
    if not 0 <= idx < len(fvals):
        raise IndexError(f"start index {idx} out of range for {len(fvals)} candidates")
    if not np.isfinite(fvals[idx]):
        raise ValueError(f"field is +inf at the start candidate {idx}")
    return idx


def greedy_run(kernel: KernelSpec, field: FieldSpec, cand: CandidateSet, N: int,
               start="auto", threads: int = 1) -> GreedyTrace:
    """Weighted greedy f-energy sequence on a candidate set.

    a_1 is ``start`` (default: argmin f); a_{n+1} minimizes
    sum_{i<=n} k(x, a_i) + n f(x) over all candidates.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    fvals = field.evaluate(cand.points)
    sel = np.empty(N, dtype=np.int64)
    u = np.full(N, np.nan)
    energy_prefix = np.full(N, np.nan)
    sel[0] = _resolve_start(start, fvals)

    scorer = _Scorer(kernel, cand.points, threads)
    pair_energy = 0.0
    fsum = fvals[sel[0]]
    try:
        for n in range(1, N):
            score, idx = scorer.add_and_argmin(cand.points[sel[n - 1]], fvals, n)
            if not np.isfinite(score):
                raise SelectionError(f"every candidate has score +inf at step {n + 1}")
            sel[n] = idx
            u[n] = score
            pair_energy += 2.0 * scorer.S[idx]
            fsum += fvals[idx]
            energy_prefix[n] = pair_energy + 2.0 * n * fsum
        # bring S up to date with the last selected point
        scorer.S += kernel.profile(distances_to(cand.points, cand.points[sel[N - 1]]))
    finally:
        scorer.close()
    return GreedyTrace(sel, u, energy_prefix, fvals[sel], 1, accumulator=scorer.S)


# -- block greedy -------------------------------------------------------------

def _tuple_values(kernel: KernelSpec, pts: np.ndarray, g: np.ndarray,
                  idx: np.ndarray) -> np.ndarray:
    """sum_i g(x_i) + sum_{i<j} k(x_i, x_j) for each row of index tuples."""
    with np.errstate(invalid="ignore"):
        val = g[idx].sum(axis=1)
        m = idx.shape[1]
        for i in range(m):
            for j in range(i + 1, m):
                d = np.linalg.norm(pts[idx[:, i]] - pts[idx[:, j]], axis=1)
                val = val + kernel.profile(d)
    return val


def _kernel_floor(kernel: KernelSpec, cand: CandidateSet) -> float:
    """Lower bound of k over pairs of candidates (k decreases with distance)."""
    return float(kernel.profile(cand.diameter()))


def _combinations(pool: np.ndarray, m: int, chunk: int = 200_000):
    it = itertools.combinations(pool.tolist(), m)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def _exhaustive_block(kernel, cand, g, m, upper, kfloor, max_tuples):
    """Exact minimizer of the block functional over m-subsets.

    Candidates whose optimistic bound g(x) + (m-1 smallest other g) +
    C(m,2) * kfloor exceeds a known feasible value ``upper`` cannot belong to a
    minimizer (nor to a tied one) and are dropped before enumeration.
    """
    finite = np.flatnonzero(np.isfinite(g))
    if len(finite) < m:
        raise SelectionError("fewer than m candidates with finite score")
    gx = g[finite]
    gs = np.sort(gx)
    # cheapest completion by m-1 other candidates, ignoring their interactions
    lb = np.where(gx <= gs[m - 1], gs[:m].sum(), gs[:m - 1].sum() + gx)
    lb = lb + math.comb(m, 2) * kfloor
    slack = 1e-9 * max(1.0, abs(upper))
    pool = finite[lb <= upper + slack]
    if len(pool) < m:
        pool = finite
    n_tuples = math.comb(len(pool), m)
    if n_tuples > max_tuples:
        raise GuardExceeded(f"exhaustive block search needs {n_tuples} tuples "
                            f"(> {max_tuples}) after pruning")
    best_val, best = np.inf, None
    pts = cand.points
    if m == 2:
        iu, ju = np.triu_indices(len(pool), k=1)
        for a in range(0, len(iu), 1_000_000):
            idx = np.stack([pool[iu[a:a + 1_000_000]], pool[ju[a:a + 1_000_000]]], axis=1)
            vals = _tuple_values(kernel, pts, g, idx)
            k = int(np.argmin(vals))
            if vals[k] < best_val:
                best_val, best = float(vals[k]), idx[k]
    else:
        for idx in _combinations(pool, m):
            vals = _tuple_values(kernel, pts, g, idx)
            k = int(np.argmin(vals))
            if vals[k] < best_val:
                best_val, best = float(vals[k]), idx[k]
    if best is None or not np.isfinite(best_val):
        raise SelectionError("no m-subset with finite block energy")
    return np.sort(best), best_val


def _sequential_block(kernel, cand, g, m):
    """m single-point greedy steps against g; a feasible starting tuple."""
    score = g.copy()
    chosen = []
    for _ in range(m):
        i = int(np.argmin(score))
        if not np.isfinite(score[i]):
            raise SelectionError("fewer than m candidates with finite score")
        chosen.append(i)
        score = score + kernel_to_point(kernel, cand.points, cand.points[i])
    return np.array(chosen, dtype=np.int64)


def _refine(kernel, cand, g, tup):
    """Cyclic coordinate descent: re-optimize one slot at a time over all candidates."""
    tup = np.array(tup, dtype=np.int64)
    m = len(tup)
    pts = cand.points
    cols = [kernel_to_point(kernel, pts, pts[i]) for i in tup]
    while True:
        improved = False
        for i in range(m):
            partial = g.copy()
            for j in range(m):
                if j != i:
                    partial += cols[j]
            cur = partial[tup[i]]
            best = int(np.argmin(partial))
            if partial[best] < cur - 1e-14 * max(1.0, abs(cur)):
                tup[i] = best
                cols[i] = kernel_to_point(kernel, pts, pts[best])
                improved = True
        if not improved:
            break
    return tup


def _alternating_block(kernel, cand, g, m, restarts, rng):
    starts = [_sequential_block(kernel, cand, g, m)]
    finite = np.flatnonzero(np.isfinite(g))
    for _ in range(restarts):
        starts.append(rng.choice(finite, size=m, replace=False))
    best_val, best = np.inf, None
    for s0 in starts:
        tup = np.sort(_refine(kernel, cand, g, s0))
        if len(np.unique(tup)) < m:
            continue
        val = float(_tuple_values(kernel, cand.points, g, tup[None, :])[0])
        if val < best_val or (val == best_val and best is not None
                              and tuple(tup) < tuple(best)):
            best_val, best = val, tup
    if best is None or not np.isfinite(best_val):
        raise SelectionError("no m-subset with finite block energy")
    return best, best_val


def block_objective(kernel: KernelSpec, field: FieldSpec, cand: CandidateSet,
                    previous, tup) -> float:
    """U_{mN}^{(f,m)}(x_1..x_m) given the mN previously selected indices.

    sum_i sum_l k(x_i, a_l) + sum_{i<j} k(x_i, x_j) + ((N+1)m - 1) sum_i f(x_i)
    """
    previous = np.asarray(previous, dtype=np.int64)
    tup = np.asarray(tup, dtype=np.int64)
    m = len(tup)
    if len(previous) % m:
        raise ValueError("number of previous points must be a multiple of m")
    nblocks = len(previous) // m
    pts = cand.points
    fvals = field.evaluate(pts[tup])
    total = 0.0
    for i, t in enumerate(tup):
        if len(previous):
            total += kernel.profile(np.linalg.norm(pts[previous] - pts[t], axis=1)).sum()
        for u in tup[i + 1:]:
            total += float(kernel.profile(np.linalg.norm(pts[t] - pts[u])))
    return float(total + ((nblocks + 1) * m - 1) * fvals.sum())


def block_greedy_run(kernel: KernelSpec, field: FieldSpec, cand: CandidateSet, m: int,
                     N_blocks: int, strategy="exhaustive", restarts: int = 8,
                     seed: int = 0, max_tuples: int = MAX_TUPLES) -> GreedyTrace:
    """Weighted greedy (m, f)-energy sequence, m points per step.

    Block b (0-based) minimizes sum_i g(x_i) + sum_{i<j} k(x_i, x_j) with
    g = S + ((b+1)m - 1) f and S the running potential of the earlier blocks; for
    b = 0 this is half the weighted energy of the block. Exhaustive search is
    exact (with a safe pruning bound); the alternating strategy is a multi-start
    coordinate-descent heuristic.

    Points inside a block are stored in ascending candidate index. Block values
    do not depend on that order; per-point ``u_values`` inside a block do.
    """
    if m < 2:
        raise ValueError("block size m must be >= 2; use greedy_run for m = 1")
    if N_blocks < 1:
        raise ValueError("N_blocks must be >= 1")
    strategy = BlockStrategy(strategy)
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = cand.points
    fvals = field.evaluate(pts)
    kfloor = _kernel_floor(kernel, cand) if strategy is BlockStrategy.EXHAUSTIVE else None

    S = np.zeros(len(cand))
    total = N_blocks * m
    sel = np.empty(total, dtype=np.int64)
    u = np.full(total, np.nan)
    energy_prefix = np.full(total, np.nan)
    block_vals = np.empty(N_blocks)
    pair_energy = 0.0
    fsum = 0.0
    for b in range(N_blocks):
        with np.errstate(invalid="ignore"):
            g = S + ((b + 1) * m - 1) * fvals
        if strategy is BlockStrategy.EXHAUSTIVE:
            heur, heur_val = _alternating_block(kernel, cand, g, m, 0, rng)
            tup, val = _exhaustive_block(kernel, cand, g, m, heur_val, kfloor, max_tuples)
        else:
            tup, val = _alternating_block(kernel, cand, g, m, restarts, rng)
        block_vals[b] = val
        for j, idx in enumerate(tup):
            n = b * m + j  # 0-based position
            sel[n] = idx
            within = 0.0
            if j:
                within = kernel.profile(np.linalg.norm(pts[tup[:j]] - pts[idx], axis=1)).sum()
            pot = S[idx] + within
            if n:
                u[n] = pot + n * fvals[idx]
                pair_energy += 2.0 * pot
            fsum += fvals[idx]
            if n:
                energy_prefix[n] = pair_energy + 2.0 * n * fsum
        for idx in tup:
            S = S + kernel_to_point(kernel, pts, pts[idx])
    return GreedyTrace(sel, u, energy_prefix, fvals[sel], m, block_values=block_vals,
                       accumulator=S)


# -- brute-force oracle -------------------------------------------------------

@dataclass(frozen=True)
class OptimalConfiguration:
    indices: np.ndarray
    points: np.ndarray
    energy: float


def optimal_configuration(kernel: KernelSpec, field: FieldSpec, cand: CandidateSet, N: int,
                          max_tuples: int = MAX_TUPLES) -> OptimalConfiguration:
    """Minimize E_f over all N-subsets by plain enumeration (no pruning)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    M = len(cand)
    n_tuples = math.comb(M, N)
    if n_tuples > max_tuples:
        raise GuardExceeded(f"C({M}, {N}) = {n_tuples} exceeds the brute-force guard "
                            f"of {max_tuples}")
    pts = cand.points
    fvals = field.evaluate(pts)
    best_val, best = np.inf, None
    for idx in _combinations(np.arange(M), N):
        e = np.zeros(len(idx))
        with np.errstate(invalid="ignore"):
            for i in range(N):
                for j in range(i + 1, N):
                    e += 2.0 * kernel.profile(np.linalg.norm(pts[idx[:, i]] - pts[idx[:, j]],
                                                             axis=1))
            e += 2.0 * (N - 1) * fvals[idx].sum(axis=1)
        k = int(np.argmin(e))
        if e[k] < best_val:
            best_val, best = float(e[k]), idx[k]
    if best is None:
        raise SelectionError("no N-subset with finite weighted energy")
    return OptimalConfiguration(best, pts[best], best_val)
