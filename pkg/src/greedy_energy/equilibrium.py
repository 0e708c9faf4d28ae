"""Equilibrium measures: closed-form references and a discrete solver.

The discrete solver minimizes ``w.K w + 2 w.f`` over the probability simplex on
a candidate set. Off-diagonal entries of K are kernel values; the diagonal is
K(h/2; s), a stand-in for the self-energy of a mesh cell whose influence
vanishes as h -> 0. A refinement ladder (several mesh sizes plus geometric
extrapolation) turns discrete values into continuum estimates.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from .conductor import CandidateSet, interval_grid
from .field import FieldKind, FieldSpec
from .kernel import KernelSpec, as_points, pairwise_distances

log = logging.getLogger(__name__)

DEFAULT_LADDER = (101, 201, 401)
MAX_SOLVER_POINTS = 8000


class ReferenceKind(str, enum.Enum):
    RIESZ_INTERVAL = "riesz"
    JACOBI = "jacobi"
    RADIAL_NEWTONIAN = "radial"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class SolverInfo:
    iterations: int
    gap: float
    converged: bool
    history: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EquilibriumReference:
    """An equilibrium model: V_f, W_f = V_f - int f dmu, and evaluators.

    ``support`` is ``(a, b)`` for intervals, ``(r0, R0)`` for radial shells, and
    the index array of positive weights for discrete measures. ``cdf`` is the
    1-D (or radial) distribution function when one exists. ``potential`` maps
    an (n, p) array of points to U^mu at those points.
    """

    kind: ReferenceKind
    params: dict
    V_f: float | None
    W_f: float | None
    support: tuple | np.ndarray
    density: Callable | None = None
    cdf: Callable | None = None
    potential: Callable | None = None
    weights: np.ndarray | None = None
    candidates: CandidateSet | None = None
    solver: SolverInfo | None = None
    ladder: "LadderResult | None" = None

    @property
    def field_mean(self) -> float | None:
        """int f dmu, recovered from V_f and W_f."""
        if self.V_f is None or self.W_f is None:
            return None
        return self.V_f - self.W_f

    def quantiles(self, u) -> np.ndarray:
        """Inverse CDF at levels u in [0, 1] (1-D and radial references)."""
        if self.cdf is None:
            raise ValueError(f"{self.kind.value} reference has no CDF")
        lo, hi = float(self.support[0]), float(self.support[1])
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        for i, level in enumerate(u):
            if level <= 0:
                out[i] = lo
            elif level >= 1:
                out[i] = hi
            else:
                out[i] = optimize.brentq(lambda x: self.cdf(x) - level, lo, hi,
                                         xtol=1e-14, rtol=1e-14)
        return out


# -- discrete solver ----------------------------------------------------------

def project_simplex(c: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1}."""
    a = -np.sort(-c)
    lam = (np.cumsum(a) - 1.0) / np.arange(1, len(c) + 1)
    k = np.flatnonzero(a > lam)[-1]
    return np.maximum(c - lam[k], 0.0)


def gram_matrix(kernel: KernelSpec, cand: CandidateSet) -> np.ndarray:
    """Kernel matrix with the cell self-energy K(h/2; s) on the diagonal."""
    K = kernel.profile(pairwise_distances(cand.points))
    np.fill_diagonal(K, float(kernel.profile(cand.mesh_scale / 2)))
    return K


def _discrete_potential(kernel, pts, weights, cap_distance):
    def potential(x):
        x = as_points(x, pts.shape[1])
        out = np.empty(len(x))
        cap = float(kernel.profile(cap_distance))
        for a in range(0, len(x), 2048):
            d = pairwise_distances(x[a:a + 2048], pts)
            k = np.where(d < cap_distance, cap, kernel.profile(np.maximum(d, cap_distance)))
            out[a:a + 2048] = k @ weights
        return out
    return potential


def discrete_equilibrium(kernel: KernelSpec, field: FieldSpec, cand: CandidateSet,
                         tol: float = 1e-7, max_iters: int = 200_000,
                         max_points: int = MAX_SOLVER_POINTS) -> EquilibriumReference:
    """Discrete Gauss variational problem by projected gradient descent.

    Step 1/L with L = 2 * (largest absolute row sum of K); stops when the
    Frank-Wolfe gap grad.w - min(grad) drops to ``tol``. Candidates with
    f = +inf get zero weight. The potential evaluator caps the kernel at
    distance h/2, matching the diagonal convention.
    """
    fvals = field.evaluate(cand.points)
    active = np.flatnonzero(np.isfinite(fvals))
    if len(active) < 1:
        raise ValueError("field is +inf on every candidate")
    if len(active) > max_points:
        raise ValueError(f"{len(active)} active candidates exceed the dense solver limit "
                         f"of {max_points}; use a coarser grid")
    sub = CandidateSet(cand.points[active], cand.mesh_scale) if len(active) >= 2 else None
    f = fvals[active]
    if sub is None:
        K = np.array([[float(kernel.profile(cand.mesh_scale / 2))]])
    else:
        K = gram_matrix(kernel, sub)
    L = 2.0 * np.abs(K).sum(axis=1).max()

    w = np.full(len(active), 1.0 / len(active))
    Kw = K @ w
    J = w @ Kw + 2.0 * w @ f
    history = [J]
    gap = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        grad = 2.0 * (Kw + f)
        gap = float(grad @ w - grad.min())
        if gap <= tol:
            break
        w = project_simplex(w - grad / L)
        Kw = K @ w
        J = w @ Kw + 2.0 * w @ f
        history.append(J)
    else:
        grad = 2.0 * (Kw + f)
        gap = float(grad @ w - grad.min())
    converged = gap <= tol
    if not converged:
        log.warning("discrete equilibrium did not converge: gap %.3g after %d iterations",
                    gap, it)

    weights = np.zeros(len(cand))
    weights[active] = w
    V = float(J)
    W = float(V - w @ f)
    return EquilibriumReference(
        ReferenceKind.DISCRETE,
        {"s": kernel.s, "field": field.kind.value, "M": len(cand)},
        V, W, np.flatnonzero(weights > 0),
        potential=_discrete_potential(kernel, cand.points, weights, cand.mesh_scale / 2),
        weights=weights, candidates=cand,
        solver=SolverInfo(it, gap, converged, np.asarray(history)),
    )


# -- refinement ladder --------------------------------------------------------

@dataclass(frozen=True)
class LadderResult:
    sizes: tuple
    V: np.ndarray
    W: np.ndarray
    V_hat: float
    W_hat: float
    finest: EquilibriumReference = field(repr=False)


def extrapolate(values: Sequence[float]) -> float:
    """Geometric (Aitken-type) extrapolation of a sequence on halving meshes.

    With increments d1, d2 the remaining error is taken as d2 * q / (1 - q),
    q = d2 / d1; q outside (0, 0.9) falls back to first-order q = 1/2.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return float(v[-1])
    if len(v) == 2:
        return float(2 * v[1] - v[0])
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    q = d2 / d1 if d1 != 0 else 0.5
    if not 0 < q < 0.9:
        q = 0.5
    return float(v[-1] + d2 * q / (1 - q))


def refinement_ladder(kernel: KernelSpec, field: FieldSpec,
                      builder: Callable[[int], CandidateSet],
                      sizes: Sequence[int] = DEFAULT_LADDER, tol: float = 1e-7,
                      max_iters: int = 200_000) -> LadderResult:
    """Discrete solves at increasing resolution, extrapolated to the continuum."""
    Vs, Ws, ref = [], [], None
    for M in sizes:
        ref = discrete_equilibrium(kernel, field, builder(M), tol=tol, max_iters=max_iters)
        Vs.append(ref.V_f)
        Ws.append(ref.W_f)
    return LadderResult(tuple(sizes), np.array(Vs), np.array(Ws), extrapolate(Vs),
                        extrapolate(Ws), ref)


def interval_ladder(kernel: KernelSpec, field: FieldSpec, a: float = -1.0, b: float = 1.0,
                    sizes: Sequence[int] = DEFAULT_LADDER, **kw) -> LadderResult:
    return refinement_ladder(kernel, field, lambda M: interval_grid(a, b, M), sizes, **kw)


# -- closed-form references ---------------------------------------------------

def riesz_density_constant(s: float) -> float:
    return float(special.gamma(1 + s / 2) / (np.sqrt(np.pi) * special.gamma((1 + s) / 2)))


def riesz_interval_reference(s: float, ladder: Sequence[int] | None = DEFAULT_LADDER,
                             **ladder_kw) -> EquilibriumReference:
    """Riesz s-equilibrium on [-1, 1] without external field, 0 <= s < 1.

    density c_s (1 - x^2)^((s-1)/2). With t = (1 + x)/2 this is the
    Beta((1+s)/2, (1+s)/2) law, which gives the CDF in closed form. V = W is
    the Wiener energy, estimated by the refinement ladder when requested.
    """
    if not 0 <= s < 1:
        raise ValueError(f"Riesz interval reference needs 0 <= s < 1, got {s}")
    c = riesz_density_constant(s)
    alpha = (1 + s) / 2

    def density(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1
        out = np.zeros_like(x)
        out[inside] = c * np.power(1 - x[inside] ** 2, (s - 1) / 2)
        return out

    def cdf(x):
        t = np.clip((1 + np.asarray(x, dtype=float)) / 2, 0.0, 1.0)
        return special.betainc(alpha, alpha, t)

    V = W = None
    lad = potential = None
    if ladder:
        kernel = KernelSpec(s)
        lad = interval_ladder(kernel, FieldSpec.zero(), sizes=ladder, **ladder_kw)
        V, W = lad.V_hat, lad.W_hat
        potential = lad.finest.potential
    return EquilibriumReference(ReferenceKind.RIESZ_INTERVAL, {"s": s}, V, W, (-1.0, 1.0),
                                density=density, cdf=cdf, potential=potential, ladder=lad)


def jacobi_endpoints(lambda1: float, lambda2: float) -> tuple[float, float]:
    if not (lambda1 > 0 and lambda2 > 0):
        raise ValueError("lambda1 and lambda2 must be > 0")
    total = 1 + lambda1 + lambda2
    th1, th2 = lambda1 / total, lambda2 / total
    delta = (1 - (th1 + th2) ** 2) * (1 - (th1 - th2) ** 2)
    centre = th2 ** 2 - th1 ** 2
    return centre - np.sqrt(delta), centre + np.sqrt(delta)


def jacobi_reference(lambda1: float, lambda2: float,
                     ladder: Sequence[int] | None = DEFAULT_LADDER,
                     cdf_nodes: int = 4001, **ladder_kw) -> EquilibriumReference:
    """Log-kernel equilibrium on [-1, 1] in the field -log((1-x)^l1 (1+x)^l2)."""
    a, b = jacobi_endpoints(lambda1, lambda2)
    scale = (1 + lambda1 + lambda2) / np.pi

    def density(x):
        x = np.asarray(x, dtype=float)
        inside = (x > a) & (x < b)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = scale * np.sqrt((xi - a) * (b - xi)) / (1 - xi * xi)
        return out

    # x = mid - rad cos(theta) removes the square-root endpoint behaviour
    mid, rad = (a + b) / 2, (b - a) / 2
    theta = np.linspace(0.0, np.pi, cdf_nodes)
    xs = mid - rad * np.cos(theta)
    integrand = scale * (rad * np.sin(theta)) ** 2 / (1 - xs * xs)
    cum = integrate.cumulative_simpson(integrand, x=theta, initial=0.0)
    interp = PchipInterpolator(theta, cum)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        th = np.arccos(np.clip((mid - x) / rad, -1.0, 1.0))
        return np.clip(interp(th), 0.0, 1.0)

    V = W = None
    lad = potential = None
    if ladder:
        lad = interval_ladder(KernelSpec(0.0), FieldSpec.jacobi(lambda1, lambda2),
                              sizes=ladder, **ladder_kw)
        V, W = lad.V_hat, lad.W_hat
        potential = lad.finest.potential
    return EquilibriumReference(ReferenceKind.JACOBI, {"lambda1": lambda1, "lambda2": lambda2},
                                V, W, (float(a), float(b)), density=density, cdf=cdf,
                                potential=potential, ladder=lad)


def _bisect(fn, lo, hi, xtol=1e-12):
    return optimize.bisect(fn, lo, hi, xtol=xtol, maxiter=500)


def radial_shell(p: int, field: FieldSpec) -> tuple[float, float]:
    """(r0, R0): r0 is where f' turns positive for good, R0 solves R^(p-1) f'(R) = p - 2."""
    if not field.is_radial or field.kind is FieldKind.ZERO:
        raise ValueError(f"{field.kind.value} field is not an admissible radial field")

    def mass_fn(r):
        return r ** (p - 1) * float(field.radial_derivative(r)) - (p - 2)

    eps = 1e-12
    q = field.exponent or (2.0 if field.kind is FieldKind.QUADRATIC_NORM else 1.0)
    hi = 10.0 * (p - 1) ** (1.0 / q)
    for _ in range(200):
        if mass_fn(hi) > 0:
            break
        hi *= 2.0
    else:
        raise ValueError("no root of r^(p-1) f'(r) = p - 2 found")
    if mass_fn(eps) > 0:
        raise ValueError("r^(p-1) f'(r) exceeds p - 2 near the origin; no admissible R0")
    R0 = _bisect(mass_fn, eps, hi)

    samples = np.linspace(0.0, R0, 4097)[1:]
    nonpos = np.flatnonzero(field.radial_derivative(samples) <= 0)
    if len(nonpos) == 0:
        r0 = 0.0
    else:
        j = nonpos[-1]
        lo_r = samples[j]
        hi_r = samples[j + 1] if j + 1 < len(samples) else R0
        fp = field.radial_derivative
        if float(fp(lo_r)) == 0.0 or not float(fp(hi_r)) > 0:
            r0 = lo_r
        else:
            r0 = _bisect(lambda r: float(fp(r)), lo_r, hi_r)
    return float(r0), float(R0)


def radial_newtonian_reference(p: int, field: FieldSpec) -> EquilibriumReference:
    """Newtonian (s = p - 2) equilibrium on R^p in a radial field.

    Supported on the shell r0 <= |x| <= R0 with radial density
    (r^(p-1) f'(r))' / (p - 2) against normalized surface measure; the potential
    is constant minus f on the shell, constant inside, and |x|^(2-p) outside.
    """
    if p < 3:
        raise ValueError("the Newtonian radial reference needs p >= 3")
    if field.dimension != p:
        raise ValueError(f"field is on R^{field.dimension}, expected R^{p}")
    r0, R0 = radial_shell(p, field)
    f = field.radial_profile
    fp = field.radial_derivative
    W = float(R0 ** (2 - p) + f(R0))
    base = float(r0 ** (p - 1) * fp(r0)) if r0 > 0 else 0.0

    def density(r):
        r = np.asarray(r, dtype=float)
        inside = (r >= r0) & (r <= R0)
        out = np.zeros_like(r)
        ri = r[inside]
        out[inside] = ((p - 1) * ri ** (p - 2) * fp(ri)
                       + ri ** (p - 1) * field.radial_second_derivative(ri)) / (p - 2)
        return out

    def cdf(r):
        r = np.clip(np.asarray(r, dtype=float), r0, R0)
        return np.clip((r ** (p - 1) * fp(r) - base) / (p - 2), 0.0, 1.0)

    def potential(x):
        r = np.linalg.norm(as_points(x, p), axis=1)
        out = np.empty_like(r)
        inner = r <= r0
        shell = (r > r0) & (r < R0)
        outer = r >= R0
        out[inner] = W - f(r0)
        out[shell] = W - f(r[shell])
        with np.errstate(divide="ignore"):
            out[outer] = r[outer] ** (2.0 - p)
        return out

    field_mean, _ = integrate.quad(lambda r: float(f(r) * density(np.array([r]))[0]),
                                   r0, R0, epsabs=1e-13, epsrel=1e-12, limit=200)
    return EquilibriumReference(ReferenceKind.RADIAL_NEWTONIAN,
                                {"p": p, "field": field.kind.value, "r0": r0, "R0": R0},
                                float(W + field_mean), W, (r0, R0), density=density, cdf=cdf,
                                potential=potential)


def essential_support(ref: EquilibriumReference, cand: CandidateSet, field: FieldSpec,
                      slack: float = 0.0) -> np.ndarray:
    """Indices with U^mu(x) + f(x) <= W_f + slack."""
    if ref.potential is None or ref.W_f is None:
        raise ValueError("reference has no potential or W_f")
    if np.isinf(slack):
        return np.arange(len(cand))
    with np.errstate(invalid="ignore"):
        total = ref.potential(cand.points) + field.evaluate(cand.points)
    return np.flatnonzero(total <= ref.W_f + slack)
