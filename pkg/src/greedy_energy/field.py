"""Catalog of external fields.

Fields are lower-semicontinuous, extended-real valued. The Jacobi log-weight
``-l1 log(1 - x) - l2 log(1 + x)`` is +inf at (and beyond) the endpoints
``x = +-1`` instead of raising, so a minimizer skips those points on its own.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .kernel import KernelSpec, as_points


class FieldKind(str, enum.Enum):
    ZERO = "zero"
    ABSOLUTE_VALUE = "abs"
    JACOBI_LOG_WEIGHT = "jacobi"
    RADIAL_POWER = "radial_power"
    QUADRATIC_NORM = "quadratic"


RADIAL_KINDS = (FieldKind.ZERO, FieldKind.ABSOLUTE_VALUE, FieldKind.RADIAL_POWER,
                FieldKind.QUADRATIC_NORM)


@dataclass(frozen=True)
class FieldSpec:
    kind: FieldKind
    dimension: int = 1
    lambda1: float | None = None
    lambda2: float | None = None
    exponent: float | None = None
    coefficient: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FieldKind(self.kind))
        if self.dimension < 1:
            raise ValueError("field dimension must be >= 1")
        if self.kind is FieldKind.JACOBI_LOG_WEIGHT:
            if self.dimension != 1:
                raise ValueError("the Jacobi log-weight field is defined on R^1 only")
            if self.lambda1 is None or self.lambda2 is None:
                raise ValueError("the Jacobi log-weight field needs lambda1 and lambda2")
            if not (self.lambda1 > 0 and self.lambda2 > 0):
                raise ValueError("lambda1 and lambda2 must be > 0")
        if self.kind is FieldKind.RADIAL_POWER:
            if self.exponent is None or self.exponent <= 0:
                raise ValueError("radial power field needs exponent > 0")
            if self.coefficient is None:
                object.__setattr__(self, "coefficient", 1.0)
            if self.coefficient <= 0:
                raise ValueError("radial power field needs coefficient > 0")

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dimension: int = 1) -> FieldSpec:
        return cls(FieldKind.ZERO, dimension)

    @classmethod
    def absolute(cls, dimension: int = 1) -> FieldSpec:
        return cls(FieldKind.ABSOLUTE_VALUE, dimension)

    @classmethod
    def jacobi(cls, lambda1: float, lambda2: float) -> FieldSpec:
        return cls(FieldKind.JACOBI_LOG_WEIGHT, 1, lambda1=lambda1, lambda2=lambda2)

    @classmethod
    def radial_power(cls, exponent: float, coefficient: float = 1.0,
                     dimension: int = 3) -> FieldSpec:
        return cls(FieldKind.RADIAL_POWER, dimension, exponent=exponent,
                   coefficient=coefficient)

    @classmethod
    def quadratic(cls, dimension: int = 2) -> FieldSpec:
        return cls(FieldKind.QUADRATIC_NORM, dimension)

    # -- evaluation -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.kind is FieldKind.ZERO

    @property
    def is_radial(self) -> bool:
        return self.kind in RADIAL_KINDS

    def evaluate(self, points) -> np.ndarray:
        """Field values at the rows of ``points`` (shape (n, p) or flat for p = 1)."""
        pts = as_points(points, self.dimension)
        if self.kind is FieldKind.ZERO:
            return np.zeros(pts.shape[0])
        if self.kind is FieldKind.JACOBI_LOG_WEIGHT:
            x = pts[:, 0]
            out = np.full(x.shape, np.inf)
            inside = (x > -1.0) & (x < 1.0)
            xi = x[inside]
            out[inside] = -self.lambda1 * np.log1p(-xi) - self.lambda2 * np.log1p(xi)
            return out
        return self.radial_profile(np.linalg.norm(pts, axis=1))

    def radial_profile(self, r) -> np.ndarray:
        """f as a function of |x| for the radially symmetric kinds."""
        r = np.asarray(r, dtype=float)
        if self.kind is FieldKind.ZERO:
            return np.zeros_like(r)
        if self.kind is FieldKind.ABSOLUTE_VALUE:
            return r.copy()
        if self.kind is FieldKind.QUADRATIC_NORM:
            return r * r
        if self.kind is FieldKind.RADIAL_POWER:
            return self.coefficient * np.power(r, self.exponent)
        raise ValueError(f"{self.kind.value} field is not radially symmetric")

    def radial_derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind is FieldKind.ZERO:
            return np.zeros_like(r)
        if self.kind is FieldKind.ABSOLUTE_VALUE:
            return np.ones_like(r)
        if self.kind is FieldKind.QUADRATIC_NORM:
            return 2.0 * r
        if self.kind is FieldKind.RADIAL_POWER:
            q, c = self.exponent, self.coefficient
            return c * q * np.power(r, q - 1.0)
        raise ValueError(f"{self.kind.value} field is not radially symmetric")

    def radial_second_derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind in (FieldKind.ZERO, FieldKind.ABSOLUTE_VALUE):
            return np.zeros_like(r)
        if self.kind is FieldKind.QUADRATIC_NORM:
            return np.full_like(r, 2.0)
        if self.kind is FieldKind.RADIAL_POWER:
            q, c = self.exponent, self.coefficient
            return c * q * (q - 1.0) * np.power(r, q - 2.0)
        raise ValueError(f"{self.kind.value} field is not radially symmetric")

    def reflected(self) -> FieldSpec:
        """The field x -> f(-x)."""
        if self.kind is FieldKind.JACOBI_LOG_WEIGHT:
            return FieldSpec.jacobi(self.lambda2, self.lambda1)
        return self


def field_eval(field: FieldSpec, x) -> float:
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.shape != (field.dimension,):
        raise ValueError(f"dimension mismatch: field is on R^{field.dimension}, "
                         f"point has shape {pt.shape}")
    return float(field.evaluate(pt[None, :])[0])


def growth_admissible(field: FieldSpec, kernel: KernelSpec,
                      unbounded: bool = False) -> tuple[bool, str]:
    """Whether f -> +inf as |x| -> inf, with a short diagnostic.

    Only meant to drive warnings; every conductor in this package is a finite
    candidate set, so for compact conductors the condition is vacuous.
    """
    grows = field.kind in (FieldKind.ABSOLUTE_VALUE, FieldKind.RADIAL_POWER,
                           FieldKind.QUADRATIC_NORM)
    if grows:
        return True, f"{field.kind.value} field grows without bound"
    if not unbounded:
        return True, (f"{field.kind.value} field does not grow, but the conductor is "
                      "compact so the growth condition is vacuous")
    if field.kind is FieldKind.JACOBI_LOG_WEIGHT:
        return True, "Jacobi log-weight is +inf outside (-1, 1); effective conductor is compact"
    msg = f"{field.kind.value} field does not tend to +inf at infinity"
    if kernel.is_log and field.dimension == 2:
        msg += " (for s = 0 in the plane one needs f(x) - log|x| -> +inf)"
    return False, msg
