"""Flat bundles over the torus T^n = R^n / Z^n and the maps that act on them.

The bundle attached to a coefficient vector a = (a_1, ..., a_n) (integer or
real entries) is the quotient of R^n x A by the deck action

    m . (x, k) = (x + m, k - <a, m>),        m in Z^n,

with A = Z or R the fiber group. A point of the total space is represented
by a (cover, fiber) pair; `canonicalize` moves the cover coordinates into
[0,1)^n while adjusting the fiber by <a, floor(cover)>, and

    theta(cover, fiber) = <a, cover> + fiber

is a well-defined global height: deck moves cancel exactly, and the fiber
translation T_r raises it by r.

Maps of the base enter as lifts: g_tilde : R^n -> R^n together with an
integer matrix M satisfying g_tilde(x + m) = g_tilde(x) + M m. Such a lift
acts on the bundle attached to `a` precisely when M^T a = a
(`preserves_class`); `check_equivariance` spot-checks the displacement
identity on random cover points. Lifts compose and (when a factory is
registered) invert; Lipschitz data rides along so the sup-norm module can
certify grid bounds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassNotPreserved, DimensionMismatch, ValidationError

__all__ = [
    "Coefficients",
    "CohomologyClass",
    "BundlePoint",
    "LiftedMap",
    "EquivarianceReport",
    "reduce_point",
    "torus_distance",
    "theta",
    "canonicalize",
    "identity_lift",
    "preserves_class",
    "require_preserves_class",
    "check_equivariance",
]


class Coefficients(enum.Enum):
    """Fiber group of the bundle: integer or real translations."""

    INTEGER = "integer"
    REAL = "real"


@dataclass(frozen=True)
class CohomologyClass:
    """Constant-coefficient degree-one class, stored as its period vector.

    `entries` are the pairings with the n coordinate loops. Integer kind
    demands integer entries (kept as python ints so downstream exact
    arithmetic never touches floats)."""

    entries: tuple
    coefficients: Coefficients = Coefficients.INTEGER

    def __post_init__(self):
        ent = tuple(self.entries)
        if not ent:
            raise ValidationError("class needs at least one entry")
        if self.coefficients is Coefficients.INTEGER:
            for e in ent:
                if not isinstance(e, (int, np.integer)) or isinstance(e, bool):
                    raise ValidationError(
                        f"integer coefficients require integer entries, got {e!r}"
                    )
            ent = tuple(int(e) for e in ent)
        else:
            ent = tuple(float(e) for e in ent)
        object.__setattr__(self, "entries", ent)

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    @property
    def one_norm(self) -> float:
        return float(np.abs(self.vector).sum())

    def is_integral(self) -> bool:
        return self.coefficients is Coefficients.INTEGER


def reduce_point(x) -> np.ndarray:
    """Canonical representative of a torus point: coordinates in [0,1)."""
    arr = np.asarray(x, dtype=float)
    out = np.mod(arr, 1.0)
    # np.mod(-tiny, 1.0) rounds to 1.0; fold that back onto 0.0
    return np.where(out >= 1.0, 0.0, out)


def torus_distance(x, y) -> float:
    """Sup metric on T^n with per-coordinate wraparound."""
    d = np.abs(reduce_point(x) - reduce_point(y))
    d = np.minimum(d, 1.0 - d)
    return float(d.max())


@dataclass(frozen=True)
class BundlePoint:
    """Point of the total space as a (cover, fiber) pair.

    cover lives in R^n (not necessarily reduced); fiber is an int for A = Z,
    otherwise a float or Fraction."""

    cover: np.ndarray
    fiber: object = 0

    def __post_init__(self):
        object.__setattr__(self, "cover", np.atleast_1d(np.asarray(self.cover, dtype=float)))

    @property
    def dimension(self) -> int:
        return int(self.cover.shape[0])


def _class_pairing(a: CohomologyClass, m: np.ndarray):
    """<a, m> for an integer vector m, exact when the class is integral."""
    if a.is_integral():
        return sum(int(ai) * int(mi) for ai, mi in zip(a.entries, m))
    return float(np.dot(a.vector, np.asarray(m, dtype=float)))


def theta(a: CohomologyClass, p: BundlePoint) -> float:
    """Global height <a, cover> + fiber; adds r under the fiber translation."""
    if p.dimension != a.dimension:
        raise DimensionMismatch(f"point dim {p.dimension} vs class dim {a.dimension}")
    return float(np.dot(a.vector, p.cover)) + float(p.fiber)


def canonicalize(a: CohomologyClass, p: BundlePoint) -> BundlePoint:
    """Equivalent representative with cover in [0,1)^n.

    Subtracting m = floor(cover) from the cover must add <a, m> to the fiber
    for theta to be unchanged; integer classes keep the adjustment exact."""
    if p.dimension != a.dimension:
        raise DimensionMismatch(f"point dim {p.dimension} vs class dim {a.dimension}")
    m = np.floor(p.cover).astype(np.int64)
    cover = p.cover - m
    # tiny negative coordinates round cover - floor(cover) up to exactly 1.0;
    # bump those into the next cell so the contract cover in [0,1) holds
    carry = cover >= 1.0
    if np.any(carry):
        m = m + carry.astype(np.int64)
        cover = np.where(carry, 0.0, cover)
    pay = _class_pairing(a, m)
    fiber = p.fiber
    if isinstance(fiber, (int, np.integer)) and isinstance(pay, int):
        fiber = int(fiber) + pay
    elif isinstance(fiber, Fraction):
        fiber = fiber + pay
    else:
        fiber = float(fiber) + float(pay)
    return BundlePoint(cover, fiber)


@dataclass(frozen=True)
class LiftedMap:
    """Lift of a torus map: evaluator on cover coordinates plus its matrix.

    evaluator must broadcast over leading axes (points stacked as (..., n));
    scalar-only callables still work through `evaluate_many`, just slower.
    lipschitz_bound bounds Lip(g) and displacement_lipschitz bounds
    Lip(g - id), both Euclidean-in / sup-out; either may be None when
    unknown. jacobian(x) returns (..., n, n) derivatives when available.
    kernel_spec = (code, params) routes orbit work through the compiled
    kernels for the built-in families.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    matrix: np.ndarray
    label: str = "map"
    lipschitz_bound: Optional[float] = None
    displacement_lipschitz: Optional[float] = None
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kernel_spec: Optional[tuple] = None
    inverse_factory: Optional[Callable[[], "LiftedMap"]] = None

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("matrix part must be square")
        if not np.all(m == np.round(m)):
            raise ValidationError("matrix part must have integer entries")
        object.__setattr__(self, "matrix", m.astype(np.int64))

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Apply the lift to an (N, n) stack, tolerating scalar-only evaluators."""
        pts = np.asarray(points, dtype=float)
        try:
            out = np.asarray(self.evaluator(pts), dtype=float)
            if out.shape == pts.shape:
                return out
        except Exception:
            pass
        return np.stack([np.asarray(self.evaluator(p), dtype=float) for p in pts])

    def displacement(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self(x) - x

    def compose(self, other: "LiftedMap") -> "LiftedMap":
        """self after other; matrices multiply, Lipschitz data propagates."""
        if self.dimension != other.dimension:
            raise DimensionMismatch("cannot compose lifts of different dimensions")
        f, g = self, other
        lip = None
        if f.lipschitz_bound is not None and g.lipschitz_bound is not None:
            lip = f.lipschitz_bound * g.lipschitz_bound
        # Lip(fg - id) <= Lip(f - id) Lip(g) + Lip(g - id)
        disp = None
        if (
            f.displacement_lipschitz is not None
            and g.lipschitz_bound is not None
            and g.displacement_lipschitz is not None
        ):
            disp = f.displacement_lipschitz * g.lipschitz_bound + g.displacement_lipschitz
        jac = None
        if f.jacobian is not None and g.jacobian is not None:
            fj, gj, ge = f.jacobian, g.jacobian, g.evaluator

            def jac(x, _fj=fj, _gj=gj, _ge=ge):
                return np.matmul(_fj(np.asarray(_ge(x), dtype=float)), _gj(x))

        inv = None
        if f.inverse_factory is not None and g.inverse_factory is not None:
            inv = lambda _f=f, _g=g: _g.invert().compose(_f.invert())
        return LiftedMap(
            evaluator=lambda x, _f=f, _g=g: _f(np.asarray(_g(x), dtype=float)),
            matrix=f.matrix @ g.matrix,
            label=f"{f.label}*{g.label}",
            lipschitz_bound=lip,
            displacement_lipschitz=disp,
            jacobian=jac,
            kernel_spec=None,
            inverse_factory=inv,
        )

    def invert(self) -> "LiftedMap":
        if self.inverse_factory is None:
            raise ValidationError(f"no inverse registered for lift {self.label!r}")
        return self.inverse_factory()


def identity_lift(dimension: int) -> LiftedMap:
    eye = np.eye(dimension, dtype=np.int64)
    return LiftedMap(
        evaluator=lambda x: np.asarray(x, dtype=float),
        matrix=eye,
        label="id",
        lipschitz_bound=1.0,
        displacement_lipschitz=0.0,
        jacobian=lambda x: np.broadcast_to(
            np.eye(dimension), np.shape(x)[:-1] + (dimension, dimension)
        ).copy(),
        kernel_spec=None,
        inverse_factory=lambda: identity_lift(dimension),
    )


def preserves_class(a: CohomologyClass, lift_or_matrix) -> bool:
    """Exact test of M^T a = a (integer arithmetic for integral classes)."""
    m = lift_or_matrix.matrix if isinstance(lift_or_matrix, LiftedMap) else np.asarray(lift_or_matrix)
    if m.shape[0] != a.dimension:
        raise DimensionMismatch(f"matrix dim {m.shape[0]} vs class dim {a.dimension}")
    if a.is_integral():
        mt = m.T.astype(object)
        image = [sum(int(mt[i, j]) * int(a.entries[j]) for j in range(a.dimension)) for i in range(a.dimension)]
        return all(image[i] == a.entries[i] for i in range(a.dimension))
    image = m.T.astype(float) @ a.vector
    return bool(np.all(image == a.vector))


def require_preserves_class(a: CohomologyClass, lift: LiftedMap) -> None:
    if not preserves_class(a, lift):
        raise ClassNotPreserved(
            f"lift {lift.label!r} has matrix part that moves the class {a.entries}"
        )


@dataclass(frozen=True)
class EquivarianceReport:
    max_residual: float
    samples: int
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tolerance


def check_equivariance(
    lift: LiftedMap,
    samples: int = 16,
    seed: int = 0,
    tolerance: float = 1e-9,
) -> EquivarianceReport:
    """Spot-check g(x + m) = g(x) + M m on random cover points and shifts."""
    rng = np.random.default_rng(seed)
    n = lift.dimension
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-2.0, 2.0, size=n)
        m = rng.integers(-3, 4, size=n)
        lhs = lift(x + m)
        rhs = lift(x) + lift.matrix @ m
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return EquivarianceReport(max_residual=worst, samples=samples, tolerance=tolerance)
