"""Built-in lifted map families, wired for both the compiled and numpy paths.

Each constructor returns a LiftedMap whose evaluator broadcasts over point
stacks, carries an analytic Jacobian, Lipschitz constants for both the map
and its displacement field, a kernel spec for the compiled orbit loops, and
an inverse factory. Everything here is a lift to R^n of a torus
homeomorphism; equivariance is by construction but `check_equivariance`
will happily re-verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError
from .torus import LiftedMap

__all__ = [
    "TrigPolynomial",
    "rigid_rotation",
    "torus_affine",
    "arnold_circle",
    "sinusoidal_shear",
    "skew_translation",
    "make_family",
    "sample_class_entries",
    "sample_map",
    "sample_fiber_shift",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TrigPolynomial:
    """c(x) = constant + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)."""

    constant: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        ca, sa = tuple(map(float, self.cos_coeffs)), tuple(map(float, self.sin_coeffs))
        if len(ca) != len(sa):
            # pad the shorter list so degree bookkeeping stays trivial
            d = max(len(ca), len(sa))
            ca = ca + (0.0,) * (d - len(ca))
            sa = sa + (0.0,) * (d - len(sa))
        object.__setattr__(self, "cos_coeffs", ca)
        object.__setattr__(self, "sin_coeffs", sa)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.constant)
        for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            ang = TWO_PI * k * x
            out = out + a * np.cos(ang) + b * np.sin(ang)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            ang = TWO_PI * k * x
            out = out + TWO_PI * k * (-a * np.sin(ang) + b * np.cos(ang))
        return out

    @property
    def sup_bound(self) -> float:
        return abs(self.constant) + sum(
            math.hypot(a, b) for a, b in zip(self.cos_coeffs, self.sin_coeffs)
        )

    @property
    def derivative_bound(self) -> float:
        return sum(
            TWO_PI * k * math.hypot(a, b)
            for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1)
        )

    def shifted(self, delta: float) -> "TrigPolynomial":
        """The polynomial x -> c(x + delta), recombined coefficient-wise."""
        ca, sa = [], []
        for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            beta = TWO_PI * k * delta
            ca.append(a * math.cos(beta) + b * math.sin(beta))
            sa.append(b * math.cos(beta) - a * math.sin(beta))
        return TrigPolynomial(self.constant, tuple(ca), tuple(sa))

    def __neg__(self) -> "TrigPolynomial":
        return TrigPolynomial(
            -self.constant,
            tuple(-a for a in self.cos_coeffs),
            tuple(-b for b in self.sin_coeffs),
        )

    def kernel_params(self) -> np.ndarray:
        out = [self.constant]
        for a, b in zip(self.cos_coeffs, self.sin_coeffs):
            out.extend((a, b))
        return np.asarray(out, dtype=float)


def rigid_rotation(vector) -> LiftedMap:
    """x -> x + v. Displacement is constant, so its Lipschitz constant is 0."""
    v = np.atleast_1d(np.asarray(vector, dtype=float))
    n = v.shape[0]
    eye = np.eye(n, dtype=np.int64)
    return LiftedMap(
        evaluator=lambda x, _v=v: np.asarray(x, dtype=float) + _v,
        matrix=eye,
        label=f"rigid{tuple(round(t, 6) for t in v)}",
        lipschitz_bound=1.0,
        displacement_lipschitz=0.0,
        jacobian=lambda x, _n=n: np.broadcast_to(
            np.eye(_n), np.shape(np.asarray(x))[:-1] + (_n, _n)
        ).copy(),
        kernel_spec=(_kernels.RIGID, v.copy()),
        inverse_factory=lambda _v=v: rigid_rotation(-_v),
    )


def torus_affine(matrix, vector) -> LiftedMap:
    """x -> M x + v with M an integer matrix, |det M| = 1."""
    m = np.asarray(matrix, dtype=np.int64)
    v = np.atleast_1d(np.asarray(vector, dtype=float))
    n = v.shape[0]
    if m.shape != (n, n):
        raise ValidationError("matrix/vector dimensions disagree")
    det = int(round(float(np.linalg.det(m.astype(float)))))
    if abs(det) != 1:
        raise ValidationError(f"matrix must be invertible over the integers, det={det}")
    minv = np.rint(np.linalg.inv(m.astype(float))).astype(np.int64)
    if not np.array_equal(minv @ m, np.eye(n, dtype=np.int64)):
        raise ValidationError("failed to invert matrix exactly")
    params = np.concatenate([m.astype(float).ravel(), v])
    mf = m.astype(float)
    return LiftedMap(
        evaluator=lambda x, _m=mf, _v=v: np.asarray(x, dtype=float) @ _m.T + _v,
        matrix=m,
        label="affine",
        lipschitz_bound=float(np.linalg.norm(mf, 2)),
        displacement_lipschitz=float(np.linalg.norm(mf - np.eye(n), 2)),
        jacobian=lambda x, _m=mf: np.broadcast_to(
            _m, np.shape(np.asarray(x))[:-1] + _m.shape
        ).copy(),
        kernel_spec=(_kernels.AFFINE, params),
        inverse_factory=lambda _mi=minv, _m=mf, _v=v: torus_affine(
            _mi, -(_mi.astype(float) @ _v)
        ),
    )


def arnold_circle(omega: float, k: float) -> LiftedMap:
    """Circle lift x -> x + omega + (k / 2 pi) sin(2 pi x); needs |k| < 1."""
    omega, k = float(omega), float(k)
    if abs(k) >= 1.0:
        raise ValidationError(f"|k| must be < 1 for an invertible circle map, got {k}")

    def ev(x, _o=omega, _k=k):
        x = np.asarray(x, dtype=float)
        return x + _o + (_k / TWO_PI) * np.sin(TWO_PI * x)

    def jac(x, _k=k):
        x = np.asarray(x, dtype=float)
        d = 1.0 + _k * np.cos(TWO_PI * x[..., 0])
        return d[..., None, None]

    def inverse(_o=omega, _k=k):
        def ev_inv(y):
            y = np.asarray(y, dtype=float)
            x = y - _o
            for _ in range(60):
                g = x + _o + (_k / TWO_PI) * np.sin(TWO_PI * x)
                dg = 1.0 + _k * np.cos(TWO_PI * x)
                step = (g - y) / dg
                x = x - step
                if np.max(np.abs(step)) < 1e-15:
                    break
            return x

        def jac_inv(y):
            x = ev_inv(np.asarray(y, dtype=float))
            d = 1.0 + _k * np.cos(TWO_PI * x[..., 0])
            return (1.0 / d)[..., None, None]

        return LiftedMap(
            evaluator=ev_inv,
            matrix=np.array([[1]], dtype=np.int64),
            label=f"circle+sine({_o},{_k})^-1",
            lipschitz_bound=1.0 / (1.0 - abs(_k)),
            displacement_lipschitz=abs(_k) / (1.0 - abs(_k)),
            jacobian=jac_inv,
            kernel_spec=None,
            inverse_factory=lambda: arnold_circle(_o, _k),
        )

    return LiftedMap(
        evaluator=ev,
        matrix=np.array([[1]], dtype=np.int64),
        label=f"circle+sine({omega},{k})",
        lipschitz_bound=1.0 + abs(k),
        displacement_lipschitz=abs(k),
        jacobian=jac,
        kernel_spec=(_kernels.CIRCLE_SINE, np.array([omega, k], dtype=float)),
        inverse_factory=inverse,
    )


def sinusoidal_shear(epsilon: float) -> LiftedMap:
    """(x, y) -> (x + eps sin(2 pi y), y); inverse is the shear with -eps."""
    eps = float(epsilon)

    def ev(p, _e=eps):
        p = np.asarray(p, dtype=float)
        out = p.copy()
        out[..., 0] = p[..., 0] + _e * np.sin(TWO_PI * p[..., 1])
        return out

    def jac(p, _e=eps):
        p = np.asarray(p, dtype=float)
        shape = p.shape[:-1]
        j = np.zeros(shape + (2, 2))
        j[..., 0, 0] = 1.0
        j[..., 1, 1] = 1.0
        j[..., 0, 1] = _e * TWO_PI * np.cos(TWO_PI * p[..., 1])
        return j

    return LiftedMap(
        evaluator=ev,
        matrix=np.eye(2, dtype=np.int64),
        label=f"sineshear({eps})",
        lipschitz_bound=1.0 + TWO_PI * abs(eps),
        displacement_lipschitz=TWO_PI * abs(eps),
        jacobian=jac,
        kernel_spec=(_kernels.SINE_SHEAR, np.array([eps], dtype=float)),
        inverse_factory=lambda _e=eps: sinusoidal_shear(-_e),
    )


def skew_translation(omega: float, poly: TrigPolynomial) -> LiftedMap:
    """(x, y) -> (x + omega, y + c(x)) with c a trigonometric polynomial."""
    omega = float(omega)
    if not isinstance(poly, TrigPolynomial):
        raise ValidationError("skew translation needs a TrigPolynomial second-axis speed")

    def ev(p, _o=omega, _c=poly):
        p = np.asarray(p, dtype=float)
        out = p.copy()
        out[..., 0] = p[..., 0] + _o
        out[..., 1] = p[..., 1] + _c(p[..., 0])
        return out

    def jac(p, _c=poly):
        p = np.asarray(p, dtype=float)
        shape = p.shape[:-1]
        j = np.zeros(shape + (2, 2))
        j[..., 0, 0] = 1.0
        j[..., 1, 1] = 1.0
        j[..., 1, 0] = _c.derivative(p[..., 0])
        return j

    params = np.concatenate(
        [np.array([omega, float(poly.degree)]), poly.kernel_params()]
    )
    return LiftedMap(
        evaluator=ev,
        matrix=np.eye(2, dtype=np.int64),
        label=f"skew({omega})",
        lipschitz_bound=1.0 + poly.derivative_bound,
        displacement_lipschitz=poly.derivative_bound,
        jacobian=jac,
        kernel_spec=(_kernels.SKEW, params),
        inverse_factory=lambda _o=omega, _c=poly: skew_translation(
            -_o, -(_c.shifted(-_o))
        ),
    )


_FAMILY_NAMES = ("rigid", "affine", "arnold", "sinshear", "skew")


def make_family(name: str, **params) -> LiftedMap:
    """Config-facing constructor; `name` is one of rigid | affine | arnold |
    sinshear | skew."""
    if name == "rigid":
        return rigid_rotation(params["vector"])
    if name == "affine":
        return torus_affine(params["matrix"], params["vector"])
    if name == "arnold":
        return arnold_circle(params["omega"], params["k"])
    if name == "sinshear":
        return sinusoidal_shear(params["epsilon"])
    if name == "skew":
        poly = params.get("poly")
        if poly is None:
            coeffs = list(params["coeffs"])
            const = coeffs[0]
            cos_c = coeffs[1::2]
            sin_c = coeffs[2::2]
            poly = TrigPolynomial(const, tuple(cos_c), tuple(sin_c))
        return skew_translation(params["omega"], poly)
    raise ValidationError(f"unknown family {name!r}; expected one of {_FAMILY_NAMES}")


# --- seeded samplers used by the residual suites and the test corpus ------


def sample_class_entries(rng, dimension: int, affine_friendly: bool = False):
    """Random nonzero integer class entries in [-3, 3].

    affine_friendly pins the last entry to zero so lower-triangular integer
    shears (which fix exactly those classes) stay available on T^2."""
    while True:
        ent = [int(e) for e in rng.integers(-3, 4, size=dimension)]
        if affine_friendly and dimension >= 2:
            ent[-1] = 0
        if any(ent):
            return tuple(ent)


def sample_map(rng, entries) -> LiftedMap:
    """Random built-in map whose matrix part fixes the given integer class."""
    dimension = len(entries)
    if dimension == 1:
        kind = rng.choice(["rigid", "arnold"])
        if kind == "rigid":
            return rigid_rotation([float(rng.uniform(0.0, 1.0))])
        return arnold_circle(float(rng.uniform(0.0, 1.0)), float(rng.uniform(-0.9, 0.9)))
    if dimension == 2:
        choices = ["rigid", "sinshear", "skew"]
        if entries[1] == 0:
            choices.append("affine")
        kind = rng.choice(choices)
        if kind == "rigid":
            return rigid_rotation(rng.uniform(0.0, 1.0, size=2))
        if kind == "sinshear":
            return sinusoidal_shear(float(rng.uniform(-0.3, 0.3)))
        if kind == "skew":
            poly = TrigPolynomial(
                float(rng.uniform(-0.5, 0.5)),
                tuple(rng.uniform(-0.3, 0.3, size=2)),
                tuple(rng.uniform(-0.3, 0.3, size=2)),
            )
            return skew_translation(float(rng.uniform(0.0, 1.0)), poly)
        m = [[1, 0], [int(rng.integers(-2, 3)), 1]]
        return torus_affine(m, rng.uniform(0.0, 1.0, size=2))
    return rigid_rotation(rng.uniform(0.0, 1.0, size=dimension))


def sample_fiber_shift(rng, integral: bool = True):
    if integral:
        return int(rng.integers(-3, 4))
    return float(rng.uniform(-1.0, 1.0))
