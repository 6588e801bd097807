"""The two-variable displacement cocycle on the base group and its checks.

For base lifts g, h fixing the class a, define at a base point x (cover x~)

    G_x(g, h) = <a, g(h(x~)) - g(x~)> - <a, h(x~) - x~>,

the line integral of g*alpha - alpha from x to h(x) for the constant form
alpha = sum a_i dx_i. Writing F_g(y) = <a, g(y) - y>, this is
F_g(h(x~)) - F_g(x~), which makes two exact identities transparent:

 * coboundary: G_x(g, h) = rho_x(g h) - rho_x(g) - rho_x(h) for any lifts
   of g, h to the bundle (the fiber shifts cancel), using the convention
   (delta c)(g, h) = c(h) - c(g h) + c(g) for 1-cochains, so G = -delta rho;
 * cocycle: (delta G)(g, h, k) = G(h, k) - G(gh, k) + G(g, hk) - G(g, h)
   vanishes identically.

`gal_kedra_quadrature` re-derives the same number as an honest line
integral along the straight segment (midpoint rule, finite-difference or
analytic Jacobian), which is the module's independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    BundleAutomorphism,
    InvariantMeasure,
    _measure_mean,
    mean_translation_number,
    measure_invariance_residual,
    rho,
)
from .errors import PreconditionError, ValidationError
from .families import sample_class_entries, sample_fiber_shift, sample_map
from .torus import CohomologyClass, LiftedMap, require_preserves_class

__all__ = [
    "gal_kedra",
    "gal_kedra_many",
    "gal_kedra_quadrature",
    "coboundary_residual",
    "cocycle_residual",
    "quasimorphism_defect",
    "SplittingReport",
    "splitting_check",
    "ResidualSuite",
    "coboundary_residual_suite",
    "cocycle_residual_suite",
]


def _cover(x, n: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (n,):
        raise ValidationError(f"point of shape {arr.shape} on a {n}-torus")
    return arr


def gal_kedra(a: CohomologyClass, g: LiftedMap, h: LiftedMap, x) -> float:
    """Closed-form G_x(g, h); lift-independent because both matrices fix a."""
    require_preserves_class(a, g)
    require_preserves_class(a, h)
    xt = _cover(x, a.dimension)
    hx = h(xt)
    av = a.vector
    return float(np.dot(av, g(hx) - g(xt)) - np.dot(av, hx - xt))


def gal_kedra_many(a: CohomologyClass, g: LiftedMap, h: LiftedMap, points: np.ndarray) -> np.ndarray:
    """Vectorized G over an (N, n) stack of base points."""
    require_preserves_class(a, g)
    require_preserves_class(a, h)
    pts = np.asarray(points, dtype=float)
    hx = h.evaluate_many(pts)
    av = a.vector
    return (g.evaluate_many(hx) - g.evaluate_many(pts)) @ av - (hx - pts) @ av


def gal_kedra_quadrature(
    a: CohomologyClass,
    g: LiftedMap,
    h: LiftedMap,
    x,
    segments: int = 10_000,
    fd_step: float = 1e-6,
) -> float:
    """Midpoint line integral of g*alpha - alpha from x~ to h(x~).

    The integrand at gamma(t) = x~ + t v (v = h(x~) - x~) is
    <a, Dg(gamma(t)) v> - <a, v>; the Jacobian action is taken analytically
    when the lift registers one, otherwise by a central difference of
    spatial width fd_step along v."""
    if segments < 1:
        raise ValidationError("need at least one segment")
    require_preserves_class(a, g)
    require_preserves_class(a, h)
    xt = _cover(x, a.dimension)
    v = h(xt) - xt
    ts = (np.arange(segments) + 0.5) / segments
    pts = xt[None, :] + ts[:, None] * v[None, :]
    av = a.vector
    if g.jacobian is not None:
        jv = np.einsum("...ij,j->...i", g.jacobian(pts), v)
    else:
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            return 0.0
        dt = fd_step / vnorm
        jv = (g.evaluate_many(pts + dt * v) - g.evaluate_many(pts - dt * v)) / (2.0 * dt)
    integrand = jv @ av - float(np.dot(av, v))
    return float(np.mean(integrand))


def coboundary_residual(
    a: CohomologyClass, g: BundleAutomorphism, h: BundleAutomorphism, x
) -> float:
    """|G_x(g, h) - (rho_x(gh) - rho_x(g) - rho_x(h))|; exactly zero in
    exact arithmetic, so the residual is pure floating-point noise."""
    value = gal_kedra(a, g.lift, h.lift, x)
    target = rho(a, g.compose(h), x) - rho(a, g, x) - rho(a, h, x)
    return abs(value - target)


def cocycle_residual(a: CohomologyClass, g: LiftedMap, h: LiftedMap, k: LiftedMap, x) -> float:
    """|G(h,k) - G(gh,k) + G(g,hk) - G(g,h)| at x; identically zero."""
    gh = g.compose(h)
    hk = h.compose(k)
    return abs(
        gal_kedra(a, h, k, x)
        - gal_kedra(a, gh, k, x)
        + gal_kedra(a, g, hk, x)
        - gal_kedra(a, g, h, x)
    )


def quasimorphism_defect(
    a: CohomologyClass,
    elements: Sequence[BundleAutomorphism],
    x,
    word_length: int = 2,
    samples: int = 64,
    seed: int = 0,
) -> float:
    """max |rho_x(g) + rho_x(h) - rho_x(gh)| over sampled words in the set.

    The defect of rho_x as a quasimorphism on the group the elements
    generate, probed on random words up to the given length."""
    if not elements:
        raise ValidationError("need at least one element")
    rng = np.random.default_rng(seed)

    def word():
        length = int(rng.integers(1, word_length + 1))
        out = elements[int(rng.integers(len(elements)))]
        for _ in range(length - 1):
            out = out.compose(elements[int(rng.integers(len(elements)))])
        return out

    worst = 0.0
    for _ in range(samples):
        gw, hw = word(), word()
        defect = abs(rho(a, gw, x) + rho(a, hw, x) - rho(a, gw.compose(hw), x))
        worst = max(worst, defect)
    return worst


@dataclass(frozen=True)
class SplittingReport:
    """Additivity of the mean translation number on a measure-preserving set.

    additivity_residual is max |F(gh) - F(g) - F(h)| over the sampled pairs;
    mean_cocycle_residual checks the exact identity
    int G_x(g,h) dmu = F(gh) - F(g) - F(h) as a computation cross-check."""

    additivity_residual: float
    mean_cocycle_residual: float
    pairs: int
    generator_invariance: tuple
    measure_kind: str

    @property
    def splitting_residual(self) -> float:
        return self.additivity_residual


def splitting_check(
    a: CohomologyClass,
    generators: Sequence[BundleAutomorphism],
    mu: InvariantMeasure,
    *,
    pairs: int = 100,
    word_length: int = 2,
    quadrature_points: int = 64,
    seed: int = 0,
    invariance_tolerance: float = 1e-6,
) -> SplittingReport:
    """Sample pairs of words in the generators and test F(gh) = F(g) + F(h)
    for F the mean translation number against mu.

    Every generator's base map must preserve mu (push-forward residual at
    most invariance_tolerance), otherwise the premise of additivity fails
    and the check refuses to run."""
    if not generators:
        raise ValidationError("need at least one generator")
    inv = tuple(
        measure_invariance_residual(g.lift, mu, quadrature_points=quadrature_points)
        for g in generators
    )
    for g, r in zip(generators, inv):
        if r > invariance_tolerance:
            raise PreconditionError(
                f"generator {g.label!r} does not preserve the measure "
                f"(push-forward residual {r:.3e})"
            )
    rng = np.random.default_rng(seed)

    def word():
        length = int(rng.integers(1, word_length + 1))
        out = generators[int(rng.integers(len(generators)))]
        for _ in range(length - 1):
            out = out.compose(generators[int(rng.integers(len(generators)))])
        return out

    def mean_of(g: BundleAutomorphism) -> float:
        return mean_translation_number(
            a, g, mu, quadrature_points=quadrature_points, check_invariance=False
        ).value

    worst_add = 0.0
    worst_mean_cocycle = 0.0
    for _ in range(pairs):
        gw, hw = word(), word()
        fg, fh = mean_of(gw), mean_of(hw)
        fgh = mean_of(gw.compose(hw))
        worst_add = max(worst_add, abs(fgh - fg - fh))
        mean_g, _ = _measure_mean(
            lambda pts: gal_kedra_many(a, gw.lift, hw.lift, pts),
            mu,
            a.dimension,
            quadrature_points,
            base_map=gw.lift,
        )
        worst_mean_cocycle = max(worst_mean_cocycle, abs(mean_g - (fgh - fg - fh)))
    return SplittingReport(
        additivity_residual=worst_add,
        mean_cocycle_residual=worst_mean_cocycle,
        pairs=pairs,
        generator_invariance=inv,
        measure_kind=mu.kind,
    )


# --------------------------------------------------------------------------
# seeded residual suites (shared by the CLI check command and the tests)


@dataclass(frozen=True)
class ResidualSuite:
    max_residual: float
    count: int
    dimensions: tuple


def coboundary_residual_suite(seed: int, count: int, dimensions=(1, 2)) -> ResidualSuite:
    """Random classes, maps, shifts, points; worst coboundary residual."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        dim = dimensions[i % len(dimensions)]
        entries = sample_class_entries(rng, dim, affine_friendly=True)
        a = CohomologyClass(entries)
        g = BundleAutomorphism(sample_map(rng, entries), sample_fiber_shift(rng))
        h = BundleAutomorphism(sample_map(rng, entries), sample_fiber_shift(rng))
        x = rng.uniform(0.0, 1.0, size=dim)
        worst = max(worst, coboundary_residual(a, g, h, x))
    return ResidualSuite(max_residual=worst, count=count, dimensions=tuple(dimensions))


def cocycle_residual_suite(seed: int, count: int, dimensions=(1, 2)) -> ResidualSuite:
    """Random triples of base lifts; worst cocycle residual."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        dim = dimensions[i % len(dimensions)]
        entries = sample_class_entries(rng, dim, affine_friendly=True)
        a = CohomologyClass(entries)
        g = sample_map(rng, entries)
        h = sample_map(rng, entries)
        k = sample_map(rng, entries)
        x = rng.uniform(0.0, 1.0, size=dim)
        worst = max(worst, cocycle_residual(a, g, h, k, x))
    return ResidualSuite(max_residual=worst, count=count, dimensions=tuple(dimensions))
