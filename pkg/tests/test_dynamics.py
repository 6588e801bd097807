"""Pointwise displacement, orbit limits, exact periodic detection, means."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from transnum import (
    BundleAutomorphism,
    BundlePoint,
    CochainPerturbation,
    CohomologyClass,
    Coefficients,
    InvariantMeasure,
    LiftedMap,
    NotPeriodicError,
    PreconditionError,
    TrigPolynomial,
    ValidationError,
    VERDICT_CONVERGED,
    VERDICT_EXACT_PERIODIC,
    VERDICT_NOT_CONVERGED,
    arnold_circle,
    fiber_translation,
    local_translation_number,
    mean_translation_number,
    measure_invariance_residual,
    periodic_rot,
    perturbed_rho,
    perturbed_rho_power_average,
    rho,
    rho_many,
    rho_power_average,
    rigid_rotation,
    sinusoidal_shear,
    skew_translation,
    theta,
    torus_affine,
)

A1 = CohomologyClass([1])
A1R = CohomologyClass([1.0], coefficients=Coefficients.REAL)
A10 = CohomologyClass([1, 0])
A01 = CohomologyClass([0, 1])
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def auto(lift, shift=0):
    return BundleAutomorphism(lift, shift)


# -- rho ---------------------------------------------------------------------


def test_rho_of_rigid_rotation_is_the_pairing_with_the_class():
    g = auto(rigid_rotation([0.3]))
    assert rho(A1, g, [0.11]) == pytest.approx(0.3, abs=1e-15)


def test_rho_of_fiber_translation_is_the_shift():
    for r in range(-3, 4):
        assert rho(A1, fiber_translation(1, r), [0.42]) == r
    rng = np.random.default_rng(7)
    for r in rng.uniform(-2, 2, size=5):
        assert rho(A1R, fiber_translation(1, float(r)), [0.42]) == pytest.approx(r)


def test_integer_fiber_rejects_fractional_translation():
    with pytest.raises(PreconditionError):
        rho(A1, fiber_translation(1, 0.5), [0.0])
    with pytest.raises(PreconditionError):
        rho(A1, fiber_translation(1, Fraction(1, 3)), [0.0])
    # integer-valued shifts are fine in any representation
    assert rho(A1, fiber_translation(1, 2.0), [0.0]) == 2.0


def test_rho_of_sinusoidal_shear_at_the_crest():
    g = auto(sinusoidal_shear(0.1))
    assert rho(A10, g, [0.0, 0.25]) == pytest.approx(0.1, abs=1e-15)
    assert rho(A10, g, [0.0, 0.75]) == pytest.approx(-0.1, abs=1e-15)


def test_rho_is_deck_invariant_when_the_class_is_preserved():
    g = auto(torus_affine([[1, 0], [2, 1]], [0.25, 0.0]), 1)
    x = np.array([0.37, 0.81])
    base = rho(A10, g, x)
    for m in ([3, -2], [-1, 5], [10, 10]):
        assert rho(A10, g, x + np.asarray(m, float)) == pytest.approx(base, abs=1e-12)


def test_rho_many_matches_the_scalar_loop():
    g = auto(sinusoidal_shear(0.1), 2)
    pts = np.random.default_rng(3).uniform(0, 1, size=(40, 2))
    vec = rho_many(A10, g, pts)
    for p, v in zip(pts, vec):
        assert v == pytest.approx(rho(A10, g, p), abs=1e-14)


def test_rho_cocycle_identity():
    g = auto(sinusoidal_shear(0.1), 1)
    h = auto(torus_affine([[1, 0], [2, 1]], [0.25, 0.0]), 2)
    gh = g.compose(h)
    x = np.array([0.31, 0.77])
    lhs = rho(A10, gh, x)
    rhs = rho(A10, g, h.lift(x)) + rho(A10, h, x)
    assert lhs == pytest.approx(rhs, abs=1e-12)


# -- local limits ------------------------------------------------------------


def test_rational_rotation_is_detected_exactly():
    cases = [
        (0.3, Fraction(3, 10)),
        (0.5, Fraction(1, 2)),
        (2.0 / 5.0, Fraction(2, 5)),
        (3.0 / 7.0, Fraction(3, 7)),
    ]
    for omega, expected in cases:
        rep = local_translation_number(A1, auto(rigid_rotation([omega])), [0.2])
        assert rep.verdict == VERDICT_EXACT_PERIODIC, omega
        assert rep.rational == expected
        assert rep.error_bound == 0.0
        assert rep.value == pytest.approx(float(expected), abs=1e-12)


def test_golden_rotation_converges_with_negligible_error():
    rep = local_translation_number(A1, auto(rigid_rotation([GOLDEN])), [0.0])
    assert rep.verdict == VERDICT_CONVERGED
    assert rep.rational is None
    assert rep.value == pytest.approx(GOLDEN, abs=1e-12)
    assert rep.error_bound <= 1e-9


def test_exact_periodicity_needs_the_integer_fiber_group():
    rep = local_translation_number(A1R, auto(rigid_rotation([0.5])), [0.2])
    assert rep.verdict == VERDICT_CONVERGED
    assert rep.rational is None
    assert rep.value == pytest.approx(0.5, abs=1e-12)


def test_fixed_point_of_circle_map_gives_zero_exactly():
    g = auto(arnold_circle(0.0, 0.9))
    rep = local_translation_number(A1, g, [0.0])
    assert rep.verdict == VERDICT_EXACT_PERIODIC
    assert rep.rational == Fraction(0, 1)
    assert rep.value == 0.0
    assert rep.error_bound == 0.0


def test_limit_is_invariant_under_the_choice_of_cover_representative():
    g = auto(rigid_rotation([GOLDEN]))
    a = local_translation_number(A1, g, [0.3])
    b = local_translation_number(A1, g, [7.3])
    assert a.value == pytest.approx(b.value, abs=1e-12)
    assert a.verdict == b.verdict


def test_power_homogeneity_with_fiber_shifts():
    g = auto(sinusoidal_shear(0.1), 2)
    base = local_translation_number(A10, g, [0.1, 0.15]).value
    for k in (1, 2, 3):
        rep = local_translation_number(A10, g.power(k), [0.1, 0.15])
        assert rep.value == pytest.approx(k * base, abs=1e-12)


def test_composing_with_a_central_translation_adds_its_amount():
    g = auto(rigid_rotation([GOLDEN]))
    base = local_translation_number(A1, g, [0.0]).value
    shifted = g.compose(fiber_translation(1, 2))
    assert local_translation_number(A1, shifted, [0.0]).value == pytest.approx(
        base + 2, abs=1e-12
    )
    g_real = auto(rigid_rotation([GOLDEN]))
    base_real = local_translation_number(A1R, g_real, [0.0]).value
    shifted_real = g_real.compose(fiber_translation(1, 0.37))
    assert local_translation_number(A1R, shifted_real, [0.0]).value == pytest.approx(
        base_real + 0.37, abs=1e-12
    )


def test_additivity_at_a_common_fixed_base_point():
    g = auto(arnold_circle(0.0, 0.5), 3)
    h = auto(arnold_circle(0.0, 0.9), -1)
    rg = local_translation_number(A1, g, [0.0])
    rh = local_translation_number(A1, h, [0.0])
    rgh = local_translation_number(A1, g.compose(h), [0.0])
    assert (rg.rational, rh.rational) == (Fraction(3), Fraction(-1))
    assert rgh.rational == rg.rational + rh.rational


def test_slow_orbit_reports_not_converged_with_its_window():
    rep = local_translation_number(
        A1,
        auto(arnold_circle(0.0, 0.5)),
        [0.1],
        tolerance=1e-12,
        max_iterations=100,
    )
    assert rep.verdict == VERDICT_NOT_CONVERGED
    assert rep.iterations == 100
    assert len(rep.window) >= 2
    assert rep.error_bound > 0
    assert rep.rational is None


def test_diagnostics_attach_the_height_average():
    g = auto(rigid_rotation([GOLDEN]))
    start = BundlePoint(np.array([0.25]), 2)
    plain = local_translation_number(A1, g, start)
    rep = local_translation_number(A1, g, start, diagnostics=True)
    assert plain.height_average is None
    assert rep.height_average == pytest.approx(
        rep.value + theta(A1, start) / rep.iterations, abs=1e-12
    )


def test_raw_power_average_tracks_the_orbit_sum():
    g = auto(rigid_rotation([GOLDEN]), 1)
    n = 257
    assert rho_power_average(A1, g, [0.0], n) == pytest.approx(
        GOLDEN + 1.0, abs=1.0 / n
    )
    with pytest.raises(ValidationError):
        rho_power_average(A1, g, [0.0], 0)


# -- exact rationals at periodic points --------------------------------------


def test_periodic_rot_on_the_half_rotation():
    g = auto(rigid_rotation([0.5]))
    assert periodic_rot(A1, g, [0.1], 2) == Fraction(1, 2)
    # a multiple of the true period reduces to the same fraction
    assert periodic_rot(A1, g, [0.1], 4) == Fraction(1, 2)


def test_periodic_rot_of_a_pure_translation_at_period_one():
    assert periodic_rot(A1, fiber_translation(1, 3), [0.9], 1) == Fraction(3)


def test_periodic_rot_two_fifths():
    g = auto(rigid_rotation([0.4]))
    assert periodic_rot(A1, g, [0.13], 5) == Fraction(2, 5)


def test_periodic_rot_rejects_non_periodic_points():
    g = auto(rigid_rotation([GOLDEN]))
    with pytest.raises(NotPeriodicError):
        periodic_rot(A1, g, [0.0], 3)


def test_periodic_rot_needs_integer_fibers_and_a_positive_period():
    g = auto(rigid_rotation([0.5]))
    with pytest.raises(ValidationError):
        periodic_rot(A1R, g, [0.1], 2)
    with pytest.raises(ValidationError):
        periodic_rot(A1, g, [0.1], 0)


@given(p=st.integers(-6, 6), q=st.integers(1, 9))
def test_periodic_rot_recovers_every_small_fraction(p, q):
    g = auto(rigid_rotation([p / q]))
    assert periodic_rot(A1, g, [0.05], q) == Fraction(p, q)


# -- means over invariant measures -------------------------------------------


def test_mean_of_skew_translation_is_the_constant_term():
    g = auto(skew_translation(GOLDEN, TrigPolynomial(0.3, (0.05,), (0.1,))))
    rep = mean_translation_number(A01, g, InvariantMeasure.lebesgue())
    assert rep.value == pytest.approx(0.3, abs=1e-12)
    assert rep.error_bound <= 1e-9
    assert rep.measure_kind == "lebesgue"
    assert not rep.invariance_warning


def test_mean_of_a_fiber_translation_is_its_amount():
    for mu in (
        InvariantMeasure.lebesgue(),
        InvariantMeasure.dirac_orbit([0.3], 1),
        InvariantMeasure.empirical([[0.1], [0.8]], [0.5, 0.5]),
    ):
        rep = mean_translation_number(A1, fiber_translation(1, 2), mu)
        assert rep.value == pytest.approx(2.0, abs=1e-12)


def test_mean_over_a_periodic_orbit_measure():
    g = auto(rigid_rotation([0.5]))
    mu = InvariantMeasure.dirac_orbit([0.1], 2)
    rep = mean_translation_number(A1, g, mu)
    assert rep.value == pytest.approx(0.5, abs=1e-13)
    assert rep.invariance_residual <= 1e-12
    assert not rep.invariance_warning


def test_mean_over_an_invariant_empirical_pair():
    g = auto(rigid_rotation([0.5]))
    mu = InvariantMeasure.empirical([[0.1], [0.6]], [0.5, 0.5])
    rep = mean_translation_number(A1, g, mu)
    assert rep.value == pytest.approx(0.5, abs=1e-13)
    assert rep.invariance_residual <= 1e-12


def test_non_invariant_empirical_measure_sets_the_warning_flag():
    g = auto(sinusoidal_shear(0.1))
    mu = InvariantMeasure.empirical([[0.3, 0.25]])
    rep = mean_translation_number(A10, g, mu)
    assert rep.value == pytest.approx(0.1, abs=1e-13)
    assert rep.invariance_warning
    assert rep.invariance_residual > 1e-3


def test_empirical_weights_are_validated():
    with pytest.raises(ValidationError):
        InvariantMeasure.empirical([[0.1], [0.2]], [0.7, 0.7])
    with pytest.raises(ValidationError):
        InvariantMeasure.empirical([[0.1], [0.2]], [1.5, -0.5])
    with pytest.raises(ValidationError):
        InvariantMeasure.dirac_orbit([0.1], 0)


def test_lebesgue_invariance_residual_vanishes_for_rotations():
    res = measure_invariance_residual(rigid_rotation([0.37, 0.61]), InvariantMeasure.lebesgue())
    assert res <= 1e-9


def test_genuine_orbit_measure_has_zero_pushforward_residual():
    res = measure_invariance_residual(
        rigid_rotation([0.25]), InvariantMeasure.dirac_orbit([0.05], 4)
    )
    assert res <= 1e-12


def test_squaring_chart_map_visibly_breaks_lebesgue_invariance():
    square = LiftedMap(
        evaluator=lambda x: np.asarray(x, dtype=float) ** 2,
        matrix=[[1]],
        label="square-chart",
    )
    mu = InvariantMeasure.lebesgue()
    coarse = measure_invariance_residual(square, mu, quadrature_points=512)
    fine = measure_invariance_residual(square, mu, quadrature_points=2048)
    assert coarse > 0.1
    # the residual is a property of the map, not a quadrature artifact
    assert abs(coarse - fine) < 0.01


# -- perturbed primitives ----------------------------------------------------


def test_zero_perturbation_changes_nothing():
    pert = CochainPerturbation.from_trig(TrigPolynomial(0.0))
    g = auto(rigid_rotation([0.3]), 1)
    x = [0.17]
    assert perturbed_rho(A1, g, x, pert) == rho(A1, g, x)


def test_perturbed_rho_worked_example():
    # rho = 0.5 and beta = 0.025 sin(2 pi x) moves it by -0.05 across the step
    pert = CochainPerturbation.from_trig(TrigPolynomial(0.0, (0.0,), (0.025,)))
    g = auto(rigid_rotation([0.5]))
    assert perturbed_rho(A1, g, [0.25], pert) == pytest.approx(0.45, abs=1e-12)


def test_perturbation_telescopes_away_over_a_closed_orbit():
    pert = CochainPerturbation.from_trig(TrigPolynomial(0.0, (0.0,), (0.025,)))
    g = auto(rigid_rotation([0.5]))
    for n in (2, 4, 8):
        avg = perturbed_rho_power_average(A1, g, [0.25], pert, n)
        assert avg == pytest.approx(rho_power_average(A1, g, [0.25], n), abs=1e-14)


def test_perturbed_average_stays_within_the_sup_bound_window():
    pert = CochainPerturbation.from_trig(TrigPolynomial(0.0, (0.1,), (0.05,)))
    g = auto(rigid_rotation([GOLDEN]))
    n = 1000
    plain = rho_power_average(A1, g, [0.0], n)
    moved = perturbed_rho_power_average(A1, g, [0.0], pert, n)
    assert abs(moved - plain) <= 2.0 * pert.sup_bound / n + 1e-12


def test_understated_sup_bound_is_rejected():
    with pytest.raises(ValidationError):
        CochainPerturbation(func=lambda pts: np.full(pts.shape[0], 2.0), sup_bound=1.0)
