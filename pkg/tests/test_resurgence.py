from fractions import Fraction

import pytest

from twistlab.core.chars import TRIVIAL, character_from_conrey, kronecker_character
from twistlab.core.errors import GammaPole, ImprimitiveCharacter, NonConvergent, ParityViolation
from twistlab.core.numerics import PrecisionContext
from twistlab.core.qseries import QPoint, SeriesParams
from twistlab.core.resurgence import (
    LateralSide,
    borel_order,
    borel_transform,
    envelope,
    laplace_borel,
    lateral_pert_sum,
    np_exact,
    quantum_fricke_vector,
    ray_angle,
    sigma_pm,
    stokes_discontinuity,
    transseries_eval,
    upper_triangular_check,
)


CHI3 = kronecker_character(-3)


def test_sigma_pm_is_a_phase(ctx):
    p = SeriesParams(s1="1/2", s2=0, chi1=CHI3, chi2=TRIVIAL)
    plus = sigma_pm(p, "plus", ctx)
    minus = sigma_pm(p, LateralSide.MINUS, ctx)
    assert abs(plus * minus - 1) < 1e-28
    assert abs(sigma_pm(p, "median", ctx) - (plus + minus) / 2) < 1e-28


def test_ray_angles_straddle_the_stokes_line(ctx):
    y = ctx.mp.mpf("0.3")
    assert ray_angle(y, LateralSide.PLUS, ctx) > 0
    assert ray_angle(y, LateralSide.MINUS, ctx) < 0
    assert envelope(ctx) > 0


def test_borel_order(ctx):
    assert borel_order(SeriesParams(s1=0, s2=0), ctx) == 1
    assert borel_order(SeriesParams(s1="3/2", s2=0), ctx) == 3


def test_borel_transform_gamma_pole(ctx):
    with pytest.raises(GammaPole):
        borel_transform(1, 0, 0, 0, Fraction(1, 2), ctx)


def test_terminating_transseries_closes(ctx20):
    p = SeriesParams(s1=0, s2=0, chi1=CHI3, chi2=TRIVIAL)
    z = QPoint.from_y(Fraction(3, 10), ctx20)
    report = transseries_eval(p, z, "plus", ctx20)
    assert abs(report.sigma - 1) < 1e-18
    assert report.passed
    record = report.to_record(10)
    assert record["passed"] is True
    assert record["chi1"] == "3:2"


def test_np_sector_is_the_dual_series(ctx20):
    mp = ctx20.mp
    p = SeriesParams(s1=0, s2=0, chi1=CHI3, chi2=TRIVIAL)
    y = mp.mpf("0.3")
    expected = mp.zero
    for n in range(1, 40):
        weight = sum(CHI3.real_value(d) for d in range(1, n + 1) if n % d == 0)
        expected += weight * mp.exp(-2 * mp.pi * n / (3 * y))
    expected /= mp.sqrt(3) * y
    assert abs(np_exact(p, QPoint.from_y(y, ctx20), ctx20) - expected) < 1e-18


def test_vector_identities_need_primitive_characters(ctx20):
    z = QPoint.from_y(Fraction(1, 2), ctx20)
    with pytest.raises(ImprimitiveCharacter):
        quantum_fricke_vector(0, character_from_conrey(8, 7), z, "plus", ctx20)
    with pytest.raises(ImprimitiveCharacter):
        quantum_fricke_vector(0, TRIVIAL, z, "plus", ctx20)
    with pytest.raises(ParityViolation):
        upper_triangular_check(CHI3, CHI3, z, ctx20)


def test_terminating_lateral_sums_agree(ctx20):
    p = SeriesParams(s1=2, s2=0, chi1=CHI3, chi2=TRIVIAL)
    z = QPoint.from_y(Fraction(3, 10), ctx20)
    assert lateral_pert_sum(p, z, "plus", ctx20) == lateral_pert_sum(p, z, "minus", ctx20)


def test_stokes_jump(ctx20):
    terminating = SeriesParams(s1=0, s2=0, chi1=CHI3, chi2=TRIVIAL)
    assert stokes_discontinuity(terminating, 10, ctx20) == 0
    with pytest.raises(NonConvergent):
        stokes_discontinuity(SeriesParams(s1="1/2", s2=0, chi1=CHI3), -1, ctx20)


CHI5 = character_from_conrey(5, 4)


def test_np_integral_with_singular_endpoint_reaches_target():
    ctx70 = PrecisionContext.from_digits(70)
    p = SeriesParams(s1="1/3", s2=0, chi1=CHI5, chi2=TRIVIAL)
    report = transseries_eval(p, QPoint.from_y(Fraction(1, 4), ctx70), "plus", ctx70)
    assert report.passed
    assert abs(report.residual) < 1e-60


def test_half_integer_transseries_reaches_target():
    ctx35 = PrecisionContext.from_digits(35)
    p = SeriesParams(s1="1/2", s2=0, chi1=CHI3, chi2=TRIVIAL)
    report = transseries_eval(p, QPoint.from_y(Fraction(1, 4), ctx35), "plus", ctx35)
    assert report.passed
    assert report.to_record(10)["passed"] is True


@pytest.mark.parametrize(
    "s1, s2, chi1, chi2",
    [
        ("1/2", 0, CHI3, TRIVIAL),
        ("1/2", "1/3", CHI3, CHI5),
        ("1/3", 0, character_from_conrey(5, 2), TRIVIAL),
        ("3/4", "1/5", CHI5, CHI3),
    ],
)
def test_sigma_matches_best_fit_phase(ctx, s1, s2, chi1, chi2):
    p = SeriesParams(s1=s1, s2=s2, chi1=chi1, chi2=chi2)
    report = transseries_eval(p, QPoint.from_y(Fraction(1, 4), ctx), "plus", ctx)
    assert report.passed, report.residual
    assert abs(report.phase_deviation) < 1e-20
    assert abs(report.best_fit_sigma - report.sigma) < 1e-20


def test_sides_recombine_to_the_same_value(ctx):
    p = SeriesParams(s1="1/2", s2="1/3", chi1=CHI3, chi2=CHI5)
    z = QPoint.from_y(Fraction(1, 4), ctx)
    plus = transseries_eval(p, z, "plus", ctx)
    minus = transseries_eval(p, z, "minus", ctx)
    assert abs(plus.recombined - minus.recombined) < 1e-26
    assert minus.passed


def test_lateral_sums_are_conjugate_for_real_parameters(ctx):
    p = SeriesParams(s1="1/2", s2=0, chi1=CHI3, chi2=TRIVIAL)
    z = QPoint.from_y(Fraction(1, 4), ctx)
    plus = lateral_pert_sum(p, z, "plus", ctx)
    minus = lateral_pert_sum(p, z, "minus", ctx)
    assert abs(plus.real - minus.real) < 1e-26
    assert abs(plus.imag + minus.imag) < 1e-26
    assert abs(plus.imag) > 1e-10


def test_median_recombination_is_real(ctx):
    p = SeriesParams(s1="1/2", s2="1/3", chi1=CHI3, chi2=CHI5)
    report = transseries_eval(p, QPoint.from_y(Fraction(3, 10), ctx), "median", ctx)
    assert abs(report.recombined.imag) < 1e-26
    assert report.passed


@pytest.mark.parametrize("zarg", [10, 20])
def test_stokes_jump_matches_lateral_laplace_integrals(ctx20, zarg):
    p = SeriesParams(s1="1/2", s2=0, chi1=CHI3, chi2=TRIVIAL)
    jump = stokes_discontinuity(p, zarg, ctx20)
    lateral = laplace_borel(p, zarg, "plus", ctx20) - laplace_borel(p, zarg, "minus", ctx20)
    assert abs(jump - lateral) < 1e-15 * abs(jump)
    assert abs(jump) > 0


def test_stokes_jump_is_exponentially_suppressed(ctx20):
    mp = ctx20.mp
    p = SeriesParams(s1="1/2", s2=0, chi1=CHI3, chi2=TRIVIAL)
    ratio = abs(stokes_discontinuity(p, 20, ctx20) / stokes_discontinuity(p, 10, ctx20))
    assert abs(mp.log(ratio) + 10) < 1


@pytest.mark.parametrize("s1", [2, 4])
@pytest.mark.parametrize("y", [Fraction(1, 10), Fraction(3, 10), Fraction(1)])
def test_terminating_fricke_identities(ctx20, s1, y):
    p = SeriesParams(s1=s1, s2=0, chi1=CHI3, chi2=TRIVIAL)
    report = transseries_eval(p, QPoint.from_y(y, ctx20), "plus", ctx20)
    assert report.passed, report.residual


def test_imprimitive_character_routes_through_inducer(ctx20):
    p = SeriesParams(s1=2, s2=0, chi1=character_from_conrey(6, 5), chi2=TRIVIAL)
    report = transseries_eval(p, QPoint.from_y(Fraction(3, 10), ctx20), "plus", ctx20)
    assert report.passed, report.residual


@pytest.mark.parametrize("chi", [CHI3, character_from_conrey(4, 3)])
def test_quantum_fricke_vector_closes(ctx20, chi):
    report = quantum_fricke_vector(2, chi, QPoint.from_y(Fraction(2, 5), ctx20), "plus", ctx20)
    assert report.passed, report.residual


def test_upper_triangular_closure(ctx20):
    report = upper_triangular_check(CHI3, TRIVIAL, QPoint.from_y(Fraction(2, 5), ctx20), ctx20)
    assert report.passed, report.residual
