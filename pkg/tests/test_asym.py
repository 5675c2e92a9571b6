from fractions import Fraction

import pytest

from twistlab.core.asym import (
    borel_input_coeffs,
    linear_combination,
    pert_expansion,
    terminating_polynomial,
    zagier_oracle,
)
from twistlab.core.chars import TRIVIAL, character_from_conrey, kronecker_character
from twistlab.core.errors import ImprimitiveCharacter, ParityViolation, UnsupportedParameters
from twistlab.core.qseries import QPoint, SeriesParams, lambert
from twistlab.core.resurgence import borel_transform


CHI3 = kronecker_character(-3)


def test_linear_combination_stays_exact(ctx):
    assert linear_combination(ctx, 1, (2, Fraction(1, 3))) == Fraction(5, 3)
    mixed = linear_combination(ctx, 1, (1, ctx.mp.mpf(0.5)))
    assert abs(mixed - 1.5) < 1e-28


def test_weight_one_lambert_terminates(ctx):
    expansion = terminating_polynomial(0, CHI3, "L", ctx)
    assert expansion.terminating
    assert expansion.coefficients == [Fraction(-1, 6)]
    (term,) = expansion.isolated
    assert term.exponent == -1
    y = ctx.mp.mpf("0.05")
    direct = lambert(0, CHI3, TRIVIAL, QPoint.from_y(y, ctx), ctx)
    assert abs(expansion.evaluate(y, ctx) - direct) < 1e-12


def test_log_pochhammer_expansion(ctx):
    mp = ctx.mp
    expansion = pert_expansion(SeriesParams(s1=1, s2=0), ctx)
    assert expansion.terminating
    assert expansion.coefficients == [Fraction(0), Fraction(1, 24)]
    lt = expansion.log_term
    assert lt.power == 0
    assert abs(lt.log_coefficient + mp.mpf(1) / 2) < 1e-28
    assert abs(lt.constant + mp.log(2 * mp.pi) / 2) < 1e-28
    y = mp.mpf("0.1")
    direct = lambert(1, TRIVIAL, TRIVIAL, QPoint.from_y(y, ctx), ctx)
    assert abs(expansion.evaluate(y, ctx) - direct) < 1e-20


def test_non_terminating_coefficients(ctx):
    expansion = pert_expansion(SeriesParams(s1=0, s2=1, chi1=CHI3, chi2=TRIVIAL), ctx, order=4)
    assert not expansion.terminating
    assert expansion.order == 4
    assert expansion.coefficients[2] == Fraction(1, 54)
    records = expansion.to_records(10)
    assert any(r["is_log"] for r in records)


def test_unsupported_principal_pairs(ctx):
    with pytest.raises(UnsupportedParameters):
        pert_expansion(SeriesParams(s1=2, s2=2), ctx)
    with pytest.raises(UnsupportedParameters):
        pert_expansion(SeriesParams(s1="1/2", s2="1/2"), ctx)
    with pytest.raises(ValueError):
        pert_expansion(SeriesParams(s1=0, s2=0, chi1=CHI3), ctx, order=-1)


def test_terminating_polynomial_checks(ctx):
    with pytest.raises(ParityViolation):
        terminating_polynomial(1, CHI3, "L", ctx)
    with pytest.raises(ImprimitiveCharacter):
        terminating_polynomial(0, character_from_conrey(8, 7), "L", ctx)


def test_borel_input_prefactor(ctx):
    binput = borel_input_coeffs(SeriesParams(s1=0, s2=0, chi1=CHI3, chi2=TRIVIAL), ctx)
    assert binput.level == 3
    assert abs(binput.prefactor - 1 / ctx.mp.sqrt(3)) < 1e-28
    with pytest.raises(ImprimitiveCharacter):
        borel_input_coeffs(SeriesParams(chi1=character_from_conrey(8, 7)), ctx)


@pytest.mark.parametrize(
    "s1, s2, chi2",
    [("1/2", 0, TRIVIAL), ("1/3", "1/2", TRIVIAL), ("1/2", 0, character_from_conrey(2, 1))],
)
def test_oracle_reproduces_the_expansion(ctx, s1, s2, chi2):
    p = SeriesParams(s1=s1, s2=s2, chi1=CHI3, chi2=chi2)
    expansion = pert_expansion(p, ctx, order=8)
    oracle = zagier_oracle(p, ctx, order=8)
    for y in ("0.05", "0.2"):
        assert abs(expansion.evaluate(y, ctx, order=8) - oracle.evaluate(y, ctx, order=8)) < 1e-25


def test_borel_coefficients_resum_the_expansion(ctx):
    p = SeriesParams(s1="1/2", s2="1/3", chi1=CHI3, chi2=kronecker_character(5))
    binput = borel_input_coeffs(p, ctx)
    expansion = pert_expansion(p, ctx, order=6)
    for k in range(6):
        expected = ctx.mp.convert(expansion.monomial_coefficient(k, ctx))
        assert abs(binput.series_coefficient(k, ctx) - expected) < 1e-25 * max(1, abs(expected))


def test_borel_transform_taylor_coefficients(ctx):
    mp = ctx.mp
    p = SeriesParams(s1="1/2", s2="1/3", chi1=CHI3, chi2=kronecker_character(5))
    binput = borel_input_coeffs(p, ctx)
    t = mp.mpf("0.01")
    series = sum(binput.f_coefficient(k, ctx) * t**k / mp.factorial(k) for k in range(40))
    direct = borel_transform(p.s1, p.s2, p.chi1.parity_kappa, p.chi2.parity_kappa, t, ctx)
    assert abs(series - direct) < 1e-25
