import random
from fractions import Fraction

import pytest

from twistlab.core.chars import TRIVIAL, character_from_conrey, kronecker_character, principal_character
from twistlab.core.errors import ImprimitiveCharacter, ParityMismatch, PoleAtOne
from twistlab.core.lfunc import (
    LValueRequest,
    evaluate,
    functional_equation_residual,
    l_derivative,
    l_negative_integer_exact,
    l_positive_easy,
    l_value,
    l_value_at,
    principal_laurent_constant,
    principal_residue,
)


def test_values_at_one(ctx):
    mp = ctx.mp
    assert abs(l_value(kronecker_character(-3), 1, ctx) - mp.pi / (3 * mp.sqrt(3))) < 1e-28
    assert abs(l_value(kronecker_character(-4), 1, ctx) - mp.pi / 4) < 1e-28


def test_exact_negative_integers():
    assert l_negative_integer_exact(kronecker_character(-3), 0) == Fraction(1, 3)
    assert l_negative_integer_exact(kronecker_character(-4), 0) == Fraction(1, 2)
    assert l_negative_integer_exact(kronecker_character(-3), 2) == Fraction(-2, 9)
    assert l_negative_integer_exact(kronecker_character(8), 1) == Fraction(-1)
    assert l_negative_integer_exact(kronecker_character(-8), 2) == Fraction(-3)


def test_evaluate_returns_exact_rational(ctx):
    value = evaluate(LValueRequest(chi=character_from_conrey(8, 3), s=Fraction(-2)), ctx)
    assert value == Fraction(-3)


def test_principal_pole(ctx):
    with pytest.raises(PoleAtOne):
        l_value(principal_character(3), 1, ctx)
    with pytest.raises(PoleAtOne):
        l_derivative(principal_character(1), 1, ctx)
    assert principal_residue(6) == Fraction(1, 3)
    assert abs(principal_laurent_constant(1, ctx) - ctx.mp.euler) < 1e-28


def test_principal_value_removes_euler_factors(ctx):
    mp = ctx.mp
    value = l_value(principal_character(2), 2, ctx)
    assert abs(value - mp.pi**2 / 8) < 1e-28


def test_imprimitive_through_inducer(ctx):
    chi = character_from_conrey(8, 7)
    catalan = ctx.mp.catalan
    assert abs(l_value(chi, 2, ctx) - catalan) < 1e-28
    assert abs(l_value(chi, 2, ctx, via_primitive=True) - catalan) < 1e-28


def test_derivative_at_zero(ctx):
    mp = ctx.mp
    chi = kronecker_character(-3)
    expected = mp.loggamma(mp.mpf(1) / 3) - mp.loggamma(mp.mpf(2) / 3) - mp.log(3) / 3
    assert abs(l_derivative(chi, 0, ctx) - expected) < 1e-27


def test_functional_equation(ctx):
    for chi in (kronecker_character(-3), kronecker_character(5), character_from_conrey(5, 2)):
        assert abs(functional_equation_residual(chi, Fraction(1, 3), ctx)) < 1e-25


def test_closed_form_positive_values(ctx):
    mp = ctx.mp
    assert abs(l_positive_easy(kronecker_character(-4), 1, ctx) - mp.pi / 4) < 1e-28
    assert abs(l_positive_easy(kronecker_character(-3), 1, ctx) - mp.pi / (3 * mp.sqrt(3))) < 1e-28
    with pytest.raises(ParityMismatch):
        l_positive_easy(principal_character(3), 1, ctx)


PRIMITIVE = [
    kronecker_character(-3),
    kronecker_character(-4),
    kronecker_character(5),
    character_from_conrey(5, 2),
    character_from_conrey(7, 3),
    kronecker_character(-8),
    kronecker_character(8),
    kronecker_character(12),
]


def test_trivial_zeros(ctx):
    for chi in PRIMITIVE:
        for k in range(3):
            s = -2 * k - chi.parity_kappa
            if s == 0:
                continue
            assert abs(l_value_at(chi, s, ctx)) < 1e-28, (chi.label, s)


def test_functional_equation_at_random_points(ctx):
    mp = ctx.mp
    rng = random.Random(20)
    for i in range(20):
        chi = PRIMITIVE[i % len(PRIMITIVE)]
        s = mp.mpc(rng.uniform(-1.5, 2.5), rng.uniform(-6, 6))
        scale = max(1, abs(l_value(chi, s, ctx)))
        assert abs(functional_equation_residual(chi, s, ctx)) < 1e-24 * scale, (chi.label, s)


def test_functional_equation_needs_primitive_non_principal(ctx):
    with pytest.raises(ImprimitiveCharacter):
        functional_equation_residual(principal_character(3), 0, ctx)
    with pytest.raises(ImprimitiveCharacter):
        functional_equation_residual(TRIVIAL, Fraction(1, 3), ctx)
    with pytest.raises(ImprimitiveCharacter):
        functional_equation_residual(character_from_conrey(8, 7), Fraction(1, 3), ctx)
