import warnings

import pytest

from twistlab.core.chars import (
    TRIVIAL,
    character_from_conrey,
    characters_mod,
    conductor_and_primitivize,
    epsilon,
    gauss_data,
    gauss_sum,
    is_fundamental_discriminant,
    kronecker_character,
    kronecker_symbol,
    moebius,
    parse_character,
)
from twistlab.core.errors import (
    ImprimitiveEpsilon,
    NotCoprime,
    NotFundamentalDiscriminant,
    ParseError,
)


def test_moebius_values():
    assert [moebius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_characters_mod_count():
    assert len(characters_mod(5)) == 4
    assert len(characters_mod(12)) == 4
    assert sum(1 for chi in characters_mod(12) if chi.is_primitive) == 1


def test_real_character_labels():
    assert kronecker_character(-3).label == "3:2"
    assert kronecker_character(-4).label == "4:3"
    assert kronecker_character(5).label == "5:4"
    assert kronecker_character(-8).label == "8:3"
    assert kronecker_character(8).label == "8:5"
    assert kronecker_character(12).label == "12:11"
    assert kronecker_character(1) is TRIVIAL


def test_character_values_and_parity():
    chi = character_from_conrey(8, 3)
    assert [chi.real_value(a) for a in (1, 3, 5, 7)] == [1, 1, -1, -1]
    assert chi.parity_kappa == 1
    assert chi.conductor == 8
    even = character_from_conrey(8, 5)
    assert even.parity_kappa == 0


def test_complex_character_order(ctx):
    chi = character_from_conrey(5, 2)
    assert chi.order == 4
    assert not chi.is_real
    assert abs(chi.mp_value(2, ctx.mp) - 1j) < 1e-28
    assert chi.conj().label == "5:3"


def test_imprimitive_character():
    chi = character_from_conrey(8, 7)
    assert chi.conductor == 4
    d, primitive = conductor_and_primitivize(chi)
    assert d == 4
    assert primitive.label == "4:3"


def test_kronecker_symbol():
    assert kronecker_symbol(-3, 2) == -1
    assert kronecker_symbol(5, 2) == -1
    assert kronecker_symbol(8, 7) == 1
    assert kronecker_symbol(-4, 3) == -1


def test_fundamental_discriminants():
    assert is_fundamental_discriminant(-3)
    assert is_fundamental_discriminant(12)
    assert not is_fundamental_discriminant(-12)
    with pytest.raises(NotFundamentalDiscriminant):
        kronecker_character(9)


def test_parse_character():
    assert parse_character("3:2").label == "3:2"
    assert parse_character("D=-4").label == "4:3"
    with pytest.raises(ParseError):
        parse_character("chi")
    with pytest.raises(NotCoprime):
        parse_character("6:2")


def test_gauss_sum_and_epsilon(ctx):
    mp = ctx.mp
    chi = kronecker_character(-3)
    assert abs(gauss_sum(chi, ctx) - mp.mpc(0, mp.sqrt(3))) < 1e-28
    assert abs(epsilon(chi, ctx) - 1) < 1e-28
    chi5 = character_from_conrey(5, 2)
    assert abs(abs(epsilon(chi5, ctx)) - 1) < 1e-28


def test_epsilon_needs_primitive(ctx):
    with pytest.raises(ImprimitiveEpsilon):
        gauss_data(character_from_conrey(8, 7), ctx)


def test_characters_are_completely_multiplicative():
    for r in range(1, 61):
        for chi in characters_mod(r):
            for a in range(r):
                for b in range(a, r):
                    left, right = chi.angle(a), chi.angle(b)
                    product = chi.angle(a * b)
                    if left is None or right is None:
                        assert product is None
                    else:
                        assert product == (left + right) % 1


def test_gauss_sums_of_primitive_characters(ctx20):
    mp = ctx20.mp
    for r in range(3, 61):
        for chi in characters_mod(r):
            if chi.is_primitive:
                assert abs(abs(gauss_sum(chi, ctx20)) - mp.sqrt(r)) < 1e-15, chi.label


def test_kronecker_symbol_uses_no_deprecated_sympy_path():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert [kronecker_symbol(-3, n) for n in (1, 5, 7, 11, 15)] == [1, -1, 1, -1, 0]
