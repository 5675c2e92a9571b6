import json
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from twistlab.core.chars import TRIVIAL, character_from_conrey, kronecker_character, principal_character
from twistlab.core.errors import OutsideUnitDisk, ParityViolation, ParseError, SlowConvergence
from twistlab.core.qseries import (
    DivisorSumCache,
    QPoint,
    SeriesParams,
    eisenstein_constant,
    eisenstein_q_coeffs,
    export_expansion,
    lambert,
    lambert_tilde,
    phi,
    phi0_closed,
    principal_divisor_sum,
    qderivative_check,
    sigma_double,
    sigma_single,
    truncation_length,
    xi_coefficients_exact,
    xi_direct,
)


CHI3 = kronecker_character(-3)


def test_qpoint_forms(ctx):
    mp = ctx.mp
    z = QPoint.parse("0.25i", ctx)
    assert abs(z.q - mp.exp(-mp.pi / 2)) < 1e-28
    assert z.is_imaginary_axis
    w = QPoint.parse("q=1/2", ctx)
    assert w.q == mp.mpf(1) / 2
    assert abs(QPoint.from_y(Fraction(1, 4), ctx).q - z.q) < 1e-28
    dual = z.fricke(4, ctx)
    assert abs(dual.tau - mp.mpc(0, 1)) < 1e-28


def test_qpoint_rejects_bad_input(ctx):
    with pytest.raises(ParseError):
        QPoint.parse("0.3", ctx)
    with pytest.raises(OutsideUnitDisk):
        QPoint.from_q(Fraction(3, 2), ctx)
    with pytest.raises(OutsideUnitDisk):
        QPoint.from_tau((Fraction(1), Fraction(-1)), ctx)


def test_truncation_refuses_slow_series(ctx):
    assert truncation_length(Fraction(1, 2), 1.0, ctx) > 100
    with pytest.raises(SlowConvergence):
        truncation_length(Fraction(9999, 10000), 1.0, ctx)


def test_divisor_sums():
    assert sigma_double(1, TRIVIAL, TRIVIAL, 6) == 12
    assert sigma_single("alt", 0, CHI3, 4) == 1
    assert sigma_single("twisted", 1, CHI3, 2) == 1
    assert principal_divisor_sum(1, 2, 6) == 12 - 4
    with pytest.raises(ValueError):
        sigma_single("other", 0, CHI3, 4)


def test_phi_closed_form(ctx):
    assert phi0_closed(CHI3, Fraction(1, 2)) == Fraction(2, 7)
    value = phi(0, CHI3, QPoint.parse("q=1/2", ctx), ctx)
    assert abs(value - ctx.mp.mpf(2) / 7) < 1e-28


def test_lambert_routes_agree(ctx):
    z = QPoint.parse("0.2+0.7i", ctx)
    p = SeriesParams(s1=1, s2=0, chi1=TRIVIAL, chi2=TRIVIAL)
    plain = lambert(1, TRIVIAL, TRIVIAL, z, ctx)
    assert abs(plain - lambert_tilde(1, TRIVIAL, z, ctx)) < 1e-27
    assert abs(plain - xi_direct(p, z, ctx)) < 1e-27


def test_lambert_tilde_is_swapped_xi(ctx):
    z = QPoint.parse("y=0.4", ctx)
    p = SeriesParams(s1=0, s2=2, chi1=CHI3, chi2=TRIVIAL)
    assert abs(lambert_tilde(2, CHI3, z, ctx) - xi_direct(p, z, ctx)) < 1e-27


def test_series_params_parity():
    assert SeriesParams(s1=1, s2=0).is_terminating
    assert not SeriesParams(s1=2, s2=0).is_terminating
    assert SeriesParams(s1=0, s2=0, chi1=CHI3).is_terminating
    assert SeriesParams(s1="1/2", s2=0).integer_pair is None
    assert SeriesParams(s1=1, s2=0).swapped().s2 == 1


def test_eisenstein_weight_one(ctx):
    expansion = eisenstein_q_coeffs(1, TRIVIAL, CHI3, 6)
    assert expansion.constant == Fraction(1, 6)
    assert expansion.coefficients == [1, 0, 1, 1, 0, 0]
    assert expansion.exact


def test_eisenstein_constants():
    assert eisenstein_constant(3, CHI3, TRIVIAL) == 0
    assert eisenstein_constant(1, CHI3, TRIVIAL) == Fraction(1, 6)
    assert eisenstein_constant(2, TRIVIAL, TRIVIAL) == Fraction(-1, 24)


def test_qderivative_equation():
    report = qderivative_check(SeriesParams(s1=1, s2=0), 40)
    assert report.passed
    assert report.m == 2
    report = qderivative_check(SeriesParams(s1=2, s2=0, chi1=CHI3, chi2=TRIVIAL), 40)
    assert report.passed and report.m == 3
    with pytest.raises(ParityViolation):
        qderivative_check(SeriesParams(s1=2, s2=0), 10)


def test_exact_xi_coefficients():
    coeffs = xi_coefficients_exact(SeriesParams(s1=1, s2=0), 4)
    assert coeffs == [0, 1, Fraction(3, 2), Fraction(4, 3), Fraction(7, 4)]


def test_divisor_cache_round_trip(tmp_path):
    cache = DivisorSumCache(tmp_path)
    key = DivisorSumCache.key(3, CHI3, TRIVIAL)
    cache.put(key, [1, 3, 9, Fraction(1, 2)])
    reloaded = DivisorSumCache(tmp_path)
    assert reloaded.get(key, 3) == [1, 3, 9]
    assert reloaded.get(key, 10) is None


def test_export_expansion():
    assert export_expansion([Fraction(1, 6), 1, 0]) == "0 1/6\n1 1\n2 0"
    assert export_expansion([1], fmt="json") == '[{"n":0,"coefficient":"1"}]'


def test_principal_divisor_sum_is_moebius_form():
    chi6 = principal_character(6)
    for n in range(1, 10001):
        assert principal_divisor_sum(1, 6, n) == sigma_double(1, chi6, TRIVIAL, n), n


def test_divisor_sum_reflection():
    chi5 = kronecker_character(5)
    for n in range(1, 2001):
        for s in (1, 2, -1):
            left = sigma_double(s, CHI3, chi5, n)
            assert left == Fraction(n) ** s * sigma_double(-s, chi5, CHI3, n), (n, s)


def test_xi_coefficients_are_divisor_sums():
    chi8 = kronecker_character(8)
    coeffs = xi_coefficients_exact(SeriesParams(s1=0, s2=-2, chi1=CHI3, chi2=chi8), 2000)
    for n in range(1, 2001):
        assert coeffs[n] == sigma_double(2, CHI3, chi8, n), n


def test_complex_divisor_sums_follow_the_reflection(ctx):
    chi5 = character_from_conrey(5, 2)
    for n in range(1, 200):
        left = sigma_double(2, chi5, CHI3, n, ctx)
        right = n**2 * sigma_double(-2, CHI3, chi5, n, ctx)
        assert abs(left - right) < 1e-20 * max(1, abs(left))


def test_divisor_cache_concurrent_puts(tmp_path):
    cache = DivisorSumCache(tmp_path)
    keys = [DivisorSumCache.key(m, CHI3, TRIVIAL) for m in range(1, 41)]

    def store(index):
        cache.put(keys[index], list(range(index + 1, index + 30)))

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(store, range(len(keys))))
    stored = json.loads((tmp_path / DivisorSumCache.FILE_NAME).read_text())
    assert len(stored["entries"]) == len(keys)
    reloaded = DivisorSumCache(tmp_path)
    for index, key in enumerate(keys):
        assert reloaded.get(key, 29) == list(range(index + 1, index + 30))
    assert not list(tmp_path.glob("*.tmp"))
