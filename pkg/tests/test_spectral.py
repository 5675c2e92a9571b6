from fractions import Fraction

import pytest
from pydantic import ValidationError

from twistlab.core.chars import TRIVIAL, character_from_conrey, kronecker_character
from twistlab.core.errors import ImprimitiveCharacter, InputError, OutsideUnitDisk, ZeroFactor
from twistlab.core.numerics import to_mp
from twistlab.core.qseries import QPoint
from twistlab.core.spectral import (
    TraceRequest,
    aux_gf,
    log_q_pochhammer,
    log_trace_pmn,
    q_pochhammer,
    reduce_combination,
    s_transform_residual_L1,
    strong_coupling_terms,
    trace_p2,
    trace_pmn_blocks,
    weak_coupling_terms,
)


def test_q_pochhammer_matches_mpmath(ctx):
    mp = ctx.mp
    half = Fraction(1, 2)
    assert abs(q_pochhammer(half, half, ctx) - mp.qp(mp.mpf(1) / 2, mp.mpf(1) / 2)) < 1e-28
    assert log_q_pochhammer(0, half, ctx) == 0


def test_q_pochhammer_edge_cases(ctx):
    with pytest.raises(ZeroFactor):
        log_q_pochhammer(1, Fraction(1, 2), ctx)
    with pytest.raises(OutsideUnitDisk):
        q_pochhammer(Fraction(1, 2), 1, ctx)


def test_s_transformation(ctx):
    z = QPoint.parse("0.3+0.9i", ctx)
    assert abs(s_transform_residual_L1(z, ctx)) < 1e-26


def test_trace_request_validation(ctx):
    z = QPoint.parse("0.5i", ctx)
    with pytest.raises(ValidationError):
        TraceRequest(m=0, n=1, tau=z)
    req = TraceRequest(m=2, n=1, tau=z)
    assert req.big_n == 4
    with pytest.raises(InputError):
        log_trace_pmn(req, "series", ctx)


def test_local_p2_routes_agree(ctx):
    mp = ctx.mp
    z = QPoint.parse("0.7i", ctx)
    product = trace_p2(z, "product", ctx)
    lambert = trace_p2(z, "lambert", ctx)
    assert abs(mp.exp(product) - mp.exp(lambert)) < 1e-25


def test_trace_routes_agree(ctx):
    mp = ctx.mp
    req = TraceRequest(m=2, n=1, tau=QPoint.parse("0.1+0.6i", ctx))
    product = log_trace_pmn(req, "product", ctx)
    lambert = log_trace_pmn(req, "lambert", ctx)
    assert abs(mp.exp(product) - mp.exp(lambert)) < 1e-25


def test_trace_symmetric_in_m_and_n(ctx):
    mp = ctx.mp
    z = QPoint.parse("0.8i", ctx)
    a = log_trace_pmn(TraceRequest(m=2, n=1, tau=z), "product", ctx)
    b = log_trace_pmn(TraceRequest(m=1, n=2, tau=z), "product", ctx)
    assert abs(mp.exp(a) - mp.exp(b)) < 1e-25


@pytest.mark.parametrize(
    "m, n, real_constant, tau_term, inverse_term",
    [
        (2, 1, lambda mp: -mp.log(2) / 2, Fraction(1, 6), Fraction(-1, 48)),
        (1, 1, lambda mp: -mp.log(3) / 4, Fraction(1, 12), Fraction(-1, 36)),
        (3, 1, lambda mp: mp.log((7 - 3 * mp.sqrt(5)) / 10) / 8, Fraction(1, 12), Fraction(-1, 60)),
        (1, 2, lambda mp: mp.zero, Fraction(-1, 12), Fraction(-1, 48)),
    ],
)
def test_reduced_coefficients(ctx, m, n, real_constant, tau_term, inverse_term):
    mp = ctx.mp
    reduced = reduce_combination(TraceRequest(m=m, n=n, tau=QPoint.parse("0.5i", ctx)), ctx)
    i_pi = mp.mpc(0, 1) * mp.pi
    assert abs(reduced.constant - (real_constant(mp) - i_pi / 2)) < 1e-25
    assert abs(reduced.tau_coefficient - i_pi * to_mp(tau_term, mp)) < 1e-25
    assert abs(reduced.inverse_coefficient - i_pi * to_mp(inverse_term, mp)) < 1e-25
    assert abs(reduced.log_coefficient) < 1e-25
    assert reduced.leftover == []


def test_local_p2_reduces_to_one_pair(ctx):
    reduced = reduce_combination(TraceRequest(m=1, n=1, tau=QPoint.parse("0.5i", ctx)), ctx)
    (pair,) = reduced.pairs
    assert pair.chi.label == "3:2"
    assert abs(pair.g_coefficient - ctx.mp.mpf(3) / 2) < 1e-25


def test_quintic_pairs(ctx):
    mp = ctx.mp
    reduced = reduce_combination(TraceRequest(m=3, n=1, tau=QPoint.parse("0.5i", ctx)), ctx)
    by_label = {pair.chi.label: pair for pair in reduced.pairs}
    assert abs(by_label["5:2"].g_coefficient - mp.mpc(2, 1) / 4) < 1e-25
    assert abs(by_label["5:4"].g_coefficient - mp.mpf(1) / 4) < 1e-25


@pytest.mark.parametrize("m, n", [(1, 1), (2, 1), (1, 2), (3, 1)])
def test_trace_blocks_reconcile(ctx, m, n):
    blocks = trace_pmn_blocks(TraceRequest(m=m, n=n, tau=QPoint.parse("0.15+0.7i", ctx)), ctx)
    assert blocks.passed, blocks.residuals
    record = blocks.to_record(10)
    assert record["passed"] is True
    assert (record["m"], record["n"]) == (m, n)


def test_auxiliary_functions(ctx):
    z = QPoint.parse("0.1+0.8i", ctx)
    for chi in (kronecker_character(-3), character_from_conrey(5, 2)):
        assert aux_gf(chi, z, ctx).residual < 1e-25
    with pytest.raises(ImprimitiveCharacter):
        aux_gf(TRIVIAL, z, ctx)
    with pytest.raises(ImprimitiveCharacter):
        aux_gf(character_from_conrey(8, 7), z, ctx)


def test_weak_coupling(ctx):
    mp = ctx.mp
    terms = weak_coupling_terms(ctx).terms
    expected_constant = (
        3 * mp.loggamma(mp.mpf(1) / 3)
        - 2 * mp.log(2 * mp.pi)
        + mp.log(3) / 4
        + mp.mpc(0, 1) * mp.pi / 4
    )
    assert abs(terms["log"] + mp.mpf(1) / 2) < 1e-25
    assert abs(terms["tau2"] - mp.mpf(1) / 72) < 1e-25
    assert abs(terms["constant"] - expected_constant) < 1e-25


def test_strong_coupling(ctx):
    mp = ctx.mp
    terms = strong_coupling_terms(ctx).terms
    third = mp.mpf(1) / 3
    slope = -mp.sqrt(3) * (mp.psi(1, third) - mp.psi(1, 2 * third)) / (4 * mp.pi)
    assert abs(terms["tau"] - slope) < 1e-25
    assert abs(terms["constant"] - mp.mpc(0, 1) * mp.pi / 4) < 1e-25
    assert abs(terms["inverse"] - mp.sqrt(3) * mp.pi / 36) < 1e-25
