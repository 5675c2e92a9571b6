from __future__ import annotations

import logging
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict

from .asym import BorelInput, borel_input_coeffs, linear_combination, pert_expansion
from .chars import TRIVIAL, Character, conductor_and_primitivize, divisors, epsilon, moebius
from .errors import (
    GammaPole,
    ImprimitiveCharacter,
    NonConvergent,
    ParityViolation,
    SlowConvergence,
    StokesRayHit,
)
from .numerics import (
    PrecisionContext,
    Side,
    as_exact_int,
    cospi,
    format_value,
    hyp2f1,
    hyp2f1_regularized,
    ray_integral,
    sinpi,
    to_mp,
)
from .qseries import QPoint, SeriesParams, lambert, lambert_tilde, xi_direct


logger = logging.getLogger(__name__)

ENVELOPE_FACTOR = Fraction(13, 10)


class LateralSide(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    MEDIAN = "median"


# Borel plane

def _sines(s1: Any, s2: Any, kappa1: int, kappa2: int, ctx: PrecisionContext) -> Tuple[Any, Any]:
    half = Fraction(1, 2)
    a = linear_combination(ctx, half * (kappa1 + kappa2 - 1), (half, s1), (half, s2))
    b = linear_combination(ctx, half * (kappa1 - kappa2 - 1), (half, s1), (-half, s2))
    return sinpi(a, ctx), sinpi(b, ctx)


def _opposite(side: Side | None) -> Side | None:
    if side is None:
        return None
    return Side.BELOW if Side(side) is Side.ABOVE else Side.ABOVE


def borel_transform(
    s1: Any,
    s2: Any,
    kappa1: int,
    kappa2: int,
    t: Any,
    ctx: PrecisionContext,
    side: Side | None = None,
) -> Any:
    """Gamma(1-s1) Gamma(1-s2) [sin_a 2F1(1-s1, 1-s2; 1; t) - sin_b 2F1(1-s1, 1-s2; 1; -t)]."""
    for s in (s1, s2):
        n = as_exact_int(s)
        if n is not None and n >= 1:
            raise GammaPole(f"Gamma(1 - {n}) is singular")
    mp = ctx.mp
    sin_a, sin_b = _sines(s1, s2, kappa1, kappa2, ctx)
    a, b = 1 - to_mp(s1, mp), 1 - to_mp(s2, mp)
    t = to_mp(t, mp)
    value = mp.zero
    if sin_a != 0:
        value += sin_a * hyp2f1(a, b, 1, t, ctx, side)
    if sin_b != 0:
        value -= sin_b * hyp2f1(a, b, 1, -t, ctx, _opposite(side))
    return mp.gamma(a) * mp.gamma(b) * value


def shifted_borel(binput: BorelInput, order: int, t: Any, ctx: PrecisionContext) -> Any:
    """Borel transform of sum_{k >= order} f_k z^{-(k - order) - 1}."""
    mp = ctx.mp
    s1, s2 = to_mp(binput.params.s1, mp), to_mp(binput.params.s2, mp)
    a, b, c = order + 1 - s1, order + 1 - s2, order + 1
    sin_a, sin_b = to_mp(binput.sin_a, mp), to_mp(binput.sin_b, mp)
    value = mp.zero
    if sin_a != 0:
        value += sin_a * mp.hyp2f1(a, b, c, t)
    if sin_b != 0:
        value -= (-1) ** order * sin_b * mp.hyp2f1(a, b, c, -t)
    return mp.gamma(a) * mp.gamma(b) / mp.factorial(order) * value


def borel_order(p: SeriesParams, ctx: PrecisionContext) -> int:
    """First index K with every Gamma(k+1-s_i), k >= K, regular and Re(k+1-s_i) >= 2."""
    mp = ctx.mp
    top = max(0, int(mp.ceil(mp.re(to_mp(p.s1, mp)))), int(mp.ceil(mp.re(to_mp(p.s2, mp)))))
    return top + 1


def envelope(ctx: PrecisionContext) -> Any:
    """Z0 with exp(-Z0) well below the precision floor."""
    mp = ctx.mp
    return to_mp(ENVELOPE_FACTOR, mp) * (ctx.target_digits + ctx.guard_digits) * mp.log(10)


def ray_angle(y: Any, side: LateralSide, ctx: PrecisionContext) -> Any:
    """Ray angle strictly between the Stokes line and the edge of convergence."""
    mp = ctx.mp
    phi = mp.arg(to_mp(y, mp))
    if LateralSide(side) is LateralSide.PLUS:
        return (phi + mp.pi / 2) / 4
    return (phi - mp.pi / 2) / 4


def _check_primitive(p: SeriesParams) -> None:
    if not (p.chi1.is_primitive and p.chi2.is_primitive):
        raise ImprimitiveCharacter(
            f"{p.describe()} has an imprimitive character; use transseries_imprimitive"
        )


def _tail_sum(chi: Character, x: Any, start: int, ctx: PrecisionContext) -> Any:
    """sum_{n > start} chi(n) n^-x through Hurwitz zeta values."""
    mp = ctx.mp
    r = chi.modulus
    total = mp.zero
    for c in range(1, r + 1):
        n = start + c
        if chi.angle(n) is not None:
            total += chi.mp_value(n, mp) * mp.zeta(x, mp.mpf(n) / r)
    return mp.power(r, -x) * total


def _tail_double_sum(
    dual1: Character, dual2: Character, a: Any, b: Any, cutoff: int, ctx: PrecisionContext
) -> Any:
    """sum over n1 n2 > cutoff of dual1(n1) n1^-a dual2(n2) n2^-b."""
    mp = ctx.mp
    by_floor: Dict[int, Any] = {}
    total = mp.zero
    for n1 in range(1, cutoff + 1):
        if dual1.angle(n1) is None:
            continue
        floor = cutoff // n1
        inner = by_floor.get(floor)
        if inner is None:
            inner = by_floor[floor] = _tail_sum(dual2, b, floor, ctx)
        total += dual1.mp_value(n1, mp) * mp.power(n1, -a) * inner
    total += _tail_sum(dual1, a, cutoff, ctx) * _tail_sum(dual2, b, 0, ctx)
    return total


class _LateralPlan(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    binput: BorelInput
    order: int
    scale: Any
    cutoff: int
    weights: List[Any]


def _plan(p: SeriesParams, y: Any, ctx: PrecisionContext, order: int) -> _LateralPlan:
    mp = ctx.mp
    binput = borel_input_coeffs(p, ctx)
    scale = binput.z_scale(y, ctx)
    rate = mp.re(scale)
    if rate <= 0:
        raise NonConvergent("Re(1/y) must be positive")
    cutoff = max(1, int(mp.ceil(envelope(ctx) / rate)))
    weights = [binput.weight(n, ctx) for n in range(1, cutoff + 1)]
    return _LateralPlan(binput=binput, order=order, scale=scale, cutoff=cutoff, weights=weights)


def _resummed_remainder(plan: _LateralPlan, theta: Any, ctx: PrecisionContext) -> Any:
    """sum_{N <= cutoff} W(N) z_N^{s-K} int_ray e^{-t z_N} B_K(t) dt as one quadrature."""
    mp = ctx.mp
    p = plan.binput.params
    s = to_mp(p.s1, mp) + to_mp(p.s2, mp)
    exponent = s - plan.order
    rate = mp.re(plan.scale * mp.expj(theta))
    if rate <= 0:
        raise NonConvergent("the ray leaves the half-plane of convergence")
    weights = [
        (w * mp.power(n * plan.scale, exponent), n * plan.scale)
        for n, w in enumerate(plan.weights, start=1)
        if w != 0
    ]

    def integrand(t: Any) -> Any:
        kernel = mp.zero
        for w, z in weights:
            kernel += w * mp.exp(-t * z)
        return shifted_borel(plan.binput, plan.order, t, ctx) * kernel

    return ray_integral(integrand, theta, ctx, scale=1 / rate)


def _asymptotic_tail(plan: _LateralPlan, ctx: PrecisionContext) -> Any:
    """The remainder for N > cutoff, summed term by term from its asymptotic series."""
    mp = ctx.mp
    p = plan.binput.params
    dual1, dual2 = p.chi1.conj(), p.chi2.conj()
    s1, s2 = to_mp(p.s1, mp), to_mp(p.s2, mp)
    s = s1 + s2
    limit = plan.order + 2 * int(envelope(ctx)) + 10
    total = mp.zero
    quiet = 0
    # the sine bracket differs between even and odd k
    smallest: List[Any] = [None, None]
    for k in range(plan.order, limit):
        f = plan.binput.f_coefficient(k, ctx)
        if f == 0:
            continue
        tail = _tail_double_sum(dual1, dual2, k + 1 - s1, k + 1 - s2, plan.cutoff, ctx)
        term = f * mp.power(plan.scale, s - k - 1) * tail
        size = abs(term)
        previous = smallest[k % 2]
        if previous is not None and size > previous and size > ctx.eps:
            logger.warning("Asymptotic tail turned around at k=%d before reaching the floor", k)
            return total
        smallest[k % 2] = size
        total += term
        if size <= ctx.eps * max(abs(total), 1):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
    raise NonConvergent(f"asymptotic tail did not settle within {limit - plan.order} terms")


def lateral_pert_sum(
    p: SeriesParams,
    z: QPoint,
    side: LateralSide | str,
    ctx: PrecisionContext,
    theta: Any = None,
    check_rotation: bool = True,
) -> Any:
    """S_+/S_-/S_0 of the perturbative series at the point z.

    The first K terms are summed as they stand; the rest is Borel-Laplace
    resummed along a ray off the Stokes line t > 0.
    """
    side = LateralSide(side)
    _check_primitive(p)
    mp = ctx.mp
    if side is LateralSide.MEDIAN:
        plus = lateral_pert_sum(p, z, LateralSide.PLUS, ctx, None, check_rotation)
        minus = lateral_pert_sum(p, z, LateralSide.MINUS, ctx, None, check_rotation)
        return (plus + minus) / 2
    y = to_mp(z.y, mp)
    order = borel_order(p, ctx)
    head = pert_expansion(p, ctx, order=order).evaluate(y, ctx, order=order)
    if p.is_terminating:
        return head
    if theta is None:
        theta = ray_angle(y, side, ctx)
    theta = to_mp(theta, mp)
    if theta == 0:
        raise StokesRayHit("the ray arg t = 0 runs through the Borel singularity at t = 1")
    if (theta > 0) != (side is LateralSide.PLUS):
        raise StokesRayHit(f"ray angle {mp.nstr(theta, 5)} lies on the wrong side")
    plan = _plan(p, y, ctx, order)
    resummed = _resummed_remainder(plan, theta, ctx)
    if check_rotation:
        rotated = _resummed_remainder(plan, theta / 2, ctx)
        delta = abs(rotated - resummed)
        if delta > mp.sqrt(ctx.tolerance) * max(1, abs(resummed)):
            raise NonConvergent(f"ray rotation changed the Laplace integral by {mp.nstr(delta, 5)}")
        if delta > ctx.tolerance * max(1, abs(resummed)):
            logger.warning("Ray rotation delta %s above tolerance", mp.nstr(delta, 5))
    tail = _asymptotic_tail(plan, ctx)
    s = to_mp(p.s1, mp) + to_mp(p.s2, mp)
    pref = to_mp(plan.binput.prefactor, mp) * mp.power(y, s - 1) / mp.pi
    logger.debug("lateral %s %s: K=%d cutoff=%d", side.value, p.describe(), order, plan.cutoff)
    return head + pref * (resummed + tail)


def laplace_borel(
    p: SeriesParams, zarg: Any, side: LateralSide | str, ctx: PrecisionContext
) -> Any:
    """z^{s1+s2} times the lateral Laplace integral of the full Borel transform at one argument."""
    side = LateralSide(side)
    if side is LateralSide.MEDIAN:
        return (laplace_borel(p, zarg, "plus", ctx) + laplace_borel(p, zarg, "minus", ctx)) / 2
    mp = ctx.mp
    zarg = to_mp(zarg, mp)
    theta = ray_angle(1 / zarg, side, ctx)
    rate = mp.re(zarg * mp.expj(theta))
    k1, k2 = p.chi1.parity_kappa, p.chi2.parity_kappa
    s = to_mp(p.s1, mp) + to_mp(p.s2, mp)
    value = ray_integral(
        lambda t: mp.exp(-t * zarg) * borel_transform(p.s1, p.s2, k1, k2, t, ctx),
        theta,
        ctx,
        scale=1 / rate,
    )
    return mp.power(zarg, s) * value


# Non-perturbative sector

def _np_weighted_integral(
    p: SeriesParams, nodes: List[Tuple[Any, Any]], ctx: PrecisionContext
) -> Any:
    """sum_j w_j z_j^s e^{-z_j} int_0^inf e^{-t z_j} t^{s-1} 2F1~(s1, s2; s; -t) dt.

    For Re s <= 0 the first Taylor terms of 2F1~ are subtracted under the
    integral and restored through Gamma(s+j) z^{-s-j}.
    """
    mp = ctx.mp
    s1, s2 = to_mp(p.s1, mp), to_mp(p.s2, mp)
    s = s1 + s2
    s_exact = linear_combination(ctx, 0, (1, p.s1), (1, p.s2))
    subtract = 0 if mp.re(s) > 0 else int(mp.ceil(-mp.re(s))) + 1
    taylor = [
        mp.rf(s1, j) * mp.rf(s2, j) / mp.factorial(j) * mp.rgamma(s + j) * (-1) ** j
        for j in range(subtract)
    ]
    restored = [mp.rf(s1, j) * mp.rf(s2, j) * (-1) ** j / mp.factorial(j) for j in range(subtract)]
    scaled = []
    analytic = mp.zero
    slowest = None
    for w, z in nodes:
        if w == 0:
            continue
        if mp.re(z) <= 0:
            raise NonConvergent("Re z must be positive")
        c = w * mp.power(z, s) * mp.exp(-z)
        scaled.append((c, z))
        for j in range(subtract):
            analytic += c * restored[j] * mp.power(z, -s - j)
        slowest = mp.re(z) if slowest is None else min(slowest, mp.re(z))
    if not scaled:
        return mp.zero

    def integrand(t: Any) -> Any:
        f = hyp2f1_regularized(p.s1, p.s2, s_exact, -t, ctx)
        for j in range(subtract):
            f -= taylor[j] * t**j
        kernel = mp.zero
        for c, z in scaled:
            kernel += c * mp.exp(-t * z)
        return mp.power(t, s - 1) * f * kernel

    value = ray_integral(integrand, 0, ctx, scale=1 / slowest, endpoint_power=s - 1 + subtract)
    return value + analytic


def stokes_discontinuity(p: SeriesParams, zarg: Any, ctx: PrecisionContext) -> Any:
    """S_+ F(z) - S_- F(z) for the single-argument function F."""
    mp = ctx.mp
    zarg = to_mp(zarg, mp)
    if mp.re(zarg) <= 0:
        raise NonConvergent("Re z must be positive")
    sin_a, _ = _sines(p.s1, p.s2, p.chi1.parity_kappa, p.chi2.parity_kappa, ctx)
    if sin_a == 0:
        return mp.zero
    return 2j * mp.pi * sin_a * _np_weighted_integral(p, [(mp.one, zarg)], ctx)


def sigma_pm(p: SeriesParams, side: LateralSide | str, ctx: PrecisionContext) -> Any:
    """exp(-+ i pi (s1+s2+k1+k2-1)/2); the median value is the cosine."""
    side = LateralSide(side)
    half = Fraction(1, 2)
    a = linear_combination(
        ctx, half * (p.kappa_sum - 1), (half, p.s1), (half, p.s2)
    )
    cos_a = cospi(a, ctx)
    if side is LateralSide.MEDIAN:
        return cos_a
    sin_a = sinpi(a, ctx)
    return cos_a - 1j * sin_a if side is LateralSide.PLUS else cos_a + 1j * sin_a


def np_exact(p: SeriesParams, z: QPoint, ctx: PrecisionContext) -> Any:
    """Resummed non-perturbative sector Xi^NP at z, exact at any Re y > 0."""
    _check_primitive(p)
    mp = ctx.mp
    y = to_mp(z.y, mp)
    plan = _plan(p, y, ctx, borel_order(p, ctx))
    nodes = [(w, n * plan.scale) for n, w in enumerate(plan.weights, start=1)]
    s = to_mp(p.s1, mp) + to_mp(p.s2, mp)
    pref = to_mp(plan.binput.prefactor, mp) * mp.power(y, s - 1)
    return pref * _np_weighted_integral(p, nodes, ctx)


class FormalNPSeries(BaseModel):
    """Partial sums of the formal dual-point expansion of Xi^NP."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    terms: List[Any]
    partial_sums: List[Any]
    optimal_index: int

    @property
    def value(self) -> Any:
        return self.partial_sums[self.optimal_index]


def np_formal_series(
    p: SeriesParams, z: QPoint, ctx: PrecisionContext, max_terms: int = 30
) -> FormalNPSeries:
    """pref y^{s-1} sum_n (s1)_n (s2)_n (-1)^n / n! (r1 r2 y / 2 pi)^n Xi_{s1+n,s2+n}(conj chi2, conj chi1; dual)."""
    _check_primitive(p)
    mp = ctx.mp
    binput = borel_input_coeffs(p, ctx)
    y = to_mp(z.y, mp)
    s1, s2 = to_mp(p.s1, mp), to_mp(p.s2, mp)
    dual = QPoint.from_y(1 / (binput.level * y), ctx)
    pref = to_mp(binput.prefactor, mp) * mp.power(y, s1 + s2 - 1)
    step = binput.level * y / (2 * mp.pi)
    terms: List[Any] = []
    partial: List[Any] = []
    total = mp.zero
    best = None
    best_index = 0
    for n in range(max_terms):
        weight = mp.rf(s1, n) * mp.rf(s2, n) * (-1) ** n / mp.factorial(n)
        if weight == 0:
            break
        shifted = SeriesParams(
            s1=linear_combination(ctx, n, (1, p.s1)),
            s2=linear_combination(ctx, n, (1, p.s2)),
            chi1=p.chi2.conj(),
            chi2=p.chi1.conj(),
        )
        term = pref * weight * step**n * xi_direct(shifted, dual, ctx)
        if best is not None and abs(term) > best and n > 1:
            break
        total += term
        terms.append(term)
        partial.append(total)
        if best is None or abs(term) <= best:
            best, best_index = abs(term), len(partial) - 1
    return FormalNPSeries(terms=terms, partial_sums=partial, optimal_index=best_index)


# Transseries

class TransseriesReport(BaseModel):
    """pert_resummed + sigma * np_exact against the direct q-series."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: SeriesParams
    point: QPoint
    lateral_side: LateralSide
    pert_resummed: Any
    sigma: Any
    np_exact: Any
    recombined: Any
    direct: Any | None = None
    residual: Any | None = None
    best_fit_sigma: Any | None = None
    phase_deviation: Any | None = None
    tolerance: Any

    @property
    def passed(self) -> bool:
        if self.residual is None:
            return False
        scale = max(1, abs(self.direct))
        return bool(abs(self.residual) <= self.tolerance * scale)

    def to_record(self, digits: int = 30) -> Dict[str, Any]:
        p = self.params
        record: Dict[str, Any] = {
            "s1": str(p.s1),
            "s2": str(p.s2),
            "chi1": p.chi1.label,
            "chi2": p.chi2.label,
            "y": format_value(self.point.y, digits),
            "side": self.lateral_side.value,
        }
        for name in (
            "pert_resummed",
            "sigma",
            "np_exact",
            "recombined",
            "direct",
            "residual",
            "best_fit_sigma",
            "phase_deviation",
        ):
            value = getattr(self, name)
            record[name] = None if value is None else format_value(value, digits)
        record["passed"] = self.passed
        return record


def _assemble(
    p: SeriesParams,
    z: QPoint,
    side: LateralSide,
    pert: Any,
    np_value: Any,
    ctx: PrecisionContext,
) -> TransseriesReport:
    mp = ctx.mp
    sigma = sigma_pm(p, side, ctx)
    recombined = pert + to_mp(sigma, mp) * np_value
    try:
        direct = xi_direct(p, z, ctx)
    except SlowConvergence:
        logger.info("No direct q-series reference at y=%s", mp.nstr(to_mp(z.y, mp), 8))
        direct = None
    residual = best_fit = deviation = None
    if direct is not None:
        residual = recombined - direct
        if np_value != 0:
            best_fit = (direct - pert) / np_value
            if sigma != 0 and best_fit != 0:
                deviation = mp.arg(best_fit / to_mp(sigma, mp))
    return TransseriesReport(
        params=p,
        point=z,
        lateral_side=side,
        pert_resummed=pert,
        sigma=sigma,
        np_exact=np_value,
        recombined=recombined,
        direct=direct,
        residual=residual,
        best_fit_sigma=best_fit,
        phase_deviation=deviation,
        tolerance=ctx.tolerance,
    )


def transseries_eval(
    p: SeriesParams,
    z: QPoint,
    side: LateralSide | str,
    ctx: PrecisionContext,
    check_rotation: bool = True,
) -> TransseriesReport:
    """Xi = S_side(pert) + sigma_side Xi^NP, checked against the q-series."""
    side = LateralSide(side)
    if not (p.chi1.is_primitive and p.chi2.is_primitive):
        return transseries_imprimitive(p, z, side, ctx, check_rotation)
    pert = lateral_pert_sum(p, z, side, ctx, check_rotation=check_rotation)
    np_value = np_exact(p, z, ctx)
    report = _assemble(p, z, side, pert, np_value, ctx)
    logger.info(
        "transseries %s side=%s residual=%s",
        p.describe(),
        side.value,
        "n/a" if report.residual is None else ctx.mp.nstr(abs(report.residual), 5),
    )
    return report


def imprimitive_components(
    p: SeriesParams, ctx: PrecisionContext
) -> List[Tuple[Any, int, SeriesParams]]:
    """(weight, d1 d2, primitive params) of the double Moebius decomposition."""
    mp = ctx.mp
    _, prim1 = conductor_and_primitivize(p.chi1)
    _, prim2 = conductor_and_primitivize(p.chi2)
    component = SeriesParams(s1=p.s1, s2=p.s2, chi1=prim1, chi2=prim2)
    s1, s2 = to_mp(p.s1, mp), to_mp(p.s2, mp)
    out = []
    for d1 in divisors(p.chi1.modulus):
        mu1 = moebius(d1)
        if not mu1 or prim1.angle(d1) is None:
            continue
        w1 = mu1 * prim1.mp_value(d1, mp) * mp.power(d1, -s1)
        for d2 in divisors(p.chi2.modulus):
            mu2 = moebius(d2)
            if not mu2 or prim2.angle(d2) is None:
                continue
            w2 = mu2 * prim2.mp_value(d2, mp) * mp.power(d2, -s2)
            out.append((w1 * w2, d1 * d2, component))
    return out


def transseries_imprimitive(
    p: SeriesParams,
    z: QPoint,
    side: LateralSide | str,
    ctx: PrecisionContext,
    check_rotation: bool = True,
) -> TransseriesReport:
    """Transseries of an imprimitive pair through its primitive inducers at y d1 d2."""
    side = LateralSide(side)
    mp = ctx.mp
    pert = mp.zero
    np_value = mp.zero
    for weight, d, component in imprimitive_components(p, ctx):
        point = z.scaled(d, ctx)
        pert += weight * lateral_pert_sum(component, point, side, ctx, check_rotation=check_rotation)
        np_value += weight * np_exact(component, point, ctx)
    return _assemble(p, z, side, pert, np_value, ctx)


# Fricke-type vector identities

class VectorReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lhs: Tuple[Any, Any]
    rhs: Tuple[Any, Any]
    tolerance: Any

    @property
    def residual(self) -> Tuple[Any, Any]:
        return (self.lhs[0] - self.rhs[0], self.lhs[1] - self.rhs[1])

    @property
    def max_residual(self) -> Any:
        return max(abs(r) for r in self.residual)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance * max(1, *(abs(v) for v in self.lhs)))


def _fricke_phase(tau: Any, s: Any, kappa: int, side: LateralSide, mp: Any) -> Any:
    if side is LateralSide.MINUS:
        return mp.power(tau, s - 1) * (1j) ** kappa
    if side is LateralSide.PLUS:
        return mp.power(-tau, s - 1) * (-1j) ** kappa
    return (_fricke_phase(tau, s, kappa, LateralSide.PLUS, mp)
            + _fricke_phase(tau, s, kappa, LateralSide.MINUS, mp)) / 2


def quantum_fricke_vector(
    s: Any,
    chi: Character,
    z: QPoint,
    side: LateralSide | str,
    ctx: PrecisionContext,
    check_rotation: bool = True,
) -> VectorReport:
    """(L_s, L~_s)(chi; tau) against the lateral pert vector plus the Fricke-dual vector."""
    side = LateralSide(side)
    if not chi.is_primitive or chi.is_trivial:
        raise ImprimitiveCharacter("the quantum Fricke relation needs a non-trivial primitive chi")
    mp = ctx.mp
    r = chi.modulus
    s_mp = to_mp(s, mp)
    lhs = (lambert(s, chi, TRIVIAL, z, ctx), lambert_tilde(s, chi, z, ctx))
    plain = SeriesParams(s1=s, s2=0, chi1=chi, chi2=TRIVIAL)
    tilde = SeriesParams(s1=0, s2=s, chi1=chi, chi2=TRIVIAL)
    pert = (
        lateral_pert_sum(plain, z, side, ctx, check_rotation=check_rotation),
        lateral_pert_sum(tilde, z, side, ctx, check_rotation=check_rotation),
    )
    dual_point = z.fricke(r, ctx)
    dual = chi.conj()
    dual_vec = (lambert(s, dual, TRIVIAL, dual_point, ctx), lambert_tilde(s, dual, dual_point, ctx))
    pref = epsilon(chi, ctx) / mp.sqrt(r) * _fricke_phase(
        to_mp(z.tau, mp), s_mp, chi.parity_kappa, side, mp
    )
    rhs = (
        pert[0] + pref * dual_vec[1],
        pert[1] + pref * mp.power(r, s_mp) * dual_vec[0],
    )
    return VectorReport(lhs=lhs, rhs=rhs, tolerance=ctx.tolerance)


def upper_triangular_check(
    chi1: Character, chi2: Character, z: QPoint, ctx: PrecisionContext
) -> VectorReport:
    """(Xi_{1,-1}, Xi_{2,0}) under Fricke inversion, an upper-triangular map of the dual vector."""
    if chi1.parity_kappa + chi2.parity_kappa != 1:
        raise ParityViolation("the weight-3 closure needs kappa1 + kappa2 = 1")
    if not (chi1.is_primitive and chi2.is_primitive):
        raise ImprimitiveCharacter("the weight-3 closure needs primitive characters")
    mp = ctx.mp
    r1, r2 = chi1.modulus, chi2.modulus
    level = r1 * r2
    first = SeriesParams(s1=1, s2=-1, chi1=chi1, chi2=chi2)
    second = SeriesParams(s1=2, s2=0, chi1=chi1, chi2=chi2)
    y = to_mp(z.y, mp)
    tau = to_mp(z.tau, mp)
    lhs = (xi_direct(first, z, ctx), xi_direct(second, z, ctx))
    pert = (
        pert_expansion(first, ctx).evaluate(y, ctx),
        pert_expansion(second, ctx).evaluate(y, ctx),
    )
    dual_point = z.fricke(level, ctx)
    dual_first = SeriesParams(s1=1, s2=-1, chi1=chi2.conj(), chi2=chi1.conj())
    dual_second = SeriesParams(s1=2, s2=0, chi1=chi2.conj(), chi2=chi1.conj())
    d1 = xi_direct(dual_first, dual_point, ctx)
    d2 = xi_direct(dual_second, dual_point, ctx)
    pref = (
        1j
        * epsilon(chi1, ctx)
        * epsilon(chi2, ctx)
        * mp.power(r1, mp.mpf(-3) / 2)
        * mp.sqrt(r2)
    )
    rhs = (
        pert[0] + pref * (d1 / tau + level / (2j * mp.pi) * d2),
        pert[1] + pref * level * tau * d2,
    )
    return VectorReport(lhs=lhs, rhs=rhs, tolerance=ctx.tolerance)

