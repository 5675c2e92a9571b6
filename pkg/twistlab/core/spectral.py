from __future__ import annotations

import logging
import math
from collections import defaultdict
from fractions import Fraction
from typing import Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .chars import (
    TRIVIAL,
    Character,
    characters_mod,
    divisors,
    euler_phi,
    gauss_sum,
    kronecker_character,
    moebius,
)
from .errors import (
    ImprimitiveCharacter,
    InputError,
    OutsideUnitDisk,
    UnsupportedParameters,
    ZeroFactor,
)
from .lfunc import l_value
from .numerics import PrecisionContext, bernoulli_polynomial, format_value, to_mp
from .qseries import QPoint, SeriesParams, lambert, lambert_tilde, truncation_length
from .asym import pert_expansion


logger = logging.getLogger(__name__)

Route = Literal["product", "lambert"]


# q-Pochhammer symbols

def log_q_pochhammer(x: Any, q: Any, ctx: PrecisionContext) -> Any:
    """sum_{j>=0} log(1 - x q^j), principal branch on every factor."""
    mp = ctx.mp
    x = to_mp(x, mp)
    q = to_mp(q, mp)
    if x == 0:
        return mp.zero
    count = truncation_length(abs(q), 1.0, ctx)
    total = mp.zero
    term = x
    for j in range(count + 1):
        factor = 1 - term
        if factor == 0:
            raise ZeroFactor(f"1 - x q^{j} vanishes")
        total += mp.log(factor)
        term *= q
        if abs(term) < ctx.eps:
            break
    return total


def q_pochhammer(x: Any, q: Any, ctx: PrecisionContext) -> Any:
    """(x; q)_infinity."""
    mp = ctx.mp
    x = to_mp(x, mp)
    q = to_mp(q, mp)
    if abs(q) >= 1:
        raise OutsideUnitDisk("the q-Pochhammer symbol needs |q| < 1")
    return mp.exp(log_q_pochhammer(x, q, ctx))


def s_transform_residual_L1(tau: QPoint, ctx: PrecisionContext) -> Any:
    """L_1(1; tau) - log(-i tau)/2 - (pi i / 12)(tau + 1/tau) - L_1(1; -1/tau)."""
    mp = ctx.mp
    t = to_mp(tau.tau, mp)
    lhs = lambert(1, TRIVIAL, TRIVIAL, tau, ctx)
    dual = lambert(1, TRIVIAL, TRIVIAL, tau.fricke(1, ctx), ctx)
    return lhs - (mp.log(-1j * t) / 2 + mp.pi * 1j / 12 * (t + 1 / t) + dual)


# Spectral trace requests

class TraceRequest(BaseModel):
    """Local P^{m,n} at tau, with N = m + n + 1 and dual point -1/(N tau)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int = Field(ge=1)
    n: int = Field(ge=1)
    tau: QPoint

    @model_validator(mode="after")
    def _check_point(self) -> "TraceRequest":
        if not self.tau.tau.imag > 0:
            raise InputError("tau must lie in the upper half-plane")
        return self

    @property
    def big_n(self) -> int:
        return self.m + self.n + 1

    def dual(self, ctx: PrecisionContext) -> QPoint:
        return self.tau.fricke(self.big_n, ctx)

    def hbar(self, ctx: PrecisionContext) -> Any:
        return 2 * ctx.mp.pi * to_mp(self.tau.tau, ctx.mp)


def _root_of_unity(b: int, big_n: int, mp: Any) -> Any:
    return mp.expjpi(mp.mpf(2 * b) / big_n)


def g_block(req: TraceRequest, ctx: PrecisionContext) -> Any:
    """G_{m,n}(q) from its three q-Pochhammer factors."""
    mp = ctx.mp
    big_n = req.big_n
    q = to_mp(req.tau.q, mp)
    base = q**big_n
    return (
        log_q_pochhammer(q ** (big_n - req.m), base, ctx)
        + log_q_pochhammer(q ** (big_n - 1), base, ctx)
        - log_q_pochhammer(q**req.n, base, ctx)
    )


def f_block(req: TraceRequest, point: QPoint, ctx: PrecisionContext) -> Any:
    """F_{m,n} at ``point`` from its root-of-unity q-Pochhammer factors."""
    mp = ctx.mp
    big_n = req.big_n
    q = to_mp(point.q, mp)
    return (
        log_q_pochhammer(_root_of_unity(req.n, big_n, mp), q, ctx)
        - log_q_pochhammer(_root_of_unity(big_n - req.m, big_n, mp), q, ctx)
        - log_q_pochhammer(_root_of_unity(big_n - 1, big_n, mp), q, ctx)
    )


def prefactor_log(req: TraceRequest, ctx: PrecisionContext) -> Any:
    """Log of 1 / (2 sqrt(N tau) sin(pi n / N)) times the exponential prefactor."""
    mp = ctx.mp
    big_n = req.big_n
    tau = to_mp(req.tau.tau, mp)
    bracket = (
        bernoulli_polynomial(2, Fraction(req.m, big_n), ctx)
        + bernoulli_polynomial(2, Fraction(1, big_n), ctx)
        - bernoulli_polynomial(2, Fraction(req.n, big_n), ctx)
    )
    exponent = (
        mp.pi * 1j * tau * big_n / 2 * bracket
        + mp.pi * 1j / (12 * big_n * tau)
        + mp.pi * 1j / 4
    )
    return exponent - mp.log(2 * mp.sin(mp.pi * req.n / big_n)) - mp.log(mp.sqrt(big_n * tau))


# Lambert decomposition of the building blocks

class LambertTerm(BaseModel):
    """coefficient * L_1(chi; q^power) (kind L) or L~_1(chi; q^power) (kind Ltilde).

    ``dual`` terms are taken at the Fricke point -1/(N tau).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficient: Any
    kind: Literal["L", "Ltilde"]
    chi: Character
    power: int
    dual: bool = False

    def evaluate(self, z: QPoint, dual: QPoint, ctx: PrecisionContext) -> Any:
        point = (dual if self.dual else z).scaled(self.power, ctx)
        if self.kind == "L":
            value = lambert(1, self.chi, TRIVIAL, point, ctx)
        else:
            value = lambert_tilde(1, self.chi, point, ctx)
        return to_mp(self.coefficient, ctx.mp) * value


class LambertBlocks(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    constant: Any
    terms: List[LambertTerm]

    def evaluate(self, req: TraceRequest, ctx: PrecisionContext) -> Any:
        dual = req.dual(ctx)
        total = to_mp(self.constant, ctx.mp)
        for term in self.terms:
            total += term.evaluate(req.tau, dual, ctx)
        return total


def _twisted_gauss_sum(chi: Character, b: int, mp: Any) -> Any:
    """sum over units u mod r of chi(u) exp(2 pi i b u / r)."""
    r = chi.modulus
    if r == 1:
        return mp.one
    total = mp.zero
    for u in range(1, r):
        if chi.angle(u) is not None:
            total += chi.mp_value(u, mp) * mp.expjpi(mp.mpf(2 * b * u) / r)
    return total


def _characters(modulus: int) -> List[Character]:
    return [TRIVIAL] if modulus == 1 else characters_mod(modulus)


def _pochhammer_terms(a: int, big_n: int, sign: int, ctx: PrecisionContext) -> List[LambertTerm]:
    """log(q^a; q^N) = -sum_chi conj(chi(a')) L~_1(chi; q^g) / phi(N')."""
    mp = ctx.mp
    g = math.gcd(a, big_n)
    reduced, residue = big_n // g, a // g
    phi = euler_phi(reduced)
    terms = []
    for chi in _characters(reduced):
        coefficient = -sign * mp.conj(chi.mp_value(residue, mp)) / phi
        terms.append(LambertTerm(coefficient=coefficient, kind="Ltilde", chi=chi, power=g))
    return terms


def _root_terms(b: int, big_n: int, sign: int, ctx: PrecisionContext) -> Tuple[Any, List[LambertTerm]]:
    """log(omega^b; q) = log(1 - omega^b) - sum_g sum_chi tau(chi, b) L_1(conj chi; q^g) / (g phi)."""
    mp = ctx.mp
    omega = _root_of_unity(b, big_n, mp)
    if omega == 1 or b % big_n == 0:
        raise ZeroFactor(f"omega^{b} = 1 makes the leading factor vanish")
    constant = sign * mp.log(1 - omega)
    terms = []
    for g in divisors(big_n):
        reduced = big_n // g
        phi = euler_phi(reduced)
        for chi in _characters(reduced):
            rho = _twisted_gauss_sum(chi, b, mp)
            if abs(rho) < ctx.eps:
                continue
            terms.append(
                LambertTerm(
                    coefficient=-sign * rho / (g * phi),
                    kind="L",
                    chi=chi.conj(),
                    power=g,
                    dual=True,
                )
            )
    return constant, terms


def lambert_blocks(req: TraceRequest, ctx: PrecisionContext) -> LambertBlocks:
    """G_{m,n}(q) + F_{m,n}(q~) as characters' Lambert series plus one constant."""
    mp = ctx.mp
    big_n = req.big_n
    terms: List[LambertTerm] = []
    for a, sign in ((big_n - req.m, 1), (big_n - 1, 1), (req.n, -1)):
        terms.extend(_pochhammer_terms(a, big_n, sign, ctx))
    constant = mp.zero
    for b, sign in ((req.n, 1), (big_n - req.m, -1), (big_n - 1, -1)):
        c, extra = _root_terms(b, big_n, sign, ctx)
        constant += c
        terms.extend(extra)
    terms = [t for t in terms if abs(to_mp(t.coefficient, mp)) > ctx.eps]
    return LambertBlocks(constant=constant, terms=terms)


# Reduced combination

class CharacterPair(BaseModel):
    """c_g L~_1(chi; q) + c_f L_1(conj chi; q~)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    chi: Character
    g_coefficient: Any
    f_coefficient: Any


class ReducedCombination(BaseModel):
    """G(q) + F(q~) with every principal piece folded by the S-transformation.

    value = constant + log_coefficient log(-i tau) + tau_coefficient tau
            + inverse_coefficient / tau + pairs + leftover terms
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    constant: Any
    log_coefficient: Any
    tau_coefficient: Any
    inverse_coefficient: Any
    pairs: List[CharacterPair] = Field(default_factory=list)
    leftover: List[LambertTerm] = Field(default_factory=list)

    def evaluate(self, req: TraceRequest, ctx: PrecisionContext) -> Any:
        mp = ctx.mp
        tau = to_mp(req.tau.tau, mp)
        dual = req.dual(ctx)
        total = (
            self.constant
            + self.log_coefficient * mp.log(-1j * tau)
            + self.tau_coefficient * tau
            + self.inverse_coefficient / tau
        )
        for pair in self.pairs:
            total += pair.g_coefficient * lambert_tilde(1, pair.chi, req.tau, ctx)
            total += pair.f_coefficient * lambert(1, pair.chi.conj(), TRIVIAL, dual, ctx)
        for term in self.leftover:
            total += term.evaluate(req.tau, dual, ctx)
        return total


def _principal_expansion(term: LambertTerm, mp: Any) -> Dict[int, Any]:
    """A principal-character term as sum_e a_e L_1(1; q^e)."""
    r = term.chi.modulus
    out: Dict[int, Any] = {}
    for d in divisors(r):
        mu = moebius(d)
        if mu == 0:
            continue
        weight = mp.mpf(mu) if term.kind == "Ltilde" else mp.mpf(mu) / d
        out[term.power * d] = term.coefficient * weight
    return out


def reduce_combination(req: TraceRequest, ctx: PrecisionContext) -> ReducedCombination:
    mp = ctx.mp
    big_n = req.big_n
    blocks = lambert_blocks(req, ctx)
    direct: Dict[int, Any] = defaultdict(lambda: mp.zero)
    dual: Dict[int, Any] = defaultdict(lambda: mp.zero)
    g_coeffs: Dict[Tuple[int, int], Any] = defaultdict(lambda: mp.zero)
    f_coeffs: Dict[Tuple[int, int], Any] = defaultdict(lambda: mp.zero)
    leftover: List[LambertTerm] = []
    chars: Dict[Tuple[int, int], Character] = {}
    for term in blocks.terms:
        if term.chi.is_principal:
            target = dual if term.dual else direct
            for e, a in _principal_expansion(term, mp).items():
                target[e] += a
        elif term.power == 1 and term.chi.is_primitive and term.chi.modulus == big_n:
            key = term.chi.key if term.kind == "Ltilde" else term.chi.conj().key
            chars[key] = term.chi if term.kind == "Ltilde" else term.chi.conj()
            (f_coeffs if term.dual else g_coeffs)[key] += term.coefficient
        else:
            leftover.append(term)

    log_coefficient = mp.zero
    constant = to_mp(blocks.constant, mp)
    tau_coefficient = mp.zero
    inverse_coefficient = mp.zero
    # L(e tau) - L(-1/(e tau)) is closed; the dual partner sits at q~^(N/e)
    for e, a in direct.items():
        log_coefficient += a / 2
        constant += a * mp.log(e) / 2
        tau_coefficient += a * mp.pi * 1j * e / 12
        inverse_coefficient += a * mp.pi * 1j / (12 * e)
        dual[big_n // e] += a
    for e, b in dual.items():
        if abs(b) > ctx.tolerance:
            leftover.append(
                LambertTerm(coefficient=b, kind="L", chi=TRIVIAL, power=e, dual=True)
            )
    pairs = [
        CharacterPair(chi=chars[key], g_coefficient=g_coeffs[key], f_coefficient=f_coeffs[key])
        for key in sorted(chars)
    ]
    logger.debug(
        "reduced P^{%d,%d}: %d pairs, %d leftover terms", req.m, req.n, len(pairs), len(leftover)
    )
    return ReducedCombination(
        constant=constant,
        log_coefficient=log_coefficient,
        tau_coefficient=tau_coefficient,
        inverse_coefficient=inverse_coefficient,
        pairs=pairs,
        leftover=leftover,
    )


# Traces

def log_trace_pmn(req: TraceRequest, route: Route, ctx: PrecisionContext) -> Any:
    """log Tr rho_{m,n} by q-Pochhammer products or by the Lambert decomposition."""
    if route == "product":
        body = g_block(req, ctx) + f_block(req, req.dual(ctx), ctx)
    elif route == "lambert":
        body = lambert_blocks(req, ctx).evaluate(req, ctx)
    else:
        raise InputError(f"unknown route {route!r}")
    return prefactor_log(req, ctx) + body


def trace_p2(tau: QPoint, route: Route, ctx: PrecisionContext) -> Any:
    """log Tr rho for local P^2."""
    if route == "product":
        return log_trace_pmn(TraceRequest(m=1, n=1, tau=tau), "product", ctx)
    if route != "lambert":
        raise InputError(f"unknown route {route!r}")
    mp = ctx.mp
    chi = kronecker_character(-3)
    t = to_mp(tau.tau, mp)
    bracket = lambert_tilde(1, chi, tau, ctx) - 1j * mp.sqrt(3) * lambert(
        1, chi, TRIVIAL, tau.fricke(3, ctx), ctx
    )
    return -mp.log(mp.power(3, mp.mpf(5) / 2) * t) / 2 - mp.pi * 1j / 4 + mp.mpf(3) / 2 * bracket


class TraceBlocks(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int
    n: int
    g_product: Any
    f_product: Any
    lambert_value: Any
    reduced_value: Any
    reduced: ReducedCombination
    log_trace: Any
    tolerance: Any

    @property
    def product_value(self) -> Any:
        return self.g_product + self.f_product

    @property
    def residuals(self) -> Dict[str, Any]:
        return {
            "lambert": abs(self.product_value - self.lambert_value),
            "reduced": abs(self.product_value - self.reduced_value),
        }

    @property
    def passed(self) -> bool:
        scale = max(1, abs(self.product_value))
        return all(r <= self.tolerance * scale for r in self.residuals.values())

    def to_record(self, digits: int = 30) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "g_plus_f": format_value(self.product_value, digits),
            "log_trace": format_value(self.log_trace, digits),
            "constant": format_value(self.reduced.constant, digits),
            "tau_coefficient": format_value(self.reduced.tau_coefficient, digits),
            "inverse_coefficient": format_value(self.reduced.inverse_coefficient, digits),
            "pairs": [
                {
                    "chi": pair.chi.label,
                    "g": format_value(pair.g_coefficient, digits),
                    "f": format_value(pair.f_coefficient, digits),
                }
                for pair in self.reduced.pairs
            ],
            "residuals": {k: format_value(v, 5)["re"] for k, v in self.residuals.items()},
            "passed": self.passed,
        }


def trace_pmn_blocks(req: TraceRequest, ctx: PrecisionContext) -> TraceBlocks:
    """G and F by products, reconciled with the Lambert and reduced routes."""
    dual = req.dual(ctx)
    g = g_block(req, ctx)
    f = f_block(req, dual, ctx)
    reduced = reduce_combination(req, ctx)
    return TraceBlocks(
        m=req.m,
        n=req.n,
        g_product=g,
        f_product=f,
        lambert_value=lambert_blocks(req, ctx).evaluate(req, ctx),
        reduced_value=reduced.evaluate(req, ctx),
        reduced=reduced,
        log_trace=prefactor_log(req, ctx) + g + f,
        tolerance=ctx.tolerance,
    )


# Auxiliary functions

class AuxPair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g_direct: Any
    g_lambert: Any
    f_direct: Any
    f_lambert: Any

    @property
    def residual(self) -> Any:
        return max(abs(self.g_direct - self.g_lambert), abs(self.f_direct - self.f_lambert))


def aux_gf(chi: Character, z: QPoint, ctx: PrecisionContext) -> AuxPair:
    """g(q) = sum_k chi(k) log(q^k; q^N) and f(q) = sum_k chi(k) log(omega^k; q).

    g = -L~_1(chi; q) and f = -rho(chi) (L(conj chi, 1) + L_1(conj chi; q)).
    """
    if chi.is_trivial or not chi.is_primitive:
        raise ImprimitiveCharacter("the auxiliary functions need a non-trivial primitive chi")
    mp = ctx.mp
    big_n = chi.modulus
    q = to_mp(z.q, mp)
    base = q**big_n
    g_direct = mp.zero
    f_direct = mp.zero
    for k in range(1, big_n):
        value = chi.mp_value(k, mp)
        if value == 0:
            continue
        g_direct += value * log_q_pochhammer(q**k, base, ctx)
        f_direct += value * log_q_pochhammer(_root_of_unity(k, big_n, mp), q, ctx)
    dual = chi.conj()
    rho = gauss_sum(chi, ctx)
    return AuxPair(
        g_direct=g_direct,
        g_lambert=-lambert_tilde(1, chi, z, ctx),
        f_direct=f_direct,
        f_lambert=-rho * (l_value(dual, 1, ctx) + lambert(1, dual, TRIVIAL, z, ctx)),
    )


# Weak and strong coupling for P^2

class CouplingTerms(BaseModel):
    """Leading terms of one regime of log Tr rho_{P^2}, read off the asymptotic formulas."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    regime: Literal["weak", "strong"]
    terms: Dict[str, Any]


def weak_coupling_terms(ctx: PrecisionContext) -> CouplingTerms:
    """(3/2) L~_1^pert(chi_{3,2}; tau) as tau -> 0, in the variable tau = i y.

    Keys: ``log`` (coefficient of log tau), ``constant`` (with log(i) absorbed)
    and ``tau2`` (coefficient of (2 pi i tau)^2).
    """
    mp = ctx.mp
    chi = kronecker_character(-3)
    expansion = pert_expansion(SeriesParams(s1=0, s2=1, chi1=chi, chi2=TRIVIAL), ctx, order=4)
    lt = expansion.log_term
    if lt is None or lt.power != 0:
        raise UnsupportedParameters("expected a logarithmic constant term")
    lc = to_mp(lt.log_coefficient, mp)
    # log(2 pi y) = log(2 pi) + log(tau) - i pi / 2
    constant = to_mp(lt.constant, mp) - lc * (mp.log(2 * mp.pi) - 1j * mp.pi / 2)
    c2 = to_mp(expansion.coefficients[2], mp)
    scale = mp.mpf(3) / 2
    return CouplingTerms(
        regime="weak",
        terms={"log": -scale * lc, "constant": scale * constant, "tau2": scale * c2 / 2},
    )


def strong_coupling_terms(ctx: PrecisionContext) -> CouplingTerms:
    """-(3 sqrt(3)/2) i L_1^pert(chi_{3,2}; -1/(3 tau)) as tau -> infinity.

    Keys: ``tau`` (coefficient of tau), ``constant`` and ``inverse`` (coefficient of 1/tau).
    """
    mp = ctx.mp
    chi = kronecker_character(-3)
    expansion = pert_expansion(SeriesParams(s1=1, s2=0, chi1=chi, chi2=TRIVIAL), ctx, order=4)
    (iso,) = [t for t in expansion.isolated if to_mp(t.exponent, mp) == -1]
    scale = -3 * mp.sqrt(3) / 2 * 1j
    # y' = i / (3 tau)
    return CouplingTerms(
        regime="strong",
        terms={
            "tau": scale * to_mp(iso.coefficient, mp) * (-3j),
            "constant": scale * to_mp(expansion.coefficients[0], mp),
            "inverse": scale * to_mp(expansion.coefficients[1], mp) * (-2 * mp.pi * 1j / 3),
        },
    )
