from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field

from .chars import TRIVIAL, Character, divisors, epsilon, moebius
from .errors import (
    GammaPole,
    ImprimitiveCharacter,
    ParityViolation,
    UnsupportedParameters,
)
from .lfunc import (
    l_derivative,
    l_value,
    principal_laurent_constant,
    principal_residue,
)
from .numerics import (
    PrecisionContext,
    as_exact_int,
    digamma_at_integer,
    format_value,
    hurwitz_zeta,
    sinpi,
    to_mp,
)
from .qseries import SeriesParams, exact_l_nonpositive


logger = logging.getLogger(__name__)

DEFAULT_ORDER = 24


# Exact bookkeeping

def linear_combination(ctx: PrecisionContext, const: Any, *terms: tuple) -> Any:
    """const + sum(c * v); a Fraction while every value is an exact rational."""
    if isinstance(const, (int, Fraction)) and all(isinstance(v, (int, Fraction)) for _, v in terms):
        return Fraction(const) + sum((Fraction(c) * Fraction(v) for c, v in terms), Fraction(0))
    mp = ctx.mp
    total = to_mp(const, mp)
    for c, v in terms:
        total += to_mp(c, mp) * to_mp(v, mp)
    return total


def _times(a: Any, b: Any, ctx: PrecisionContext) -> Any:
    if isinstance(a, Fraction) and a == 0 or isinstance(b, Fraction) and b == 0:
        return Fraction(0)
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) * Fraction(b)
    mp = ctx.mp
    return to_mp(a, mp) * to_mp(b, mp)


def _is_zero(x: Any) -> bool:
    return isinstance(x, (int, Fraction)) and x == 0


def l_factor(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    """L(chi, s) with trivial zeros and real non-positive values kept exact."""
    n = as_exact_int(s)
    if n is not None and n <= 0:
        if (n + chi.parity_kappa) % 2 == 0 and not (chi.is_trivial and n == 0):
            return Fraction(0)
        if chi.is_real:
            return exact_l_nonpositive(chi, -n)
    return l_value(chi, s, ctx)


# Perturbative expansion

class PowerTerm(BaseModel):
    """coefficient * y^exponent."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    exponent: Any
    coefficient: Any


class LogTerm(BaseModel):
    """(constant - log_coefficient * log(2 pi y)) * (-2 pi y)^power / power!."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    power: int
    constant: Any
    log_coefficient: Any


class PertExpansion(BaseModel):
    """Isolated monomials, an optional log term and sum_k c_k (-2 pi y)^k / k!."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: SeriesParams
    isolated: List[PowerTerm] = Field(default_factory=list)
    log_term: LogTerm | None = None
    coefficients: List[Any] = Field(default_factory=list)
    terminating: bool = False
    truncation_index: int | None = None

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def series_term(self, k: int, y: Any, ctx: PrecisionContext) -> Any:
        c = self.coefficients[k]
        if _is_zero(c):
            return ctx.mp.zero
        mp = ctx.mp
        return to_mp(c, mp) * (-2 * mp.pi * y) ** k / mp.factorial(k)

    def monomial_coefficient(self, k: int, ctx: PrecisionContext) -> Any:
        """Coefficient of y^k in the power series part."""
        c = self.coefficients[k]
        if _is_zero(c):
            return Fraction(0)
        mp = ctx.mp
        return to_mp(c, mp) * (-2 * mp.pi) ** k / mp.factorial(k)

    def optimal_order(self, y: Any, ctx: PrecisionContext) -> int:
        """Number of series terms kept at optimal truncation."""
        if self.terminating:
            return self.order
        mp = ctx.mp
        y = to_mp(y, mp)
        best, best_k = None, self.order
        for k in range(1, self.order):
            size = abs(self.series_term(k, y, ctx))
            if size == 0:
                continue
            if best is not None and size > best:
                return best_k
            best, best_k = size, k
        return self.order

    def evaluate(self, y: Any, ctx: PrecisionContext, order: int | None = None) -> Any:
        mp = ctx.mp
        y = to_mp(y, mp)
        if order is None:
            order = self.optimal_order(y, ctx)
        total = mp.zero
        for term in self.isolated:
            total += to_mp(term.coefficient, mp) * mp.power(y, to_mp(term.exponent, mp))
        if self.log_term is not None and self.log_term.power < order:
            lt = self.log_term
            bracket = to_mp(lt.constant, mp) - to_mp(lt.log_coefficient, mp) * mp.log(2 * mp.pi * y)
            total += bracket * (-2 * mp.pi * y) ** lt.power / mp.factorial(lt.power)
        for k in range(min(order, self.order)):
            total += self.series_term(k, y, ctx)
        return total

    def to_records(self, digits: int = 30) -> List[Dict[str, Any]]:
        """Monomials c * y^e (is_log: c * y^e * log y) as decimal strings."""
        ctx = PrecisionContext.from_digits(digits)
        mp = ctx.mp
        records: List[Dict[str, Any]] = []

        def add(exponent: Any, value: Any, is_log: bool = False) -> None:
            records.append(
                {
                    "exponent": format_value(exponent, digits)["re"]
                    if not isinstance(exponent, int)
                    else str(exponent),
                    **format_value(value, digits),
                    "is_log": is_log,
                }
            )

        for term in self.isolated:
            add(term.exponent, term.coefficient)
        if self.log_term is not None:
            lt = self.log_term
            scale = (-2 * mp.pi) ** lt.power / mp.factorial(lt.power)
            lc = to_mp(lt.log_coefficient, mp)
            add(lt.power, (to_mp(lt.constant, mp) - lc * mp.log(2 * mp.pi)) * scale)
            add(lt.power, -lc * scale, is_log=True)
        for k in range(self.order):
            if not _is_zero(self.coefficients[k]):
                add(k, self.monomial_coefficient(k, ctx))
        return records


def _isolated_coefficient(
    chi_other: Character, s_own: Any, s_other: Any, r: int, ctx: PrecisionContext
) -> Any:
    """(2 pi)^{s_own-1} Gamma(1-s_own) L(chi_other, s_other+1-s_own) phi(r)/r."""
    mp = ctx.mp
    arg = linear_combination(ctx, 1, (1, s_other), (-1, s_own))
    value = l_factor(chi_other, arg, ctx)
    if _is_zero(value):
        return Fraction(0)
    s = to_mp(s_own, mp)
    rho = principal_residue(r)
    return (2 * mp.pi) ** (s - 1) * mp.gamma(1 - s) * to_mp(value, mp) * to_mp(rho, mp)


def _merged_log_term(
    chi_other: Character, s_other: Any, m: int, r: int, ctx: PrecisionContext
) -> LogTerm:
    """Merged limit of the isolated monomial with the k = m-1 series term."""
    mp = ctx.mp
    arg = linear_combination(ctx, 1 - m, (1, s_other))
    value = l_factor(chi_other, arg, ctx)
    derivative = l_derivative(chi_other, arg, ctx)
    rho = to_mp(principal_residue(r), mp)
    shift = principal_laurent_constant(r, ctx) + digamma_at_integer(m, ctx)
    constant = rho * (derivative + to_mp(value, mp) * shift)
    return LogTerm(power=m - 1, constant=constant, log_coefficient=rho * to_mp(value, mp))


def _positive_int(x: Any) -> int | None:
    n = as_exact_int(x)
    return n if n is not None and n >= 1 else None


def pert_expansion(
    p: SeriesParams, ctx: PrecisionContext, order: int | None = None
) -> PertExpansion:
    """Small-y expansion of Xi_{s1,s2}(chi1, chi2; e^{-2 pi y}).

    c_k = L(chi1, s1-k) L(chi2, s2-k); a principal character contributes
    an isolated monomial, merged into a log term at integer s.
    """
    if order is not None and order < 0:
        raise ValueError("order must be non-negative")
    chi1, chi2 = p.chi1, p.chi2
    m1 = _positive_int(p.s1) if chi1.is_principal else None
    m2 = _positive_int(p.s2) if chi2.is_principal else None
    if m1 is not None and m2 is not None:
        raise UnsupportedParameters("both characters principal at positive integer s1, s2")
    if chi1.is_principal and chi2.is_principal:
        diff = linear_combination(ctx, 0, (1, p.s1), (-1, p.s2))
        if as_exact_int(diff) == 0:
            raise UnsupportedParameters("both characters principal with s1 = s2")

    terminating = p.is_terminating
    if terminating:
        pair = p.integer_pair
        bound = max(0, pair[0], pair[1]) + 1
        order = bound if order is None else min(order, bound)
    elif order is None:
        order = DEFAULT_ORDER

    isolated: List[PowerTerm] = []
    log_term: LogTerm | None = None
    merged_index: int | None = None
    if chi2.is_principal:
        if m2 is not None:
            log_term = _merged_log_term(chi1, p.s1, m2, chi2.modulus, ctx)
            merged_index = m2 - 1
        else:
            coeff = _isolated_coefficient(chi1, p.s2, p.s1, chi2.modulus, ctx)
            if not _is_zero(coeff):
                exponent = linear_combination(ctx, -1, (1, p.s2))
                isolated.append(PowerTerm(exponent=exponent, coefficient=coeff))
    if chi1.is_principal:
        if m1 is not None:
            log_term = _merged_log_term(chi2, p.s2, m1, chi1.modulus, ctx)
            merged_index = m1 - 1
        else:
            coeff = _isolated_coefficient(chi2, p.s1, p.s2, chi1.modulus, ctx)
            if not _is_zero(coeff):
                exponent = linear_combination(ctx, -1, (1, p.s1))
                isolated.append(PowerTerm(exponent=exponent, coefficient=coeff))

    coefficients: List[Any] = []
    for k in range(order):
        if k == merged_index:
            coefficients.append(Fraction(0))
            continue
        a = l_factor(chi1, linear_combination(ctx, -k, (1, p.s1)), ctx)
        if _is_zero(a):
            coefficients.append(Fraction(0))
            continue
        b = l_factor(chi2, linear_combination(ctx, -k, (1, p.s2)), ctx)
        coefficients.append(_times(a, b, ctx))
    logger.debug("pert_expansion %s: %d coefficients", p.describe(), order)
    return PertExpansion(
        params=p,
        isolated=isolated,
        log_term=log_term,
        coefficients=coefficients,
        terminating=terminating,
        truncation_index=order if terminating else None,
    )


def terminating_polynomial(
    s: int, chi: Character, kind: Literal["L", "Ltilde"], ctx: PrecisionContext
) -> PertExpansion:
    """Closed small-y form of L_s(chi) = Xi_{s,0}(chi, 1) or L~_s(chi) = Xi_{0,s}(chi, 1)."""
    if not chi.is_primitive:
        raise ImprimitiveCharacter(f"chi_{chi.label} is not primitive")
    n = as_exact_int(s)
    if n is None or n < 0:
        raise ParityViolation(f"s = {s} must be a non-negative integer")
    if (n - chi.parity_kappa - 1) % 2:
        raise ParityViolation(
            f"s + 1 = {n + 1} must have the parity of kappa = {chi.parity_kappa}"
        )
    if kind == "L":
        p = SeriesParams(s1=n, s2=0, chi1=chi, chi2=TRIVIAL)
    elif kind == "Ltilde":
        p = SeriesParams(s1=0, s2=n, chi1=chi, chi2=TRIVIAL)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return pert_expansion(p, ctx)


# Borel input

class BorelInput(BaseModel):
    """Data of the rearranged expansion

    Xi - Xi^LP ~ prefactor y^{s-1}/pi sum_{n1,n2} conj chi1(n1) n1^-s2
    conj chi2(n2) n2^-s1 F(2 pi n1 n2 / (r1 r2 y)) with
    F(z) ~ sum_k f_k z^{s-k-1}.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: SeriesParams
    prefactor: Any
    sin_a: Any
    sin_b: Any
    level: int

    def f_coefficient(self, k: int, ctx: PrecisionContext) -> Any:
        """Gamma(k+1-s1) Gamma(k+1-s2)/k! [sin_a - (-1)^k sin_b]."""
        mp = ctx.mp
        s1, s2 = self.params.s1, self.params.s2
        for s in (s1, s2):
            n = as_exact_int(linear_combination(ctx, k + 1, (-1, s)))
            if n is not None and n <= 0:
                raise GammaPole(f"Gamma({n}) in f_{k}")
        trig = to_mp(self.sin_a, mp) - (-1) ** k * to_mp(self.sin_b, mp)
        if trig == 0:
            return mp.zero
        a = k + 1 - to_mp(s1, mp)
        b = k + 1 - to_mp(s2, mp)
        return mp.gamma(a) * mp.gamma(b) / mp.factorial(k) * trig

    def z_scale(self, y: Any, ctx: PrecisionContext) -> Any:
        """Z with z = Z n1 n2."""
        mp = ctx.mp
        return 2 * mp.pi / (self.level * to_mp(y, mp))

    def weight(self, n: int, ctx: PrecisionContext) -> Any:
        """W(N) = sum_{n1 n2 = N} conj chi1(n1) n1^-s2 conj chi2(n2) n2^-s1."""
        mp = ctx.mp
        dual1, dual2 = self.params.chi1.conj(), self.params.chi2.conj()
        s1, s2 = to_mp(self.params.s1, mp), to_mp(self.params.s2, mp)
        total = mp.zero
        for d in divisors(n):
            e = n // d
            if dual1.angle(d) is None or dual2.angle(e) is None:
                continue
            total += dual1.mp_value(d, mp) * mp.power(d, -s2) * dual2.mp_value(e, mp) * mp.power(e, -s1)
        return total

    def series_coefficient(self, k: int, ctx: PrecisionContext) -> Any:
        """Coefficient of y^k obtained by summing the f_k term over (n1, n2)."""
        mp = ctx.mp
        f = self.f_coefficient(k, ctx)
        if f == 0:
            return mp.zero
        s1, s2 = self.params.s1, self.params.s2
        first = l_value(self.params.chi1.conj(), linear_combination(ctx, k + 1, (-1, s1)), ctx)
        second = l_value(self.params.chi2.conj(), linear_combination(ctx, k + 1, (-1, s2)), ctx)
        s = to_mp(s1, mp) + to_mp(s2, mp)
        scale = (2 * mp.pi / self.level) ** (s - k - 1)
        return to_mp(self.prefactor, mp) / mp.pi * f * scale * first * second


def trig_arguments(p: SeriesParams, ctx: PrecisionContext) -> tuple:
    """((s1+s2+k1+k2-1)/2, (s1-s2+k1-k2-1)/2), exact when s1, s2 are."""
    k1, k2 = p.chi1.parity_kappa, p.chi2.parity_kappa
    half = Fraction(1, 2)
    a = linear_combination(ctx, half * (k1 + k2 - 1), (half, p.s1), (half, p.s2))
    b = linear_combination(ctx, half * (k1 - k2 - 1), (half, p.s1), (-half, p.s2))
    return a, b


def borel_input_coeffs(p: SeriesParams, ctx: PrecisionContext) -> BorelInput:
    if not (p.chi1.is_primitive and p.chi2.is_primitive):
        raise ImprimitiveCharacter("the Borel rearrangement needs primitive characters")
    mp = ctx.mp
    r1, r2 = p.chi1.modulus, p.chi2.modulus
    s1, s2 = to_mp(p.s1, mp), to_mp(p.s2, mp)
    half = mp.mpf(1) / 2
    prefactor = (
        mp.power(r1, s2 - half)
        * mp.power(r2, s1 - half)
        * epsilon(p.chi1, ctx)
        * epsilon(p.chi2, ctx)
    )
    a, b = trig_arguments(p, ctx)
    return BorelInput(
        params=p,
        prefactor=prefactor,
        sin_a=sinpi(a, ctx),
        sin_b=sinpi(b, ctx),
        level=r1 * r2,
    )


# Independent oracle

def zagier_oracle(
    p: SeriesParams, ctx: PrecisionContext, order: int | None = None
) -> PertExpansion:
    """The same expansion rebuilt from F(y) = sum_{m>=1} f(m y).

    With f(x) = x^-s2 Phi_s1(chi1; e^{-2 pi x}) ~ sum_n b_n x^{n-s2} the
    naive series is sum_n b_n zeta(s2-n) y^n and the Riemann term I_f/y is
    the Mellin transform of f at 1. A principal chi2 mod r is the Moebius
    combination sum_{d | r} mu(d) d^-s2 Xi(chi1, 1; d y).
    """
    chi1, chi2 = p.chi1, p.chi2
    if chi1.is_principal:
        raise UnsupportedParameters("the oracle needs a non-principal chi1")
    if not chi2.is_principal:
        raise UnsupportedParameters("the oracle needs a trivial or principal chi2")
    mp = ctx.mp
    n2 = as_exact_int(p.s2)
    if n2 is not None and n2 >= 2:
        raise UnsupportedParameters("integer s2 >= 2 carries higher Zagier singular terms")
    order = DEFAULT_ORDER if order is None else order
    if p.is_terminating:
        pair = p.integer_pair
        order = min(order, max(0, pair[0], pair[1]) + 1)

    r = chi2.modulus
    mobius = [(d, moebius(d)) for d in divisors(r) if moebius(d)]
    s1 = to_mp(p.s1, mp)
    s2 = to_mp(p.s2, mp)

    def mobius_factor(k: int) -> Any:
        return sum((mu * mp.power(d, k - s2) for d, mu in mobius), mp.zero)

    def taylor_b(k: int) -> Any:
        # coefficient of x^k in Phi_s1(chi1; e^{-2 pi x})
        return l_value(chi1, s1 - k, ctx, via_primitive=True) * (-2 * mp.pi) ** k / mp.factorial(k)

    rho = sum((mp.mpf(mu) / d for d, mu in mobius), mp.zero)
    isolated: List[PowerTerm] = []
    log_term: LogTerm | None = None
    coefficients: List[Any] = []
    for k in range(order):
        if n2 == 1 and k == 0:
            coefficients.append(Fraction(0))
            continue
        naive = taylor_b(k) * hurwitz_zeta(s2 - k, 1, ctx) * mobius_factor(k)
        coefficients.append(naive * mp.factorial(k) / (-2 * mp.pi) ** k)
    if n2 == 1:
        # b_{-1} log case: I* = L'(chi1, s1) - L(chi1, s1) log 2 pi
        value = l_value(chi1, s1, ctx, via_primitive=True)
        regular = l_derivative(chi1, s1, ctx) - value * mp.log(2 * mp.pi)
        log_sum = sum((mu * mp.log(d) / d for d, mu in mobius), mp.zero)
        constant = rho * (regular + value * mp.log(2 * mp.pi)) - value * log_sum
        log_term = LogTerm(power=0, constant=constant, log_coefficient=rho * value)
    else:
        riemann = (
            mp.gamma(1 - s2)
            * (2 * mp.pi) ** (s2 - 1)
            * l_value(chi1, s1 + 1 - s2, ctx, via_primitive=True)
        )
        isolated.append(
            PowerTerm(exponent=linear_combination(ctx, -1, (1, p.s2)), coefficient=riemann * rho)
        )
    return PertExpansion(
        params=p,
        isolated=isolated,
        log_term=log_term,
        coefficients=coefficients,
        terminating=p.is_terminating,
        truncation_index=order if p.is_terminating else None,
    )


def riemann_limit(p: SeriesParams, ctx: PrecisionContext, delta: Any = None) -> Any:
    """Coefficient of 1/y in the k -> -1 limit of the naive summand at s2 = 0.

    The summand (-2 pi)^k/k! L(chi1, s1-k) zeta(-k) is averaged at
    k = -1 +- delta.
    """
    if as_exact_int(p.s2) != 0:
        raise UnsupportedParameters("the k -> -1 limit is taken at s2 = 0")
    mp = ctx.mp
    delta = delta if delta is not None else mp.mpf(10) ** (-(ctx.target_digits // 3))
    s1 = to_mp(p.s1, mp)

    def summand(k: Any) -> Any:
        # (-2 pi)^k tends to -(2 pi)^k on the real axis near k = -1
        return -((2 * mp.pi) ** k) * mp.rgamma(k + 1) * l_value(p.chi1, s1 - k, ctx) * mp.zeta(-k)

    return (summand(-1 + delta) + summand(-1 - delta)) / 2


def optimal_truncation_error(expansion: PertExpansion, y: Any, ctx: PrecisionContext) -> Any:
    """Size of the first omitted term at optimal truncation."""
    order = expansion.optimal_order(y, ctx)
    if order >= expansion.order:
        return ctx.mp.zero
    return abs(expansion.series_term(order, to_mp(y, ctx.mp), ctx))


def coefficient_growth(expansion: PertExpansion, ctx: PrecisionContext) -> List[Any]:
    """|a_{k+1}| / ((k+1) |a_k|) for the monomial coefficients a_k of y^k.

    Tends to r1 r2 / (2 pi) for a factorially divergent series.
    """
    mp = ctx.mp
    ratios = []
    for k in range(expansion.order - 1):
        a = expansion.monomial_coefficient(k, ctx)
        b = expansion.monomial_coefficient(k + 1, ctx)
        if _is_zero(a) or _is_zero(b) or a == 0:
            continue
        ratios.append(abs(to_mp(b, mp) / to_mp(a, mp)) / (k + 1))
    return ratios
