from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict

from .chars import (
    Character,
    conductor_and_primitivize,
    epsilon,
    euler_phi,
    prime_divisors,
)
from .errors import ImprimitiveCharacter, ParityMismatch, PoleAtOne
from .numerics import (
    PrecisionContext,
    as_exact_int,
    bernoulli_polynomial_exact,
    hurwitz_zeta,
    sinpi,
    to_mp,
)


logger = logging.getLogger(__name__)


class LValueRequest(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    chi: Character
    s: Any
    want_derivative: bool = False


def principal_residue(r: int) -> Fraction:
    """Residue of L(chi_{r,1}, s) at s = 1."""
    return Fraction(euler_phi(r), r)


def _principal_value(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    value = mp.zeta(s)
    for p in prime_divisors(chi.modulus):
        value *= 1 - mp.power(p, -s)
    return value


def _principal_derivative(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    primes = prime_divisors(chi.modulus)
    factors = [1 - mp.power(p, -s) for p in primes]
    product = mp.one
    for f in factors:
        product *= f
    total = mp.zeta(s, 1, 1) * product
    zeta = mp.zeta(s)
    for p, f in zip(primes, factors):
        total += zeta * product / f * mp.log(p) * mp.power(p, -s)
    return total


def _is_at_one(s: Any) -> bool:
    return as_exact_int(s) == 1


def l_value(chi: Character, s: Any, ctx: PrecisionContext, via_primitive: bool = False) -> Any:
    """L(chi, s) through the Hurwitz decomposition.

    With ``via_primitive`` an imprimitive chi is evaluated as
    L(chi_D, s) * prod_{p | r} (1 - chi_D(p) p^-s).
    """
    mp = ctx.mp
    if chi.is_principal:
        if _is_at_one(s):
            raise PoleAtOne(f"L(chi_{chi.label}, s) has a pole at s = 1")
        return _principal_value(chi, to_mp(s, mp), ctx)
    if via_primitive and not chi.is_primitive:
        _, primitive = conductor_and_primitivize(chi)
        value = l_value(primitive, s, ctx)
        s_mp = to_mp(s, mp)
        for p in prime_divisors(chi.modulus):
            value *= 1 - primitive.mp_value(p, mp) * mp.power(p, -s_mp)
        return value
    r = chi.modulus
    if _is_at_one(s):
        # the poles of the Hurwitz terms cancel since sum chi(a) = 0
        total = mp.zero
        for a in range(1, r + 1):
            if chi.angle(a) is not None:
                total += chi.mp_value(a, mp) * mp.digamma(mp.mpf(a) / r)
        return -total / r
    s_mp = to_mp(s, mp)
    total = mp.zero
    for a in range(1, r + 1):
        if chi.angle(a) is not None:
            total += chi.mp_value(a, mp) * hurwitz_zeta(s_mp, Fraction(a, r), ctx)
    return mp.power(r, -s_mp) * total


def l_derivative(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    """dL/ds, analytically from the Hurwitz decomposition."""
    mp = ctx.mp
    if chi.is_principal:
        if _is_at_one(s):
            raise PoleAtOne(f"L'(chi_{chi.label}, s) has a pole at s = 1")
        return _principal_derivative(chi, to_mp(s, mp), ctx)
    r = chi.modulus
    if _is_at_one(s):
        # zeta(s, a) = 1/(s-1) - psi(a) - gamma_1(a)(s-1) + ...
        total = mp.zero
        for a in range(1, r + 1):
            if chi.angle(a) is not None:
                total -= chi.mp_value(a, mp) * mp.stieltjes(1, mp.mpf(a) / r)
        return total / r - mp.log(r) * l_value(chi, 1, ctx)
    s_mp = to_mp(s, mp)
    plain = mp.zero
    derived = mp.zero
    for a in range(1, r + 1):
        if chi.angle(a) is None:
            continue
        value = chi.mp_value(a, mp)
        plain += value * hurwitz_zeta(s_mp, Fraction(a, r), ctx)
        derived += value * hurwitz_zeta(s_mp, Fraction(a, r), ctx, derivative=1)
    return mp.power(r, -s_mp) * (derived - mp.log(r) * plain)


def l_negative_integer_exact(chi: Character, k: int) -> Fraction:
    """L(chi, -k) as an exact rational for a real character."""
    r = chi.modulus
    total = Fraction(0)
    for n in range(1, r + 1):
        value = chi.real_value(n)
        if value:
            total += value * bernoulli_polynomial_exact(k + 1, 1 - Fraction(n, r))
    return (-1) ** k * Fraction(r) ** k / (k + 1) * total


def l_negative_integer(chi: Character, k: int, ctx: PrecisionContext) -> Any:
    """L(chi, -k) via Bernoulli polynomials; exact Fraction when chi is real."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if chi.is_real:
        return l_negative_integer_exact(chi, k)
    mp = ctx.mp
    r = chi.modulus
    total = mp.zero
    for n in range(1, r + 1):
        if chi.angle(n) is not None:
            total += chi.mp_value(n, mp) * to_mp(
                bernoulli_polynomial_exact(k + 1, 1 - Fraction(n, r)), mp
            )
    return (-1) ** k * mp.power(r, k) / (k + 1) * total


def l_positive_easy(chi: Character, k: int, ctx: PrecisionContext) -> Any:
    """L(chi, 2k - kappa) in closed form.

    Imprimitive characters go through their primitive inducer and the
    Euler factors at the primes dividing the modulus.
    """
    mp = ctx.mp
    u = 2 * k - chi.parity_kappa
    if k < 1 or u < 1:
        raise ParityMismatch(f"2k - kappa = {u} is not a positive integer")
    if chi.is_principal:
        raise ParityMismatch("closed form needs a non-principal character")
    if not chi.is_primitive:
        _, primitive = conductor_and_primitivize(chi)
        value = l_positive_easy(primitive, k, ctx)
        for p in prime_divisors(chi.modulus):
            value *= 1 - primitive.mp_value(p, mp) * mp.power(p, -u)
        return value
    r = chi.modulus
    dual = chi.conj()
    total = mp.zero
    for n in range(1, r + 1):
        if dual.angle(n) is not None:
            total += dual.mp_value(n, mp) * to_mp(
                bernoulli_polynomial_exact(u, 1 - Fraction(n, r)), mp
            )
    pref = (
        epsilon(dual, ctx)
        * (-1) ** (k - 1)
        * mp.power(2, u - 1)
        * mp.pi**u
        / (mp.sqrt(r) * mp.factorial(u))
    )
    return pref * total


def l_value_at(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    """L(chi, s) preferring the exact rational at non-positive integers."""
    n = as_exact_int(s)
    if n is not None and n <= 0 and chi.is_primitive:
        return l_negative_integer(chi, -n, ctx)
    return l_value(chi, s, ctx)


def functional_equation_residual(chi: Character, s: Any, ctx: PrecisionContext) -> Any:
    """L(chi, s) minus its reflection through L(conj chi, 1 - s).

    Only primitive non-principal characters satisfy this form; the
    principal ones would also hit the pole of the reflected side.
    """
    if not chi.is_primitive or chi.is_principal:
        raise ImprimitiveCharacter(
            f"the functional equation needs a primitive non-principal chi, got chi_{chi.label}"
        )
    mp = ctx.mp
    s_mp = to_mp(s, mp)
    r = chi.modulus
    rhs = (
        epsilon(chi, ctx)
        * mp.power(2, s_mp)
        * mp.power(mp.pi, s_mp - 1)
        * mp.power(r, mp.mpf(1) / 2 - s_mp)
        * mp.gamma(1 - s_mp)
        * sinpi((s_mp + chi.parity_kappa) / 2, ctx)
        * l_value(chi.conj(), 1 - s_mp, ctx)
    )
    return l_value(chi, s_mp, ctx) - rhs


def principal_laurent_constant(r: int, ctx: PrecisionContext) -> Any:
    """Constant term of L(chi_{r,1}, s) at s = 1 divided by the residue.

    L = rho/(s-1) + rho*(gamma + sum_{p|r} log p/(p-1)) + O(s-1).
    """
    mp = ctx.mp
    return mp.euler + sum((mp.log(p) / (p - 1) for p in prime_divisors(r)), mp.zero)


def evaluate(request: LValueRequest, ctx: PrecisionContext) -> Any:
    if request.want_derivative:
        return l_derivative(request.chi, request.s, ctx)
    return l_value_at(request.chi, request.s, ctx)
