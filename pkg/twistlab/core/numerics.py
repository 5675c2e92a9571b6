from __future__ import annotations

import logging
import math
import threading
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Tuple

import mpmath
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import (
    CNonPositiveInteger,
    NonConvergent,
    OnBranchCut,
    OutsideUnitDisk,
    ParseError,
    PoleAtNonPositiveInteger,
    PoleAtOne,
    QuadratureStall,
    UnsupportedParameters,
)


logger = logging.getLogger(__name__)

WORKING_GUARD_BITS = 32
MAX_RAY_SEGMENTS = 200

_local = threading.local()


def required_bits(target_digits: int, guard_digits: int) -> int:
    return math.ceil((target_digits + guard_digits) * math.log2(10))


def working_context(bits: int) -> mpmath.ctx_mp.MPContext:
    """Per-thread mpmath context at ``bits`` of precision.

    Contexts are never shared between threads, so a function that bumps
    ``prec`` temporarily cannot leak into a concurrent evaluation.
    """
    contexts: Dict[int, Any] = getattr(_local, "contexts", None)
    if contexts is None:
        contexts = _local.contexts = {}
    ctx = contexts.get(bits)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.prec = bits
        contexts[bits] = ctx
    return ctx


class PrecisionContext(BaseModel):
    """Target/guard digit policy plus the binary precision that honours it."""

    model_config = ConfigDict(frozen=True)

    target_digits: int = Field(default=50, gt=0)
    guard_digits: int = Field(default=10, ge=0)
    bits: int = Field(default=0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_bits(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("bits"):
            data = dict(data)
            data["bits"] = required_bits(
                int(data.get("target_digits", 50)), int(data.get("guard_digits", 10))
            )
        return data

    @model_validator(mode="after")
    def _check_bits(self) -> "PrecisionContext":
        floor = required_bits(self.target_digits, self.guard_digits)
        if self.bits < floor:
            raise ValueError(f"bits={self.bits} below the {floor} needed for the digit policy")
        return self

    @classmethod
    def from_digits(cls, digits: int, guard_digits: int = 10) -> "PrecisionContext":
        return cls(target_digits=digits, guard_digits=guard_digits)

    @property
    def working_bits(self) -> int:
        return self.bits + WORKING_GUARD_BITS

    @property
    def mp(self) -> Any:
        return working_context(self.working_bits)

    @property
    def eps(self) -> Any:
        """Truncation floor 10^-(target+guard)."""
        mp = self.mp
        return mp.mpf(10) ** (-(self.target_digits + self.guard_digits))

    @property
    def tolerance(self) -> Any:
        mp = self.mp
        return mp.mpf(10) ** (-self.target_digits)

    def with_extra_bits(self, extra: int) -> "PrecisionContext":
        if extra <= 0:
            return self
        return self.model_copy(update={"bits": self.bits + int(extra)})


# Conversions

def _parse_real(text: str) -> Fraction:
    try:
        return Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse number {text!r}") from exc


def _split_complex(body: str) -> Tuple[str, str]:
    for index in range(len(body) - 1, 0, -1):
        if body[index] in "+-" and body[index - 1] not in "eE":
            return body[:index], body[index:]
    return "", body


def parse_number(text: str) -> Fraction | Tuple[Fraction, Fraction]:
    """Parse ``2``, ``1/2``, ``0.3i``, ``0.2+0.3i`` exactly.

    Real input comes back as a Fraction, complex input as an exact
    ``(re, im)`` pair of Fractions.
    """
    raw = text.strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if not raw:
        raise ParseError("empty number")
    if not raw.endswith("i"):
        return _parse_real(raw)
    real_text, imag_text = _split_complex(raw[:-1])
    real = _parse_real(real_text) if real_text else Fraction(0)
    if imag_text in ("", "+"):
        imag = Fraction(1)
    elif imag_text == "-":
        imag = Fraction(-1)
    else:
        imag = _parse_real(imag_text)
    if imag == 0:
        return real
    return (real, imag)


def to_mp(x: Any, mp: Any) -> Any:
    """Convert ints, Fractions, exact complex pairs or mpmath numbers into ``mp``."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, tuple) and len(x) == 2:
        return mp.mpc(to_mp(x[0], mp), to_mp(x[1], mp))
    if isinstance(x, str):
        return to_mp(parse_number(x), mp)
    return mp.convert(x)


def as_exact_int(x: Any) -> int | None:
    """The integer ``x`` is exactly equal to, else None."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else None
    if isinstance(x, tuple) and len(x) == 2:
        return as_exact_int(x[0]) if Fraction(x[1]) == 0 else None
    if hasattr(x, "_mpc_"):
        if x.imag != 0:
            return None
        x = x.real
    if hasattr(x, "_mpf_"):
        if mpmath.isint(x):
            return int(x)
        return None
    return None


def as_exact_rational(x: Any) -> Fraction | None:
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    value = as_exact_int(x)
    return Fraction(value) if value is not None else None


def is_real_value(x: Any) -> bool:
    if isinstance(x, (int, Fraction, float)):
        return True
    if isinstance(x, tuple):
        return Fraction(x[1]) == 0
    if hasattr(x, "_mpc_"):
        return x.imag == 0
    return True


def format_value(x: Any, digits: int) -> Dict[str, str]:
    """Decimal strings for JSON reports."""
    if isinstance(x, Fraction):
        return {"re": str(x), "im": "0", "exact": str(x)}
    mp = working_context(required_bits(digits, 5))
    value = to_mp(x, mp)
    if hasattr(value, "_mpc_"):
        return {"re": mp.nstr(value.real, digits), "im": mp.nstr(value.imag, digits)}
    return {"re": mp.nstr(value, digits), "im": "0"}


# Exact rationals

@lru_cache(maxsize=None)
def bernoulli_number(k: int) -> Fraction:
    """B_k with B_1 = -1/2."""
    if k < 0:
        raise ValueError("Bernoulli index must be non-negative")
    p, q = mpmath.bernfrac(k)
    return Fraction(int(p), int(q))


def bernoulli_polynomial_exact(k: int, x: Fraction) -> Fraction:
    x = Fraction(x)
    return sum(
        (math.comb(k, j) * bernoulli_number(j) * x ** (k - j) for j in range(k + 1)),
        Fraction(0),
    )


def bernoulli_polynomial(k: int, x: Any, ctx: PrecisionContext) -> Any:
    if isinstance(x, (int, Fraction)):
        return to_mp(bernoulli_polynomial_exact(k, Fraction(x)), ctx.mp)
    mp = ctx.mp
    return mp.bernpoly(k, to_mp(x, mp))


def harmonic_number(m: int) -> Fraction:
    return sum((Fraction(1, j) for j in range(1, m + 1)), Fraction(0))


def digamma_at_integer(m: int, ctx: PrecisionContext) -> Any:
    """psi(m) = H_{m-1} - gamma for positive integer m."""
    if m < 1:
        raise PoleAtNonPositiveInteger(f"digamma pole at {m}")
    mp = ctx.mp
    return to_mp(harmonic_number(m - 1), mp) - mp.euler


# Special functions

def hurwitz_zeta(s: Any, a: Any, ctx: PrecisionContext, derivative: int = 0) -> Any:
    """zeta(s, a) and its s-derivatives for 0 < a <= 1."""
    mp = ctx.mp
    if as_exact_int(s) == 1:
        raise PoleAtOne("Hurwitz zeta has a pole at s = 1")
    a_value = to_mp(a, mp)
    if not (0 < a_value <= 1):
        raise UnsupportedParameters(f"Hurwitz parameter a={a} outside (0, 1]")
    return mp.zeta(to_mp(s, mp), a_value, derivative)


class GammaKind(str, Enum):
    GAMMA = "gamma"
    DIGAMMA = "digamma"
    POLYGAMMA = "polygamma"
    LOG_GAMMA = "log_gamma"


def gamma_like(kind: GammaKind | str, z: Any, ctx: PrecisionContext, order: int = 1) -> Any:
    kind = GammaKind(kind)
    mp = ctx.mp
    n = as_exact_int(z)
    if n is not None and n <= 0:
        raise PoleAtNonPositiveInteger(f"{kind.value} has a pole at {n}")
    value = to_mp(z, mp)
    if kind is GammaKind.GAMMA:
        return mp.gamma(value)
    if kind is GammaKind.DIGAMMA:
        return mp.digamma(value)
    if kind is GammaKind.POLYGAMMA:
        return mp.psi(order, value)
    return mp.loggamma(value)


class Side(str, Enum):
    ABOVE = "above"
    BELOW = "below"


def _onto_side(z: Any, side: Side | None, mp: Any) -> Any:
    if hasattr(z, "_mpc_") and z.imag != 0:
        return z
    x = mp.re(z)
    if x <= 1:
        return z
    if side is None:
        raise OnBranchCut(f"z={mp.nstr(x, 10)} lies on the cut (1, inf); choose a side")
    eta = x * mp.ldexp(mp.one, -(mp.prec + 16))
    return mp.mpc(x, eta if Side(side) is Side.ABOVE else -eta)


def hyp2f1(a: Any, b: Any, c: Any, z: Any, ctx: PrecisionContext, side: Side | None = None) -> Any:
    """Gauss 2F1(a, b; c; z); on (1, inf) the side of the cut is explicit."""
    mp = ctx.mp
    n = as_exact_int(c)
    if n is not None and n <= 0:
        raise CNonPositiveInteger(f"c={n} is a non-positive integer")
    z = _onto_side(to_mp(z, mp), side, mp)
    return mp.hyp2f1(to_mp(a, mp), to_mp(b, mp), to_mp(c, mp), z)


def hyp2f1_pfaff(a: Any, b: Any, c: Any, z: Any, ctx: PrecisionContext) -> Any:
    """2F1 via the Pfaff transformation, for z <= 0."""
    mp = ctx.mp
    z = to_mp(z, mp)
    w = z / (z - 1)
    return (1 - z) ** (-to_mp(a, mp)) * hyp2f1(a, to_mp(c, mp) - to_mp(b, mp), c, w, ctx)


def hyp2f1_regularized(
    a: Any, b: Any, c: Any, z: Any, ctx: PrecisionContext, side: Side | None = None
) -> Any:
    """2F1(a, b; c; z) / Gamma(c), finite at c = -n."""
    mp = ctx.mp
    n = as_exact_int(c)
    if n is not None and n <= 0:
        k = -n + 1
        a_mp, b_mp = to_mp(a, mp), to_mp(b, mp)
        z_mp = _onto_side(to_mp(z, mp), side, mp)
        lead = mp.rf(a_mp, k) * mp.rf(b_mp, k) * z_mp**k / mp.factorial(k)
        if lead == 0:
            return mp.zero
        return lead * mp.hyp2f1(a_mp + k, b_mp + k, k + 1, z_mp)
    return hyp2f1(a, b, c, z, ctx, side) * mp.rgamma(to_mp(c, mp))


def hyp2f1_discontinuity(a: Any, b: Any, c: Any, t: Any, ctx: PrecisionContext) -> Any:
    """Closed form of 2F1(t + i0) - 2F1(t - i0) for real t > 1."""
    mp = ctx.mp
    a, b, c, t = (to_mp(v, mp) for v in (a, b, c, t))
    pref = 2j * mp.pi * mp.gamma(c) * mp.rgamma(a) * mp.rgamma(b)
    return pref * t ** (1 - c) * (t - 1) ** (c - a - b) * hyp2f1_regularized(
        1 - a, 1 - b, c - a - b + 1, 1 - t, ctx
    )


def polylog(s: Any, z: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    z = to_mp(z, mp)
    if abs(z) >= 1:
        raise OutsideUnitDisk(f"|z| = {mp.nstr(abs(z), 10)} is not below 1")
    if z == 0:
        return mp.zero
    return mp.polylog(to_mp(s, mp), z)


def sinpi(x: Any, ctx: PrecisionContext) -> Any:
    """sin(pi x), exactly zero at integers."""
    mp = ctx.mp
    value = to_mp(x, mp)
    if as_exact_int(x) is not None:
        return mp.zero
    if hasattr(value, "_mpc_"):
        return mp.sin(mp.pi * value)
    return mp.sinpi(value)


def cospi(x: Any, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    value = to_mp(x, mp)
    if hasattr(value, "_mpc_"):
        return mp.cos(mp.pi * value)
    return mp.cospi(value)


# Quadrature

def _endpoint_segment(
    g: Callable[[Any], Any],
    direction: Any,
    h: Any,
    decay: Any,
    ctx: PrecisionContext,
) -> Any:
    """int_0^h g(u direction) du for g ~ u^(decay - 1) at 0.

    With u = h e^{-x} the segment becomes a smooth integral over x in
    [0, inf) decaying like e^{-decay x}.
    """
    mp = ctx.mp

    def smooth(x: Any) -> Any:
        u = h * mp.exp(-x)
        return g(u * direction) * u

    return ray_integral(smooth, 0, ctx, scale=1 / decay)


def ray_integral(
    g: Callable[[Any], Any],
    theta: Any,
    ctx: PrecisionContext,
    scale: Any = 1,
    endpoint_power: Any = None,
) -> Any:
    """Integral of ``g`` along the ray arg t = theta from 0 to infinity.

    The ray is cut into geometric segments [0, h], [h, 2h], [2h, 4h], ...
    with h = scale/8, each integrated by tanh-sinh. Summation stops after
    two consecutive segments fall below the precision floor.

    ``endpoint_power`` declares g(t) ~ t^a at t = 0 with Re a > -1; the
    first segment is then integrated in logarithmic coordinates.
    """
    mp = ctx.mp
    direction = mp.expj(to_mp(theta, mp))
    floor = ctx.eps
    stall = mp.sqrt(ctx.tolerance)
    lo, hi = mp.zero, to_mp(scale, mp) / 8
    total = mp.zero
    if endpoint_power is not None:
        decay = mp.re(to_mp(endpoint_power, mp)) + 1
        if decay <= 0:
            raise NonConvergent("the integrand is not integrable at t = 0")
        total = _endpoint_segment(g, direction, hi, decay, ctx) * direction
        lo, hi = hi, 2 * hi
    quiet = 0
    for segment in range(MAX_RAY_SEGMENTS):
        value, err = mp.quad(lambda u: g(u * direction), [lo, hi], error=True)
        value *= direction
        total += value
        reference = max(abs(total), abs(value))
        if err > stall * max(reference, floor):
            raise QuadratureStall(
                f"segment [{mp.nstr(lo, 5)}, {mp.nstr(hi, 5)}] error estimate {mp.nstr(err, 5)}"
            )
        if err > ctx.tolerance * max(reference, floor):
            logger.warning("Quadrature error estimate %s on segment %d", mp.nstr(err, 5), segment)
        if abs(value) <= floor * max(abs(total), floor):
            quiet += 1
            if quiet >= 2:
                logger.debug("Ray integral converged after %d segments", segment + 1)
                return total
        else:
            quiet = 0
        lo, hi = hi, 2 * hi
    raise QuadratureStall(f"ray integral did not settle within {MAX_RAY_SEGMENTS} segments")


def laplace_ray_integral(
    f: Callable[[Any], Any], z: Any, theta: Any, ctx: PrecisionContext
) -> Any:
    """Integral of exp(-t z) f(t) along arg t = theta."""
    mp = ctx.mp
    z = to_mp(z, mp)
    rate = mp.re(z * mp.expj(to_mp(theta, mp)))
    if rate <= 0:
        raise NonConvergent("Re(z e^{i theta}) must be positive for the Laplace integral")
    return ray_integral(lambda t: mp.exp(-t * z) * f(t), theta, ctx, scale=1 / rate)
