from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Any, Dict, List, Tuple

import sympy
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy.core.function import AppliedUndef
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .asym import l_factor
from .chars import Character, character_from_conrey, epsilon, gauss_sum, kronecker_character
from .errors import (
    DenominatorZero,
    ImprimitiveCharacter,
    ParityViolation,
    ParseError,
    PoleAtOne,
    UnsupportedParameters,
)
from .lfunc import l_derivative, principal_residue
from .numerics import PrecisionContext, to_mp
from .qseries import QPoint, eisenstein_q_coeffs, eisenstein_value


logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENTS = 64
DEFAULT_MARGIN = 16
LATTICE_CUTOFF = 2000


# Exact q-expansions

class QExpansion(BaseModel):
    """q^offset * sum_n coefficients[n] q^n, known below q^(offset + len(coefficients))."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    offset: Fraction = Fraction(0)
    coefficients: Tuple[Fraction, ...] = ()

    @classmethod
    def constant(cls, value: Any, length: int) -> "QExpansion":
        return cls(coefficients=(Fraction(value),) + (Fraction(0),) * (length - 1))

    @property
    def length(self) -> int:
        return len(self.coefficients)

    @property
    def precision(self) -> Fraction:
        return self.offset + self.length

    def __add__(self, other: "QExpansion") -> "QExpansion":
        gap = other.offset - self.offset
        if gap.denominator != 1:
            raise UnsupportedParameters(
                f"cannot add q-expansions with offsets {self.offset} and {other.offset}"
            )
        low, high = (self, other) if gap >= 0 else (other, self)
        shift = int(abs(gap))
        length = int(min(self.precision, other.precision) - low.offset)
        values = list(low.coefficients[:length])
        for n, c in enumerate(high.coefficients[: max(0, length - shift)]):
            values[n + shift] += c
        return QExpansion(offset=low.offset, coefficients=tuple(values))

    def __neg__(self) -> "QExpansion":
        return self.scaled(-1)

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        return self + (-other)

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        length = min(self.length, other.length)
        a, b = self.coefficients, other.coefficients
        values = [Fraction(0)] * length
        for i in range(length):
            if a[i]:
                for j in range(length - i):
                    if b[j]:
                        values[i + j] += a[i] * b[j]
        return QExpansion(offset=self.offset + other.offset, coefficients=tuple(values))

    def scaled(self, factor: Any) -> "QExpansion":
        factor = Fraction(factor)
        return QExpansion(offset=self.offset, coefficients=tuple(factor * c for c in self.coefficients))

    def substituted(self, t: int) -> "QExpansion":
        """q -> q^t."""
        if t == 1:
            return self
        values = [Fraction(0)] * (self.length * t)
        for n, c in enumerate(self.coefficients):
            values[n * t] = c
        return QExpansion(offset=self.offset * t, coefficients=tuple(values))

    def truncated(self, length: int) -> "QExpansion":
        return QExpansion(offset=self.offset, coefficients=self.coefficients[:length])

    def stripped(self) -> "QExpansion":
        """Leading zero coefficients moved into the offset."""
        for n, c in enumerate(self.coefficients):
            if c:
                return QExpansion(offset=self.offset + n, coefficients=self.coefficients[n:])
        return QExpansion(offset=self.precision, coefficients=())

    @property
    def leading(self) -> Fraction | None:
        return next((c for c in self.coefficients if c), None)

    def normalized(self) -> Tuple["QExpansion", Fraction]:
        """Leading coefficient scaled to 1, together with that coefficient."""
        series = self.stripped()
        if not series.coefficients:
            raise DenominatorZero("the expansion vanishes to the known order")
        lead = series.coefficients[0]
        return series.scaled(1 / lead), lead

    def power(self, alpha: Any) -> "QExpansion":
        alpha = Fraction(alpha)
        if alpha.denominator == 1 and alpha >= 0:
            result = QExpansion.constant(1, self.length)
            for _ in range(int(alpha)):
                result = result * self
            return result.model_copy(update={"offset": self.offset * alpha})
        base, lead = self.normalized()
        values = _miller_power(list(base.coefficients), alpha)
        factor = _rational_power(lead, alpha)
        return QExpansion(
            offset=base.offset * alpha, coefficients=tuple(factor * v for v in values)
        )

    def as_exact(self) -> List[int | Fraction]:
        return [int(c) if c.denominator == 1 else c for c in self.coefficients]


def _miller_power(f: List[Fraction], alpha: Fraction) -> List[Fraction]:
    """f^alpha for a series with f[0] = 1."""
    g = [Fraction(1)] + [Fraction(0)] * (len(f) - 1)
    for n in range(1, len(f)):
        total = Fraction(0)
        for k in range(1, n + 1):
            if f[k]:
                total += ((alpha + 1) * k - n) * f[k] * g[n - k]
        g[n] = total / n
    return g


def _rational_power(value: Fraction, alpha: Fraction) -> Fraction:
    if alpha.denominator == 1:
        return value ** int(alpha)
    k = alpha.denominator
    if value < 0 and k % 2 == 0:
        raise UnsupportedParameters(f"no real {k}-th root of the leading coefficient {value}")
    roots = []
    for part in (abs(value.numerator), value.denominator):
        root, exact = sympy.integer_nthroot(part, k)
        if not exact:
            raise UnsupportedParameters(f"leading coefficient {value} has no rational {k}-th root")
        roots.append(int(root))
    base = Fraction(roots[0], roots[1]) * (-1 if value < 0 else 1)
    return base ** alpha.numerator


# Eta quotients

@lru_cache(maxsize=32)
def _euler_product(length: int) -> Tuple[int, ...]:
    """(q; q)_inf up to q^(length - 1) from the pentagonal numbers."""
    values = [0] * length
    k = 0
    while True:
        hits = False
        for j in ((k, -k) if k else (0,)):
            exponent = j * (3 * j - 1) // 2
            if exponent < length:
                values[exponent] += -1 if k % 2 else 1
                hits = True
        if not hits:
            return tuple(values)
        k += 1


def _integer_power(f: Tuple[int, ...], r: int) -> List[int]:
    """f^r with exact integer arithmetic, f[0] = 1, r of either sign."""
    g = [1] + [0] * (len(f) - 1)
    support = [k for k in range(1, len(f)) if f[k]]
    for n in range(1, len(f)):
        total = 0
        for k in support:
            if k > n:
                break
            total += ((r + 1) * k - n) * f[k] * g[n - k]
        g[n] = total // n
    return g


class EtaQuotient(BaseModel):
    """prod_j eta(q^t_j)^r_j."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    factors: Tuple[Tuple[int, int], ...] = ()
    level: int = 0

    @model_validator(mode="before")
    @classmethod
    def _fill_level(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("level"):
            data = dict(data)
            data["level"] = reduce(math.lcm, (int(t) for t, _ in data.get("factors", ())), 1)
        return data

    @model_validator(mode="after")
    def _check_factors(self) -> "EtaQuotient":
        if any(t < 1 for t, _ in self.factors):
            raise ValueError("eta arguments q^t need t >= 1")
        return self

    @classmethod
    def parse(cls, text: str, level: int = 0) -> "EtaQuotient":
        """``3^9,1^-3`` meaning eta(q^3)^9 / eta(q)^3."""
        factors = []
        for part in filter(None, (p.strip() for p in text.split(","))):
            t_text, _, r_text = part.partition("^")
            try:
                factors.append((int(t_text), int(r_text or 1)))
            except ValueError as exc:
                raise ParseError(f"bad eta factor {part!r} in {text!r}") from exc
        return cls(factors=tuple(factors), level=level)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(r for _, r in self.factors), 2)

    @property
    def offset(self) -> Fraction:
        """Exponent of the fractional q-power in front of the product."""
        return Fraction(sum(t * r for t, r in self.factors), 24)

    def expression(self) -> str:
        return "*".join(f"eta({t})^({r})" for t, r in self.factors) or "1"

    def to_expansion(self, length: int) -> QExpansion:
        coeffs = eta_expansion(self, length - 1)
        return QExpansion(offset=self.offset, coefficients=tuple(Fraction(c) for c in coeffs))


def eta_expansion(e: EtaQuotient, n_max: int) -> List[int]:
    """Coefficients of q^0 .. q^n_max of the quotient with q^offset removed."""
    length = n_max + 1
    result = [1] + [0] * n_max
    for t, r in e.factors:
        base = _integer_power(_euler_product(n_max // t + 1), r)
        spread = [0] * length
        for n, c in enumerate(base):
            if n * t < length:
                spread[n * t] = c
        result = [
            sum(result[i] * spread[n - i] for i in range(n + 1) if spread[n - i]) for n in range(length)
        ]
    return result


# Identity expressions

_FUNCTIONS = ("G", "G0", "X", "X0", "eta", "a", "c")
_TRANSFORMS = standard_transformations + (convert_xor,)

CUBIC_AGM = {
    "a": "(eta(1)^3 + 9*eta(9)^3)/eta(3)",
    "c": "3*eta(3)^3/eta(1)",
}


def parse_expression(text: str) -> sympy.Expr:
    """q-series expression over eta(t), G(m, D1, D2[, t]), X(m, r1, l1, r2, l2[, t]), a(t), c(t).

    G0 and X0 drop the constant term of the Eisenstein series.
    """
    names = {name: sympy.Function(name) for name in _FUNCTIONS}
    try:
        return parse_expr(text, local_dict=names, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise ParseError(f"cannot parse q-series expression {text!r}") from exc


def _int_args(node: Any, low: int, high: int) -> List[int]:
    args = list(node.args)
    if not low <= len(args) <= high or not all(a.is_Integer for a in args):
        raise ParseError(f"{node} expects {low}..{high} integer arguments")
    return [int(a) for a in args]


class _Evaluator:
    def __init__(self, length: int) -> None:
        self.length = length
        self._cache: Dict[Any, QExpansion] = {}

    def __call__(self, node: Any) -> QExpansion:
        cached = self._cache.get(node)
        if cached is None:
            cached = self._cache[node] = self._evaluate(node)
        return cached

    def _evaluate(self, node: Any) -> QExpansion:
        if node.is_Rational:
            return QExpansion.constant(Fraction(int(node.p), int(node.q)), self.length)
        if node.is_Add:
            return reduce(lambda x, y: x + y, (self(a) for a in node.args))
        if node.is_Mul:
            return reduce(lambda x, y: x * y, (self(a) for a in node.args))
        if node.is_Pow:
            exponent = node.args[1]
            if not exponent.is_Rational:
                raise ParseError(f"exponent {exponent} is not rational")
            return self(node.args[0]).power(Fraction(int(exponent.p), int(exponent.q)))
        if isinstance(node, AppliedUndef):
            return self._leaf(node)
        raise ParseError(f"unsupported term {node}")

    def _leaf(self, node: Any) -> QExpansion:
        name = node.func.__name__
        if name == "eta":
            (t,) = _int_args(node, 1, 1)
            return EtaQuotient(factors=((t, 1),)).to_expansion(self.length)
        if name in ("a", "c"):
            (t,) = _int_args(node, 0, 1) or [1]
            inner = self(parse_expression(CUBIC_AGM[name]))
            return inner.substituted(t).truncated(self.length)
        if name in ("G", "G0"):
            args = _int_args(node, 3, 4)
            m, chi1, chi2 = args[0], kronecker_character(args[1]), kronecker_character(args[2])
            t = args[3] if len(args) == 4 else 1
        else:
            args = _int_args(node, 5, 6)
            m = args[0]
            chi1 = character_from_conrey(args[1], args[2])
            chi2 = character_from_conrey(args[3], args[4])
            t = args[5] if len(args) == 6 else 1
        return self._eisenstein(m, chi1, chi2, t, name.endswith("0"))

    def _eisenstein(
        self, m: int, chi1: Character, chi2: Character, t: int, drop_constant: bool
    ) -> QExpansion:
        count = self.length // t + 1
        expansion = eisenstein_q_coeffs(m, chi1, chi2, count)
        if not expansion.exact:
            raise UnsupportedParameters("exact expansions need real characters")
        constant = Fraction(0) if drop_constant else Fraction(expansion.constant)
        values = (constant, *(Fraction(c) for c in expansion.coefficients))
        return QExpansion(coefficients=values).substituted(t).truncated(self.length)


def evaluate_expression(text: str, length: int) -> QExpansion:
    return _Evaluator(length)(parse_expression(text))


def cubic_agm(kind: str, n_max: int) -> QExpansion:
    """a(q) or c(q) through q^(offset + n_max); c carries the offset 1/3."""
    if kind not in CUBIC_AGM:
        raise ParseError(f"cubic AGM kind must be 'a' or 'c', got {kind!r}")
    return evaluate_expression(CUBIC_AGM[kind], n_max + 1 + DEFAULT_MARGIN).truncated(n_max + 1)


# Identity records

class EisensteinDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    d1: int
    d2: int

    def expression(self) -> str:
        return f"G({self.m},{self.d1},{self.d2})"

    def characters(self) -> Tuple[Character, Character]:
        return kronecker_character(self.d1), kronecker_character(self.d2)


class IdentityRecord(BaseModel):
    """lhs = rhs as exact q-series, compared after scaling both leading coefficients to 1."""

    model_config = ConfigDict(frozen=True)

    id: str
    lhs: str
    rhs: str
    source: str = ""
    level: int | None = None
    descriptor: EisensteinDescriptor | None = None

    @classmethod
    def from_table_row(
        cls, id: str, level: int, m: int, d1: int, d2: int, quotient: str, source: str = ""
    ) -> "IdentityRecord":
        descriptor = EisensteinDescriptor(m=m, d1=d1, d2=d2)
        eta = EtaQuotient.parse(quotient, level=level)
        if eta.weight != m:
            raise ParseError(f"{id}: eta quotient has weight {eta.weight}, expected {m}")
        return cls(
            id=id,
            lhs=descriptor.expression(),
            rhs=eta.expression(),
            source=source,
            level=level,
            descriptor=descriptor,
        )


class IdentityReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: str
    passed: bool
    checked: int
    offset: Fraction | None = None
    first_mismatch: int | None = None
    lhs_leading: Fraction | None = None
    rhs_leading: Fraction | None = None
    detail: str = ""

    def to_record(self) -> Dict[str, Any]:
        record = self.model_dump()
        for key in ("offset", "lhs_leading", "rhs_leading"):
            if record[key] is not None:
                record[key] = str(record[key])
        return record


def verify_identity(
    rec: IdentityRecord, n_max: int = DEFAULT_COEFFICIENTS, margin: int = DEFAULT_MARGIN
) -> IdentityReport:
    """Compare exact coefficients of both sides for the first n_max + 1 powers of q."""
    wanted = n_max + 1
    for attempt in range(4):
        length = wanted + margin * 2**attempt
        lhs, lhs_lead = evaluate_expression(rec.lhs, length).normalized()
        rhs, rhs_lead = evaluate_expression(rec.rhs, length).normalized()
        if min(lhs.length, rhs.length) >= wanted:
            break
        logger.debug("%s: %d coefficients known, widening", rec.id, min(lhs.length, rhs.length))
    else:
        return IdentityReport(id=rec.id, passed=False, checked=0, detail="precision lost")
    common = dict(id=rec.id, lhs_leading=lhs_lead, rhs_leading=rhs_lead)
    if lhs.offset != rhs.offset:
        return IdentityReport(
            **common,
            passed=False,
            checked=0,
            detail=f"leading powers differ: q^{lhs.offset} vs q^{rhs.offset}",
        )
    for n in range(wanted):
        if lhs.coefficients[n] != rhs.coefficients[n]:
            logger.info("%s fails at q^(%s + %d)", rec.id, lhs.offset, n)
            return IdentityReport(
                **common, passed=False, checked=n, offset=lhs.offset, first_mismatch=n
            )
    return IdentityReport(**common, passed=True, checked=wanted, offset=lhs.offset)


# Fricke involution

def _check_weight(m: int, chi1: Character, chi2: Character) -> None:
    if m < 1 or (m - chi1.parity_kappa - chi2.parity_kappa) % 2:
        raise ParityViolation(
            f"weight {m} needs the parity of kappa1 + kappa2 = "
            f"{chi1.parity_kappa + chi2.parity_kappa}"
        )
    if not (chi1.is_primitive and chi2.is_primitive):
        raise ImprimitiveCharacter("twisted Eisenstein series need primitive characters")


def fricke_factor(m: int, chi1: Character, chi2: Character, ctx: PrecisionContext) -> Any:
    """i^(kappa1+kappa2) eps1 eps2 r1^(1/2-m) r2^(-1/2)."""
    mp = ctx.mp
    r1, r2 = chi1.modulus, chi2.modulus
    return (
        mp.mpc(0, 1) ** (chi1.parity_kappa + chi2.parity_kappa)
        * epsilon(chi1, ctx)
        * epsilon(chi2, ctx)
        * mp.power(r1, mp.mpf(1) / 2 - m)
        / mp.sqrt(r2)
    )


def fricke_residual_eisenstein(
    m: int, chi1: Character, chi2: Character, tau: QPoint, ctx: PrecisionContext
) -> Any:
    """G_m(chi1, chi2; tau) minus its Fricke image; vanishes for admissible weights."""
    _check_weight(m, chi1, chi2)
    if chi1.is_trivial and chi2.is_trivial:
        raise UnsupportedParameters("the Fricke relation needs a non-trivial character")
    mp = ctx.mp
    level = chi1.modulus * chi2.modulus
    lhs = eisenstein_value(m, chi1, chi2, tau, ctx)
    dual = eisenstein_value(m, chi2.conj(), chi1.conj(), tau.fricke(level, ctx), ctx)
    rhs = fricke_factor(m, chi1, chi2, ctx) * mp.power(to_mp(tau.tau, mp), -m) * dual
    return lhs - rhs


def lattice_sum_oracle(
    m: int,
    chi1: Character,
    chi2: Character,
    tau: QPoint,
    cutoff: int = LATTICE_CUTOFF,
    ctx: PrecisionContext | None = None,
) -> Any:
    """sum chi1(n) conj(chi2)(k) / (n r2 tau + k)^m, normalised to match the q-series of G_m.

    The k-sum runs over |k| <= cutoff; rows n stop once the row sums fall
    below the working precision.
    """
    if m < 3:
        raise UnsupportedParameters("the lattice sum converges absolutely only for m >= 3")
    ctx = ctx or PrecisionContext.from_digits(15, guard_digits=0)
    mp = ctx.mp
    r2 = chi2.modulus
    t = to_mp(tau.tau, mp)
    decay = 2 * mp.pi * r2 * mp.im(t)
    rows = min(cutoff, int(mp.ceil((ctx.target_digits + 3) * mp.log(10) / decay)) + 2)
    dual = chi2.conj()
    column_weights = [dual.mp_value(k, mp) for k in range(r2)]
    total = mp.zero
    for n in range(-rows, rows + 1):
        a = chi1.mp_value(n, mp)
        if a == 0:
            continue
        x = n * r2 * t
        row = mp.zero
        for k in range(-cutoff, cutoff + 1):
            if n == 0 and k == 0:
                continue
            b = column_weights[k % r2]
            if b != 0:
                row += b * mp.power(x + k, -m)
        total += a * row
    logger.debug("Lattice sum over %d rows and %d columns", 2 * rows + 1, 2 * cutoff + 1)
    norm = (
        2
        * mp.power(r2, -m)
        * gauss_sum(dual, ctx)
        * mp.power(mp.mpc(0, -2) * mp.pi, m)
        / mp.factorial(m - 1)
    )
    return total / norm


# Period polynomials and Eichler integrals

def l_product(chi1: Character, a: int, chi2: Character, b: int, ctx: PrecisionContext) -> Any:
    """L(chi1, a) L(chi2, b), with a pole of L(chi1, s) at a = 1 cancelled by a zero at b."""
    if chi1.is_principal and a == 1:
        if l_factor(chi2, b, ctx) != 0:
            raise PoleAtOne(f"L(chi_{chi1.label}, 1) L(chi_{chi2.label}, {b}) diverges")
        return to_mp(principal_residue(chi1.modulus), ctx.mp) * l_derivative(chi2, b, ctx)
    first = l_factor(chi1, a, ctx)
    second = l_factor(chi2, b, ctx)
    if first == 0 or second == 0:
        return ctx.mp.zero
    return to_mp(first, ctx.mp) * to_mp(second, ctx.mp)


def period_polynomial(
    m: int, chi1: Character, chi2: Character, tau: Any, ctx: PrecisionContext
) -> Any:
    """-sum_{l=0}^{m-2} (m-2)!/(m-l-2)! L(chi1, l+1) L(chi2, l+2-m) tau^(m-l-2) / (2 pi i)^(l+1)."""
    _check_weight(m, chi1, chi2)
    mp = ctx.mp
    tau = to_mp(tau.tau if isinstance(tau, QPoint) else tau, mp)
    two_pi_i = mp.mpc(0, 2) * mp.pi
    total = mp.zero
    for ell in range(m - 1):
        ratio = math.factorial(m - 2) // math.factorial(m - ell - 2)
        product = l_product(chi1, ell + 1, chi2, ell + 2 - m, ctx)
        total += ratio * product * mp.power(tau, m - ell - 2) / two_pi_i ** (ell + 1)
    return -total


def int_ell_closed(m: int, ell: int, chi1: Character, chi2: Character, ctx: PrecisionContext) -> Any:
    """l! / (-2 pi i)^(l+1) L(chi1, l+1) L(chi2, l+2-m)."""
    mp = ctx.mp
    product = l_product(chi1, ell + 1, chi2, ell + 2 - m, ctx)
    return mp.factorial(ell) * product / (mp.mpc(0, -2) * mp.pi) ** (ell + 1)


def int_ell_quadrature(
    m: int, ell: int, chi1: Character, chi2: Character, ctx: PrecisionContext
) -> Any:
    """Integral of tau1^l G^0_m(chi1, chi2; tau1) along the imaginary axis from 0 to i oo.

    Below the Fricke fixed point the integrand is evaluated through the
    dual series, which must have no constant term.
    """
    _check_weight(m, chi1, chi2)
    if ell < 0:
        raise UnsupportedParameters("the moment l must be non-negative")
    mp = ctx.mp
    dual1, dual2 = chi2.conj(), chi1.conj()
    constant = eisenstein_q_coeffs(m, chi1, chi2, 1, ctx).constant
    dual_constant = eisenstein_q_coeffs(m, dual1, dual2, 1, ctx).constant
    if dual_constant != 0:
        raise UnsupportedParameters("the moment integral diverges at 0 when the dual series has a constant")
    level = chi1.modulus * chi2.modulus
    pivot = 1 / mp.sqrt(level)
    factor = fricke_factor(m, chi1, chi2, ctx)
    a = to_mp(constant, mp)

    def near_zero(t: Any) -> Any:
        dual_point = QPoint.from_y(1 / (level * t), ctx)
        dual = eisenstein_value(m, dual1, dual2, dual_point, ctx)
        return mp.power(t, ell) * (factor * mp.power(mp.mpc(0, t), -m) * dual - a)

    def far(t: Any) -> Any:
        value = eisenstein_value(m, chi1, chi2, QPoint.from_y(t, ctx), ctx, include_constant=False)
        return mp.power(t, ell) * value

    inner = mp.quad(near_zero, [0, pivot]) + mp.quad(far, [pivot, mp.inf])
    return mp.mpc(0, 1) ** (ell + 1) * inner


def tangential_integral(coefficients: List[Any], tau: Any, ctx: PrecisionContext) -> Any:
    """Regularised integral from tau to i oo of sum_k c_k tau1^k: -sum_k c_k tau^(k+1)/(k+1)."""
    mp = ctx.mp
    tau = to_mp(tau, mp)
    return -sum(
        (to_mp(c, mp) * mp.power(tau, k + 1) / (k + 1) for k, c in enumerate(coefficients)),
        mp.zero,
    )


def eichler_constant_term(c: Any, s1: int, tau: Any, ctx: PrecisionContext) -> Any:
    """-(2 pi i)^s1 / Gamma(s1) times the regularised integral of (tau - tau1)^(s1-1) c."""
    mp = ctx.mp
    tau = to_mp(tau, mp)
    kernel = [
        math.comb(s1 - 1, k) * (-1) ** k * mp.power(tau, s1 - 1 - k) * to_mp(c, mp)
        for k in range(s1)
    ]
    return -mp.power(mp.mpc(0, 2) * mp.pi, s1) / mp.factorial(s1 - 1) * tangential_integral(
        kernel, tau, ctx
    )


def eichler_integral(
    s1: int, m: int, chi1: Character, chi2: Character, tau: QPoint, ctx: PrecisionContext
) -> Any:
    """Xi_{s1, s1-m+1}(chi1, chi2; tau) as an Eichler integral of G_m(chi1, chi2).

    The non-constant part is integrated numerically along tau + i t; the
    constant term uses the tangential-basepoint prescription and is then
    removed again together with A_m (2 pi i tau)^s1 / s1!.
    """
    if s1 < 1:
        raise UnsupportedParameters("the Eichler integral needs a positive integer s1")
    _check_weight(m, chi1, chi2)
    mp = ctx.mp
    t0 = to_mp(tau.tau, mp)
    minus_i = mp.mpc(0, -1)

    def integrand(t: Any) -> Any:
        point = QPoint.from_tau(t0 + mp.mpc(0, t), ctx)
        g0 = eisenstein_value(m, chi1, chi2, point, ctx, include_constant=False)
        return mp.power(minus_i * t, s1 - 1) * g0

    quadrature = mp.mpc(0, 1) * mp.quad(integrand, [0, mp.inf])
    two_pi_i = mp.mpc(0, 2) * mp.pi
    nonconstant = -mp.power(two_pi_i, s1) / mp.factorial(s1 - 1) * quadrature
    a = eisenstein_q_coeffs(m, chi1, chi2, 1, ctx).constant
    regularised = eichler_constant_term(a, s1, t0, ctx)
    correction = mp.power(two_pi_i * t0, s1) / mp.factorial(s1) * to_mp(a, mp)
    logger.debug("Eichler integral s1=%d m=%d: constant %s", s1, m, a)
    return nonconstant + regularised - correction
