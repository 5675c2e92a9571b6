from __future__ import annotations

import logging
import math
import os
import tempfile
import threading
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .chars import TRIVIAL, Character, conductor_and_primitivize, divisors, moebius, prime_divisors
from .config import get_settings
from .errors import (
    DenominatorZero,
    OutsideUnitDisk,
    ParityViolation,
    ParseError,
    SlowConvergence,
)
from .lfunc import l_negative_integer_exact, l_value
from .numerics import (
    PrecisionContext,
    as_exact_int,
    is_real_value,
    parse_number,
    polylog,
    to_mp,
)


logger = logging.getLogger(__name__)

SLOW_RADIUS = Fraction(999, 1000)
QUIET_TERMS = 5


# Points and parameters

class QPoint(BaseModel):
    """One evaluation point: tau, y = -i tau and q = exp(2 pi i tau)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tau: Any
    y: Any
    q: Any

    @classmethod
    def from_tau(cls, tau: Any, ctx: PrecisionContext) -> "QPoint":
        mp = ctx.mp
        tau = to_mp(tau, mp)
        if mp.im(tau) <= 0:
            raise OutsideUnitDisk("tau must lie in the upper half-plane")
        if mp.re(tau) == 0:
            y = mp.im(tau)
            return cls(tau=mp.mpc(0, y), y=y, q=mp.exp(-2 * mp.pi * y))
        return cls(tau=tau, y=-1j * tau, q=mp.expjpi(2 * tau))

    @classmethod
    def from_y(cls, y: Any, ctx: PrecisionContext) -> "QPoint":
        mp = ctx.mp
        return cls.from_tau(1j * to_mp(y, mp), ctx)

    @classmethod
    def from_q(cls, q: Any, ctx: PrecisionContext) -> "QPoint":
        mp = ctx.mp
        q = to_mp(q, mp)
        if q == 0 or abs(q) >= 1:
            raise OutsideUnitDisk("q must satisfy 0 < |q| < 1")
        tau = mp.log(q) / (2j * mp.pi)
        point = cls.from_tau(tau, ctx)
        return point.model_copy(update={"q": q})

    @classmethod
    def parse(cls, text: str, ctx: PrecisionContext) -> "QPoint":
        """``0.3i``, ``0.2+0.3i``, ``y=0.3`` or ``q=0.5``."""
        raw = text.strip().replace(" ", "")
        if raw.startswith("y="):
            return cls.from_y(parse_number(raw[2:]), ctx)
        if raw.startswith("q="):
            return cls.from_q(parse_number(raw[2:]), ctx)
        if raw.startswith("tau="):
            raw = raw[4:]
        value = parse_number(raw)
        if not isinstance(value, tuple):
            raise ParseError(f"tau={text!r} is real; write it as '{text}i' or 'y={text}'")
        return cls.from_tau(value, ctx)

    def fricke(self, level: int, ctx: PrecisionContext) -> "QPoint":
        """The point -1/(level * tau)."""
        mp = ctx.mp
        return QPoint.from_tau(-1 / (level * to_mp(self.tau, mp)), ctx)

    def scaled(self, factor: Any, ctx: PrecisionContext) -> "QPoint":
        """The point factor * tau, i.e. q -> q^factor for integer factors."""
        mp = ctx.mp
        return QPoint.from_tau(to_mp(factor, mp) * to_mp(self.tau, mp), ctx)

    @property
    def is_imaginary_axis(self) -> bool:
        return is_real_value(self.y)


class SeriesParams(BaseModel):
    """Parameters (s1, s2, chi1, chi2) of Xi_{s1,s2}(chi1, chi2; q)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s1: Any = 0
    s2: Any = 0
    chi1: Character = TRIVIAL
    chi2: Character = TRIVIAL

    @field_validator("s1", "s2", mode="before")
    @classmethod
    def _parse(cls, value: Any) -> Any:
        if isinstance(value, str):
            return parse_number(value)
        if isinstance(value, int) and not isinstance(value, bool):
            return Fraction(value)
        return value

    def swapped(self) -> "SeriesParams":
        return SeriesParams(s1=self.s2, s2=self.s1, chi1=self.chi2, chi2=self.chi1)

    def shifted(self, n: int) -> "SeriesParams":
        return SeriesParams(
            s1=_add_exact(self.s1, n), s2=_add_exact(self.s2, n), chi1=self.chi1, chi2=self.chi2
        )

    @property
    def integer_pair(self) -> Tuple[int, int] | None:
        a, b = as_exact_int(self.s1), as_exact_int(self.s2)
        if a is None or b is None:
            return None
        return a, b

    @property
    def kappa_sum(self) -> int:
        return self.chi1.parity_kappa + self.chi2.parity_kappa

    @property
    def is_terminating(self) -> bool:
        """s1, s2 integers with s1 + s2 = kappa1 + kappa2 + 1 mod 2."""
        pair = self.integer_pair
        if pair is None:
            return False
        return (pair[0] + pair[1] - self.kappa_sum - 1) % 2 == 0

    def describe(self) -> str:
        return f"Xi_{{{self.s1},{self.s2}}}(chi_{self.chi1.label}, chi_{self.chi2.label})"


def _add_exact(x: Any, n: int) -> Any:
    if isinstance(x, (int, Fraction)):
        return Fraction(x) + n
    if isinstance(x, tuple):
        return (Fraction(x[0]) + n, x[1])
    return x + n


# Divisor sums

def _exact_power(n: int, s: int) -> int | Fraction:
    return n**s if s >= 0 else Fraction(1, n ** (-s))


def _exact_chars(*chis: Character) -> bool:
    return all(chi.is_real for chi in chis)


def sigma_double(
    s: Any, chi1: Character, chi2: Character, n: int, ctx: PrecisionContext | None = None
) -> Any:
    """sum_{d | n} chi1(n/d) chi2(d) d^s; exact for integer s and real characters."""
    if n < 1:
        raise ValueError("n must be positive")
    k = as_exact_int(s)
    if k is not None and _exact_chars(chi1, chi2):
        total: int | Fraction = 0
        for d in divisors(n):
            weight = chi1.real_value(n // d) * chi2.real_value(d)
            if weight:
                total += weight * _exact_power(d, k)
        return total
    ctx = ctx or PrecisionContext.from_digits(30)
    mp = ctx.mp
    s_mp = to_mp(s, mp)
    total = mp.zero
    for d in divisors(n):
        if chi1.angle(n // d) is None or chi2.angle(d) is None:
            continue
        total += chi1.mp_value(n // d, mp) * chi2.mp_value(d, mp) * mp.power(d, s_mp)
    return total


def sigma_single(
    kind: Literal["twisted", "alt"],
    s: Any,
    chi: Character,
    n: int,
    ctx: PrecisionContext | None = None,
) -> Any:
    """sigma'_{s,chi}(n) (twisted, chi on n/d) or sigma_{s,chi}(n) (alt, chi on d)."""
    if kind == "twisted":
        return sigma_double(s, chi, TRIVIAL, n, ctx)
    if kind == "alt":
        return sigma_double(s, TRIVIAL, chi, n, ctx)
    raise ValueError(f"unknown divisor-sum kind {kind!r}")


def principal_divisor_sum(s: int, r: int, n: int) -> int | Fraction:
    """sum_{d | gcd(r, n)} mu(d) sigma_s(n/d), the Moebius form of sigma'_{s, chi_{r,1}}(n)."""
    total: int | Fraction = 0
    for d in divisors(math.gcd(r, n)):
        mu = moebius(d)
        if mu:
            total += mu * sigma_double(s, TRIVIAL, TRIVIAL, n // d)
    return total


# Coefficient arrays

def _weights(chi: Character, s: Any, count: int, mp: Any) -> List[Any]:
    s_mp = to_mp(s, mp)
    out = [mp.zero] * (count + 1)
    for n in range(1, count + 1):
        if chi.angle(n) is not None:
            out[n] = chi.mp_value(n, mp) * mp.power(n, -s_mp)
    return out


def xi_coefficients(p: SeriesParams, count: int, ctx: PrecisionContext) -> List[Any]:
    """c[N] = sum_{n1 n2 = N} chi1(n1) n1^-s1 chi2(n2) n2^-s2 for N <= count; c[0] = 0."""
    mp = ctx.mp
    w1 = _weights(p.chi1, p.s1, count, mp)
    w2 = _weights(p.chi2, p.s2, count, mp)
    coeffs = [mp.zero] * (count + 1)
    for n1 in range(1, count + 1):
        a = w1[n1]
        if a == 0:
            continue
        for n2 in range(1, count // n1 + 1):
            b = w2[n2]
            if b != 0:
                coeffs[n1 * n2] += a * b
    return coeffs


def xi_coefficients_exact(p: SeriesParams, count: int) -> List[Fraction]:
    """Exact version of ``xi_coefficients`` for integer s1, s2 and real characters."""
    pair = p.integer_pair
    if pair is None or not _exact_chars(p.chi1, p.chi2):
        raise ValueError("exact coefficients need integer s1, s2 and real characters")
    s1, s2 = pair
    coeffs = [Fraction(0)] * (count + 1)
    for n1 in range(1, count + 1):
        a = p.chi1.real_value(n1)
        if not a:
            continue
        a_term = a * Fraction(_exact_power(n1, -s1))
        for n2 in range(1, count // n1 + 1):
            b = p.chi2.real_value(n2)
            if b:
                coeffs[n1 * n2] += a_term * b * _exact_power(n2, -s2)
    return coeffs


def _growth_exponent(*exponents: Any) -> float:
    growth = 1.0
    for e in exponents:
        re = float(to_mp(e, PrecisionContext.from_digits(5).mp).real)
        growth += max(0.0, -re)
    return growth


def truncation_length(q_abs: Any, growth: float, ctx: PrecisionContext) -> int:
    """Smallest N with |q|^N N^growth / (1 - |q|) below the precision floor."""
    mp = ctx.mp
    q_abs = to_mp(q_abs, mp)
    if q_abs >= SLOW_RADIUS.numerator / mp.mpf(SLOW_RADIUS.denominator):
        raise SlowConvergence(
            f"|q| = {mp.nstr(q_abs, 8)} is too close to 1 for direct summation; "
            "use the transseries path"
        )
    if q_abs == 0:
        return 1
    log_q = mp.log(q_abs)
    target = mp.log(ctx.eps * (1 - q_abs))
    n = max(1, int(mp.ceil(target / log_q)))
    while n * log_q + growth * mp.log(n) > target:
        n = int(n * 1.1) + 1
    return n + QUIET_TERMS


def evaluate_coefficients(coeffs: List[Any], q: Any, mp: Any) -> Any:
    total = mp.zero
    power = mp.one
    for c in coeffs[1:]:
        power *= q
        if c != 0:
            total += c * power
    return total


def xi_direct(p: SeriesParams, z: QPoint, ctx: PrecisionContext) -> Any:
    """Xi_{s1,s2}(chi1, chi2; q) by direct summation of its q-expansion."""
    mp = ctx.mp
    q = to_mp(z.q, mp)
    count = truncation_length(abs(q), _growth_exponent(p.s1, p.s2), ctx)
    logger.debug("xi_direct %s: %d terms", p.describe(), count)
    coeffs = xi_coefficients(p, count, ctx)
    return evaluate_coefficients(coeffs, q, mp)


# Lambert series

def phi0_closed(chi: Character, x: Any, ctx: PrecisionContext | None = None) -> Any:
    """Phi_0(chi; x) = sum_{a unit} chi(a) x^a / (1 - x^r)."""
    r = chi.modulus
    if isinstance(x, (int, Fraction)) and chi.is_real:
        x = Fraction(x)
        denominator = 1 - x**r
        if denominator == 0:
            raise DenominatorZero(f"1 - x^{r} vanishes at x={x}")
        numerator = sum((chi.real_value(a) * x**a for a in range(1, r + 1)), Fraction(0))
        return numerator / denominator
    ctx = ctx or PrecisionContext.from_digits(30)
    mp = ctx.mp
    x = to_mp(x, mp)
    denominator = 1 - x**r
    if denominator == 0:
        raise DenominatorZero(f"1 - x^{r} vanishes")
    numerator = mp.zero
    for a in range(1, r + 1):
        if chi.angle(a) is not None:
            numerator += chi.mp_value(a, mp) * x**a
    return numerator / denominator


def phi(s: Any, chi: Character, z: QPoint, ctx: PrecisionContext) -> Any:
    """Phi_s(chi; q) = sum_n chi(n) n^-s q^n."""
    mp = ctx.mp
    q = to_mp(z.q, mp)
    count = truncation_length(abs(q), _growth_exponent(s), ctx)
    weights = _weights(chi, s, count, mp)
    return evaluate_coefficients(weights, q, mp)


def lambert(s: Any, chi1: Character, chi2: Character, z: QPoint, ctx: PrecisionContext) -> Any:
    """sum_n chi1(n) n^-s Phi_0(chi2; q^n), which is Xi_{s,0}(chi1, chi2; q)."""
    mp = ctx.mp
    q = to_mp(z.q, mp)
    count = truncation_length(abs(q), _growth_exponent(s), ctx)
    s_mp = to_mp(s, mp)
    total = mp.zero
    power = mp.one
    for n in range(1, count + 1):
        power *= q
        if chi1.angle(n) is None:
            continue
        total += chi1.mp_value(n, mp) * mp.power(n, -s_mp) * phi0_closed(chi2, power, ctx)
    return total


def lambert_tilde(s: Any, chi: Character, z: QPoint, ctx: PrecisionContext) -> Any:
    """sum_n chi(n) Li_s(q^n), which is Xi_{0,s}(chi, chi_{1,1}; q)."""
    mp = ctx.mp
    q = to_mp(z.q, mp)
    count = truncation_length(abs(q), _growth_exponent(s), ctx)
    total = mp.zero
    power = mp.one
    for n in range(1, count + 1):
        power *= q
        if chi.angle(n) is not None:
            total += chi.mp_value(n, mp) * polylog(s, power, ctx)
    return total


# Twisted Eisenstein series

class EisensteinExpansion(BaseModel):
    """G_m(chi1, chi2; q) = constant + sum_{n>=1} coefficients[n-1] q^n."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int
    chi1: Character
    chi2: Character
    constant: Any
    coefficients: List[Any] = Field(default_factory=list)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in [self.constant, *self.coefficients])

    def as_list(self) -> List[Any]:
        """Constant term followed by the coefficients, index = power of q."""
        return [self.constant, *self.coefficients]


def exact_l_nonpositive(chi: Character, k: int) -> Fraction:
    """L(chi, -k) exactly for a real character, primitive or not."""
    if chi.is_primitive:
        return l_negative_integer_exact(chi, k)
    _, primitive = conductor_and_primitivize(chi)
    value = l_negative_integer_exact(primitive, k)
    for p in prime_divisors(chi.modulus):
        value *= 1 - primitive.real_value(p) * Fraction(p) ** k
    return value


def eisenstein_constant(
    m: int, chi1: Character, chi2: Character, ctx: PrecisionContext | None = None
) -> Any:
    """A_m: L(chi2, 1-m)/2 if chi1 is trivial, delta_{m,1} L(chi1, 0)/2 if chi2 is, else 0."""
    if chi1.is_trivial:
        target, k = chi2, m - 1
    elif chi2.is_trivial and m == 1:
        target, k = chi1, 0
    else:
        return Fraction(0)
    if target.is_real:
        return exact_l_nonpositive(target, k) / 2
    ctx = ctx or PrecisionContext.from_digits(30)
    return l_value(target, -k, ctx, via_primitive=True) / 2


class DivisorSumCache:
    """Exact Eisenstein coefficient lists keyed by (m, chi1, chi2), optionally on disk."""

    FILE_NAME = "divisor_sums.json"

    def __init__(self, directory: Path | None) -> None:
        self.directory = directory
        self._lock = threading.Lock()
        self._entries: Dict[str, List[str]] = {}
        if directory is not None:
            self._load()

    @staticmethod
    def key(m: int, chi1: Character, chi2: Character) -> str:
        return f"{m}|{chi1.label}|{chi2.label}"

    @property
    def path(self) -> Path | None:
        return self.directory / self.FILE_NAME if self.directory else None

    def _load(self) -> None:
        path = self.path
        if path is None or not path.exists():
            return
        try:
            stored = _CacheFile.model_validate_json(path.read_text())
        except ValueError:
            logger.warning("Ignoring unreadable divisor-sum cache at %s", path)
            return
        self._entries = dict(stored.entries)
        logger.debug("Loaded %d cached divisor-sum lists", len(self._entries))

    def get(self, key: str, count: int) -> List[int | Fraction] | None:
        with self._lock:
            stored = self._entries.get(key)
        if stored is None or len(stored) < count:
            return None
        logger.debug("Divisor-sum cache hit %s", key)
        return [_parse_exact(v) for v in stored[:count]]

    def put(self, key: str, values: List[int | Fraction]) -> None:
        encoded = [str(v) for v in values]
        with self._lock:
            current = self._entries.get(key)
            if current is not None and len(current) >= len(encoded):
                return
            self._entries[key] = encoded
            if self.path is not None:
                self._write(_CacheFile(entries=self._entries).model_dump_json())

    def _write(self, payload: str) -> None:
        """Replace the cache file atomically; readers see the old or the new file."""
        path = self.path
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".divisor_sums.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


class _CacheFile(BaseModel):
    entries: Dict[str, List[str]] = Field(default_factory=dict)


def _parse_exact(text: str) -> int | Fraction:
    value = Fraction(text)
    return int(value) if value.denominator == 1 else value


@lru_cache(maxsize=1)
def get_divisor_cache() -> DivisorSumCache:
    return DivisorSumCache(get_settings().cache_dir)


def eisenstein_q_coeffs(
    m: int,
    chi1: Character,
    chi2: Character,
    count: int,
    ctx: PrecisionContext | None = None,
) -> EisensteinExpansion:
    """A_m and sigma_{m-1}(chi1, chi2; n) for n <= count."""
    if m < 1:
        raise ValueError("weight m must be positive")
    constant = eisenstein_constant(m, chi1, chi2, ctx)
    if _exact_chars(chi1, chi2):
        cache = get_divisor_cache()
        key = DivisorSumCache.key(m, chi1, chi2)
        coeffs = cache.get(key, count)
        if coeffs is None:
            coeffs = _exact_sigma_sieve(m - 1, chi1, chi2, count)
            cache.put(key, coeffs)
        return EisensteinExpansion(m=m, chi1=chi1, chi2=chi2, constant=constant, coefficients=coeffs)
    ctx = ctx or PrecisionContext.from_digits(30)
    mp = ctx.mp
    values = [mp.zero] * (count + 1)
    for d in range(1, count + 1):
        if chi2.angle(d) is None:
            continue
        weight = chi2.mp_value(d, mp) * mp.power(d, m - 1)
        for k in range(1, count // d + 1):
            if chi1.angle(k) is not None:
                values[d * k] += weight * chi1.mp_value(k, mp)
    return EisensteinExpansion(
        m=m, chi1=chi1, chi2=chi2, constant=constant, coefficients=values[1:]
    )


def _exact_sigma_sieve(s: int, chi1: Character, chi2: Character, count: int) -> List[int]:
    values = [0] * (count + 1)
    for d in range(1, count + 1):
        b = chi2.real_value(d)
        if not b:
            continue
        weight = b * d**s
        for k in range(1, count // d + 1):
            a = chi1.real_value(k)
            if a:
                values[d * k] += weight * a
    return values[1:]


def eisenstein_value(
    m: int,
    chi1: Character,
    chi2: Character,
    z: QPoint,
    ctx: PrecisionContext,
    include_constant: bool = True,
) -> Any:
    """G_m(chi1, chi2; tau) summed as a q-series."""
    mp = ctx.mp
    q = to_mp(z.q, mp)
    count = truncation_length(abs(q), float(m) + 1, ctx)
    expansion = eisenstein_q_coeffs(m, chi1, chi2, count, ctx)
    total = evaluate_coefficients([0, *expansion.coefficients], q, mp)
    if include_constant:
        total += to_mp(expansion.constant, mp)
    return total


class QDerivativeReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    checked: int
    passed: bool
    first_mismatch: int | None = None


def qderivative_check(
    p: SeriesParams, count: int, ctx: PrecisionContext | None = None
) -> QDerivativeReport:
    """(q d/dq)^{s1} Xi_{s1,s2} = G^0_m with m = s1 - s2 + 1, coefficient by coefficient."""
    pair = p.integer_pair
    if pair is None:
        raise ParityViolation("the differential equation needs integer s1 and s2")
    s1, s2 = pair
    m = s1 - s2 + 1
    if m < 1 or (m - p.kappa_sum) % 2:
        raise ParityViolation(
            f"m = {m} must be positive with the parity of kappa1 + kappa2 = {p.kappa_sum}"
        )
    expansion = eisenstein_q_coeffs(m, p.chi1, p.chi2, count, ctx)
    if _exact_chars(p.chi1, p.chi2):
        xi = xi_coefficients_exact(p, count)
        for n in range(1, count + 1):
            if xi[n] * _exact_power(n, s1) != expansion.coefficients[n - 1]:
                return QDerivativeReport(m=m, checked=n, passed=False, first_mismatch=n)
        return QDerivativeReport(m=m, checked=count, passed=True)
    ctx = ctx or PrecisionContext.from_digits(30)
    mp = ctx.mp
    xi = xi_coefficients(p, count, ctx)
    for n in range(1, count + 1):
        derived = xi[n] * mp.power(n, s1)
        if abs(derived - expansion.coefficients[n - 1]) > ctx.tolerance * max(1, abs(derived)):
            return QDerivativeReport(m=m, checked=n, passed=False, first_mismatch=n)
    return QDerivativeReport(m=m, checked=count, passed=True)


# Export

class ExpansionRecord(BaseModel):
    n: int
    coefficient: str


def export_expansion(coeffs: List[Any], fmt: Literal["text", "json"] = "text", digits: int = 30) -> str:
    """``n coefficient`` lines (index = power of q) or the same content as JSON."""
    records = []
    for n, c in enumerate(coeffs):
        if isinstance(c, (int, Fraction)):
            text = str(c)
        else:
            ctx = PrecisionContext.from_digits(digits)
            text = ctx.mp.nstr(to_mp(c, ctx.mp), digits)
        records.append(ExpansionRecord(n=n, coefficient=text))
    if fmt == "json":
        return "[" + ",".join(r.model_dump_json() for r in records) + "]"
    return "\n".join(f"{r.n} {r.coefficient}" for r in records)
