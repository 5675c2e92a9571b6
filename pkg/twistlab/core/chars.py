from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict
from sympy import divisors as _sympy_divisors
from sympy import factorint
from sympy.functions.combinatorial.numbers import jacobi_symbol, totient
from sympy.ntheory import primitive_root

from .errors import (
    ImprimitiveEpsilon,
    InputError,
    NotCoprime,
    NotFundamentalDiscriminant,
    ParseError,
)
from .numerics import PrecisionContext, to_mp


logger = logging.getLogger(__name__)


# Arithmetic helpers

def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("moebius needs n >= 1")
    exponents = factorint(n)
    if any(e > 1 for e in exponents.values()):
        return 0
    return -1 if len(exponents) % 2 else 1


def euler_phi(n: int) -> int:
    return int(totient(n))


def divisors(n: int) -> List[int]:
    return [int(d) for d in _sympy_divisors(n)]


def prime_divisors(n: int) -> List[int]:
    return sorted(int(p) for p in factorint(n))


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


# Characters

class Character(BaseModel):
    """Dirichlet character chi_{r, ell} in Conrey labelling.

    ``angles[a]`` is the exact turn t with chi(a) = exp(2 pi i t), or None
    when gcd(a, r) > 1.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modulus: int
    conrey_label: int
    angles: Tuple[Fraction | None, ...]
    parity_kappa: int
    conductor: int
    order: int

    @property
    def label(self) -> str:
        return f"{self.modulus}:{self.conrey_label}"

    @property
    def key(self) -> Tuple[int, int]:
        return (self.modulus, self.conrey_label)

    @property
    def is_trivial(self) -> bool:
        return self.modulus == 1

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def angle(self, n: int) -> Fraction | None:
        return self.angles[n % self.modulus]

    def real_value(self, n: int) -> int:
        """chi(n) as 0, 1 or -1; only for real characters."""
        if not self.is_real:
            raise ValueError(f"chi_{self.label} is not real")
        turn = self.angle(n)
        if turn is None:
            return 0
        return 1 if turn == 0 else -1

    def mp_value(self, n: int, mp: Any) -> Any:
        turn = self.angle(n)
        if turn is None:
            return mp.zero
        if turn == 0:
            return mp.one
        if turn == Fraction(1, 2):
            return -mp.one
        if turn == Fraction(1, 4):
            return mp.mpc(0, 1)
        if turn == Fraction(3, 4):
            return mp.mpc(0, -1)
        return mp.expjpi(to_mp(2 * turn, mp))

    def mp_values(self, mp: Any) -> List[Any]:
        return [self.mp_value(a, mp) for a in range(self.modulus)]

    def exact_value(self, n: int) -> int | Fraction | None:
        """Real characters give an int; complex ones give the turn (None off units)."""
        if self.is_real:
            return self.real_value(n)
        return self.angle(n)

    def conj(self) -> "Character":
        if self.modulus == 1:
            return self
        return character_from_conrey(self.modulus, pow(self.conrey_label, -1, self.modulus))

    def __repr__(self) -> str:
        return f"Character({self.label})"


def _odd_prime_power_angles(p: int, e: int, ell: int) -> Dict[int, Fraction]:
    q = p**e
    phi = q - q // p
    g = int(primitive_root(p * p if e == 1 else q)) % q
    logs: Dict[int, int] = {}
    x = 1
    for k in range(phi):
        logs[x] = k
        x = x * g % q
    nu = logs[ell % q]
    return {a: Fraction(nu * k, phi) % 1 for a, k in logs.items()}


def _two_power_angles(e: int, ell: int) -> Dict[int, Fraction]:
    q = 2**e
    if e == 1:
        return {1: Fraction(0)}
    if e == 2:
        minus = 0 if ell % 4 == 1 else 1
        return {1: Fraction(0), 3: Fraction(minus, 2)}
    span = 2 ** (e - 2)
    powers: Dict[int, int] = {}
    x = 1
    for k in range(span):
        powers[x] = k
        x = x * 5 % q

    def split(a: int) -> Tuple[int, int]:
        a %= q
        if a in powers:
            return 0, powers[a]
        return 1, powers[(-a) % q]

    e_ell, a_ell = split(ell)
    table = {}
    for a in range(1, q, 2):
        e_a, k_a = split(a)
        table[a] = (Fraction(e_ell * e_a, 2) + Fraction(a_ell * k_a, span)) % 1
    return table


def _conrey_angles(r: int, ell: int) -> Tuple[Fraction | None, ...]:
    components = []
    for p, e in sorted(factorint(r).items()):
        p, e = int(p), int(e)
        table = _two_power_angles(e, ell) if p == 2 else _odd_prime_power_angles(p, e, ell)
        components.append((p**e, table))
    angles: List[Fraction | None] = []
    for a in range(r):
        if math.gcd(a, r) != 1:
            angles.append(None)
            continue
        turn = Fraction(0)
        for q, table in components:
            turn += table[a % q]
        angles.append(turn % 1)
    return tuple(angles)


def _conductor(r: int, angles: Tuple[Fraction | None, ...]) -> int:
    for d in divisors(r):
        if all(
            angles[a] == 0
            for a in range(1, r)
            if angles[a] is not None and a % d == 1 % d
        ):
            return d
    return r


@lru_cache(maxsize=4096)
def character_from_conrey(r: int, ell: int) -> Character:
    if r < 1:
        raise InputError(f"modulus must be positive, got {r}")
    if r == 1:
        return Character(
            modulus=1, conrey_label=1, angles=(Fraction(0),), parity_kappa=0, conductor=1, order=1
        )
    if math.gcd(ell, r) != 1:
        raise NotCoprime(f"Conrey label {ell} is not coprime to {r}")
    ell %= r
    angles = _conrey_angles(r, ell)
    order = 1
    for turn in angles:
        if turn is not None:
            order = order * turn.denominator // math.gcd(order, turn.denominator)
    kappa = 0 if angles[r - 1] == 0 else 1
    return Character(
        modulus=r,
        conrey_label=ell,
        angles=angles,
        parity_kappa=kappa,
        conductor=_conductor(r, angles),
        order=order,
    )


def characters_mod(r: int) -> List[Character]:
    return [character_from_conrey(r, ell) for ell in range(1, r + 1) if math.gcd(ell, r) == 1]


def conductor_and_primitivize(chi: Character) -> Tuple[int, Character]:
    """Conductor D and the primitive character mod D inducing ``chi``."""
    d = chi.conductor
    if d == chi.modulus:
        return d, chi
    return d, character_from_conrey(d, chi.conrey_label % d if d > 1 else 1)


def principal_character(r: int) -> Character:
    return character_from_conrey(r, 1)


TRIVIAL = character_from_conrey(1, 1)


# Real primitive characters

def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d / n) for n >= 0."""
    if n < 0:
        raise ValueError("kronecker_symbol expects n >= 0")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    value = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        value *= 1 if d % 8 in (1, 7) else -1
    if n == 1:
        return value
    return value * int(jacobi_symbol(d % n, n))


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1:
        return True
    if d == 0:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@lru_cache(maxsize=256)
def kronecker_character(d: int) -> Character:
    """The real primitive character a -> (d / a) modulo |d|."""
    if not is_fundamental_discriminant(d):
        raise NotFundamentalDiscriminant(f"{d} is not a fundamental discriminant")
    r = abs(d)
    if r == 1:
        return TRIVIAL
    wanted = [kronecker_symbol(d, a) for a in range(r)]
    for ell in range(1, r):
        if math.gcd(ell, r) != 1 or ell * ell % r != 1:
            continue
        chi = character_from_conrey(r, ell)
        if all(chi.real_value(a) == wanted[a] for a in range(r)):
            return chi
    raise NotFundamentalDiscriminant(f"no real primitive character matches D={d}")


def parse_character(text: str) -> Character:
    """``r:ell`` (Conrey) or ``D=-3`` (fundamental discriminant)."""
    raw = text.strip().replace(" ", "")
    try:
        if ":" in raw:
            r_text, ell_text = raw.split(":", 1)
            return character_from_conrey(int(r_text), int(ell_text))
        if raw.upper().startswith("D="):
            return kronecker_character(int(raw[2:]))
    except ValueError as exc:
        raise ParseError(f"cannot parse character {text!r}") from exc
    raise ParseError(f"character must look like 'r:ell' or 'D=k', got {text!r}")


# Gauss sums

class GaussData(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rho: Any
    epsilon: Any | None = None


def gauss_sum(chi: Character, ctx: PrecisionContext) -> Any:
    mp = ctx.mp
    r = chi.modulus
    total = mp.zero
    for a in range(r):
        turn = chi.angle(a)
        if turn is None:
            continue
        total += mp.expjpi(to_mp(2 * ((turn + Fraction(a, r)) % 1), mp))
    return total


def gauss_data(chi: Character, ctx: PrecisionContext, require_epsilon: bool = True) -> GaussData:
    """rho(chi) and, for primitive chi, epsilon = rho / (i^kappa sqrt(r))."""
    mp = ctx.mp
    rho = gauss_sum(chi, ctx)
    if not chi.is_primitive:
        if require_epsilon:
            raise ImprimitiveEpsilon(f"epsilon is undefined for imprimitive chi_{chi.label}")
        return GaussData(rho=rho)
    epsilon = rho / (mp.mpc(0, 1) ** chi.parity_kappa * mp.sqrt(chi.modulus))
    return GaussData(rho=rho, epsilon=epsilon)


@lru_cache(maxsize=512)
def _epsilon_cached(key: Tuple[int, int], bits: int) -> Any:
    ctx = PrecisionContext(target_digits=1, guard_digits=0, bits=bits)
    return gauss_data(character_from_conrey(*key), ctx).epsilon


def epsilon(chi: Character, ctx: PrecisionContext) -> Any:
    """Cached epsilon(chi) at the working precision of ``ctx``."""
    return _epsilon_cached(chi.key, ctx.bits)
