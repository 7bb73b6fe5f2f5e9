"""Quadratic Dirichlet characters and their unit-modified companions.

A character here is a period-q table of values in {-1, 0, +1}, together with
its parity and a verified primitivity flag.  The modified companion agrees
with the character at primes not dividing q and takes the value 1 at primes
dividing q, so it never vanishes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache


class CharacterError(ValueError):
    """Raised when a value table fails the character contract."""


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), extended to all integer pairs.

    Completely multiplicative in both arguments; (a|2) follows the mod-8
    rule and (a|-1) is the sign of a.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    # factor out 2s of n: each contributes (a|2)
    t2 = 0
    while n % 2 == 0:
        n //= 2
        t2 += 1
    if t2:
        if a % 2 == 0:
            return 0
        if t2 % 2 == 1 and a % 8 in (3, 5):
            result = -result
    a %= n
    # Jacobi-style loop with quadratic reciprocity; n stays odd positive
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_fundamental_discriminant(d: int) -> bool:
    if d == 1 or d == 0:
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of n, ascending."""
    out = []
    m = abs(n)
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class DirichletCharacter:
    """A real non-principal Dirichlet character mod q given by its value table.

    ``values[n % q]`` is the character value at n.  ``parity`` is 0 for even
    characters (value 1 at -1) and 1 for odd ones.
    """

    modulus: int
    values: tuple[int, ...]
    parity: int
    primitive: bool
    discriminant: int | None = None
    _qprimes: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_qprimes", prime_factors(self.modulus))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_discriminant(d: int) -> "DirichletCharacter":
        """The real primitive character mod |d| attached to a fundamental
        discriminant d via the Kronecker symbol (d|.)."""
        if not is_fundamental_discriminant(d):
            raise CharacterError(f"{d} is not a fundamental discriminant")
        q = abs(d)
        values = tuple(kronecker(d, n) for n in range(q))
        chi = DirichletCharacter(
            modulus=q,
            values=values,
            parity=0 if d > 0 else 1,
            primitive=True,
            discriminant=d,
        )
        chi._validate()
        return chi

    @staticmethod
    def from_values(q: int, values) -> "DirichletCharacter":
        """Build from an explicit table of chi(0..q-1); primitivity is
        decided by testing induction from every proper divisor of q."""
        values = tuple(int(v) for v in values)
        if q < 3 or len(values) != q:
            raise CharacterError("value table must have length q >= 3")
        parity = 0 if values[(q - 1) % q] == 1 else 1
        chi = DirichletCharacter(
            modulus=q,
            values=values,
            parity=parity,
            primitive=_is_primitive(q, values),
        )
        chi._validate()
        return chi

    # -- contract ----------------------------------------------------------

    def _validate(self):
        q, vals = self.modulus, self.values
        for n in range(q):
            v = vals[n]
            if v not in (-1, 0, 1):
                raise CharacterError("values must lie in {-1, 0, +1}")
            if (v == 0) != (math.gcd(n, q) > 1):
                raise CharacterError("character must vanish exactly off the units")
        if sum(vals) != 0:
            raise CharacterError("principal characters are not accepted")
        for a in range(1, q):
            for b in range(a, q):
                if vals[(a * b) % q] != vals[a] * vals[b]:
                    raise CharacterError(
                        f"multiplicativity fails at ({a},{b}) mod {q}"
                    )
        if vals[(q - 1) % q] != (-1) ** self.parity:
            raise CharacterError("parity flag disagrees with value at -1")

    # -- evaluation --------------------------------------------------------

    def __call__(self, n: int) -> int:
        return self.values[n % self.modulus]

    @property
    def q_primes(self) -> tuple[int, ...]:
        """Distinct primes dividing the modulus."""
        return self._qprimes

    def label(self) -> str:
        if self.discriminant is not None:
            return f"chi_{self.discriminant}"
        return f"chi_mod{self.modulus}"


def char_value(chi: DirichletCharacter, n: int) -> int:
    """Table lookup chi(n)."""
    return chi.values[n % chi.modulus]


def _is_primitive(q: int, values) -> bool:
    # chi is induced mod d | q iff chi(m) = chi(n) whenever m = n (mod d)
    # and both are coprime to q
    for d in range(1, q):
        if q % d != 0:
            continue
        induced = True
        for m in range(q):
            if values[m] == 0:
                continue
            for n in range(m + d, q, d):
                if values[n] != 0 and values[n] != values[m]:
                    induced = False
                    break
            if not induced:
                break
        if induced:
            return False
    return True


@lru_cache(maxsize=None)
def quadratic_character(q: int) -> DirichletCharacter:
    """The canonical real primitive character mod q (fundamental |d| = q).

    Prefers the even character when both signs give fundamental
    discriminants (q = 8).
    """
    for d in (q, -q):
        if is_fundamental_discriminant(d):
            return DirichletCharacter.from_discriminant(d)
    raise CharacterError(f"no real primitive character of modulus {q}")


@dataclass(frozen=True)
class ModifiedCharacter:
    """Completely multiplicative companion of a real character: equal to the
    character at primes away from q and equal to 1 at primes dividing q."""

    base: DirichletCharacter

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("defined on positive integers")
        # strip the part of n supported on primes dividing q, O(log n)
        for p in self.base.q_primes:
            while n % p == 0:
                n //= p
        return self.base.values[n % self.base.modulus]


def gchi_value(g: ModifiedCharacter, n: int) -> int:
    return g(n)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_{n<q} chi(n) e^{2 pi i n / q}; requires primitivity,
    which is what guarantees |tau|^2 = q."""
    if not chi.primitive:
        raise CharacterError("Gauss sum normalization needs a primitive character")
    q = chi.modulus
    return sum(
        chi.values[n] * cmath.exp(2j * cmath.pi * n / q)
        for n in range(1, q)
        if chi.values[n]
    )
