"""Finite fields F_q, q = p^e, in the polynomial basis.

Elements are handled internally as integers ``sum(c_i * p**i)`` where
``c_0, ..., c_{e-1}`` are the coordinates over the prime field.  This is
also the serialized form.  :class:`FieldElement` wraps an integer with
operator overloading for interactive use; the linear algebra layers
work on bare integers through the :class:`FiniteField` methods.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .errors import NotPrime, TooLarge

MAX_ORDER = 2**16
LOG_TABLE_LIMIT = 2**10
ADD_TABLE_LIMIT = 2**10


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p as coefficient lists, lowest degree first ---------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        _trim(a)
    return a


def _poly_divmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    rem = _trim([c % p for c in a])
    quo = [0] * max(len(rem) - len(b) + 1, 0)
    inv_lead = pow(b[-1], p - 2, p)
    while len(rem) >= len(b):
        c = (rem[-1] * inv_lead) % p
        shift = len(rem) - len(b)
        quo[shift] = c
        for i, x in enumerate(b):
            rem[shift + i] = (rem[shift + i] - c * x) % p
        _trim(rem)
    return _trim(quo), rem


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * max(len(a) + len(b) - 1, 0)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim([c % p for c in out])


def _poly_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _digits(v: int, p: int, e: int) -> list[int]:
    out = []
    for _ in range(e):
        v, r = divmod(v, p)
        out.append(r)
    return out


def _from_digits(d: list[int], p: int) -> int:
    v = 0
    for c in reversed(d):
        v = v * p + c
    return v


def _is_irreducible(m: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(m)//2."""
    deg = len(m) - 1
    for d in range(1, deg // 2 + 1):
        for low in range(p**d):
            divisor = _digits(low, p, d) + [1]
            if not _poly_mod(list(m), divisor, p):
                return False
    return True


def least_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Monic irreducible of degree e with the smallest integer encoding."""
    if e == 1:
        return (0, 1)
    for low in range(p**e):
        m = _digits(low, p, e) + [1]
        if m[0] != 0 and _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class FiniteField:
    """The field F_p[T]/(modulus) of order q = p**e."""

    p: int
    e: int
    modulus: tuple[int, ...]
    q: int = field(init=False)
    _exp: tuple = field(init=False, repr=False, compare=False)
    _log: tuple = field(init=False, repr=False, compare=False)
    _add: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", self.p**self.e)
        exp = log = add = None
        if self.e > 1 and self.q <= LOG_TABLE_LIMIT:
            exp, log = self._build_log_tables()
        if self.e > 1 and self.p > 2 and self.q <= ADD_TABLE_LIMIT:
            add = tuple(
                tuple(self._add_slow(a, b) for b in range(self.q)) for a in range(self.q)
            )
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)
        object.__setattr__(self, "_add", add)

    # -- construction helpers -------------------------------------------------

    def _mul_slow(self, a: int, b: int) -> int:
        p, e = self.p, self.e
        da, db = _digits(a, p, e), _digits(b, p, e)
        prod = [0] * (2 * e)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        r = _poly_mod(prod, list(self.modulus), p)
        return _from_digits(r + [0] * (e - len(r)), p)

    def _add_slow(self, a: int, b: int) -> int:
        p = self.p
        out, scale = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * scale
            a //= p
            b //= p
            scale *= p
        return out

    def _build_log_tables(self):
        q = self.q
        factors = prime_factors(q - 1)
        for g in range(2, q):
            ok = True
            for ell in factors:
                if self._pow_slow(g, (q - 1) // ell) == 1:
                    ok = False
                    break
            if ok:
                break
        exp = [1] * (2 * (q - 1))
        for i in range(1, 2 * (q - 1)):
            exp[i] = self._mul_slow(exp[i - 1], g)
        log = [0] * q
        for i in range(q - 1):
            log[exp[i]] = i
        return tuple(exp), tuple(log)

    def _pow_slow(self, a: int, k: int) -> int:
        result, base = 1, a
        while k:
            if k & 1:
                result = self._mul_slow(result, base)
            base = self._mul_slow(base, base)
            k >>= 1
        return result

    # -- arithmetic on integer encodings --------------------------------------

    @property
    def is_prime_field(self) -> bool:
        return self.e == 1

    def add(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        if self._add is not None:
            return self._add[a][b]
        return self._add_slow(a, b)

    def neg(self, a: int) -> int:
        if self.e == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self.mul(self.p - 1, a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_slow(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in a field")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        if self._log is not None:
            return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]
        return self._inv_euclid(a)

    def _inv_euclid(self, a: int) -> int:
        p = self.p
        r0, r1 = list(self.modulus), _trim(_digits(a, p, self.e))
        s0, s1 = [], [1]
        while r1:
            quo, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quo, s1, p), p)
        # r0 is a nonzero constant: s0 * a == r0 (mod modulus)
        c = pow(r0[0], p - 2, p)
        s = _poly_mod([x * c for x in s0], list(self.modulus), p)
        return _from_digits(s + [0] * (self.e - len(s)), p)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            return self.pow(self.inv(a), -k)
        if self.e == 1:
            return pow(a, k, self.p)
        if a == 0:
            return 0 if k else 1
        if self._log is not None:
            return self._exp[(self._log[a] * k) % (self.q - 1)]
        return self._pow_slow(a, k)

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def p_th_root(self, a: int) -> int:
        """Inverse Frobenius; F_q is perfect so a^(1/p) = a^(q/p)."""
        return self.pow(a, self.q // self.p)

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def coordinates(self, a: int) -> tuple[int, ...]:
        return tuple(_digits(a, self.p, self.e))

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def elements(self) -> range:
        return range(self.q)

    def __str__(self) -> str:
        return f"F_{self.q}"


@functools.cache
def make_field(p: int, e: int = 1) -> FiniteField:
    """Return F_{p^e} with the least irreducible modulus (by integer encoding)."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if e < 1:
        raise ValueError("extension degree must be positive")
    if p**e > MAX_ORDER:
        raise TooLarge(f"p^e = {p**e} exceeds the desk-scale bound {MAX_ORDER}")
    modulus = least_irreducible(p, e)
    if e <= 4:
        assert _is_irreducible(list(modulus), p)
    return FiniteField(p, e, modulus)


def field_of_order(q: int) -> FiniteField:
    """F_q for a prime power q."""
    for p in range(2, q + 1):
        if q % p == 0:
            e, rest = 0, q
            while rest % p == 0:
                rest //= p
                e += 1
            if rest != 1:
                raise NotPrime(f"{q} is not a prime power")
            return make_field(p, e)
    raise NotPrime(f"{q} is not a prime power")


@dataclass(frozen=True)
class FieldElement:
    field: FiniteField
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"{self.value} is not an element of {self.field}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field, self.field.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field, self.field.sub(self.value, b))

    def __rsub__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field, self.field.sub(b, self.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __mul__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field, self.field.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field, self.field.div(self.value, b))

    def __pow__(self, k: int):
        return FieldElement(self.field, self.field.pow(self.value, k))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def frobenius(self) -> "FieldElement":
        return FieldElement(self.field, self.field.frobenius(self.value))

    @property
    def coordinates(self) -> tuple[int, ...]:
        return self.field.coordinates(self.value)

    def __repr__(self) -> str:
        return f"{self.field}({self.value})"


def p_th_root(a: FieldElement) -> FieldElement:
    """The unique b with b**p == a."""
    return FieldElement(a.field, a.field.p_th_root(a.value))
