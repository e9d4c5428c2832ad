"""Arithmetic in a prime field F_q.

Elements are plain machine integers in ``[0, q)``; the modulus lives on the
:class:`PrimeField` object.  :class:`FieldElement` is a thin value wrapper
used where mixing elements of different fields must be caught.
"""

from __future__ import annotations

from dataclasses import dataclass


class FieldError(ValueError):
    """Raised on cross-field operations or division by zero."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(q: int) -> bool:
    """Deterministic Miller-Rabin, exact for all q < 3.3e24."""
    if q < 2:
        return False
    for p in _MR_BASES:
        if q % p == 0:
            return q == p
    d, r = q - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, q)
        if x in (1, q - 1):
            continue
        for _ in range(r - 1):
            x = x * x % q
            if x == q - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or isinstance(self.q, bool):
            raise TypeError(f"modulus must be an int, got {type(self.q).__name__}")
        if not is_prime(self.q):
            raise FieldError(f"q={self.q} is not prime")

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(self, int(value) % self.q)

    def __repr__(self):
        return f"PrimeField({self.q})"

    # integer-level helpers, used by the matrix and sharing code
    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return pow(a, -1, self.q)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.q

    def elements(self) -> range:
        return range(self.q)


@dataclass(frozen=True)
class FieldElement:
    field: PrimeField
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"value {self.value} outside [0, {self.field.q})")

    def _check(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.field(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            raise FieldError(f"field mismatch: {self.field} vs {other.field}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, (self.value + other.value) % self.field.q)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, (self.value - other.value) % self.field.q)

    def __rsub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, (self.value * other.value) % self.field.q)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * mul_inverse(other)

    def __neg__(self):
        return neg(self)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other % self.field.q
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash((self.field.q, self.value))

    def __repr__(self):
        return f"{self.value} (mod {self.field.q})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def neg(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, (-a.value) % a.field.q)


def mul_inverse(a: FieldElement) -> FieldElement:
    return FieldElement(a.field, a.field.inv(a.value))
