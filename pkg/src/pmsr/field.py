"""Prime-field arithmetic GF(q).

Every symbol in the codes and in the retrieval protocol is an element of
GF(q) for a prime q.  ``Field`` is the parameter object (the modulus plus
sampling helpers); ``FieldElement`` is a thin immutable wrapper around a
canonical representative in ``[0, q)`` with the usual operators.

Only prime fields are supported and q must fit in 32 bits, which keeps
every product of two canonical representatives inside an unsigned 64-bit
word (the contract the compiled kernels rely on).
"""

from __future__ import annotations

import random
from typing import Sequence

MAX_MODULUS = 2**32 - 1

# Miller-Rabin with witnesses {2, 7, 61} is exact for all n < 4,759,123,141,
# which covers the full 32-bit modulus range.
_MR_WITNESSES = (2, 7, 61)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 2**32."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Field:
    """The prime field GF(q), q >= 3.

    Instances are immutable and compare equal iff their moduli are equal.
    """

    __slots__ = ("modulus",)

    def __init__(self, modulus: int):
        if not isinstance(modulus, int) or modulus < 3:
            raise ValueError(f"modulus must be an integer >= 3, got {modulus!r}")
        if modulus > MAX_MODULUS:
            raise ValueError(f"modulus must fit in 32 bits, got {modulus}")
        if not is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        object.__setattr__(self, "modulus", modulus)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(("Field", self.modulus))

    def __repr__(self) -> str:
        return f"Field({self.modulus})"

    def __call__(self, value: int) -> "FieldElement":
        """Canonicalize an integer into this field."""
        return FieldElement(value % self.modulus, self)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def elements(self):
        """All field elements in order; only sensible for small q."""
        return (FieldElement(v, self) for v in range(self.modulus))

    def sample_ints(self, rng: random.Random, count: int) -> list[int]:
        """``count`` independent uniform draws from [0, q) as plain ints.

        Rejection sampling on 32-bit words, so the distribution is exactly
        uniform (no modulo bias).  A given (seed, count, q) always yields
        the same sequence.
        """
        if count < 0:
            raise ValueError("count must be >= 0")
        q = self.modulus
        # Largest multiple of q that fits in 32 bits; words at or above it
        # would bias the low residues and are redrawn.
        limit = (1 << 32) - ((1 << 32) % q)
        out = []
        getrandbits = rng.getrandbits
        while len(out) < count:
            word = getrandbits(32)
            if word < limit:
                out.append(word % q)
        return out

    def sample_uniform(self, rng: random.Random, count: int) -> list["FieldElement"]:
        """Like :meth:`sample_ints` but wrapped as ``FieldElement``."""
        return [FieldElement(v, self) for v in self.sample_ints(rng, count)]


class FieldElement:
    """An element of a :class:`Field`, kept canonical in [0, q).

    Values are immutable; arithmetic between elements of different fields
    is rejected.
    """

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: Field):
        if not 0 <= value < field.modulus:
            raise ValueError(f"value {value} not canonical for {field}")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError("incompatible fields")
            return other.value
        if isinstance(other, int):
            return other % self.field.modulus
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement((self.value + v) % self.field.modulus, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement((self.value - v) % self.field.modulus, self.field)

    def __rsub__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement((v - self.value) % self.field.modulus, self.field)

    def __mul__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        return FieldElement(self.value * v % self.field.modulus, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.field.modulus, self.field)

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse; zero has none."""
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        # Fermat: a^(q-2) = a^-1 for prime q.
        return FieldElement(pow(self.value, self.field.modulus - 2, self.field.modulus), self.field)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return NotImplemented
        if v == 0:
            raise ZeroDivisionError("zero has no inverse")
        q = self.field.modulus
        return FieldElement(self.value * pow(v, q - 2, q) % q, self.field)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a non-negative integer")
        # pow() is square-and-multiply; 0**0 == 1 by convention.
        return FieldElement(pow(self.value, exponent, self.field.modulus), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return other.field == self.field and other.value == self.value
        if isinstance(other, int):
            return self.value == other % self.field.modulus
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field.modulus, self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.modulus})"


def dot_mod(a: Sequence[int], b: Sequence[int], q: int) -> int:
    """Inner product of two equal-length int sequences over GF(q)."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x * y for x, y in zip(a, b)) % q
