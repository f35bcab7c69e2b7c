"""Exact arithmetic over prime fields GF(p).

A :class:`Field` performs modular arithmetic on plain ints (the fast path
used by every sparse kernel in the package); :class:`FieldElement` wraps a
value together with its field for callers who want self-checking operands.
Construct fields through :func:`GF`, which specializes p = 2 to bitwise
arithmetic behind the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZeroError, FieldMismatchError, UsageError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Field:
    """Prime field GF(p) acting on canonical int representatives in [0, p)."""

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not isinstance(p, int) or not _is_prime(p):
            raise UsageError(f"field modulus must be a prime integer, got {p!r}")
        self.p = p

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("GF", self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"

    # int-level arithmetic; inputs are assumed canonical

    def normalize(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        d = a - b
        return d + self.p if d < 0 else d

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return self.p - a if a else 0

    def inv(self, a: int) -> int:
        """Inverse by extended Euclid; O(log p) and table-free."""
        if a == 0:
            raise DivisionByZeroError(f"inverse of 0 in {self!r}")
        t, new_t = 0, 1
        r, new_r = self.p, a
        while new_r:
            q = r // new_r
            t, new_t = new_t, t - q * new_t
            r, new_r = new_r, r - q * new_r
        return t % self.p

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def element(self, v: int) -> "FieldElement":
        return FieldElement(self, self.normalize(v))

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1


class _Field2(Field):
    """GF(2) specialization: addition is XOR, negation is the identity."""

    __slots__ = ()

    def __init__(self):
        super().__init__(2)

    def normalize(self, a: int) -> int:
        return a & 1

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return a & b

    def neg(self, a: int) -> int:
        return a

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZeroError("inverse of 0 in GF(2)")
        return 1


_FIELD_CACHE: dict[int, Field] = {}


def GF(p: int) -> Field:
    """Return the field GF(p), cached per modulus."""
    f = _FIELD_CACHE.get(p)
    if f is None:
        f = _Field2() if p == 2 else Field(p)
        _FIELD_CACHE[p] = f
    return f


@dataclass(frozen=True)
class FieldElement:
    """A field value carrying its field, for self-checking arithmetic."""

    field: Field
    value: int

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"mixed moduli: {self.field!r} vs {other.field!r}"
                )
            return other.value
        raise UsageError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other) -> "FieldElement":
        return FieldElement(self.field, self.field.add(self.value, self._coerce(other)))

    def __sub__(self, other) -> "FieldElement":
        return FieldElement(self.field, self.field.sub(self.value, self._coerce(other)))

    def __mul__(self, other) -> "FieldElement":
        return FieldElement(self.field, self.field.mul(self.value, self._coerce(other)))

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, self.field.neg(self.value))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.p})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()
