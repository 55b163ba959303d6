"""Arithmetic in the prime field Z_p."""

from __future__ import annotations

from dataclasses import dataclass

MAX_MODULUS = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def inv_mod(a: int, p: int) -> int:
    """Inverse of ``a`` modulo the prime ``p``."""
    a %= p
    if a == 0:
        raise ZeroDivisionError("no inverse of zero")
    return pow(a, -1, p)


@dataclass(frozen=True)
class FieldSpec:
    """The prime field Z_p."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise TypeError(f"modulus must be an int, got {self.p!r}")
        if self.p > MAX_MODULUS:
            raise ValueError(f"modulus {self.p} exceeds 2**31")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __call__(self, value: int) -> Scalar:
        return Scalar(value % self.p, self)

    def __iter__(self):
        return (Scalar(v, self) for v in range(self.p))

    def __repr__(self):
        return f"Z{self.p}"

    @property
    def zero(self) -> Scalar:
        return Scalar(0, self)

    @property
    def one(self) -> Scalar:
        return Scalar(1, self)

    def inv(self, a: int) -> int:
        return inv_mod(a, self.p)


@dataclass(frozen=True)
class Scalar:
    value: int
    field: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.field.p}")

    def _check(self, other: Scalar | int) -> int:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise ValueError(f"modulus mismatch: {self.field} vs {other.field}")
            return other.value
        return int(other)

    def __add__(self, other):
        return self.field(self.value + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.field(self.value - self._check(other))

    def __rsub__(self, other):
        return self.field(self._check(other) - self.value)

    def __mul__(self, other):
        return self.field(self.value * self._check(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.field(-self.value)

    def __truediv__(self, other):
        return self * self.field(self._check(other)).inverse()

    def inverse(self) -> Scalar:
        return Scalar(inv_mod(self.value, self.field.p), self.field)

    def __int__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"


def arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    """Apply ``op`` in {'add', 'sub', 'mul'} to two scalars of one field."""
    if a.field != b.field:
        raise ValueError(f"modulus mismatch: {a.field} vs {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def inv(a: Scalar) -> Scalar:
    return a.inverse()
