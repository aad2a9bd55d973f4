"""Exact scalar arithmetic over a prime field F_p or the rationals.

Elements are stored in canonical form: residues 0 <= v < p for prime
fields (plain ints) and reduced ``Fraction`` values for the rationals,
so equality of elements is representational equality.  A ``FieldSpec``
carries the arithmetic; it is immutable and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DivisionByZero

FieldElement = Union[int, Fraction]

# Default experiment field: a fixed 31-bit prime.
DEFAULT_PRIME = 2147483629

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
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


@dataclass(frozen=True)
class FieldSpec:
    """F_p for a prime p (< 2^62) or the field of rationals."""

    kind: str  # "prime" | "rational"
    p: int | None = None

    def __post_init__(self):
        if self.kind == "prime":
            if self.p is None or not is_prime(self.p):
                raise ValueError(f"modulus {self.p!r} is not prime")
            if self.p >= 1 << 62:
                raise ValueError("modulus must fit in 62 bits")
        elif self.kind == "rational":
            if self.p is not None:
                raise ValueError("rationals take no modulus")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    # -- element construction ------------------------------------------

    def of(self, x) -> FieldElement:
        """Coerce an int, Fraction, or 'a/b' string into canonical form."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.kind == "prime":
            if isinstance(x, Fraction):
                return self.div(x.numerator % self.p, x.denominator % self.p)
            return int(x) % self.p
        return Fraction(x)

    @property
    def zero(self) -> FieldElement:
        return 0 if self.kind == "prime" else Fraction(0)

    @property
    def one(self) -> FieldElement:
        return 1 if self.kind == "prime" else Fraction(1)

    # -- arithmetic ----------------------------------------------------

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime" else -a

    def inv(self, a):
        if not a:
            raise DivisionByZero("inverse of zero")
        if self.kind == "prime":
            return pow(a, -1, self.p)
        return 1 / Fraction(a)

    def div(self, a, b):
        if not b:
            raise DivisionByZero("division by zero")
        if self.kind == "prime":
            return a * pow(b, -1, self.p) % self.p
        return Fraction(a) / Fraction(b)

    def pow(self, a, e: int):
        if self.kind == "prime":
            return pow(a, e, self.p)
        return Fraction(a) ** e

    # -- serialization -------------------------------------------------

    def format(self, a: FieldElement) -> str:
        return str(a)

    def to_json(self) -> dict:
        if self.kind == "prime":
            return {"kind": "prime", "p": self.p}
        return {"kind": "rational"}

    @staticmethod
    def from_json(obj: dict) -> "FieldSpec":
        if obj.get("kind") == "prime":
            return FieldSpec("prime", int(obj["p"]))
        return FieldSpec("rational")


def arith(spec: FieldSpec, a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Dispatch one of add/sub/mul/div on canonical elements."""
    if op == "add":
        return spec.add(a, b)
    if op == "sub":
        return spec.sub(a, b)
    if op == "mul":
        return spec.mul(a, b)
    if op == "div":
        return spec.div(a, b)
    raise ValueError(f"unknown op {op!r}")


def binom(n: int, k: int) -> int:
    """Integer binomial coefficient, 0 when k < 0 or k > n."""
    if k < 0 or k > n or n < 0:
        return 0
    import math

    return math.comb(n, k)


def binom_in_field(n: int, k: int, spec: FieldSpec) -> FieldElement:
    """C(n, k) as an exact integer, reduced into the field.

    Computed over Z first; reducing factorials separately would be wrong
    in small characteristic.
    """
    return spec.of(binom(n, k))
