"""Exact arithmetic in a prime field F_q with a runtime-configurable modulus.

The modulus is checked for primality with a deterministic Miller-Rabin
witness set that is exact for all 64-bit integers, so a PrimeField can be
constructed straight from user configuration.
"""

# Deterministic Miller-Rabin witnesses, exact for n < 3.3 * 10^24
# (covers every 64-bit integer).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
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


class PrimeField:
    """The modulus q plus fast scalar helpers operating on canonical ints.

    Values handled by the int-level methods (add, sub, mul, inv, pow,
    batch_inv) are plain integers in [0, q); callers that want checked,
    self-describing scalars use FieldElement via __call__.
    """

    __slots__ = ("q",)

    def __init__(self, q: int):
        if not isinstance(q, int):
            raise TypeError(f"modulus must be an int, got {type(q).__name__}")
        if q < 3:
            raise ValueError(f"modulus must be >= 3, got {q}")
        if q >= 1 << 64:
            raise ValueError(f"modulus must fit in 64 bits, got {q.bit_length()} bits")
        if not is_prime(q):
            raise ValueError(f"modulus {q} is not prime")
        self.q = q

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.q, self)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and self.q == other.q

    def __hash__(self) -> int:
        return hash(("PrimeField", self.q))

    def __repr__(self) -> str:
        return f"PrimeField({self.q})"

    # int-level arithmetic; inputs are assumed canonical
    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.q if s >= self.q else s

    def sub(self, a: int, b: int) -> int:
        d = a - b
        return d + self.q if d < 0 else d

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def neg(self, a: int) -> int:
        return self.q - a if a else 0

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of zero in prime field")
        return pow(a, self.q - 2, self.q)

    def pow(self, a: int, e: int) -> int:
        # 0^0 == 1 by convention
        if e < 0:
            raise ValueError("exponent must be nonnegative")
        return pow(a, e, self.q)

    def batch_inv(self, values) -> list:
        """Elementwise inverses using one modular inverse overall."""
        prefix = []
        acc = 1
        for i, v in enumerate(values):
            if v % self.q == 0:
                raise ZeroDivisionError(f"zero entry at index {i} in batch inverse")
            prefix.append(acc)
            acc = acc * v % self.q
        inv_acc = self.inv(acc)
        out = [0] * len(values)
        for i in range(len(values) - 1, -1, -1):
            out[i] = inv_acc * prefix[i] % self.q
            inv_acc = inv_acc * values[i] % self.q
        return out


class FieldElement:
    """Canonical representative of a value in F_q.

    Immutable; arithmetic between elements of different fields is rejected.
    """

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: PrimeField):
        if not 0 <= value < field.q:
            raise ValueError(f"value {value} not in [0, {field.q})")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "field", field)

    def __setattr__(self, name, val):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ValueError(
                    f"modulus mismatch: {self.field.q} vs {other.field.q}"
                )
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field.add(self.value, other.value), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field.sub(self.value, other.value), self.field)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return FieldElement(self.field.mul(self.value, other.value), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __neg__(self):
        return FieldElement(self.field.neg(self.value), self.field)

    def __pow__(self, e: int):
        return FieldElement(self.field.pow(self.value, e), self.field)

    def inv(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.value == other % self.field.q
        return (
            isinstance(other, FieldElement)
            and self.field == other.field
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return hash((self.value, self.field.q))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value}"


def batch_inverse(values: list) -> list:
    """Elementwise FieldElement inverses, amortized to one fe_inv total."""
    if not values:
        return []
    field = values[0].field
    for i, v in enumerate(values):
        if v.field != field:
            raise ValueError(f"modulus mismatch at index {i}")
    raw = field.batch_inv([v.value for v in values])
    return [FieldElement(r, field) for r in raw]
