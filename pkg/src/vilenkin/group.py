"""Exact arithmetic for truncated bounded Vilenkin groups.

A group is described by a finite modulus sequence m = (m_0, ..., m_{K-1}),
every m_k >= 2.  Elements are digit vectors x with 0 <= x_k < m_k, added
coordinatewise mod m_k.  The scale ladder M_0 = 1, M_{k+1} = m_k * M_k
gives the mixed-radix number system used to index characters and to rank
cylinders.  Everything here is pure and immutable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

# Grids of M_K cells must stay addressable with ordinary integers; the
# counterexample parameter arithmetic deliberately bypasses this class.
MAX_SCALE = 2**62


class StructureMismatchError(ValueError):
    """Operands were built over different modulus sequences."""


class ScaleOverflowError(ValueError):
    """The scale ladder M_K exceeds the 64-bit budget."""


_PATTERN_RE = re.compile(r"^\((?P<body>\d+(,\d+)*)\)\^(?P<count>\d+)$")
_POWER_RE = re.compile(r"^(?P<base>\d+)\^(?P<count>\d+)$")


@dataclass(frozen=True)
class ModulusSequence:
    """The generating sequence m, truncated at a fixed finite depth K."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        if len(self.moduli) < 1:
            raise ValueError("modulus sequence must have depth >= 1")
        if any(m < 2 for m in self.moduli):
            raise ValueError("every modulus must be >= 2")
        total = 1
        for m in self.moduli:
            total *= m
            if total > MAX_SCALE:
                raise ScaleOverflowError(
                    f"scale ladder exceeds {MAX_SCALE} at depth {len(self.moduli)}"
                )

    @property
    def depth(self) -> int:
        return len(self.moduli)

    @property
    def bound_a(self) -> int:
        """sup of the moduli (finite by construction)."""
        return max(self.moduli)

    @cached_property
    def number_system(self) -> "NumberSystem":
        scales = [1]
        for m in self.moduli:
            scales.append(scales[-1] * m)
        return NumberSystem(tuple(scales))

    @property
    def order(self) -> int:
        """Number of cells at full depth, M_K."""
        return self.number_system.scales[-1]

    @classmethod
    def parse(cls, token: str) -> "ModulusSequence":
        """Parse a text spec: "2,3,4", "2^10", or "(2,3)^4" (repeated pattern)."""
        token = token.strip()
        m = _PATTERN_RE.match(token)
        if m:
            pattern = tuple(int(t) for t in m.group("body").split(","))
            return cls(pattern * int(m.group("count")))
        m = _POWER_RE.match(token)
        if m:
            return cls((int(m.group("base")),) * int(m.group("count")))
        try:
            return cls(tuple(int(t) for t in token.split(",")))
        except ValueError as exc:
            raise ValueError(f"cannot parse modulus spec {token!r}") from exc

    def spec(self) -> str:
        return ",".join(str(m) for m in self.moduli)


@dataclass(frozen=True)
class NumberSystem:
    """The scale ladder (M_0, ..., M_K) with M_0 = 1, M_{k+1} = m_k * M_k."""

    scales: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.scales) - 1


@dataclass(frozen=True)
class GroupPoint:
    """An element of the truncated group: one digit per modulus."""

    digits: tuple[int, ...]
    ms: ModulusSequence

    def __post_init__(self):
        if len(self.digits) != self.ms.depth:
            raise ValueError("digit count must equal the depth")
        for d, m in zip(self.digits, self.ms.moduli):
            if not 0 <= d < m:
                raise ValueError(f"digit {d} out of range for modulus {m}")

    @classmethod
    def zero(cls, ms: ModulusSequence) -> "GroupPoint":
        return cls((0,) * ms.depth, ms)

    @classmethod
    def unit(cls, ms: ModulusSequence, n: int) -> "GroupPoint":
        """e_n: digit n equals 1, every other digit 0."""
        digits = [0] * ms.depth
        digits[n] = 1
        return cls(tuple(digits), ms)

    @classmethod
    def from_index(cls, ms: ModulusSequence, index: int) -> "GroupPoint":
        """Inverse of cylinder_index at full depth."""
        if not 0 <= index < ms.order:
            raise ValueError(f"index {index} out of range")
        digits = []
        for m in ms.moduli:
            digits.append(index % m)
            index //= m
        return cls(tuple(digits), ms)


@dataclass(frozen=True)
class IndexDigits:
    """Mixed-radix expansion n = sum n_j * M_j of a character index."""

    digits: tuple[int, ...]

    @property
    def order(self) -> int | None:
        """|n| = max{k : n_k != 0}; None for n = 0."""
        top = None
        for k, d in enumerate(self.digits):
            if d != 0:
                top = k
        return top


def _require_same(x: GroupPoint, y: GroupPoint) -> None:
    if x.ms != y.ms:
        raise StructureMismatchError("points live over different modulus sequences")


def add(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    """Coordinatewise sum modulo m_k."""
    _require_same(x, y)
    digits = tuple((a + b) % m for a, b, m in zip(x.digits, y.digits, x.ms.moduli))
    return GroupPoint(digits, x.ms)


def neg(x: GroupPoint) -> GroupPoint:
    """Group inverse: add(x, neg(x)) is the zero point."""
    digits = tuple((-a) % m for a, m in zip(x.digits, x.ms.moduli))
    return GroupPoint(digits, x.ms)


def decompose_index(n: int, ns: NumberSystem) -> IndexDigits:
    """Digits of n in the generalized number system, n < M_K."""
    if not 0 <= n < ns.scales[-1]:
        raise ValueError(f"index {n} out of range [0, {ns.scales[-1]})")
    digits = []
    rest = n
    for k in range(ns.depth):
        m = ns.scales[k + 1] // ns.scales[k]
        digits.append(rest % m)
        rest //= m
    return IndexDigits(tuple(digits))


def compose_index(digits: IndexDigits, ns: NumberSystem) -> int:
    """Recompose sum n_j * M_j; inverse of decompose_index."""
    return sum(d * ns.scales[k] for k, d in enumerate(digits.digits))


def cylinder_index(x: GroupPoint, d: int) -> int:
    """Rank of the cylinder I_d(x) among the M_d cylinders of depth d.

    The rank is the mixed-radix number sum x_k * M_k over k < d, so depth-d
    cylinders biject with {0, ..., M_d - 1}.
    """
    if not 0 <= d <= x.ms.depth:
        raise ValueError(f"depth {d} out of range")
    scales = x.ms.number_system.scales
    return sum(x.digits[k] * scales[k] for k in range(d))


def haar_weight(ms: ModulusSequence, d: int) -> Fraction:
    """Exact measure 1/M_d of a depth-d cylinder (mu(G_m) = 1)."""
    if not 0 <= d <= ms.depth:
        raise ValueError(f"depth {d} out of range")
    return Fraction(1, ms.number_system.scales[d])
