"""Polarization values, measurement contexts, instruction sets and outcomes.

Text forms used everywhere (files, CLI):

* polarization value: ``H'``, ``V'``, ``R``, ``L`` (ASCII apostrophe)
* measurement context: three letters from ``x``/``y``, photon 1 first (``yyx``)
* instruction set: ``X1Y1|X2Y2|X3Y3`` (``H'R|H'R|V'L``)
* outcome: the three values concatenated (``RRV'``)

Canonical order is lexicographic with ``H' < V'`` and ``R < L``, photon 1 most
significant and, within a photon, the linear value before the circular one.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence


class ParseError(ValueError):
    """Malformed text form of a context, outcome or instruction set."""


class Basis(enum.Enum):
    X = "x"  # linear, H'/V' at +-45 degrees
    Y = "y"  # circular, R/L

    def __str__(self) -> str:
        return self.value

    @property
    def values(self) -> tuple["PolValue", "PolValue"]:
        """The two admissible values, positive sign first."""
        if self is Basis.X:
            return (PolValue.H, PolValue.V)
        return (PolValue.R, PolValue.L)


class PolValue(enum.Enum):
    H = "H'"
    V = "V'"
    R = "R"
    L = "L"

    def __str__(self) -> str:
        return self.value

    @property
    def sign(self) -> int:
        return 1 if self in (PolValue.H, PolValue.R) else -1

    @property
    def basis(self) -> Basis:
        return Basis.X if self in (PolValue.H, PolValue.V) else Basis.Y

    @classmethod
    def from_sign(cls, basis: Basis, sign: int) -> "PolValue":
        pos, neg = basis.values
        if sign == 1:
            return pos
        if sign == -1:
            return neg
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def _split_values(text: str) -> list[PolValue]:
    """Tokenize a run of value labels like ``RRH'`` or ``H'R``."""
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "HV":
            if i + 1 >= len(text) or text[i + 1] != "'":
                raise ParseError(f"expected prime after {ch!r} at character {i + 1} of {text!r}")
            out.append(PolValue(ch + "'"))
            i += 2
        elif ch in "RL":
            out.append(PolValue(ch))
            i += 1
        else:
            raise ParseError(f"unknown polarization label {ch!r} at character {i + 1} of {text!r}")
    return out


@dataclass(frozen=True)
class MeasurementContext:
    bases: tuple[Basis, Basis, Basis]

    def __post_init__(self):
        if len(self.bases) != 3 or not all(isinstance(b, Basis) for b in self.bases):
            raise ValueError("a context needs exactly three Basis entries")

    @classmethod
    def parse(cls, name: str) -> "MeasurementContext":
        if not isinstance(name, str) or len(name) != 3:
            raise ParseError(f"context name must have 3 letters from x/y, got {name!r}")
        bases = []
        for pos, ch in enumerate(name, start=1):
            try:
                bases.append(Basis(ch))
            except ValueError:
                raise ParseError(f"invalid basis {ch!r} at position {pos} of context {name!r}") from None
        return cls(tuple(bases))

    @property
    def name(self) -> str:
        return "".join(b.value for b in self.bases)

    def __str__(self) -> str:
        return self.name

    def outcomes(self) -> list["Outcome"]:
        """All 8 outcomes in canonical order."""
        return [Outcome(vals, self) for vals in itertools.product(*(b.values for b in self.bases))]


def parse_context(name: str) -> MeasurementContext:
    return MeasurementContext.parse(name)


def all_contexts() -> list[MeasurementContext]:
    """The 8 contexts, ``xxx`` first."""
    return [MeasurementContext(b) for b in itertools.product((Basis.X, Basis.Y), repeat=3)]


@dataclass(frozen=True)
class Outcome:
    values: tuple[PolValue, PolValue, PolValue]
    context: MeasurementContext

    def __post_init__(self):
        for pos, (v, b) in enumerate(zip(self.values, self.context.bases), start=1):
            if v.basis is not b:
                raise ParseError(f"basis mismatch at position {pos}: {v} is not a {b}-basis value")

    @property
    def label(self) -> str:
        return "".join(v.value for v in self.values)

    def __str__(self) -> str:
        return self.label

    @property
    def product(self) -> int:
        return outcome_product(self)

    @property
    def index(self) -> int:
        """Rank among the context's 8 outcomes (canonical order)."""
        return sum((0 if v.sign == 1 else 1) << (2 - i) for i, v in enumerate(self.values))


def parse_outcome(labels: str, ctx: MeasurementContext | str) -> Outcome:
    if isinstance(ctx, str):
        ctx = parse_context(ctx)
    values = _split_values(labels)
    if len(values) != 3:
        raise ParseError(f"outcome {labels!r} has {len(values)} values, expected 3")
    return Outcome(tuple(values), ctx)


def outcome_product(o: Outcome) -> int:
    p = 1
    for v in o.values:
        p *= v.sign
    return p


@dataclass(frozen=True)
class InstructionSet:
    """Elements of reality carried by the three photons.

    ``xs[i]`` and ``ys[i]`` are the signs of X_{i+1} and Y_{i+1}.
    """

    xs: tuple[int, int, int]
    ys: tuple[int, int, int]

    def __post_init__(self):
        if len(self.xs) != 3 or len(self.ys) != 3:
            raise ValueError("instruction sets cover exactly three photons")
        if any(s not in (1, -1) for s in self.xs + self.ys):
            raise ValueError("elements of reality must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "InstructionSet":
        parts = text.strip().split("|")
        if len(parts) != 3:
            raise ParseError(f"instruction set {text!r} must have three '|'-separated photons")
        xs, ys = [], []
        for pos, part in enumerate(parts, start=1):
            vals = _split_values(part)
            if len(vals) != 2 or vals[0].basis is not Basis.X or vals[1].basis is not Basis.Y:
                raise ParseError(f"photon {pos} of {text!r} must be a linear then a circular value")
            xs.append(vals[0].sign)
            ys.append(vals[1].sign)
        return cls(tuple(xs), tuple(ys))

    def value(self, photon: int, basis: Basis) -> PolValue:
        """Value reported by photon (0-based) measured in ``basis``."""
        sign = self.xs[photon] if basis is Basis.X else self.ys[photon]
        return PolValue.from_sign(basis, sign)

    @property
    def rank(self) -> int:
        """Position in the canonical enumeration (0..63)."""
        r = 0
        for x, y in zip(self.xs, self.ys):
            r = (r << 2) | ((x == -1) << 1) | (y == -1)
        return r

    @property
    def text(self) -> str:
        return "|".join(
            f"{self.value(i, Basis.X)}{self.value(i, Basis.Y)}" for i in range(3)
        )

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"InstructionSet({self.text!r})"


@lru_cache(maxsize=None)
def _all_sets() -> tuple[InstructionSet, ...]:
    out = []
    for bits in itertools.product((1, -1), repeat=6):
        out.append(InstructionSet(bits[0::2], bits[1::2]))
    return tuple(out)


def all_instruction_sets() -> Sequence[InstructionSet]:
    """All 64 instruction sets in canonical order (``H'R|H'R|H'R`` first)."""
    return _all_sets()


def instruction_set_from_rank(rank: int) -> InstructionSet:
    return _all_sets()[rank]


def outcome_of(s: InstructionSet, ctx: MeasurementContext) -> Outcome:
    return Outcome(tuple(s.value(i, b) for i, b in enumerate(ctx.bases)), ctx)


def iter_outcomes(ctx: MeasurementContext) -> Iterator[Outcome]:
    return iter(ctx.outcomes())


MAIN_CONTEXTS = tuple(parse_context(c) for c in ("yyx", "yxy", "xyy", "xxx"))
UNIFORM_CONTEXTS = tuple(parse_context(c) for c in ("xxy", "xyx", "yxx", "yyy"))
