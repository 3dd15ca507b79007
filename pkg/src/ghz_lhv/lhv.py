"""Instruction-set (local hidden variable) models with exact rational weights.

A model is a probability distribution over the 64 instruction sets. Reading an
instruction set out in a measurement context is deterministic, so every
outcome probability is a finite sum of weights and stays an exact ``Fraction``.
"""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .polarization import (
    MAIN_CONTEXTS,
    UNIFORM_CONTEXTS,
    Basis,
    InstructionSet,
    MeasurementContext,
    Outcome,
    PolValue,
    all_contexts,
    all_instruction_sets,
    outcome_of,
    parse_context,
    parse_outcome,
)

TABLE_HEADER = "ghz-lhv-table v1"
TABLE_SIZE = 32


class TableFormatError(ValueError):
    """A table file could not be read."""


class TableIntegrityError(ValueError):
    """A table was read but fails its constraint profile."""


class ModelDistribution:
    """Probability distribution over instruction sets.

    Only sets with non-zero weight are stored. Weights are converted to
    ``Fraction`` and must sum to exactly one.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[InstructionSet, Fraction | int]):
        clean = {}
        for s, w in weights.items():
            if not isinstance(s, InstructionSet):
                raise TypeError(f"keys must be InstructionSet, got {type(s).__name__}")
            if isinstance(w, float):
                raise TypeError("weights must be exact (int or Fraction), not float")
            w = Fraction(w)
            if w < 0:
                raise ValueError(f"negative weight {w} on {s}")
            if w:
                clean[s] = w
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self._weights = dict(sorted(clean.items(), key=lambda kv: kv[0].rank))

    @classmethod
    def point_mass(cls, s: InstructionSet | str) -> "ModelDistribution":
        if isinstance(s, str):
            s = InstructionSet.parse(s)
        return cls({s: 1})

    @classmethod
    def uniform(cls, sets: Iterable[InstructionSet] | None = None) -> "ModelDistribution":
        sets = list(all_instruction_sets() if sets is None else sets)
        if len(set(sets)) != len(sets):
            raise ValueError("duplicate instruction sets in uniform model")
        w = Fraction(1, len(sets))
        return cls({s: w for s in sets})

    @property
    def weights(self) -> dict[InstructionSet, Fraction]:
        return dict(self._weights)

    def weight(self, s: InstructionSet) -> Fraction:
        return self._weights.get(s, Fraction(0))

    @property
    def support(self) -> list[InstructionSet]:
        return list(self._weights)

    def __eq__(self, other):
        if not isinstance(other, ModelDistribution):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self):
        return hash(frozenset(self._weights.items()))

    def __repr__(self):
        return f"ModelDistribution(<{len(self._weights)} sets>)"


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the 8 outcomes of one context.

    ``probs`` holds ``Fraction`` values for instruction-set models and floats
    for quantum predictions or measured data.
    """

    context: MeasurementContext
    probs: Mapping[Outcome, Fraction | float]

    def __post_init__(self):
        outs = self.context.outcomes()
        extra = [o for o in self.probs if o.context != self.context]
        if extra:
            raise ValueError(f"outcome {extra[0]} does not belong to context {self.context}")
        # fill missing outcomes with zero and store in canonical order
        zero = Fraction(0) if all(isinstance(p, (int, Fraction)) for p in self.probs.values()) else 0.0
        full = {o: self.probs.get(o, zero) for o in outs}
        object.__setattr__(self, "probs", full)
        if any(p < 0 for p in full.values()):
            raise ValueError("negative outcome probability")
        total = sum(full.values())
        if self.is_exact:
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(total - 1) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for p in self.probs.values())

    def __getitem__(self, key: Outcome | str):
        if isinstance(key, str):
            key = parse_outcome(key, self.context)
        return self.probs[key]

    def items(self):
        return self.probs.items()

    def as_floats(self) -> list[float]:
        """Probabilities in canonical outcome order."""
        return [float(p) for p in self.probs.values()]

    def to_dict(self) -> dict[str, float]:
        return {o.label: float(p) for o, p in self.probs.items()}

    @classmethod
    def from_labels(cls, ctx: MeasurementContext | str, probs: Mapping[str, float | Fraction]) -> "OutcomeDistribution":
        if isinstance(ctx, str):
            ctx = parse_context(ctx)
        return cls(ctx, {parse_outcome(k, ctx): v for k, v in probs.items()})


def outcome_distribution(m: ModelDistribution, ctx: MeasurementContext | str) -> OutcomeDistribution:
    if isinstance(ctx, str):
        ctx = parse_context(ctx)
    probs = {o: Fraction(0) for o in ctx.outcomes()}
    for s, w in m.weights.items():
        probs[outcome_of(s, ctx)] += w
    return OutcomeDistribution(ctx, probs)


def _check_photon(photon: int) -> int:
    if photon not in (1, 2, 3):
        raise ValueError(f"photon index must be 1, 2 or 3, got {photon!r}")
    return photon - 1


def _as_basis(b: Basis | str) -> Basis:
    return b if isinstance(b, Basis) else Basis(b)


def single_marginal(m: ModelDistribution, photon: int, basis: Basis | str) -> dict[PolValue, Fraction]:
    """Distribution of one photon's reading in ``basis`` (photon is 1-based)."""
    i = _check_photon(photon)
    basis = _as_basis(basis)
    out = {v: Fraction(0) for v in basis.values}
    for s, w in m.weights.items():
        out[s.value(i, basis)] += w
    return out


def pair_marginal(m: ModelDistribution, i: int, j: int, basis_i: Basis | str,
                  basis_j: Basis | str) -> dict[tuple[PolValue, PolValue], Fraction]:
    """Joint distribution of the readings of photons ``i`` and ``j`` (1-based)."""
    a, b = _check_photon(i), _check_photon(j)
    if a == b:
        raise ValueError("pair marginal needs two distinct photons")
    bi, bj = _as_basis(basis_i), _as_basis(basis_j)
    out = {pair: Fraction(0) for pair in itertools.product(bi.values, bj.values)}
    for s, w in m.weights.items():
        out[(s.value(a, bi), s.value(b, bj))] += w
    return out


def model_expectation_exact(m: ModelDistribution, ctx: MeasurementContext | str) -> Fraction:
    d = outcome_distribution(m, ctx)
    return sum((o.product * p for o, p in d.items()), Fraction(0))


# -- uniform 32-set tables ---------------------------------------------------

@dataclass(frozen=True)
class UniformTable:
    members: frozenset[InstructionSet]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if len(self.members) != TABLE_SIZE:
            raise ValueError(f"a table holds exactly {TABLE_SIZE} distinct sets, got {len(self.members)}")

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "UniformTable":
        return cls(frozenset(InstructionSet.parse(t) for t in texts))

    @property
    def sorted_members(self) -> list[InstructionSet]:
        return sorted(self.members, key=lambda s: s.rank)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(s.rank for s in self.sorted_members)

    def distribution(self) -> ModelDistribution:
        return ModelDistribution.uniform(self.sorted_members)

    def __contains__(self, s):
        if isinstance(s, str):
            s = InstructionSet.parse(s)
        return s in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.sorted_members)


def dump_table(table: UniformTable, comments: Iterable[str] = ()) -> str:
    lines = [TABLE_HEADER]
    lines += [f"# {c}" for c in comments]
    lines += [s.text for s in table.sorted_members]
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> UniformTable:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != TABLE_HEADER:
        raise TableFormatError(f"missing header line {TABLE_HEADER!r}")
    members = []
    for lineno, ln in enumerate(lines[1:], start=2):
        if ln.startswith("#"):
            continue
        try:
            members.append(InstructionSet.parse(ln))
        except ValueError as exc:
            raise TableFormatError(f"line {lineno}: {exc}") from None
    if len(members) != TABLE_SIZE:
        raise TableFormatError(f"expected {TABLE_SIZE} instruction sets, found {len(members)}")
    if len(set(members)) != TABLE_SIZE:
        raise TableFormatError("duplicate instruction sets in table")
    return UniformTable(frozenset(members))


def load_table(path: str | Path) -> UniformTable:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TableFormatError(f"cannot read table {path}: {exc}") from None
    return parse_table(text)


def save_table(table: UniformTable, path: str | Path, comments: Iterable[str] = ()) -> None:
    Path(path).write_text(dump_table(table, comments))


# -- constraint profiles -----------------------------------------------------

# Sets listed in the Table 1 caption as producing RRV' and RRH' in yyx.
CAPTION_RRV = ("H'R|H'R|V'L", "H'R|V'R|V'R", "H'R|V'R|V'L",
               "V'R|H'R|V'R", "V'R|H'R|V'L", "V'R|V'R|V'R")
CAPTION_RRH = ("H'R|H'R|H'L", "V'R|V'R|H'R")
CAPTION_SETS = CAPTION_RRV + CAPTION_RRH


@dataclass(frozen=True)
class TableConstraints:
    """Targets a 32-set table has to meet.

    ``counts`` maps outcomes (which carry their context) to the number of
    table members that produce them.
    """

    required: frozenset[InstructionSet] = frozenset()
    counts: Mapping[Outcome, int] = field(default_factory=dict)
    single_marginals: bool = True
    pair_marginals: bool = True

    def __post_init__(self):
        object.__setattr__(self, "required", frozenset(self.required))
        object.__setattr__(self, "counts", dict(self.counts))
        for o, n in self.counts.items():
            if not isinstance(n, int) or n < 0:
                raise ValueError(f"count for {o.context}:{o} must be a non-negative integer")
        for ctx in self.fully_specified_contexts():
            total = sum(self.counts[o] for o in ctx.outcomes())
            if total != TABLE_SIZE:
                raise ValueError(f"counts for context {ctx} sum to {total}, expected {TABLE_SIZE}")

    def fully_specified_contexts(self) -> list[MeasurementContext]:
        return [c for c in all_contexts() if all(o in self.counts for o in c.outcomes())]

    def to_json(self) -> dict:
        counts: dict[str, dict[str, int]] = {}
        for o, n in self.counts.items():
            counts.setdefault(o.context.name, {})[o.label] = n
        return {
            "required": [s.text for s in sorted(self.required, key=lambda s: s.rank)],
            "counts": counts,
            "single_marginals": self.single_marginals,
            "pair_marginals": self.pair_marginals,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "TableConstraints":
        if not isinstance(doc, Mapping):
            raise ValueError("constraint document must be a JSON object")
        unknown = set(doc) - {"required", "counts", "single_marginals", "pair_marginals"}
        if unknown:
            raise ValueError(f"unknown constraint fields: {sorted(unknown)}")
        required = frozenset(InstructionSet.parse(t) for t in doc.get("required", []))
        counts = {}
        for ctx_name, per in doc.get("counts", {}).items():
            ctx = parse_context(ctx_name)
            for label, n in per.items():
                counts[parse_outcome(label, ctx)] = n
        return cls(required, counts,
                   bool(doc.get("single_marginals", True)),
                   bool(doc.get("pair_marginals", True)))

    @classmethod
    def load(cls, path: str | Path) -> "TableConstraints":
        return cls.from_json(json.loads(Path(path).read_text()))


def h1_constraints() -> TableConstraints:
    """Default reconstruction profile.

    Caption sets required; 6/2 split on the predicted/other outcomes of the
    four main contexts (product -1 favoured for yyx/yxy/xyy, +1 for xxx);
    4 per outcome for the remaining contexts; uniform marginals.
    """
    counts = {}
    for ctx in MAIN_CONTEXTS:
        favoured = 1 if ctx.name == "xxx" else -1
        for o in ctx.outcomes():
            counts[o] = 6 if o.product == favoured else 2
    for ctx in UNIFORM_CONTEXTS:
        for o in ctx.outcomes():
            counts[o] = 4
    return TableConstraints(frozenset(InstructionSet.parse(t) for t in CAPTION_SETS), counts)


def caption_only_constraints() -> TableConstraints:
    """Fallback profile: only the two caption counts plus C1 to C4."""
    yyx = parse_context("yyx")
    counts = {parse_outcome("RRV'", yyx): 6, parse_outcome("RRH'", yyx): 2}
    return TableConstraints(frozenset(InstructionSet.parse(t) for t in CAPTION_SETS), counts)


# -- verification ------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            out.append(f"{c.name}: {'pass' if c.passed else 'FAIL'}")
            out += [f"  {v}" for v in c.violations]
        return out


def _count_in(members: Iterable[InstructionSet], pred) -> int:
    return sum(1 for s in members if pred(s))


def verify_table(t: UniformTable | Iterable[InstructionSet], c: TableConstraints) -> ConstraintReport:
    """Check each constraint family directly against the member list."""
    members = list(t.members if isinstance(t, UniformTable) else t)
    checks = []

    n = len(set(members))
    checks.append(ConstraintCheck("C1 size", n == TABLE_SIZE and len(members) == n,
                                  () if n == TABLE_SIZE else (f"{n} distinct sets",)))

    bad = []
    if c.single_marginals:
        for i in range(3):
            for b in Basis:
                k = _count_in(members, lambda s: s.value(i, b).sign == 1)
                if 2 * k != len(members):
                    bad.append(f"photon {i + 1} basis {b}: {k}/{len(members)} positive")
    checks.append(ConstraintCheck("C2 single marginals", not bad, tuple(bad)))

    bad = []
    if c.pair_marginals:
        for i, j in itertools.combinations(range(3), 2):
            for bi, bj in itertools.product(Basis, Basis):
                for vi, vj in itertools.product(bi.values, bj.values):
                    k = _count_in(members, lambda s: s.value(i, bi) is vi and s.value(j, bj) is vj)
                    if 4 * k != len(members):
                        bad.append(f"photons {i + 1},{j + 1} {bi}{bj} {vi}{vj}: {k}/{len(members)}")
    checks.append(ConstraintCheck("C3 pair marginals", not bad, tuple(bad)))

    missing = sorted(c.required - set(members), key=lambda s: s.rank)
    checks.append(ConstraintCheck("C4 required members", not missing,
                                  tuple(f"missing {s}" for s in missing)))

    bad = []
    for o, target in c.counts.items():
        k = _count_in(members, lambda s: outcome_of(s, o.context) == o)
        if k != target:
            bad.append(f"{o.context} {o}: {k} (want {target})")
    checks.append(ConstraintCheck("C5 outcome counts", not bad, tuple(bad)))
    return ConstraintReport(tuple(checks))


# -- backtracking search -----------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    tables: tuple[UniformTable, ...]
    truncated: bool = False  # time budget ran out before the tree was exhausted
    nodes: int = 0

    def __len__(self):
        return len(self.tables)

    def __iter__(self):
        return iter(self.tables)

    def __getitem__(self, i):
        return self.tables[i]


class _BudgetExceeded(Exception):
    pass


def _linear_constraints(c: TableConstraints) -> list[tuple[list[int], int]]:
    """Every constraint as (member ranks, exact count)."""
    sets = all_instruction_sets()
    rows = [(list(range(64)), TABLE_SIZE)]
    if c.single_marginals:
        for i in range(3):
            for b in Basis:
                rows.append(([s.rank for s in sets if s.value(i, b).sign == 1], TABLE_SIZE // 2))
    if c.pair_marginals:
        for i, j in itertools.combinations(range(3), 2):
            for bi, bj in itertools.product(Basis, Basis):
                for vi, vj in itertools.product(bi.values, bj.values):
                    ranks = [s.rank for s in sets if s.value(i, bi) is vi and s.value(j, bj) is vj]
                    rows.append((ranks, TABLE_SIZE // 4))
    for o, target in c.counts.items():
        rows.append(([s.rank for s in sets if outcome_of(s, o.context) == o], target))
    return rows


def search_tables(c: TableConstraints, limit: int = 1, time_budget: float | None = None) -> SearchResult:
    """Depth-first search for 32-set tables meeting ``c``.

    Instruction sets are decided in canonical order, trying inclusion before
    exclusion, so tables come out in lexicographic order of their sorted rank
    lists. A branch is cut as soon as any count constraint can no longer be
    met exactly. Infeasible constraints give an empty result.
    """
    if limit < 1:
        return SearchResult(())
    if len(c.required) > TABLE_SIZE:
        return SearchResult(())

    rows = _linear_constraints(c)
    targets = [t for _, t in rows]
    counts = [0] * len(rows)
    remaining = [len(r) for r, _ in rows]
    rows_of = [[] for _ in range(64)]
    for k, (ranks, _) in enumerate(rows):
        for r in ranks:
            rows_of[r].append(k)
    forced = {s.rank for s in c.required}
    # slots reserved for required sets not yet placed
    forced_left = [sum(1 for r in ranks if r in forced) for ranks, _ in rows]

    for k, t in enumerate(targets):
        if t > remaining[k] or forced_left[k] > t:
            return SearchResult(())

    found: list[UniformTable] = []
    chosen: list[int] = []
    deadline = None if time_budget is None else time.monotonic() + time_budget
    nodes = 0

    def descend(r: int) -> bool:
        nonlocal nodes
        nodes += 1
        if deadline is not None and (nodes & 1023) == 0 and time.monotonic() > deadline:
            raise _BudgetExceeded
        if r == 64:
            found.append(UniformTable(frozenset(all_instruction_sets()[i] for i in chosen)))
            return len(found) >= limit
        ks = rows_of[r]
        f = r in forced
        # include r
        if all(counts[k] + forced_left[k] + (not f) <= targets[k] for k in ks):
            for k in ks:
                counts[k] += 1
                remaining[k] -= 1
                forced_left[k] -= f
            chosen.append(r)
            stop = descend(r + 1)
            chosen.pop()
            for k in ks:
                counts[k] -= 1
                remaining[k] += 1
                forced_left[k] += f
            if stop:
                return True
        # exclude r
        if not f and all(counts[k] + remaining[k] - 1 >= targets[k] for k in ks):
            for k in ks:
                remaining[k] -= 1
            stop = descend(r + 1)
            for k in ks:
                remaining[k] += 1
            if stop:
                return True
        return False

    try:
        descend(0)
    except _BudgetExceeded:
        return SearchResult(tuple(found), truncated=True, nodes=nodes)
    return SearchResult(tuple(found), nodes=nodes)


# -- canonical (pinned) table ------------------------------------------------

def _pinned_text() -> str:
    return resources.files("ghz_lhv").joinpath("data/canonical-table.txt").read_text()


def canonical_table() -> UniformTable:
    """The pinned 32-set table shipped with the package."""
    try:
        table = parse_table(_pinned_text())
    except (OSError, FileNotFoundError) as exc:
        raise TableFormatError(f"pinned table missing: {exc}") from None
    report = verify_table(table, h1_constraints())
    if not report.passed:
        raise TableIntegrityError("pinned table fails its profile:\n" + "\n".join(report.lines()))
    return table


def canonical_model() -> ModelDistribution:
    return canonical_table().distribution()


# -- the original local-realist argument --------------------------------------

def pan_lr_admissible_sets() -> list[InstructionSet]:
    """Sets obeying Y1Y2X3 = Y1X2Y3 = X1Y2Y3 = -1 (canonical order)."""
    out = []
    for s in all_instruction_sets():
        (x1, x2, x3), (y1, y2, y3) = s.xs, s.ys
        if y1 * y2 * x3 == -1 and y1 * x2 * y3 == -1 and x1 * y2 * y3 == -1:
            out.append(s)
    return out


def pan_lr_model() -> ModelDistribution:
    """Uniform mixture over the admissible sets."""
    return ModelDistribution.uniform(pan_lr_admissible_sets())
