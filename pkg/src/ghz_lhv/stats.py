"""Measured data, model-vs-QM comparison and finite-sample simulation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .lhv import ModelDistribution, OutcomeDistribution
from .polarization import MAIN_CONTEXTS, MeasurementContext, Outcome, outcome_of, parse_context, parse_outcome

# Product sign the GHZ state predicts with certainty in each main context.
QM_SIGN = {"yyx": -1, "yxy": -1, "xyy": -1, "xxx": 1}

OUTCOME_SUM_TOL = 0.02  # measured per-outcome fractions are rounded


class DataValidationError(ValueError):
    """Experiment data violate the schema; ``path`` locates the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Aggregate:
    predicted: float
    spurious: float
    sigma: float | None = None


@dataclass(frozen=True)
class ExperimentRecord:
    context: MeasurementContext
    outcomes: Mapping[Outcome, float] | None = None
    aggregate: Aggregate | None = None

    def __post_init__(self):
        if self.outcomes is None and self.aggregate is None:
            raise ValueError(f"record for {self.context} has neither outcomes nor aggregate")
        if self.outcomes is not None:
            for o, p in self.outcomes.items():
                if o.context != self.context:
                    raise ValueError(f"outcome {o} is not in context {self.context}")
                if not 0 <= p <= 1:
                    raise ValueError(f"fraction {p} for {o} outside [0, 1]")
            total = sum(self.outcomes.values())
            if abs(total - 1) > OUTCOME_SUM_TOL:
                raise ValueError(f"per-outcome fractions for {self.context} sum to {total:.4f}")
        if self.aggregate is not None:
            for name in ("predicted", "spurious"):
                v = getattr(self.aggregate, name)
                if not 0 <= v <= 1:
                    raise ValueError(f"{name} fraction {v} outside [0, 1]")

    def predicted_fraction(self) -> float:
        """Measured weight on the outcomes QM allows; aggregate preferred."""
        if self.aggregate is not None:
            return self.aggregate.predicted
        sign = QM_SIGN[self.context.name]
        return float(sum(p for o, p in self.outcomes.items() if o.product == sign))

    def distribution(self) -> OutcomeDistribution | None:
        if self.outcomes is None:
            return None
        total = sum(self.outcomes.values())
        return OutcomeDistribution(self.context, {o: p / total for o, p in self.outcomes.items()})


def _require_fraction(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataValidationError(path, f"expected a number, got {value!r}")
    if not 0 <= value <= 1:
        raise DataValidationError(path, f"fraction {value} outside [0, 1]")
    return float(value)


def parse_records(doc) -> list[ExperimentRecord]:
    if not isinstance(doc, Mapping):
        raise DataValidationError("$", "top level must be an object")
    exps = doc.get("experiments")
    if not isinstance(exps, list):
        raise DataValidationError("$.experiments", "missing or not a list")
    records = []
    for k, e in enumerate(exps):
        path = f"$.experiments[{k}]"
        if not isinstance(e, Mapping):
            raise DataValidationError(path, "entry must be an object")
        try:
            ctx = parse_context(e.get("context"))
        except ValueError as exc:
            raise DataValidationError(f"{path}.context", str(exc)) from None
        agg = None
        if "aggregate" in e:
            a = e["aggregate"]
            if not isinstance(a, Mapping):
                raise DataValidationError(f"{path}.aggregate", "must be an object")
            for key in ("predicted", "spurious"):
                if key not in a:
                    raise DataValidationError(f"{path}.aggregate.{key}", "missing")
            sigma = a.get("sigma")
            if sigma is not None:
                sigma = _require_fraction(sigma, f"{path}.aggregate.sigma")
            agg = Aggregate(_require_fraction(a["predicted"], f"{path}.aggregate.predicted"),
                            _require_fraction(a["spurious"], f"{path}.aggregate.spurious"),
                            sigma)
        outs = None
        if "outcomes" in e:
            raw = e["outcomes"]
            if not isinstance(raw, Mapping):
                raise DataValidationError(f"{path}.outcomes", "must be an object")
            outs = {}
            for label, p in raw.items():
                try:
                    o = parse_outcome(label, ctx)
                except ValueError as exc:
                    raise DataValidationError(f"{path}.outcomes.{label}", str(exc)) from None
                outs[o] = _require_fraction(p, f"{path}.outcomes.{label}")
        try:
            records.append(ExperimentRecord(ctx, outs, agg))
        except ValueError as exc:
            raise DataValidationError(path, str(exc)) from None
    return records


def ingest_records(path: str | Path) -> list[ExperimentRecord]:
    text = Path(path).read_text()
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataValidationError("$", f"invalid JSON: {exc}") from None
    return parse_records(doc)


def bundled_data_path() -> Path:
    return Path(str(resources.files("ghz_lhv").joinpath("data/pan-aggregates.json")))


def pan_records() -> list[ExperimentRecord]:
    """Aggregates reported for the three-photon GHZ experiment."""
    return ingest_records(bundled_data_path())


# -- distances ---------------------------------------------------------------

def aggregate_fraction(d: OutcomeDistribution, sign: int):
    """Total probability on outcomes whose value product equals ``sign``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sum(p for o, p in d.items() if o.product == sign)


def total_variation(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    if a.context != b.context:
        raise ValueError(f"context mismatch: {a.context} vs {b.context}")
    return 0.5 * sum(abs(float(a.probs[o]) - float(b.probs[o])) for o in a.context.outcomes())


# -- comparison --------------------------------------------------------------

@dataclass(frozen=True)
class ContextComparison:
    context: MeasurementContext
    measured: float
    sigma: float | None
    model_fraction: float
    qm_fraction: float
    model_deviation: float
    qm_deviation: float
    model_tv: float | None = None
    qm_tv: float | None = None

    @property
    def winner(self) -> str:
        return _winner(self.model_deviation, self.qm_deviation)

    @property
    def model_z(self) -> float | None:
        return None if not self.sigma else (self.model_fraction - self.measured) / self.sigma

    @property
    def qm_z(self) -> float | None:
        return None if not self.sigma else (self.qm_fraction - self.measured) / self.sigma


def _winner(model_dev: float, qm_dev: float, tol: float = 1e-12) -> str:
    if abs(model_dev - qm_dev) <= tol:
        return "tie"
    return "model" if model_dev < qm_dev else "qm"


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ContextComparison, ...]
    spurious_sum: float | None = None  # summed spurious fraction over yyx, yxy, xyy

    @property
    def model_average(self) -> float:
        return sum(r.model_deviation for r in self.rows) / len(self.rows)

    @property
    def qm_average(self) -> float:
        return sum(r.qm_deviation for r in self.rows) / len(self.rows)

    @property
    def winner(self) -> str:
        return _winner(self.model_average, self.qm_average)

    def row(self, ctx: str) -> ContextComparison:
        for r in self.rows:
            if r.context.name == ctx:
                return r
        raise KeyError(ctx)

    def to_json(self) -> dict:
        return {
            "contexts": [
                {
                    "context": r.context.name,
                    "measured": r.measured,
                    "sigma": r.sigma,
                    "model_fraction": r.model_fraction,
                    "qm_fraction": r.qm_fraction,
                    "model_dev": r.model_deviation,
                    "qm_dev": r.qm_deviation,
                    "model_z": r.model_z,
                    "qm_z": r.qm_z,
                    "model_tv": r.model_tv,
                    "qm_tv": r.qm_tv,
                    "winner": r.winner,
                }
                for r in self.rows
            ],
            "model_average": self.model_average,
            "qm_average": self.qm_average,
            "winner": self.winner,
            "spurious_sum": self.spurious_sum,
        }


def compare_models(records: Sequence[ExperimentRecord],
                   model: Mapping[str | MeasurementContext, OutcomeDistribution],
                   qm: Mapping[str | MeasurementContext, OutcomeDistribution]) -> ComparisonReport:
    """Aggregate-deviation comparison over yyx, yxy, xyy and xxx.

    Deviation is ``|predicted fraction - measured predicted fraction|`` where
    the predicted fraction is the weight on outcomes with the QM sign. When
    a record carries per-outcome data the total variation distance is added.
    """
    def lookup(table, ctx):
        if ctx in table:
            return table[ctx]
        return table[ctx.name]

    by_ctx = {}
    for r in records:
        by_ctx.setdefault(r.context.name, r)
    missing = [c.name for c in MAIN_CONTEXTS if c.name not in by_ctx]
    if missing:
        raise ValueError(f"no experiment record for context(s): {', '.join(missing)}")

    rows = []
    for ctx in MAIN_CONTEXTS:
        rec = by_ctx[ctx.name]
        sign = QM_SIGN[ctx.name]
        md, qd = lookup(model, ctx), lookup(qm, ctx)
        measured = rec.predicted_fraction()
        mf = float(aggregate_fraction(md, sign))
        qf = float(aggregate_fraction(qd, sign))
        emp = rec.distribution()
        rows.append(ContextComparison(
            ctx, measured, rec.aggregate.sigma if rec.aggregate else None, mf, qf,
            abs(mf - measured), abs(qf - measured),
            None if emp is None else total_variation(md, emp),
            None if emp is None else total_variation(qd, emp),
        ))
    spurious = [by_ctx[c].aggregate.spurious if by_ctx[c].aggregate else 1 - by_ctx[c].predicted_fraction()
                for c in ("yyx", "yxy", "xyy")]
    return ComparisonReport(tuple(rows), float(sum(spurious)))


# -- Monte Carlo -------------------------------------------------------------

@dataclass(frozen=True)
class SampleResult:
    context: MeasurementContext
    counts: Mapping[Outcome, int]
    n: int
    seed: int

    def fraction(self, o: Outcome | str) -> float:
        if isinstance(o, str):
            o = parse_outcome(o, self.context)
        return self.counts[o] / self.n

    def to_json(self) -> dict:
        return {
            "context": self.context.name,
            "n": self.n,
            "seed": self.seed,
            "generator": "numpy.random.PCG64",
            "counts": {o.label: c for o, c in self.counts.items()},
        }


def monte_carlo_sample(m: ModelDistribution, ctx: MeasurementContext | str, n: int, seed: int) -> SampleResult:
    """Draw ``n`` instruction sets from ``m`` and read them out in ``ctx``.

    Uses PCG64 seeded with ``seed``; each draw inverts the cumulative weight
    vector taken in canonical instruction-set order.
    """
    if isinstance(ctx, str):
        ctx = parse_context(ctx)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n!r}")
    support = m.support  # canonical order
    cum = np.cumsum([float(w) for w in m.weights.values()])
    cum[-1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = np.searchsorted(cum, rng.random(int(n)), side="right")
    per_set = np.bincount(idx, minlength=len(support))
    counts = {o: 0 for o in ctx.outcomes()}
    for s, c in zip(support, per_set):
        counts[outcome_of(s, ctx)] += int(c)
    return SampleResult(ctx, counts, int(n), int(seed))


def binomial_band(p: float, n: int, k: float = 4.0) -> float:
    return k * math.sqrt(p * (1 - p) / n)


# -- figure data -------------------------------------------------------------

@dataclass(frozen=True)
class BarRow:
    context: str
    outcome: str
    series: str
    value: float


def bar_chart_rows(contexts: Sequence[MeasurementContext],
                   model: Mapping[str, OutcomeDistribution],
                   qm: Mapping[str, OutcomeDistribution],
                   records: Sequence[ExperimentRecord] = ()) -> list[BarRow]:
    """Per-outcome bars for the qm, experiment and model series.

    Experiment bars appear only for records with per-outcome fractions.
    """
    recs = {r.context.name: r for r in records if r.outcomes is not None}
    rows = []
    for ctx in contexts:
        for o in ctx.outcomes():
            rows.append(BarRow(ctx.name, o.label, "qm", float(qm[ctx.name].probs[o])))
            if ctx.name in recs:
                rows.append(BarRow(ctx.name, o.label, "experiment", float(recs[ctx.name].outcomes.get(o, 0.0))))
            rows.append(BarRow(ctx.name, o.label, "model", float(model[ctx.name].probs[o])))
    return rows


def aggregate_bar_rows(report: ComparisonReport) -> list[BarRow]:
    """Predicted/spurious split per context for each series."""
    rows = []
    for r in report.rows:
        for series, pred in (("qm", r.qm_fraction), ("experiment", r.measured), ("model", r.model_fraction)):
            rows.append(BarRow(r.context.name, "predicted", series, pred))
            rows.append(BarRow(r.context.name, "spurious", series, 1 - pred))
    return rows
