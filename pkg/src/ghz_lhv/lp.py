"""Linear programs over the 64-vertex instruction-set simplex.

Every context/outcome probability is linear in the model weights, so the set
of reachable statistics is a polytope whose vertices are the 64 deterministic
instruction sets. This module scans those vertices, solves fitting problems
with :mod:`ghz_lhv.simplex`, and evaluates the Mermin combination
``E[xxx] - E[xyy] - E[yxy] - E[yyx]``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import simplex
from .lhv import ModelDistribution, OutcomeDistribution, model_expectation_exact
from .polarization import (
    InstructionSet,
    MeasurementContext,
    Outcome,
    all_instruction_sets,
    outcome_of,
    parse_context,
    parse_outcome,
)

MERMIN_SIGNS = {"xxx": 1, "xyy": -1, "yxy": -1, "yyx": -1}
LHV_MERMIN_BOUND = 2
METRICS = ("L1", "Linf")


def model_expectation(m: ModelDistribution, ctx: MeasurementContext | str) -> float:
    return float(model_expectation_exact(m, ctx))


def mermin_value(expectations: Mapping[str, float]):
    """Mermin combination of the four main-context correlators."""
    vals = {}
    for name, sign in MERMIN_SIGNS.items():
        if name not in expectations:
            raise ValueError(f"missing expectation for {name}")
        e = expectations[name]
        if not -1 - 1e-12 <= e <= 1 + 1e-12:
            raise ValueError(f"expectation for {name} outside [-1, 1]: {e}")
        vals[name] = sign * e
    return sum(vals.values())


def mermin_weights() -> dict[Outcome, int]:
    """Weights turning the Mermin combination into a linear functional of P(o|ctx)."""
    out = {}
    for name, sign in MERMIN_SIGNS.items():
        for o in parse_context(name).outcomes():
            out[o] = sign * o.product
    return out


def _normalize_weights(weights) -> dict[Outcome, float]:
    out = {}
    for key, w in weights.items():
        if isinstance(key, Outcome):
            o = key
        else:
            ctx, label = key
            o = parse_outcome(label, ctx)
        out[o] = out.get(o, 0) + w
    return out


def functional_value(weights, s: InstructionSet):
    """Value of a linear functional at the point mass on ``s``."""
    return sum(w for o, w in _normalize_weights(weights).items() if outcome_of(s, o.context) == o)


def max_linear_functional(weights) -> tuple[float, InstructionSet]:
    """Maximum over all models, found by scanning the 64 point masses.

    Ties go to the earliest set in canonical order.
    """
    w = _normalize_weights(weights)
    best, witness = None, None
    for s in all_instruction_sets():
        v = sum(x for o, x in w.items() if outcome_of(s, o.context) == o)
        if best is None or v > best + 1e-12:
            best, witness = v, s
    return best, witness


def _design_rows(outcomes: Sequence[Outcome]) -> np.ndarray:
    """Row k holds P(outcomes[k] | ctx) as a 0/1 vector over the 64 sets."""
    sets = all_instruction_sets()
    A = np.zeros((len(outcomes), len(sets)))
    for k, o in enumerate(outcomes):
        for s in sets:
            if outcome_of(s, o.context) == o:
                A[k, s.rank] = 1.0
    return A


def lp_max_linear_functional(weights) -> float:
    """Same maximum as :func:`max_linear_functional`, via the simplex solver."""
    w = _normalize_weights(weights)
    outs = list(w)
    coef = np.array([float(w[o]) for o in outs]) @ _design_rows(outs) if outs else np.zeros(64)
    res = simplex.linprog(-coef, A_eq=np.ones((1, 64)), b_eq=[1.0])
    return -res.objective


@dataclass
class FitResult:
    model: ModelDistribution
    objective: float  # LP optimum
    metric: str
    residuals: dict[Outcome, float]  # model - target, for the rounded model
    raw_weights: np.ndarray = field(repr=False)
    rounded_objective: float = 0.0
    certificate: str | None = None

    @property
    def witness_sets(self) -> list[InstructionSet]:
        return self.model.support

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "objective": self.objective,
            "rounded_objective": self.rounded_objective,
            "residuals": {f"{o.context.name}:{o.label}": r for o, r in self.residuals.items()},
            "witness_sets": {s.text: str(w) for s, w in self.model.weights.items()},
            "certificate": self.certificate,
        }


def fit_objective(weights: np.ndarray, targets: Sequence[OutcomeDistribution], metric: str = "L1") -> float:
    """Residual norm of a (float) weight vector against the targets."""
    outs = [o for t in targets for o in t.context.outcomes()]
    tvec = np.array([float(t.probs[o]) for t in targets for o in t.context.outcomes()])
    r = _design_rows(outs) @ np.asarray(weights, dtype=float) - tvec
    return float(np.abs(r).sum() if metric == "L1" else np.abs(r).max())


def _dedupe(targets) -> list[OutcomeDistribution]:
    if isinstance(targets, Mapping):
        targets = list(targets.values())
    seen = {}
    for t in targets:
        if t.context in seen:
            warnings.warn(f"target context {t.context} given more than once; keeping the first", stacklevel=3)
            continue
        seen[t.context] = t
    return list(seen.values())


def _round_model(x: np.ndarray) -> ModelDistribution:
    if x.min() < -1e-9:
        raise simplex.SimplexError(f"LP returned weight {x.min():.3g} below -1e-9")
    clamped = [Fraction(float(max(v, 0.0))).limit_denominator(10**12) for v in x]
    total = sum(clamped)
    sets = all_instruction_sets()
    return ModelDistribution({sets[i]: w / total for i, w in enumerate(clamped) if w})


def mermin_certificate(targets: Sequence[OutcomeDistribution], metric: str) -> str | None:
    """Lower bound on the fit residual implied by the Mermin bound, if any.

    |M(P) - M(T)| <= sum over the four contexts of the L1 distance, and each
    correlator moves by at most 8 times the Linf distance.
    """
    by = {t.context.name: t for t in targets}
    if not all(name in by for name in MERMIN_SIGNS):
        return None
    exps = {name: float(sum(o.product * p for o, p in by[name].items())) for name in MERMIN_SIGNS}
    m = mermin_value(exps)
    excess = abs(m) - LHV_MERMIN_BOUND
    if excess <= 1e-12:
        return None
    bound = excess if metric == "L1" else excess / 32
    return (f"target Mermin value {m:.6g} exceeds the instruction-set maximum {LHV_MERMIN_BOUND}; "
            f"every model has {metric} residual >= {bound:.6g}")


def fit_distribution(targets, metric: str = "L1") -> FitResult:
    """Closest instruction-set model to the target distributions.

    L1 minimizes the summed absolute residuals over all target outcomes;
    Linf minimizes the largest one.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    targets = _dedupe(targets)
    if not targets:
        raise ValueError("at least one target context is required")
    outs = [o for t in targets for o in t.context.outcomes()]
    tvec = np.array([float(t.probs[o]) for t in targets for o in t.context.outcomes()])
    D = _design_rows(outs)
    k = len(outs)
    if metric == "L1":
        # vars: w (64), u (k), v (k); D w - u + v = t
        nv = 64 + 2 * k
        c = np.concatenate([np.zeros(64), np.ones(2 * k)])
        A_eq = np.zeros((k + 1, nv))
        A_eq[0, :64] = 1
        A_eq[1:, :64] = D
        A_eq[1:, 64:64 + k] = -np.eye(k)
        A_eq[1:, 64 + k:] = np.eye(k)
        b_eq = np.concatenate([[1.0], tvec])
        res = simplex.linprog(c, A_eq=A_eq, b_eq=b_eq)
    else:
        # vars: w (64), z; D w - z <= t, -D w - z <= -t
        nv = 65
        c = np.zeros(nv)
        c[-1] = 1
        A_eq = np.zeros((1, nv))
        A_eq[0, :64] = 1
        A_ub = np.zeros((2 * k, nv))
        A_ub[:k, :64] = D
        A_ub[k:, :64] = -D
        A_ub[:, -1] = -1
        b_ub = np.concatenate([tvec, -tvec])
        res = simplex.linprog(c, A_eq=A_eq, b_eq=[1.0], A_ub=A_ub, b_ub=b_ub)
    w = res.x[:64]
    model = _round_model(w)
    exact = np.array([float(model.weight(s)) for s in all_instruction_sets()])
    r = D @ exact - tvec
    return FitResult(
        model=model,
        objective=max(res.objective, 0.0),
        metric=metric,
        residuals={o: float(v) for o, v in zip(outs, r)},
        raw_weights=w,
        rounded_objective=fit_objective(exact, targets, metric),
        certificate=mermin_certificate(targets, metric),
    )
