from fractions import Fraction

import numpy as np
import pytest
import scipy.optimize

from ghz_lhv import simplex
from ghz_lhv.lhv import ModelDistribution, canonical_model, outcome_distribution, pan_lr_admissible_sets
from ghz_lhv.lp import (
    MERMIN_SIGNS,
    fit_distribution,
    fit_objective,
    functional_value,
    lp_max_linear_functional,
    max_linear_functional,
    mermin_value,
    mermin_weights,
    model_expectation,
)
from ghz_lhv.polarization import MAIN_CONTEXTS, all_contexts, all_instruction_sets, outcome_of, parse_context
from ghz_lhv.qm import expectation_product, qm_outcome_distribution


def test_mermin_value_examples():
    assert mermin_value({"xxx": 1, "xyy": -1, "yxy": -1, "yyx": -1}) == 4
    assert mermin_value({"xxx": 0.5, "xyy": -0.5, "yxy": -0.5, "yyx": -0.5}) == 2
    assert mermin_value({k: 0 for k in MERMIN_SIGNS}) == 0
    with pytest.raises(ValueError):
        mermin_value({"xxx": 1})
    with pytest.raises(ValueError):
        mermin_value({"xxx": 2, "xyy": 0, "yxy": 0, "yyx": 0})


def test_mermin_vertex_oracle():
    # oracle: evaluate the correlator combination directly on each sign assignment
    best = max(
        s.xs[0] * s.xs[1] * s.xs[2] - s.xs[0] * s.ys[1] * s.ys[2]
        - s.ys[0] * s.xs[1] * s.ys[2] - s.ys[0] * s.ys[1] * s.xs[2]
        for s in all_instruction_sets()
    )
    assert best == 2
    value, witness = max_linear_functional(mermin_weights())
    assert value == 2
    assert functional_value(mermin_weights(), witness) == 2


def test_max_linear_functional_trivial():
    v, w = max_linear_functional({})
    assert v == 0 and w == all_instruction_sets()[0]
    v, w = max_linear_functional({("xyx", "V'RH'"): 1})
    assert v == 1
    assert w.text.startswith("V'R|H'")


def test_lp_agrees_with_vertex_scan():
    rng = np.random.default_rng(0)
    outs = [o for c in all_contexts() for o in c.outcomes()]
    for _ in range(20):
        k = rng.integers(1, 20)
        picks = rng.choice(len(outs), size=k, replace=False)
        weights = {outs[i]: float(rng.normal()) for i in picks}
        v, _ = max_linear_functional(weights)
        assert lp_max_linear_functional(weights) == pytest.approx(v, abs=1e-9)
    assert lp_max_linear_functional(mermin_weights()) == pytest.approx(2, abs=1e-9)


def test_model_expectations():
    m = canonical_model()
    assert model_expectation(m, "yyx") == -0.5
    assert model_expectation(m, "xxx") == 0.5
    assert model_expectation(ModelDistribution.point_mass(pan_lr_admissible_sets()[0]), "xxx") == -1
    for c in all_contexts():
        assert model_expectation(ModelDistribution.uniform(), c) == 0
    exps = {n: model_expectation(m, n) for n in MERMIN_SIGNS}
    assert mermin_value(exps) == 2
    assert mermin_value({n: expectation_product(n) for n in MERMIN_SIGNS}) == pytest.approx(4, abs=1e-12)


# -- simplex against scipy ----------------------------------------------------

def _random_lp(rng, n, m_eq, m_ub):
    x0 = rng.random(n)
    A_eq = rng.normal(size=(m_eq, n))
    A_ub = rng.normal(size=(m_ub, n))
    b_eq = A_eq @ x0
    b_ub = A_ub @ x0 + rng.random(m_ub)
    c = rng.normal(size=n)
    # keep bounded: add sum(x) <= cap
    A_ub = np.vstack([A_ub, np.ones(n)])
    b_ub = np.append(b_ub, n * 2.0)
    return c, A_eq, b_eq, A_ub, b_ub


@pytest.mark.parametrize("seed", range(8))
def test_simplex_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    c, A_eq, b_eq, A_ub, b_ub = _random_lp(rng, 12, 3, 5)
    ours = simplex.linprog(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub)
    ref = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(ours.x >= -1e-9)
    np.testing.assert_allclose(A_eq @ ours.x, b_eq, atol=1e-8)


def test_simplex_infeasible_and_unbounded():
    with pytest.raises(simplex.Infeasible):
        simplex.linprog([1, 1], A_eq=[[1, 1]], b_eq=[-1])
    with pytest.raises(simplex.Unbounded):
        simplex.linprog([-1, 0], A_eq=[[0, 1]], b_eq=[1])


def test_simplex_degenerate_redundant_rows():
    # duplicated equality row, degenerate vertex
    res = simplex.linprog([1, 2, 0], A_eq=[[1, 1, 1], [1, 1, 1]], b_eq=[1, 1], A_ub=[[1, 0, 0]], b_ub=[0])
    assert res.objective == pytest.approx(0)


# -- fitting -------------------------------------------------------------------

@pytest.mark.parametrize("metric", ["L1", "Linf"])
def test_fit_canonical_is_exact(metric):
    m = canonical_model()
    targets = [outcome_distribution(m, c) for c in MAIN_CONTEXTS]
    r = fit_distribution(targets, metric)
    assert r.objective == pytest.approx(0, abs=1e-9)
    for c in MAIN_CONTEXTS:
        assert outcome_distribution(r.model, c) == outcome_distribution(m, c)


@pytest.mark.parametrize("metric, bound", [("L1", 2.0), ("Linf", 1 / 16)])
def test_fit_qm_is_infeasible(metric, bound):
    targets = [qm_outcome_distribution(c) for c in MAIN_CONTEXTS]
    r = fit_distribution(targets, metric)
    assert r.objective > 1e-3
    assert r.certificate is not None and "Mermin" in r.certificate
    # the Mermin-derived lower bound is attained
    assert r.objective == pytest.approx(bound, abs=1e-9)
    assert abs(r.rounded_objective - r.objective) < 1e-8


def test_fit_single_context_qm_is_feasible():
    t = qm_outcome_distribution("yyx")
    r = fit_distribution([t], "L1")
    assert r.objective == pytest.approx(0, abs=1e-9)
    # brute-force construction: uniform over one set per allowed outcome
    yyx = parse_context("yyx")
    pick = {}
    for s in all_instruction_sets():
        o = outcome_of(s, yyx)
        if o.product == -1:
            pick.setdefault(o, s)
    m = ModelDistribution.uniform(pick.values())
    assert fit_objective([float(m.weight(s)) for s in all_instruction_sets()], [t]) == pytest.approx(0, abs=1e-12)


def test_fit_dedupes_with_warning():
    t = qm_outcome_distribution("yyx")
    with pytest.warns(UserWarning, match="more than once"):
        r = fit_distribution([t, t], "L1")
    assert len(r.residuals) == 8


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_distribution([], "L1")
    with pytest.raises(ValueError):
        fit_distribution([qm_outcome_distribution("yyx")], "L2")


@pytest.mark.parametrize("metric", ["L1", "Linf"])
def test_fit_first_order_optimality(metric):
    targets = [qm_outcome_distribution(c) for c in MAIN_CONTEXTS]
    r = fit_distribution(targets, metric)
    w = np.array([float(r.model.weight(s)) for s in all_instruction_sets()])
    base = fit_objective(w, targets, metric)
    eps = 1e-3
    for k in range(64):
        moved = (1 - eps) * w
        moved[k] += eps
        assert fit_objective(moved, targets, metric) >= base - 1e-9


def test_fit_model_is_exact_distribution():
    r = fit_distribution([qm_outcome_distribution(c) for c in MAIN_CONTEXTS], "L1")
    assert sum(r.model.weights.values()) == 1
    assert all(isinstance(w, Fraction) and w > 0 for w in r.model.weights.values())
    assert r.raw_weights.min() >= -1e-9
