import numpy as np
import pytest

from ghz_lhv.polarization import MAIN_CONTEXTS, UNIFORM_CONTEXTS, Basis, PolValue, all_contexts, parse_context
from ghz_lhv.qm import (
    StateVector,
    analyzer_vector,
    expectation_product,
    ghz_state,
    qm_outcome_distribution,
)

TOL = 1e-12

# Oracle: Born rule as tr(P rho) with Kronecker-product projectors.
_KET = {
    "H'": np.array([1, 1]) / np.sqrt(2),
    "V'": np.array([1, -1]) / np.sqrt(2),
    "R": np.array([1, 1j]) / np.sqrt(2),
    "L": np.array([1, -1j]) / np.sqrt(2),
}


def _oracle_prob(labels, psi):
    rho = np.outer(psi, psi.conj())
    P = np.array([[1.0]])
    for lab in labels:
        k = _KET[lab]
        P = np.kron(P, np.outer(k, k.conj()))
    return float(np.trace(P @ rho).real)


def _ghz_oracle():
    psi = np.zeros(8, dtype=complex)
    psi[0b000] = psi[0b111] = 1 / np.sqrt(2)
    return psi


def test_ghz_amplitudes():
    s = ghz_state()
    assert s.amplitude("HHH") == pytest.approx(1 / np.sqrt(2), abs=TOL)
    assert s.amplitude("HHV") == 0
    assert np.vdot(s.amplitudes, s.amplitudes).real == pytest.approx(1, abs=TOL)


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        StateVector(np.ones(8))


def test_analyzer_vectors():
    np.testing.assert_allclose(analyzer_vector("x", "H'").components, [1 / np.sqrt(2)] * 2, atol=TOL)
    np.testing.assert_allclose(analyzer_vector(Basis.Y, PolValue.R).components, [1 / np.sqrt(2), 1j / np.sqrt(2)], atol=TOL)
    r, l = analyzer_vector("y", "R").components, analyzer_vector("y", "L").components
    assert abs(np.vdot(r, l)) < TOL
    h, v = analyzer_vector("x", "H'").components, analyzer_vector("x", "V'").components
    assert abs(np.vdot(h, v)) < TOL
    with pytest.raises(ValueError):
        analyzer_vector("x", "R")


@pytest.mark.parametrize("b", list(Basis))
def test_projectors_complete(b):
    P = sum(np.outer(analyzer_vector(b, v).components, analyzer_vector(b, v).components.conj()) for v in b.values)
    np.testing.assert_allclose(P, np.eye(2), atol=TOL)


@pytest.mark.parametrize("ctx", all_contexts(), ids=str)
def test_matches_trace_oracle(ctx):
    d = qm_outcome_distribution(ctx)
    psi = _ghz_oracle()
    for o, p in d.items():
        assert p == pytest.approx(_oracle_prob([v.value for v in o.values], psi), abs=TOL)
    assert sum(d.probs.values()) == pytest.approx(1, abs=TOL)


def test_eq1_eq2_distributions():
    for ctx in MAIN_CONTEXTS:
        sign = 1 if ctx.name == "xxx" else -1
        d = qm_outcome_distribution(ctx)
        for o, p in d.items():
            assert p == pytest.approx(0.25 if o.product == sign else 0.0, abs=TOL)


@pytest.mark.parametrize("ctx", UNIFORM_CONTEXTS, ids=str)
def test_uniform_contexts(ctx):
    d = qm_outcome_distribution(ctx)
    np.testing.assert_allclose(d.as_floats(), [1 / 8] * 8, atol=TOL)
    assert expectation_product(ctx) == pytest.approx(0, abs=TOL)


@pytest.mark.parametrize("name, e", [("yyx", -1), ("yxy", -1), ("xyy", -1), ("xxx", 1), ("xxy", 0)])
def test_expectations(name, e):
    assert expectation_product(name) == pytest.approx(e, abs=TOL)


@pytest.mark.parametrize("phi", [0.3, 1.7, np.pi])
def test_global_phase_invariance(phi):
    s = ghz_state().with_phase(phi)
    for ctx in all_contexts():
        np.testing.assert_allclose(qm_outcome_distribution(ctx, s).as_floats(),
                                   qm_outcome_distribution(ctx).as_floats(), atol=TOL)
