"""Quantum predictions for the three-photon GHZ state.

State convention: (|HHH> + |VVV>)/sqrt(2), amplitudes indexed by H/V triples
with photon 1 as the most significant bit (H=0, V=1). Analyzer states:

    H' = (H + V)/sqrt(2)     V' = (H - V)/sqrt(2)
    R  = (H + iV)/sqrt(2)    L  = (H - iV)/sqrt(2)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lhv import OutcomeDistribution
from .polarization import Basis, MeasurementContext, PolValue, parse_context

TOL = 1e-12
_S = 1 / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray  # shape (8,), complex

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(8)
        if abs(np.vdot(a, a).real - 1) > TOL:
            raise ValueError("state vector is not normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def amplitude(self, label: str) -> complex:
        """Amplitude of an H/V triple such as ``"HHV"``."""
        if len(label) != 3 or set(label) - {"H", "V"}:
            raise ValueError(f"expected three H/V letters, got {label!r}")
        idx = int(label.replace("H", "0").replace("V", "1"), 2)
        return complex(self.amplitudes[idx])

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(2, 2, 2)

    def with_phase(self, phi: float) -> "StateVector":
        return StateVector(self.amplitudes * np.exp(1j * phi))


@dataclass(frozen=True, eq=False)
class AnalyzerVector:
    basis: Basis
    value: PolValue
    components: np.ndarray  # (H, V) components


_ANALYZERS = {
    PolValue.H: np.array([_S, _S], dtype=complex),
    PolValue.V: np.array([_S, -_S], dtype=complex),
    PolValue.R: np.array([_S, 1j * _S], dtype=complex),
    PolValue.L: np.array([_S, -1j * _S], dtype=complex),
}


def ghz_state() -> StateVector:
    a = np.zeros(8, dtype=complex)
    a[0] = a[7] = _S
    return StateVector(a)


def analyzer_vector(basis: Basis | str, value: PolValue | str) -> AnalyzerVector:
    basis = basis if isinstance(basis, Basis) else Basis(basis)
    value = value if isinstance(value, PolValue) else PolValue(value)
    if value.basis is not basis:
        raise ValueError(f"{value} is not a value of the {basis} basis")
    comps = _ANALYZERS[value].copy()
    comps.setflags(write=False)
    return AnalyzerVector(basis, value, comps)


def qm_outcome_distribution(ctx: MeasurementContext | str, state: StateVector | None = None) -> OutcomeDistribution:
    """Born-rule probabilities of the 8 outcomes of ``ctx``."""
    if isinstance(ctx, str):
        ctx = parse_context(ctx)
    psi = (state or ghz_state()).tensor()
    probs = {}
    for o in ctx.outcomes():
        a, b, c = (_ANALYZERS[v].conj() for v in o.values)
        amp = np.einsum("i,j,k,ijk->", a, b, c, psi)
        probs[o] = float(abs(amp) ** 2)
    return OutcomeDistribution(ctx, probs)


def expectation_product(ctx: MeasurementContext | str, state: StateVector | None = None) -> float:
    d = qm_outcome_distribution(ctx, state)
    return float(sum(o.product * p for o, p in d.items()))
