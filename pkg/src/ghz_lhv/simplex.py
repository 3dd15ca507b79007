"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_eq @ x == b_eq``, ``A_ub @ x <= b_ub`` and
``x >= 0``. Intended for problems with at most a few hundred variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-10


class SimplexError(RuntimeError):
    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class Infeasible(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    iterations: int
    trace: list = field(default_factory=list, repr=False)


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _run(T, basis, ncols, max_iter, trace, phase):
    """Iterate on tableau ``T`` (last row = reduced costs, last column = rhs)."""
    m = T.shape[0] - 1
    it = 0
    while True:
        costs = T[-1, :ncols]
        entering = np.flatnonzero(costs < -EPS)
        if entering.size == 0:
            return it
        col = int(entering[0])  # Bland: smallest index
        colv = T[:m, col]
        rows = np.flatnonzero(colv > EPS)
        if rows.size == 0:
            raise Unbounded("objective unbounded below", trace)
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + EPS * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))  # Bland: smallest basic index leaves
        trace.append((phase, it, col, basis[row], float(best)))
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it >= max_iter:
            raise SimplexError(f"iteration limit {max_iter} reached in phase {phase}", trace[-50:])


def linprog(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, max_iter: int = 50_000) -> LpResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]

    # standard form: [A_eq 0; A_ub I] [x; s] = b
    A = np.zeros((m_eq + m_ub, n + m_ub))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    m, nstd = A.shape

    # phase 1 with one artificial per row
    T = np.zeros((m + 1, nstd + m + 1))
    T[:m, :nstd] = A
    T[:m, nstd:nstd + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nstd] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(nstd, nstd + m))
    trace: list = []
    it1 = _run(T, basis, nstd + m, max_iter, trace, 1)
    if -T[-1, -1] > 1e-8 * max(1.0, np.abs(b).max(initial=0.0)):
        raise Infeasible(f"infeasible: phase-1 residual {-T[-1, -1]:.3g}", trace[-50:])

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= nstd:
            cand = np.flatnonzero(np.abs(T[r, :nstd]) > 1e-9)
            if cand.size:
                _pivot(T, r, int(cand[0]))
                basis[r] = int(cand[0])
                keep.append(r)
        else:
            keep.append(r)
    T2 = np.zeros((len(keep) + 1, nstd + 1))
    T2[:-1, :nstd] = T[keep, :nstd]
    T2[:-1, -1] = T[keep, -1]
    basis = [basis[r] for r in keep]
    cstd = np.concatenate([c, np.zeros(m_ub)])
    T2[-1, :nstd] = cstd
    for r, j in enumerate(basis):
        T2[-1] -= cstd[j] * T2[r]
    it2 = _run(T2, basis, nstd, max_iter, trace, 2)

    xstd = np.zeros(nstd)
    for r, j in enumerate(basis):
        xstd[j] = T2[r, -1]
    x = xstd[:n]
    return LpResult(x, float(c @ x), it1 + it2, trace)
