"""Dense two-phase simplex for small equality-constrained linear programs.

Solves   max c.x   s.t.  A x = b,  x >= 0.

Problem sizes here are tiny (tens of rows from moment constraints, a few
thousand columns from discretized measures), so a dense tableau with
Bland's anti-cycling rule is plenty: slow pivoting never matters at this
scale, and Bland guarantees termination on the heavily degenerate vertex
sets these discretized moment problems produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = ["LPSolution", "simplex_solve"]

_PIVOT_TOL = 1e-11


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    value: float
    iterations: int


def simplex_solve(c, A, b, max_iter: int = 200_000) -> LPSolution:
    """Maximize c.x subject to A x = b, x >= 0.

    Raises NumericalError when the program is infeasible or unbounded.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise NumericalError("inconsistent LP dimensions")

    # phase 1: minimize the sum of artificials to find a feasible basis
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    # phase-1 objective row: minimize sum of artificials == maximize -sum
    T[m, n : n + m] = 1.0
    T[m] -= T[:m].sum(axis=0)
    basis = list(range(n, n + m))

    it1 = _pivot_until_optimal(T, basis, ncols=n + m, max_iter=max_iter)
    if T[m, -1] < -1e-8:
        raise NumericalError(f"linear program infeasible (phase-1 residual {-T[m, -1]:.3e})")

    # drive any artificial still in the basis out of it (degenerate rows)
    for i, bi in enumerate(basis):
        if bi >= n:
            row = T[i, :n]
            j = next((k for k in range(n) if abs(row[k]) > _PIVOT_TOL), None)
            if j is not None:
                _pivot(T, i, j)
                basis[i] = j
            # else: the row is all zeros over real variables; harmless

    # phase 2: original objective (maximization)
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[m, :n] = -c
    for i, bi in enumerate(basis):
        if bi < n:
            T2[m] -= T2[m, bi] * T2[i]
    it2 = _pivot_until_optimal(T2, basis, ncols=n, max_iter=max_iter)

    # Re-solve for the basic values from the original data: long pivot
    # sequences on degenerate problems let round-off drift into the
    # right-hand-side column, and equality constraints here are meant
    # to hold to near machine precision.
    Afull = np.hstack([A, np.eye(m)])
    try:
        xb = np.linalg.solve(Afull[:, basis], b)
    except np.linalg.LinAlgError:
        xb = np.array([T2[i, -1] for i in range(m)])
    x = np.zeros(n)
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = xb[i]
    x[(x < 0.0) & (x > -1e-9)] = 0.0
    return LPSolution(x=x, value=float(c @ x), iterations=it1 + it2)


def _pivot_until_optimal(T, basis, ncols: int, max_iter: int, bland_after: int = 10_000) -> int:
    # Dantzig's rule is fast on these discretized moment problems but has
    # no anti-cycling guarantee; after a pivot budget it hands over to
    # Bland's rule, which terminates from any tableau.
    m = T.shape[0] - 1
    for it in range(max_iter):
        obj = T[m, :ncols]
        if it < bland_after:
            enter = int(np.argmin(obj))
            if obj[enter] >= -_PIVOT_TOL:
                return it
        else:
            neg = np.flatnonzero(obj < -_PIVOT_TOL)
            if neg.size == 0:
                return it
            enter = int(neg[0])
        col = T[:m, enter]
        rhs = T[:m, -1]
        pos = col > _PIVOT_TOL
        if not pos.any():
            raise NumericalError("linear program unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        rmin = float(ratios.min())
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))
        basis_arr = np.asarray(basis)
        leave = int(ties[np.argmin(basis_arr[ties])])
        _pivot(T, leave, enter)
        basis[leave] = enter
    raise NumericalError(f"simplex did not terminate within {max_iter} pivots")


def _pivot(T, row: int, col: int):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
