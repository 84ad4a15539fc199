"""Brute-force vertex enumeration, used to cross-check the simplex solver.

Every vertex of ``{x : constraints, bounds}`` is the unique solution of ``n``
linearly independent active hyperplanes.  Equality rows and fixed variables are
always active; the remaining hyperplanes are picked from inequality rows and
finite bounds in every possible combination.  The cost grows combinatorially,
so this is only meant for problems with a handful of free dimensions.

The oracle assumes the feasible set is pointed and the objective is bounded on
it.  It cannot detect unboundedness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, Sense


@dataclass(frozen=True)
class OracleResult:
    feasible: bool
    objective: float
    x: np.ndarray | None
    vertices_checked: int


def _independent_rows(rows: np.ndarray, tol: float = 1e-9) -> list[int]:
    keep: list[int] = []
    for i in range(rows.shape[0]):
        trial = rows[keep + [i]]
        if np.linalg.matrix_rank(trial, tol=tol) == len(keep) + 1:
            keep.append(i)
    return keep


def enumerate_vertices(problem: LpProblem, feas_tol: float = 1e-7,
                       chunk: int = 20000, max_combinations: int = 5_000_000) -> OracleResult:
    c, A, senses, b, lower, upper = problem.dense()
    n = len(c)

    eq_rows, eq_rhs = [], []
    le_rows, le_rhs = [], []
    for row, sense, rhs in zip(A, senses, b):
        if sense is Sense.EQ:
            eq_rows.append(row)
            eq_rhs.append(rhs)
        elif sense is Sense.LE:
            le_rows.append(row)
            le_rhs.append(rhs)
        else:
            le_rows.append(-row)
            le_rhs.append(-rhs)
    eye = np.eye(n)
    for j in range(n):
        if lower[j] == upper[j]:
            eq_rows.append(eye[j])
            eq_rhs.append(lower[j])
            continue
        if math.isfinite(lower[j]):
            le_rows.append(-eye[j])
            le_rhs.append(-lower[j])
        if math.isfinite(upper[j]):
            le_rows.append(eye[j])
            le_rhs.append(upper[j])

    E = np.array(eq_rows).reshape(-1, n)
    e = np.array(eq_rhs, dtype=float)
    G = np.array(le_rows).reshape(-1, n)
    h = np.array(le_rhs, dtype=float)

    # normalise so that determinant and residual thresholds are scale free
    def unit(M: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        norms = np.linalg.norm(M, axis=1)
        norms[norms == 0] = 1.0
        return M / norms[:, None], v / norms

    E, e = unit(E, e)
    G, h = unit(G, h)

    for i in np.flatnonzero(np.linalg.norm(E, axis=1) == 0):
        if abs(e[i]) > feas_tol:
            return OracleResult(False, math.nan, None, 0)

    mandatory = _independent_rows(E) if len(E) else []
    k = n - len(mandatory)
    usable = [i for i in range(len(G)) if np.linalg.norm(G[i]) > 0]
    if k > len(usable):
        return OracleResult(False, math.nan, None, 0)
    total = math.comb(len(usable), k)
    if total > max_combinations:
        raise ValueError(f"{total} hyperplane combinations exceeds the oracle budget")

    fixed = E[mandatory]
    fixed_rhs = e[mandatory]
    best_obj, best_x, checked = math.inf, None, 0
    combos = itertools.combinations(usable, k)
    while True:
        picked = list(itertools.islice(combos, chunk))
        if not picked:
            break
        block = np.array(picked, dtype=int).reshape(len(picked), k)
        count = block.shape[0]
        M = np.empty((count, n, n))
        rhs = np.empty((count, n))
        M[:, :len(mandatory)] = fixed
        rhs[:, :len(mandatory)] = fixed_rhs
        M[:, len(mandatory):] = G[block]
        rhs[:, len(mandatory):] = h[block]
        regular = np.abs(np.linalg.det(M)) > 1e-10
        if not regular.any():
            continue
        X = np.linalg.solve(M[regular], rhs[regular][..., None])[..., 0]
        checked += X.shape[0]
        ok = np.ones(X.shape[0], dtype=bool)
        if len(E):
            ok &= (np.abs(X @ E.T - e) <= feas_tol).all(axis=1)
        if len(G):
            ok &= (X @ G.T - h <= feas_tol).all(axis=1)
        if not ok.any():
            continue
        objs = X[ok] @ c
        i = int(np.argmin(objs))
        if objs[i] < best_obj:
            best_obj = float(objs[i])
            best_x = X[ok][i]

    if best_x is None:
        return OracleResult(False, math.nan, None, checked)
    return OracleResult(True, best_obj, best_x, checked)
