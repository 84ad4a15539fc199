"""Dense revised simplex for linear programs with bounded variables.

Problems are stated as::

    minimize    c @ x
    subject to  a_i @ x  (<=, =, >=)  b_i     for every constraint i
                lower <= x <= upper           (bounds may be infinite)

Each row gets a slack column whose bounds encode the relation, so the solver
only ever works with ``A x + s = b``.  Phase 1 drives artificial columns out of
the starting basis; phase 2 optimizes the real objective from that basis.
Nonbasic variables sit at one of their bounds (free ones at zero) and the ratio
test considers the entering variable's own bound flip.

Pricing is Dantzig's largest reduced cost until a run of degenerate pivots
exceeds ``STALL_LIMIT``; from then on Bland's smallest-index rule is used until
the next nondegenerate step, which rules out cycling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
STALL_LIMIT = 25
REFACTOR_EVERY = 50


class Sense(str, enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class MalformedProblem(ValueError):
    """The problem is not well formed and was rejected before solving."""


@dataclass
class Constraint:
    coefficients: dict[int, float]
    sense: Sense
    rhs: float
    name: str = ""


class LpProblem:
    """Minimization problem built up one variable and one row at a time."""

    def __init__(self) -> None:
        self.costs: list[float] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.names: list[str] = []
        self.constraints: list[Constraint] = []

    @property
    def n_variables(self) -> int:
        return len(self.costs)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_variable(self, lower: float = 0.0, upper: float = math.inf,
                     cost: float = 0.0, name: str = "") -> int:
        self.costs.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.names.append(name or f"x{len(self.costs) - 1}")
        return len(self.costs) - 1

    def add_constraint(self, coefficients: Mapping[int, float], sense: Sense | str,
                       rhs: float, name: str = "") -> int:
        coeffs = {int(j): float(v) for j, v in coefficients.items()}
        self.constraints.append(Constraint(coeffs, Sense(sense), float(rhs), name))
        return len(self.constraints) - 1

    @classmethod
    def from_arrays(cls, c: Sequence[float], A: np.ndarray | Sequence[Sequence[float]],
                    senses: Iterable[Sense | str], b: Sequence[float],
                    bounds: Sequence[tuple[float, float]]) -> "LpProblem":
        """Build a problem from dense arrays; zero coefficients are dropped."""
        problem = cls()
        for cost, (lo, hi) in zip(c, bounds, strict=True):
            problem.add_variable(lo, hi, cost)
        A = np.atleast_2d(np.asarray(A, dtype=float)) if len(b) else np.zeros((0, len(c)))
        for row, sense, rhs in zip(A, senses, b, strict=True):
            problem.add_constraint({j: v for j, v in enumerate(row) if v != 0.0}, sense, rhs)
        return problem

    def validate(self) -> None:
        n = self.n_variables
        for j in range(n):
            lo, hi, cost = self.lower[j], self.upper[j], self.costs[j]
            if math.isnan(lo) or math.isnan(hi) or lo == math.inf or hi == -math.inf:
                raise MalformedProblem(f"variable {self.names[j]} has invalid bounds ({lo}, {hi})")
            if lo > hi:
                raise MalformedProblem(f"variable {self.names[j]} has lower bound above upper bound")
            if not math.isfinite(cost):
                raise MalformedProblem(f"variable {self.names[j]} has non-finite cost {cost}")
        for i, con in enumerate(self.constraints):
            label = con.name or f"row {i}"
            if not math.isfinite(con.rhs):
                raise MalformedProblem(f"constraint {label} has non-finite rhs")
            for j, v in con.coefficients.items():
                if not 0 <= j < n:
                    raise MalformedProblem(f"constraint {label} references undeclared variable {j}")
                if not math.isfinite(v):
                    raise MalformedProblem(f"constraint {label} has non-finite coefficient on {self.names[j]}")

    def dense(self) -> tuple[np.ndarray, np.ndarray, list[Sense], np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(c, A, senses, b, lower, upper)`` as dense arrays."""
        m, n = self.n_constraints, self.n_variables
        A = np.zeros((m, n))
        for i, con in enumerate(self.constraints):
            for j, v in con.coefficients.items():
                A[i, j] += v
        b = np.array([con.rhs for con in self.constraints], dtype=float)
        senses = [con.sense for con in self.constraints]
        return (np.array(self.costs, dtype=float), A, senses, b,
                np.array(self.lower, dtype=float), np.array(self.upper, dtype=float))

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Constraint violation per row (zero when satisfied)."""
        _, A, senses, b, _, _ = self.dense()
        ax = A @ np.asarray(x, dtype=float)
        out = np.zeros(len(b))
        for i, sense in enumerate(senses):
            if sense is Sense.LE:
                out[i] = max(0.0, ax[i] - b[i])
            elif sense is Sense.GE:
                out[i] = max(0.0, b[i] - ax[i])
            else:
                out[i] = abs(ax[i] - b[i])
        return out

    def to_lp_text(self, header: str = "") -> str:
        """Human-readable LP-style listing, for debugging only."""
        def term(j: int, v: float) -> str:
            return f"{'+' if v >= 0 else '-'} {abs(v):g} {self.names[j]}"

        lines = [f"\\ {h}" for h in header.splitlines()]
        lines.append("minimize")
        objective = " ".join(term(j, v) for j, v in enumerate(self.costs) if v)
        lines.append("  obj: " + (objective or "0"))
        lines.append("subject to")
        for i, con in enumerate(self.constraints):
            body = " ".join(term(j, v) for j, v in sorted(con.coefficients.items()))
            lines.append(f"  {con.name or f'c{i}'}: {body} {con.sense.value} {con.rhs:g}")
        lines.append("bounds")
        for j in range(self.n_variables):
            lines.append(f"  {self.lower[j]:g} <= {self.names[j]} <= {self.upper[j]:g}")
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    status: Status
    values: np.ndarray
    objective_value: float
    iterations: int = 0


class _Unbounded(Exception):
    pass


class _BoundedSimplex:
    """Working state shared by both phases."""

    def __init__(self, A: np.ndarray, b: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                 basis: list[int], x: np.ndarray, max_iter: int):
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.basis = basis
        self.x = x
        self.max_iter = max_iter
        self.iterations = 0
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self._refactor()

    def _refactor(self) -> None:
        m = self.A.shape[0]
        self._since_refactor = 0
        if m == 0:
            self.Binv = np.zeros((0, 0))
            return
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        xn = np.where(self.is_basic, 0.0, self.x)
        self.x[self.basis] = self.Binv @ (self.b - self.A @ xn)

    def run(self, cost: np.ndarray) -> None:
        A, lower, upper = self.A, self.lower, self.upper
        movable = lower < upper
        stall = 0
        while True:
            if self.iterations >= self.max_iter:
                raise RuntimeError(f"simplex did not terminate within {self.max_iter} iterations")
            basis = self.basis
            y = cost[basis] @ self.Binv
            d = cost - y @ A
            nonbasic = ~self.is_basic & movable
            up = nonbasic & (d < -OPT_TOL) & (self.x < upper)
            down = nonbasic & (d > OPT_TOL) & (self.x > lower)
            candidates = np.flatnonzero(up | down)
            if candidates.size == 0:
                return
            bland = stall >= STALL_LIMIT
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = 1.0 if up[j] else -1.0

            delta = -direction * (self.Binv @ A[:, j])
            xb = self.x[basis]
            lb = lower[basis]
            ub = upper[basis]
            ratios = np.full(len(basis), math.inf)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lb[dec]) / -delta[dec]
                ratios[inc] = (ub[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            theta_basis = ratios.min() if ratios.size else math.inf
            theta_flip = upper[j] - lower[j]
            if math.isinf(theta_basis) and math.isinf(theta_flip):
                raise _Unbounded

            self.iterations += 1
            if theta_flip <= theta_basis:
                theta = theta_flip
                self.x[basis] = xb + delta * theta
                self.x[j] = upper[j] if direction > 0 else lower[j]
            else:
                theta = theta_basis
                tied = np.flatnonzero(ratios <= theta + 1e-12 * (1.0 + theta))
                if bland:
                    r = int(min(tied, key=lambda i: basis[i]))
                else:
                    r = int(tied[np.argmax(np.abs(delta[tied]))])
                leaving = basis[r]
                self.x[j] += direction * theta
                self.x[basis] = xb + delta * theta
                self.x[leaving] = lower[leaving] if delta[r] < 0 else upper[leaving]
                self._pivot(r, j, -direction * delta)
            stall = stall + 1 if theta <= 1e-12 else 0

    def _pivot(self, r: int, j: int, alpha: np.ndarray) -> None:
        leaving = self.basis[r]
        self.basis[r] = j
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self._since_refactor += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self._refactor()
            return
        Binv = self.Binv
        pivot_row = Binv[r] / alpha[r]
        Binv -= np.outer(alpha, pivot_row)
        Binv[r] = pivot_row


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` to an optimal vertex, or classify it as infeasible or unbounded."""
    problem.validate()
    c, A, senses, b, lower, upper = problem.dense()
    m, n = A.shape

    slack_lo = np.array([0.0 if s is not Sense.GE else -math.inf for s in senses])
    slack_hi = np.array([0.0 if s is not Sense.LE else math.inf for s in senses])

    x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    r = b - A @ x
    # rows whose residual the slack can absorb start with the slack basic
    slack_ok = (r >= slack_lo) & (r <= slack_hi)
    sign = np.where(r >= 0, 1.0, -1.0)

    A_full = np.hstack([A, np.eye(m), np.diag(sign)])
    art_hi = np.where(slack_ok, 0.0, math.inf)
    lo_full = np.concatenate([lower, slack_lo, np.zeros(m)])
    hi_full = np.concatenate([upper, slack_hi, art_hi])
    x_full = np.concatenate([x, np.where(slack_ok, r, 0.0), np.where(slack_ok, 0.0, np.abs(r))])
    basis = [n + i if slack_ok[i] else n + m + i for i in range(m)]

    if max_iter is None:
        max_iter = 50 * (n + 2 * m) + 1000
    engine = _BoundedSimplex(A_full, b, lo_full, hi_full, basis, x_full, max_iter)

    art = slice(n + m, n + 2 * m)
    if not slack_ok.all():
        phase1 = np.zeros(n + 2 * m)
        phase1[art] = 1.0
        engine.run(phase1)
        infeasibility = float(engine.x[art].sum())
        if infeasibility > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution(Status.INFEASIBLE, engine.x[:n].copy(), math.nan, engine.iterations)
        engine.upper[art] = 0.0
        engine.x[art] = np.where(engine.is_basic[art], engine.x[art], 0.0)

    phase2 = np.concatenate([c, np.zeros(2 * m)])
    try:
        engine.run(phase2)
    except _Unbounded:
        return LpSolution(Status.UNBOUNDED, engine.x[:n].copy(), -math.inf, engine.iterations)

    engine._refactor()
    values = np.clip(engine.x[:n], lower, upper)
    return LpSolution(Status.OPTIMAL, values, float(c @ values), engine.iterations)
