"""Exact rational linear programming: two-phase tableau simplex with Bland's rule.

All variables are non-negative. Infeasible problems come back with a Farkas
certificate: multipliers ``y`` over the named constraints with ``y.A >= 0`` on
every variable (slacks included) and ``y.b < 0``.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

Coeffs = Mapping[int, Fraction | int]


@dataclass
class Constraint:
    coeffs: dict[int, Fraction]
    sense: str  # "==", "<=" or ">="
    rhs: Fraction
    name: str


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None
    farkas: dict[str, Fraction] | None = None


@dataclass
class LinearProgramRational:
    n_vars: int
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, Fraction] | None = None  # maximized

    def add(self, coeffs: Coeffs, sense: str, rhs, name: str = "") -> None:
        if sense not in ("==", "<=", ">="):
            raise ValueError(f"unknown constraint sense {sense!r}")
        clean = {int(k): Fraction(v) for k, v in coeffs.items() if v}
        if any(not 0 <= k < self.n_vars for k in clean):
            raise IndexError("constraint references an unknown variable")
        self.constraints.append(Constraint(clean, sense, Fraction(rhs), name or f"c{len(self.constraints)}"))

    def feasible_region(self) -> _Tableau | None:
        """Phase one. Returns a tableau at a feasible basis, or None when infeasible."""
        tab = _Tableau(self)
        return tab if tab.phase_one() else None

    def solve(self) -> LPResult:
        tab = _Tableau(self)
        if not tab.phase_one():
            return LPResult("infeasible", farkas=tab.farkas)
        if self.objective is None:
            return LPResult("optimal", tab.solution(), Fraction(0))
        return tab.copy().maximize(self.objective)

    def check(self, x) -> bool:
        """Exact re-evaluation of every constraint at ``x``."""
        if any(v < 0 for v in x):
            return False
        for c in self.constraints:
            lhs = sum(v * x[k] for k, v in c.coeffs.items())
            if c.sense == "==" and lhs != c.rhs:
                return False
            if c.sense == "<=" and lhs > c.rhs:
                return False
            if c.sense == ">=" and lhs < c.rhs:
                return False
        return True

    def check_farkas(self, y: Mapping[str, Fraction]) -> bool:
        """Verify an infeasibility certificate exactly."""
        by_name = {c.name: c for c in self.constraints}
        combo = [Fraction(0)] * self.n_vars
        rhs = Fraction(0)
        for name, mult in y.items():
            c = by_name[name]
            # slack columns: +1 for <=, -1 for >=, multiplied by y must stay >= 0
            if c.sense == "<=" and mult < 0:
                return False
            if c.sense == ">=" and mult > 0:
                return False
            for k, v in c.coeffs.items():
                combo[k] += mult * v
            rhs += mult * c.rhs
        return all(v >= 0 for v in combo) and rhs < 0


class _Tableau:
    def __init__(self, lp: LinearProgramRational | None):
        if lp is None:
            return
        self.lp = lp
        n = lp.n_vars
        cons = lp.constraints
        n_slack = sum(c.sense != "==" for c in cons)
        m = len(cons)
        self.n_struct = n + n_slack
        self.n_cols = self.n_struct + m
        self.rows: list[list[Fraction]] = []
        self.rhs: list[Fraction] = []
        self.signs: list[int] = []
        slack = n
        zero = Fraction(0)
        for i, c in enumerate(cons):
            row = [zero] * self.n_cols
            for k, v in c.coeffs.items():
                row[k] = v
            if c.sense != "==":
                row[slack] = Fraction(1 if c.sense == "<=" else -1)
                slack += 1
            sign = -1 if c.rhs < 0 else 1
            if sign < 0:
                row = [-v for v in row]
            row[self.n_struct + i] = Fraction(1)
            self.rows.append(row)
            self.rhs.append(c.rhs * sign)
            self.signs.append(sign)
        self.basis = [self.n_struct + i for i in range(m)]
        self.row_names = [c.name for c in cons]
        self.active_cols = self.n_cols
        self.farkas: dict[str, Fraction] | None = None

    def copy(self) -> _Tableau:
        t = _Tableau(None)
        t.lp = self.lp
        t.n_struct, t.n_cols, t.active_cols = self.n_struct, self.n_cols, self.active_cols
        t.rows = [r[:] for r in self.rows]
        t.rhs = self.rhs[:]
        t.signs = self.signs[:]
        t.basis = self.basis[:]
        t.row_names = self.row_names[:]
        t.farkas = self.farkas
        return t

    def _pivot(self, r: int, col: int):
        prow = self.rows[r]
        pv = prow[col]
        if pv != 1:
            prow = [v / pv for v in prow]
            self.rows[r] = prow
            self.rhs[r] /= pv
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            f = row[col]
            if i == r or not f:
                continue
            for j in nz:
                row[j] -= f * prow[j]
            self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = col
        return prow, nz

    def _reduced_costs(self, cost: list[Fraction]) -> list[Fraction]:
        d = cost[: self.active_cols]
        d = d[:]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.rows[i]
                for j in range(self.active_cols):
                    if row[j]:
                        d[j] -= cb * row[j]
        return d

    def _run(self, cost: list[Fraction]) -> str:
        d = self._reduced_costs(cost)
        while True:
            entering = next((j for j in range(self.active_cols) if d[j] > 0), None)
            if entering is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            f = d[entering]
            prow, nz = self._pivot(best[1], entering)
            # keep the reduced-cost row in step with the tableau
            for j in nz:
                if j < self.active_cols:
                    d[j] -= f * prow[j]

    def phase_one(self) -> bool:
        cost = [Fraction(0)] * self.n_struct + [Fraction(-1)] * (self.n_cols - self.n_struct)
        self._run(cost)
        value = sum(cost[b] * self.rhs[i] for i, b in enumerate(self.basis))
        if value < 0:
            d = self._reduced_costs(cost)
            y = {}
            for i, name in enumerate(self.lp.constraints):
                yi = -1 - d[self.n_struct + i]
                if yi:
                    y[name.name] = yi * self.signs[i]
            self.farkas = y
            return False
        # drive remaining artificials out of the basis, dropping redundant rows
        r = 0
        while r < len(self.rows):
            if self.basis[r] >= self.n_struct:
                col = next((j for j in range(self.n_struct) if self.rows[r][j]), None)
                if col is None:
                    del self.rows[r], self.rhs[r], self.basis[r], self.signs[r], self.row_names[r]
                    continue
                self._pivot(r, col)
            r += 1
        self.active_cols = self.n_struct
        return True

    def solution(self) -> list[Fraction]:
        x = [Fraction(0)] * self.lp.n_vars
        for i, b in enumerate(self.basis):
            if b < self.lp.n_vars:
                x[b] = self.rhs[i]
        return x

    def maximize(self, objective: Coeffs) -> LPResult:
        cost = [Fraction(0)] * self.n_cols
        for k, v in objective.items():
            cost[k] = Fraction(v)
        status = self._run(cost)
        if status == "unbounded":
            return LPResult("unbounded")
        x = self.solution()
        return LPResult("optimal", x, sum(Fraction(v) * x[k] for k, v in objective.items()))
