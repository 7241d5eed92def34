"""Exact two-phase simplex over rationals with Bland's anti-cycling rule."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Fraction | None = None
    x: list[Fraction] | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _dense(coeffs, n: int) -> list[Fraction]:
    if isinstance(coeffs, Mapping):
        row = [ZERO] * n
        for j, v in coeffs.items():
            row[j] += Fraction(v)
        return row
    row = [Fraction(v) for v in coeffs]
    if len(row) != n:
        raise ValueError(f"expected {n} coefficients, got {len(row)}")
    return row


class RationalLP:
    """``min/max c.x`` subject to equalities, ``<=`` rows and ``x >= 0``."""

    def __init__(self, n_vars: int):
        self.n = n_vars
        self.eq: list[tuple[list[Fraction], Fraction]] = []
        self.le: list[tuple[list[Fraction], Fraction]] = []

    def add_eq(self, coeffs: Mapping[int, Fraction] | Sequence, rhs) -> None:
        self.eq.append((_dense(coeffs, self.n), Fraction(rhs)))

    def add_le(self, coeffs: Mapping[int, Fraction] | Sequence, rhs) -> None:
        self.le.append((_dense(coeffs, self.n), Fraction(rhs)))

    def add_ge(self, coeffs: Mapping[int, Fraction] | Sequence, rhs) -> None:
        row = _dense(coeffs, self.n)
        self.le.append(([-v for v in row], -Fraction(rhs)))

    def phase_one(self) -> FeasibleTableau | None:
        """Run phase 1; ``None`` means the constraints are infeasible."""
        return FeasibleTableau.build(self)

    def minimize(self, c) -> LPResult:
        tab = self.phase_one()
        if tab is None:
            return LPResult("infeasible")
        return tab.minimize(c)

    def maximize(self, c) -> LPResult:
        tab = self.phase_one()
        if tab is None:
            return LPResult("infeasible")
        return tab.maximize(c)

    def feasible_point(self) -> LPResult:
        return self.minimize([ZERO] * self.n)


def _pivot(rows: list[list[Fraction]], r: int, c: int) -> None:
    prow = rows[r]
    p = prow[c]
    if p != ONE:
        prow[:] = [v / p for v in prow]
    for k, row in enumerate(rows):
        if k != r:
            f = row[c]
            if f:
                row[:] = [a - f * b if b else a for a, b in zip(row, prow)]


def _simplex(rows: list[list[Fraction]], basis: list[int], cost: list[Fraction], allowed: int) -> str:
    """Minimize ``cost`` in place with Bland's rule; columns ``>= allowed`` never enter."""
    m = len(rows)
    while True:
        # reduced costs of nonbasic columns
        inb = set(basis)
        enter = -1
        for j in range(allowed):
            if j in inb:
                continue
            d = cost[j]
            for i in range(m):
                a = rows[i][j]
                if a:
                    d -= cost[basis[i]] * a
            if d < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave, best = -1, None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave < 0:
            return "unbounded"
        _pivot(rows, leave, enter)
        basis[leave] = enter


class FeasibleTableau:
    """A phase-1 basis that can be reused for several objectives."""

    def __init__(self, n: int, width: int, rows: list[list[Fraction]], basis: list[int]):
        self.n = n  # structural variables
        self.width = width  # structural + slack columns
        self.rows = rows
        self.basis = basis

    @classmethod
    def build(cls, lp: RationalLP) -> FeasibleTableau | None:
        n = lp.n
        n_slack = len(lp.le)
        cons = [(row, rhs, None) for row, rhs in lp.eq] + [(row, rhs, s) for s, (row, rhs) in enumerate(lp.le)]
        m = len(cons)
        width = n + n_slack
        rows = []
        for r, (coeffs, rhs, s) in enumerate(cons):
            full = coeffs + [ZERO] * n_slack
            if s is not None:
                full[n + s] = ONE
            if rhs < 0:
                full = [-v for v in full]
                rhs = -rhs
            art = [ZERO] * m
            art[r] = ONE
            rows.append(full + art + [rhs])
        basis = [width + r for r in range(m)]
        cost = [ZERO] * width + [ONE] * m
        _simplex(rows, basis, cost, width)
        if sum((rows[i][-1] for i in range(m) if basis[i] >= width), ZERO) > 0:
            return None
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= width:
                col = next((j for j in range(width) if rows[i][j] != 0), None)
                if col is None:
                    continue
                _pivot(rows, i, col)
                basis[i] = col
            keep.append(i)
        rows = [rows[i][:width] + [rows[i][-1]] for i in keep]
        basis = [basis[i] for i in keep]
        return cls(n, width, rows, basis)

    def _solve(self, c, sign: int) -> LPResult:
        cost = [sign * v for v in _dense(c, self.n)] + [ZERO] * (self.width - self.n)
        rows = [r[:] for r in self.rows]
        basis = self.basis[:]
        status = _simplex(rows, basis, cost, self.width)
        if status != "optimal":
            return LPResult(status)
        x = [ZERO] * self.width
        for i, b in enumerate(basis):
            x[b] = rows[i][-1]
        x = x[: self.n]
        value = sum((Fraction(cj) * xj for cj, xj in zip(_dense(c, self.n), x) if xj), ZERO)
        return LPResult("optimal", value, x)

    def minimize(self, c) -> LPResult:
        return self._solve(c, 1)

    def maximize(self, c) -> LPResult:
        return self._solve(c, -1)

    def point(self) -> list[Fraction]:
        x = [ZERO] * self.width
        for i, b in enumerate(self.basis):
            x[b] = self.rows[i][-1]
        return x[: self.n]
