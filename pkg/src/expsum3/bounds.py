"""Competing bound exponents, the dyadic-box bound for S0 and checks of the
comparison inequalities between them.

Every bound here is a shape: implied constants are 1 and only exponents are
compared.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

import numpy as np

from expsum3.errors import ParameterError
from expsum3.params import ExponentTriple, exponent_values, pick_winner, require_grade


@dataclass(frozen=True)
class DyadicBox:
    N1: int
    N2: int
    N3: int
    X: float

    @classmethod
    def of(cls, triple: ExponentTriple, N1: int, N2: int, N3: int) -> "DyadicBox":
        if min(N1, N2, N3) < 1:
            raise ParameterError("box corners must be >= 1")
        a, b, c = triple.as_tuple()
        return cls(N1, N2, N3, N2**b * N3**c * N1**-a)

    def __post_init__(self):
        if not self.X > 0:
            raise ParameterError("X must be positive")


def rs_bound(box: DyadicBox, eps: float = 0.0) -> float:
    """Robert-Sargos shape bound for ``S0`` on the box (constant 1)."""
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    N1, N2, N3, X = box.N1, box.N2, box.N3, box.X
    vol = float(N1) * N2 * N3
    inner = (X / (N2 * N3 * N3 * N1)) ** 0.25 + (N1 * N2) ** -0.25 + N3**-0.5 + X**-0.5
    return vol ** (1 + eps) * inner


def weighted_rs_bound(box: DyadicBox, eps: float = 0.0) -> float:
    """The same bound after partial summation against the mu weights:
    ``X^(1/2) (N1 N2 N3)^(1/2 + eps) (...)``."""
    N1, N2, N3, X = box.N1, box.N2, box.N3, box.X
    inner = (X / (N2 * N3 * N3 * N1)) ** 0.25 + (N1 * N2) ** -0.25 + N3**-0.5 + X**-0.5
    return X**0.5 * (float(N1) * N2 * N3) ** (0.5 + eps) * inner


@dataclass(frozen=True)
class BoxWindow:
    lower_exp: float
    upper_exp: float
    T: float

    @property
    def nonempty(self) -> bool:
        return self.lower_exp < self.upper_exp

    @property
    def n2_range(self) -> tuple[float, float]:
        return self.T**self.lower_exp, self.T**self.upper_exp


def balanced_box_window(triple: ExponentTriple, T: float) -> BoxWindow:
    """Range of ``N2`` admitting boxes with ``X ~ T`` and ``N1 N2 N3 ~ T^(3/2)``:
    ``T^((b-a-c/2)/(b-c)) << N2 << T^(3/2) + T^((b+c+a/2)/(a+b))``."""
    require_grade(triple)
    a, b, c = triple.as_tuple()
    lo = (b - a - c / 2) / (b - c)
    hi = max(1.5, (b + c + a / 2) / (a + b))
    return BoxWindow(lo, hi, T)


def balanced_box(triple: ExponentTriple, T: float, N3: float) -> DyadicBox:
    """A box with ``X = T`` and ``N1 N2 N3 = T^(3/2)`` for the given ``N3``.

    Solving ``N2^b N3^c N1^-a = T`` with ``N1 = T^(3/2) / (N2 N3)`` gives
    ``N2^(a+b) = T^(1 + 3a/2) N3^-(a + c)``.
    """
    a, b, c = triple.as_tuple()
    N2 = (T ** (1 + 1.5 * a) * N3 ** -(a + c)) ** (1 / (a + b))
    N1 = T**1.5 / (N2 * N3)
    return DyadicBox(N1, N2, N3, N2**b * N3**c * N1**-a)


# --- winner map ----------------------------------------------------------------

GRID_HEADER = ["a", "c", "b", "theorem_e1", "theorem_e2", "vdc_e", "ep_e", "winner", "in_range13"]


@dataclass(frozen=True)
class GridRow:
    a: Fraction
    c: Fraction
    b: Fraction
    theorem_e1: Fraction
    theorem_e2: Fraction
    vdc_e: Fraction
    ep_e: Fraction
    winner: str
    in_range13: bool

    @property
    def theorem_max(self) -> Fraction:
        return max(self.theorem_e1, self.theorem_e2)

    @property
    def theorem_strict(self) -> bool:
        return self.theorem_max < min(self.vdc_e, self.ep_e)


@dataclass(frozen=True)
class GridReport:
    rows: tuple[GridRow, ...]
    in_range_count: int
    violations: tuple[GridRow, ...]
    eps: Fraction


def _valid(a: Fraction, c: Fraction) -> bool:
    b = 1 + a - c
    return 0 < a < c < 2 * a and c < b


def winner_grid(grid_n: int, eps: Fraction | float = 0) -> GridReport:
    """Exact (rational) exponent table on ``a = i/n, c = j/n``.

    Refining ``n`` to a multiple keeps every shared point's row identical
    because no floating point enters the comparisons.
    """
    if grid_n < 2:
        raise ParameterError("grid_n must be >= 2")
    eps = Fraction(eps)
    rows, bad, inr = [], [], 0
    for i in range(1, grid_n):
        a = Fraction(i, grid_n)
        for j in range(1, grid_n):
            c = Fraction(j, grid_n)
            if not _valid(a, c):
                continue
            b = 1 + a - c
            e1, e2, vdc, ep = exponent_values(a, b, c)
            ep = ep + eps
            in13 = (42 * a + 34 * c) / 55 < b < 2 * a + c
            row = GridRow(a, c, b, e1, e2, vdc, ep, pick_winner(e1, e2, vdc, ep), in13)
            rows.append(row)
            if in13:
                inr += 1
                if not row.theorem_strict:
                    bad.append(row)
    return GridReport(tuple(rows), inr, tuple(bad), eps)


def write_grid_csv(report: GridReport, fh: TextIO) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GRID_HEADER)
    for r in report.rows:
        w.writerow(
            [f"{float(v):.17g}" for v in (r.a, r.c, r.b, r.theorem_e1, r.theorem_e2, r.vdc_e, r.ep_e)]
            + [r.winner, str(r.in_range13).lower()]
        )
    return len(report.rows)


# --- inequality chains -----------------------------------------------------------

F_COEFFS = (1092, 336, -441)


def f_poly(x):
    return (F_COEFFS[0] * x + F_COEFFS[1]) * x + F_COEFFS[2]


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class InequalityReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def by_name(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def f_positivity(samples: int = 10_000) -> Check:
    """``f > 0`` on the open interval ``(1/2, 1)``: sampled, and via its roots."""
    xs = np.linspace(0.5, 1.0, samples + 2)[1:-1]
    sampled = bool(np.all(f_poly(xs) > 0))
    A, B, C = F_COEFFS
    disc = B * B - 4 * A * C
    big_root = (-B + math.sqrt(disc)) / (2 * A) if disc >= 0 else -math.inf
    return Check("f_positive_on_(1/2,1)", float(f_poly(xs).min()), 0.0, sampled and A > 0 and big_root <= 0.5)


def appendix_inequalities(triple: ExponentTriple) -> InequalityReport:
    """Evaluate each comparison inequality at one theorem-grade triple."""
    require_grade(triple)
    a, b, c = triple.as_tuple()
    e1, e2, vdc, ep = exponent_values(a, b, c)
    checks = []

    def add(name, lhs, rhs, holds=None):
        checks.append(Check(name, float(lhs), float(rhs), bool(lhs < rhs) if holds is None else holds))

    gap = e1 - vdc
    closed = -(2 * a - c) * (c + 2 * a - b) / (4 * a * (b - c))
    add("e1_minus_vdc_closed_form", gap, closed, abs(gap - closed) <= 1e-12)
    add("e1<vdc", e1, vdc)
    lhs, rhs = b * (29 * a - 21 * c), 42 * a * a + 8 * a * c - 21 * c * c
    add("e1<ep_equiv", lhs, rhs, (e1 < ep) == (lhs < rhs))
    add("e1<ep", e1, ep)
    if 29 * a >= 21 * c:
        add("case_29a>=21c", (2 * a + c) * (29 * a - 21 * c), rhs)
    else:
        add("case_29a<21c", (42 * a + 34 * c) * (29 * a - 21 * c) / 55, rhs)
    # 55 * rhs - (42a + 34c)(29a - 21c) = c^2 f(a/c)
    poly_gap = 55 * rhs - (42 * a + 34 * c) * (29 * a - 21 * c)
    add("c^2_f(a/c)_identity", poly_gap, c * c * f_poly(a / c), abs(poly_gap - c * c * f_poly(a / c)) <= 1e-12)
    add("e2<ep_equiv", 42 * a + 34 * c, 55 * b, (e2 < ep) == (42 * a + 34 * c < 55 * b))
    add("42a+34c<55b", 42 * a + 34 * c, 55 * b)
    add("b<2a+c", b, 2 * a + c)
    add("c^2+2a^2<3ac", c * c + 2 * a * a, 3 * a * c)
    add("theorem_beats_vdc_and_ep", max(e1, e2), min(vdc, ep))
    checks.append(f_positivity())
    return InequalityReport(tuple(checks))
