"""Exponent triples, their closed-form constants and the competing bound exponents.

A triple ``(a, b, c)`` always enters the zeta product as the signed tuple
``(a, -b, -c)``; everything else in the package is derived from it here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from expsum3.errors import ParameterError

UNIT_TOL = 1e-12

THEOREM = "theorem"
BASIC = "basic"
INVALID = "invalid"


@dataclass(frozen=True)
class ExponentTriple:
    a: float
    b: float
    c: float

    @classmethod
    def from_ac(cls, a: float, c: float, b: float | None = None) -> "ExponentTriple":
        """Build a triple from ``(a, c)`` with ``b = 1 + a - c`` so that ``b + c - a = 1``.

        An explicitly supplied ``b`` must agree with the normalised value to
        ``UNIT_TOL``.
        """
        a, c = float(a), float(c)
        b_norm = 1.0 + a - c
        if b is not None:
            b = float(b)
            if not abs(b - b_norm) <= UNIT_TOL:
                raise ParameterError(
                    f"b={b!r} violates b+c-a=1 (expected {b_norm!r} within {UNIT_TOL})"
                )
        return cls(a, b_norm, c)

    @property
    def signed(self) -> tuple[float, float, float]:
        return (self.a, -self.b, -self.c)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class ValidationReport:
    grade: str
    reasons: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.grade != INVALID


def validate_triple(a: float, b: float, c: float) -> ValidationReport:
    """Grade a triple as ``theorem``, ``basic`` or ``invalid``.

    ``theorem`` needs ``0 < a < c < b``, ``b + c - a = 1`` and ``c < 2a``;
    ``basic`` relaxes this to ``0 < a < c <= b`` with ``b + c - a = 1``.
    """
    vals = (a, b, c)
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
        return ValidationReport(INVALID, ("non-finite",))
    reasons = []
    if not a > 0:
        reasons.append("a>0 violated")
    if not a < c:
        reasons.append("a<c violated")
    if not c <= b:
        reasons.append("c<=b violated")
    if not abs(b + c - a - 1.0) <= UNIT_TOL:
        reasons.append("b+c-a=1 violated")
    if reasons:
        return ValidationReport(INVALID, tuple(reasons))
    soft = []
    if not c < b:
        soft.append("c<b violated")
    if not c < 2 * a:
        soft.append("c<2a violated")
    if soft:
        return ValidationReport(BASIC, tuple(soft))
    return ValidationReport(THEOREM)


def require_grade(triple: ExponentTriple, grade: str = THEOREM) -> ValidationReport:
    rep = validate_triple(*triple.as_tuple())
    if rep.grade == INVALID or (grade == THEOREM and rep.grade != THEOREM):
        raise ParameterError(
            f"triple {triple.as_tuple()} is {rep.grade}, need {grade}: {', '.join(rep.reasons)}"
        )
    return rep


# --- general k-tuples -------------------------------------------------------


@dataclass(frozen=True)
class AdmissibleTuple:
    entries: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(e) for e in self.entries))
        if len(self.entries) < 2:
            raise ParameterError("a tuple needs at least two entries")
        if any(e == 0 or not math.isfinite(e) for e in self.entries):
            raise ParameterError("tuple entries must be finite and nonzero")

    @classmethod
    def from_triple(cls, triple: ExponentTriple) -> "AdmissibleTuple":
        return cls(triple.signed)

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def xi(self) -> int:
        return sum(1 for e in self.entries if e > 0) - sum(1 for e in self.entries if e < 0)

    @property
    def inv_sum(self) -> float:
        return sum(1.0 / e for e in self.entries)

    @property
    def prod(self) -> float:
        return math.prod(self.entries)

    @property
    def abs_sum(self) -> float:
        return sum(abs(e) for e in self.entries)

    def conjugate(self) -> "AdmissibleTuple":
        return AdmissibleTuple(tuple(-e for e in self.entries))


@dataclass(frozen=True)
class AdmissibilityRow:
    j: int
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    rows: tuple[AdmissibilityRow, ...]


def admissibility_rhs(entries: Sequence[float], j: int) -> float:
    xi = sum(1 for e in entries if e > 0) - sum(1 for e in entries if e < 0)
    aj = entries[j]
    inner = -xi * aj + sum(abs(e) for e in entries) - sum(abs(e - aj) for e in entries)
    return math.pi / 4 * inner


def check_admissibility(tup: AdmissibleTuple | Sequence[float]) -> AdmissibilityReport:
    if not isinstance(tup, AdmissibleTuple):
        tup = AdmissibleTuple(tuple(tup))
    e = tup.entries
    rows = tuple(AdmissibilityRow(j + 1, e[j] ** 2, admissibility_rhs(e, j)) for j in range(len(e)))
    return AdmissibilityReport(all(r.holds for r in rows), rows)


# --- derived constants --------------------------------------------------------


@dataclass(frozen=True)
class ExponentRecord:
    theorem_e1: float
    theorem_e2: float
    vdc_e: float
    ep_e: float
    winner: str
    in_range_13: bool
    ep_plus_epsilon: bool = True

    @property
    def theorem_max(self) -> float:
        return max(self.theorem_e1, self.theorem_e2)


@dataclass(frozen=True)
class DerivedConstants:
    xi: int
    I_a: float
    Q_a: float
    eta: float
    kappa: float
    Lambda: float
    exponents: ExponentRecord | None
    in_range_13: bool
    triple: ExponentTriple = field(repr=False, default=None)

    def to_dict(self) -> dict:
        out = {
            "xi": self.xi,
            "I_a": self.I_a,
            "Q_a": self.Q_a,
            "eta": self.eta,
            "kappa": self.kappa,
            "Lambda": self.Lambda,
            "in_range_13": self.in_range_13,
        }
        if self.exponents is not None:
            out["exponents"] = exponent_dict(self.exponents)
        return out


def exponent_dict(rec: ExponentRecord) -> dict:
    return {
        "theorem_e1": rec.theorem_e1,
        "theorem_e2": rec.theorem_e2,
        "vdc_e": rec.vdc_e,
        "ep_e": rec.ep_e,
        "ep_plus_epsilon": rec.ep_plus_epsilon,
        "winner": rec.winner,
        "in_range_13": rec.in_range_13,
    }


def eta_of(a: float, b: float, c: float) -> float:
    s = b + c - a
    return 2.0 * math.exp((a * math.log(a) - b * math.log(b) - c * math.log(c)) / s)


def in_range_13(a: float, b: float, c: float) -> bool:
    return (42 * a + 34 * c) / 55 < b < 2 * a + c


def derive_constants(triple: ExponentTriple) -> DerivedConstants:
    rep = require_grade(triple, BASIC)
    a, b, c = triple.as_tuple()
    tup = AdmissibleTuple.from_triple(triple)
    eta = eta_of(a, b, c)
    exps = exponent_table(triple) if rep.grade == THEOREM else None
    return DerivedConstants(
        xi=tup.xi,
        I_a=tup.inv_sum,
        Q_a=tup.prod,
        eta=eta,
        kappa=eta / (2 * math.pi),
        Lambda=(b + c - a) ** -0.5 * math.sqrt(2 * math.pi),
        exponents=exps,
        in_range_13=in_range_13(a, b, c),
        triple=triple,
    )


def _const(num: int, den: int, like):
    return Fraction(num, den) if isinstance(like, Fraction) else num / den


def exponent_values(a, b, c):
    """The four bound exponents; accepts floats or ``Fraction`` inputs.

    The exponent-pair value carries an implicit ``+epsilon`` which is taken as 0.
    """
    e1 = _const(5, 4, a) - c / (4 * a)
    e2 = _const(1, 4, a) + (2 * a - c) / (2 * (b - c))
    vdc = _const(3, 4, a) + (2 * a - c) / (2 * (b - c))
    ep = _const(19, 21, a) + (2 * a - c) / (4 * (b - c))
    return e1, e2, vdc, ep


def pick_winner(e1, e2, vdc, ep) -> str:
    cands = (("theorem", max(e1, e2)), ("vdc", vdc), ("ep", ep))
    return min(cands, key=lambda kv: kv[1])[0]


def exponent_table(triple: ExponentTriple) -> ExponentRecord:
    require_grade(triple, THEOREM)
    a, b, c = triple.as_tuple()
    e1, e2, vdc, ep = exponent_values(a, b, c)
    return ExponentRecord(
        theorem_e1=e1,
        theorem_e2=e2,
        vdc_e=vdc,
        ep_e=ep,
        winner=pick_winner(e1, e2, vdc, ep),
        in_range_13=in_range_13(a, b, c),
    )
