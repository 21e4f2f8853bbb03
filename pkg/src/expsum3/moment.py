"""Pieces of the moment identity: the diagonal constant sigma, the diagonal
partial sum, the off-diagonal sums M1 and J22, and the assembled residual.

Integer-ness questions (``n1^a = n2^b n3^c``, ``Y = n2^(b/a) n3^(c/a)`` an
integer) are settled exactly by clearing denominators: with a common
denominator ``q`` and ``A = qa, B = qb, C = qc`` both reduce to identities
between Python integers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from expsum3.errors import ParameterError
from expsum3.params import BASIC, ExponentTriple, require_grade
from expsum3.quadrature import QuadratureSpec
from expsum3.zeta import moment_integral

MAX_DEN = 64
HALF_FLAG = 0.499


@dataclass(frozen=True)
class RationalTriple:
    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = Fraction(getattr(self, name))
            if v.denominator > MAX_DEN:
                raise ParameterError(f"{name}={v} has denominator > {MAX_DEN}")
            object.__setattr__(self, name, v)
        require_grade(self.triple, BASIC)

    @classmethod
    def parse(cls, a: str, b: str, c: str) -> "RationalTriple":
        return cls(Fraction(a), Fraction(b), Fraction(c))

    @classmethod
    def from_triple(cls, triple: ExponentTriple, tol: float = 1e-12) -> "RationalTriple":
        vals = []
        for v in triple.as_tuple():
            f = Fraction(v).limit_denominator(MAX_DEN)
            if abs(float(f) - v) > tol:
                raise ParameterError(f"{v!r} is not a rational with denominator <= {MAX_DEN}")
            vals.append(f)
        return cls(*vals)

    @property
    def triple(self) -> ExponentTriple:
        return ExponentTriple(float(self.a), float(self.b), float(self.c))

    @property
    def cleared(self) -> tuple[int, int, int]:
        """``(A, B, C)`` coprime with ``A : B : C = a : b : c``."""
        q = math.lcm(self.a.denominator, self.b.denominator, self.c.denominator)
        ints = [int(v * q) for v in (self.a, self.b, self.c)]
        g = reduce(math.gcd, ints)
        return tuple(v // g for v in ints)


def _rational_or_none(triple: ExponentTriple) -> RationalTriple | None:
    try:
        return RationalTriple.from_triple(triple)
    except ParameterError:
        return None


# --- diagonal ----------------------------------------------------------------


def diagonal_solutions(rt: RationalTriple, p_max: int) -> np.ndarray:
    """All ``(n1, n2, n3)`` with ``n1^A = n2^B n3^C`` and ``n1 n2 n3 <= p_max``,
    sorted by ``(P, n1, n2, n3)``; shape ``(count, 3)``."""
    A, B, C = rt.cleared
    a, b, c = (float(v) for v in (rt.a, rt.b, rt.c))
    e2, e3 = 1 + b / a, 1 + c / a  # P = n2^e2 n3^e3 on the diagonal
    found = []
    n3 = 1
    while n3**e3 <= p_max * (1 + 1e-9):
        n2max = int((p_max / n3**e3) ** (1 / e2) * (1 + 1e-9)) + 1
        n2 = np.arange(1, n2max + 1, dtype=float)
        n1f = np.exp((b * np.log(n2) + c * math.log(n3)) / a)
        cand = np.nonzero(np.abs(n1f - np.round(n1f)) <= 1e-6 * n1f)[0]
        for i in cand:
            m2 = int(i) + 1
            m1 = int(round(n1f[i]))
            if m1 * m2 * n3 <= p_max and m1**A == m2**B * n3**C:
                found.append((m1, m2, n3))
        n3 += 1
    if not found:
        return np.zeros((0, 3), dtype=np.int64)
    arr = np.array(found, dtype=np.int64)
    P = arr.prod(axis=1)
    return arr[np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0], P))]


def _monoid_sizes(A: int, B: int, C: int, kmax: int) -> list[int]:
    """Sizes ``e1 + e2 + e3`` of the non-zero solutions of ``A e1 = B e2 + C e3``
    with size at most ``kmax``."""
    sizes = []
    for e2 in range(kmax + 1):
        for e3 in range(kmax + 1 - e2):
            num = B * e2 + C * e3
            if num and num % A == 0 and e2 + e3 + num // A <= kmax:
                sizes.append(e2 + e3 + num // A)
    return sizes


def _primes(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0]


def rankin_tail(rt: RationalTriple, p_max: float, kmax: int = 80, p0: int = 1000) -> float:
    """Upper bound for the diagonal series restricted to ``P > p_max``.

    Uses ``sum_{P > X} P^(-1/2) <= X^(-d) prod_p F(p^(-1/2 + d))`` where ``F``
    is the generating function of the exponent monoid; small primes are
    multiplied out, large primes and long exponent vectors are bounded.
    """
    A, B, C = rt.cleared
    sizes = _monoid_sizes(A, B, C, kmax)
    m0 = min(sizes)
    primes = _primes(p0).astype(float)
    sz = np.array(sizes, dtype=float)
    ks = np.arange(kmax + 1, kmax + 400, dtype=float)
    big_k = np.arange(m0, m0 + 2000, dtype=float)
    best = math.inf
    for d in np.linspace(0.01, 0.49, 49):
        s = 0.5 - d
        if s * m0 <= 1.0 + 1e-9:
            continue
        x = primes ** -s
        head = np.power.outer(x, sz).sum(axis=1)
        # at most k + 1 monoid elements of size k
        tail = ((ks + 1) * np.power.outer(x, ks)).sum(axis=1)
        logF = float(np.log1p(head + tail).sum())
        big = float(np.sum((big_k + 1) * p0 ** (1 - s * big_k) / (s * big_k - 1)))
        best = min(best, p_max**-d * math.exp(logF + big))
    return best


@dataclass(frozen=True)
class SigmaResult:
    value: float
    tail_bound: float
    solution_count: int
    p_max: int


def sigma_series(rt: RationalTriple, p_max: int) -> SigmaResult:
    """Partial sum of ``P^(-1/2)`` over diagonal solutions with ``P <= p_max``."""
    if p_max < 1:
        raise ParameterError("p_max must be >= 1")
    a, b, c = rt.a, rt.b, rt.c
    if not a < min(b, c):
        raise ParameterError("the diagonal series needs a < min(b, c)")
    sol = diagonal_solutions(rt, int(p_max))
    P = sol.prod(axis=1).astype(float)
    return SigmaResult(math.fsum(P**-0.5), float(rankin_tail(rt, p_max)), len(sol), int(p_max))


def _tau0(a, b, c) -> float:
    return 2 * math.pi * (a * b * c) ** (-1 / 3)


def diag_partial(rt: RationalTriple, T: float) -> float:
    """``sum_{diagonal, tau_n <= T} P^(-1/2) (T - tau_n)``."""
    a, b, c = (float(v) for v in (rt.a, rt.b, rt.c))
    tau0 = _tau0(a, b, c)
    if T < tau0:
        return 0.0
    p_max = int(math.floor((T / tau0) ** 1.5 * (1 + 1e-12)))
    sol = diagonal_solutions(rt, p_max)
    P = sol.prod(axis=1).astype(float)
    tau = tau0 * P ** (2 / 3)
    keep = tau <= T
    return math.fsum(P[keep] ** -0.5 * (T - tau[keep]))


# --- off-diagonal ------------------------------------------------------------


class _YOracle:
    """``Y = n2^(b/a) n3^(c/a)`` with an exact integer test when possible."""

    def __init__(self, triple: ExponentTriple):
        self.a, self.b, self.c = triple.as_tuple()
        self.rt = _rational_or_none(triple)

    def value(self, n2: int, n3: int) -> float:
        return math.exp((self.b * math.log(n2) + self.c * math.log(n3)) / self.a)

    def integer(self, n2: int, n3: int, y: float) -> tuple[bool, bool]:
        """``(is_integer, exact)``."""
        r = round(y)
        if self.rt is not None:
            A, B, C = self.rt.cleared
            return r >= 1 and r**A == n2**B * n3**C, True
        return abs(y - r) <= 1e-9 * max(1.0, y), False


def _n_max(a, b, c, n1, n2, n3) -> float:
    return 2 * math.pi * max(n1 * n1 / a, n2 * n2 / b, n3 * n3 / c)


@dataclass(frozen=True)
class OffDiagonal:
    value: complex
    terms: int
    inexact_tests: int = 0
    degenerate: tuple = ()
    half_flags: tuple = ()


def _pairs(a, b, c, T):
    n2max = int(math.sqrt(b * T / (2 * math.pi))) + 1
    n3max = int(math.sqrt(c * T / (2 * math.pi))) + 1
    for n2 in range(1, n2max + 1):
        for n3 in range(1, n3max + 1):
            if 2 * math.pi * max(n2 * n2 / b, n3 * n3 / c) <= T:
                yield n2, n3


def m1_terms(triple: ExponentTriple, T: float):
    """Tuples ``(n1, n2, n3)`` entering ``M1(T)`` with their summands."""
    require_grade(triple)
    a, b, c = triple.as_tuple()
    yo = _YOracle(triple)
    out, inexact = [], 0
    for n2, n3 in _pairs(a, b, c, T):
        y = yo.value(n2, n3)
        is_int, exact = yo.integer(n2, n3, y)
        inexact += not exact
        if is_int:
            continue
        w = n2 ** (b / (2 * a) - 0.5) * n3 ** (c / (2 * a) - 0.5)
        n1 = 1
        while True:
            s = 2 * math.pi / a * n1 * y
            if s > T:
                break
            if _n_max(a, b, c, n1, n2, n3) <= s:
                frac = n1 * y - math.floor(n1 * y + 0.5)
                out.append(((n1, n2, n3), 2 * math.pi / a * w * cmath.exp(2j * math.pi * frac)))
            n1 += 1
    return out, inexact


def m1_sum(triple: ExponentTriple, T: float) -> OffDiagonal:
    terms, inexact = m1_terms(triple, T)
    return OffDiagonal(math.fsum(v.real for _, v in terms) + 1j * math.fsum(v.imag for _, v in terms),
                       len(terms), inexact)


def _phase_integral(L: float, lo: float, hi: float) -> complex:
    """``int_lo^hi e^{i t L} dt`` without cancellation for small ``L``."""
    if L == 0:
        return complex(hi - lo)
    x = (hi - lo) * L
    if abs(x) < 1e-4:
        ratio = 1 + 1j * x / 2 - x * x / 6
    else:
        ratio = (cmath.exp(1j * x) - 1) / (1j * x)
    return cmath.exp(1j * lo * L) * (hi - lo) * ratio


def nearest_int(y: float) -> int:
    """``[y]`` with ties to even."""
    return round(y)


def j22_terms(triple: ExponentTriple, T: float):
    require_grade(triple)
    a, b, c = triple.as_tuple()
    yo = _YOracle(triple)
    out, degenerate, halves, inexact = [], [], [], 0
    for n2, n3 in _pairs(a, b, c, T):
        y = yo.value(n2, n3)
        N1 = nearest_int(y)
        if N1 < 1:
            continue
        N = _n_max(a, b, c, N1, n2, n3)
        if N > T:
            continue
        if abs(y - N1) > HALF_FLAG:
            halves.append((n2, n3))
        is_int, exact = yo.integer(n2, n3, y)
        inexact += not exact
        L = 0.0 if is_int else b * math.log(n2) + c * math.log(n3) - a * math.log(N1)
        if L == 0.0:
            degenerate.append((N1, n2, n3))
        P = N1 * n2 * n3
        out.append(((N1, n2, n3), P**-0.5 * _phase_integral(L, N, T)))
    return out, degenerate, halves, inexact


def j22_sum(triple: ExponentTriple, T: float) -> OffDiagonal:
    terms, deg, halves, inexact = j22_terms(triple, T)
    val = math.fsum(v.real for _, v in terms) + 1j * math.fsum(v.imag for _, v in terms)
    return OffDiagonal(val, len(terms), inexact, tuple(deg), tuple(halves))


# --- residual ----------------------------------------------------------------


def envelope(triple: ExponentTriple, T: float) -> float:
    a, b, c = triple.as_tuple()
    if T <= 1:
        return 0.0
    lg = math.log(T)
    return T**0.75 * lg + T ** (0.5 + a / (2 * c)) * lg**2 + T ** (1.25 - c / (4 * a))


@dataclass(frozen=True)
class ResidualReport:
    T: float
    I: complex
    sigma: float
    M1: complex
    J22: complex
    residual: complex
    envelope: float
    quad_error: float = 0.0

    @property
    def sigmaT(self) -> float:
        return self.sigma * self.T

    @property
    def ratio(self) -> float:
        return abs(self.residual) / self.envelope if self.envelope else math.nan

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "I_re": self.I.real,
            "I_im": self.I.imag,
            "sigma": self.sigma,
            "M1_re": self.M1.real,
            "M1_im": self.M1.imag,
            "J22_re": self.J22.real,
            "J22_im": self.J22.imag,
            "residual_abs": abs(self.residual),
            "envelope": self.envelope,
        }


def assemble_residual(
    triple: ExponentTriple,
    T: float,
    quad: QuadratureSpec = QuadratureSpec(),
    sigma_pmax: int = 10**10,
) -> ResidualReport:
    """``I(T) - sigma T - M1(T) - J22(T)`` together with the error envelope."""
    require_grade(triple)
    if T > 2000:
        raise ParameterError("assemble_residual is limited to T <= 2000")
    if T < 0:
        raise ParameterError("T must be non-negative")
    rt = RationalTriple.from_triple(triple)
    sigma = sigma_series(rt, sigma_pmax).value
    if T == 0:
        return ResidualReport(0.0, 0j, sigma, 0j, 0j, 0j, 0.0)
    mom = moment_integral(triple, T, quad)
    M1 = m1_sum(triple, T).value
    J22 = j22_sum(triple, T).value
    res = mom.value - sigma * T - M1 - J22
    return ResidualReport(float(T), mom.value, sigma, M1, J22, res, envelope(triple, T), mom.error)
