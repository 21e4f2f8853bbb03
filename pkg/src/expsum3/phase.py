"""The phase G_n(t), its stationary point and the stationary-phase main term."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from expsum3.domain import Tuple3, tuple_geometry
from expsum3.errors import ParameterError
from expsum3.params import ExponentTriple, eta_of, require_grade
from expsum3.quadrature import QuadratureSpec, adaptive_panels

SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class PhaseContext:
    triple: ExponentTriple
    n: Tuple3
    L_val: float  # log(n2^b n3^c / n1^a)
    c: float
    tau: float

    @classmethod
    def build(cls, triple: ExponentTriple, n) -> "PhaseContext":
        require_grade(triple)
        n = Tuple3(*(int(v) for v in n))
        a, b, c = triple.as_tuple()
        geo = tuple_geometry(triple, n)
        L = b * math.log(n.n2) + c * math.log(n.n3) - a * math.log(n.n1)
        return cls(triple, n, L, geo.c, geo.tau)

    @property
    def scale(self) -> float:
        return sum(abs(e) * math.log(v) for e, v in zip(self.triple.as_tuple(), self.n)) + 1.0


@dataclass(frozen=True)
class PhaseValue:
    G: float
    G1: float
    G2: float


def _g(entries, t):
    return sum(e * t * (np.log(abs(e) * t / 2) - 1) for e in entries)


def phase_value(ctx: PhaseContext, t):
    """``G_n(t) = -t log L(n) - g(t)``; vectorised over ``t``."""
    return -t * ctx.L_val - _g(ctx.triple.signed, t)


def phase_slope(ctx: PhaseContext, t):
    a, b, c = ctx.triple.as_tuple()
    n1, n2, n3 = ctx.n
    s = b + c - a
    const = b * math.log(b) + c * math.log(c) - a * math.log(a) - s * math.log(2)
    return a * math.log(n1) - b * math.log(n2) - c * math.log(n3) + s * np.log(t) + const


def phase_eval(ctx: PhaseContext, t: float) -> PhaseValue:
    if not t > 0:
        raise ParameterError("t must be positive")
    a, b, c = ctx.triple.as_tuple()
    return PhaseValue(float(phase_value(ctx, t)), float(phase_slope(ctx, t)), (b + c - a) / t)


@dataclass(frozen=True)
class OscResult:
    value: complex
    error: float
    panels: int


def _resolving_edges(ctx: PhaseContext, t0: float, t1: float) -> np.ndarray:
    """Panel edges with width <= 2 pi / (5 max|G'|) on each panel.

    ``G'`` is increasing, so its extreme modulus on a panel sits at an end.
    """
    edges = [t0]
    t = t0
    while t < t1:
        w = t1 - t
        while True:
            gmax = max(abs(phase_slope(ctx, t)), abs(phase_slope(ctx, t + w)))
            # near the stationary point the curvature sets the scale instead
            cap = min(2 * math.pi / (5 * gmax) if gmax > 0 else math.inf, math.sqrt(t + w))
            if w <= cap:
                break
            w = cap
        t = min(t + w, t1)
        edges.append(t)
    return np.array(edges)


def oscillatory_integral(
    ctx: PhaseContext, t0: float, t1: float, tol: float = 1e-6, sign: int = 1
) -> OscResult:
    """``int_{t0}^{t1} exp(sign * i G_n(t)) dt`` by adaptive Gauss-Legendre panels."""
    if not 0 < t0 <= t1:
        raise ParameterError("need 0 < t0 <= t1")
    if t0 == t1:
        return OscResult(0j, 0.0, 0)
    edges = _resolving_edges(ctx, t0, t1)

    def f(t):
        return np.exp(sign * 1j * phase_value(ctx, t))

    val, err, _, panels = adaptive_panels(f, edges, QuadratureSpec(abs_tol=tol))
    return OscResult(val, err, panels)


@dataclass(frozen=True)
class MainTerm:
    mu: complex
    main: complex


def sp_main_term(ctx: PhaseContext) -> MainTerm:
    """``mu(n) = P^(-1/2) c^(1/2) e^{i G(c)}`` and ``Lambda c^(1/2) e^{i G(c)}``."""
    a, b, c = ctx.triple.as_tuple()
    Lam = (b + c - a) ** -0.5 * SQRT_2PI
    unit = np.exp(1j * phase_value(ctx, ctx.c))
    P = ctx.n.n1 * ctx.n.n2 * ctx.n.n3
    root = math.sqrt(ctx.c)
    return MainTerm(complex(unit * root / math.sqrt(P)), complex(Lam * root * unit))


@dataclass(frozen=True)
class SpComparison:
    quadrature: complex
    prediction: complex
    abs_err: float
    rel_err: float


def sp_compare(ctx: PhaseContext, f: float = 2.0, tol: float = 1e-6) -> SpComparison:
    """Quadrature over ``[c/f, c f]`` (with the ``e^{-i pi/4}`` factor) against
    the stationary-phase prediction."""
    if not f > 1:
        raise ParameterError("window factor must exceed 1")
    q = np.exp(-1j * math.pi / 4) * oscillatory_integral(ctx, ctx.c / f, ctx.c * f, tol).value
    p = sp_main_term(ctx).main
    err = abs(q - p)
    return SpComparison(complex(q), p, float(err), float(err / abs(p)))


def mu_modulus_identity(triple: ExponentTriple, n) -> tuple[float, float]:
    """``(|mu(n)|, eta^(1/2) omega(n2, n3, n1))`` computed by independent routes."""
    from expsum3.expsum import weight_omega

    ctx = PhaseContext.build(triple, n)
    lhs = abs(sp_main_term(ctx).mu)
    a, b, c = triple.as_tuple()
    rhs = math.sqrt(eta_of(a, b, c)) * weight_omega(triple, n[1], n[2], n[0])
    return lhs, rhs
