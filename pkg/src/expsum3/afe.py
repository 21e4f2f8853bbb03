"""Exact approximate functional equation for prod_j zeta(1/2 + i a_j t).

The two contour integrals are evaluated directly on ``Re z = 1`` with
Gauss-Legendre panels; Gamma ratios stay in log space until the very end.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np
from scipy.special import roots_legendre

from expsum3.errors import AccuracyError, ParameterError, ResourceError
from expsum3.params import AdmissibleTuple
from expsum3.special import log_gamma
from expsum3.zeta import zeta_product

DEFAULT_TERM_CAP = 5_000_000
PANEL_NODES = 16
# index range of the Taylor data in the Stirling-decomposed form; kept for reference only
UV_RANGE = "1 <= u <= 3v/2, 1 <= v <= 2(k+5), u >= v+1 => v >= 2"


@dataclass(frozen=True)
class ContourSpec:
    real_part: float = 1.0
    height_factor: float = 1.0
    step_count: int = 1024
    strict: bool = False  # raise instead of refining when step_count is too coarse

    def __post_init__(self):
        if not 0 < self.real_part <= 2:
            raise ParameterError("real_part must lie in (0, 2]")
        if self.height_factor < 1:
            raise ParameterError("height_factor must be >= 1")
        if self.step_count < 64:
            raise ParameterError("step_count must be >= 64")


@dataclass(frozen=True)
class AfeResult:
    value: complex
    terms_used: int
    truncation_height: float
    est_error: float
    cutoff: float = 0.0
    distinct_products: int = 0


def _as_tuple(tup) -> AdmissibleTuple:
    return tup if isinstance(tup, AdmissibleTuple) else AdmissibleTuple(tuple(tup))


def length_scale(tup, t: float) -> float:
    """``|Q|^(1/2) (t / 2 pi)^(k/2)``, the value of ``x`` where ``A(x, t) = 1``."""
    tup = _as_tuple(tup)
    return math.sqrt(abs(tup.prod)) * (t / (2 * math.pi)) ** (tup.k / 2)


def a_ratio(tup, x: float, t: float) -> float:
    return length_scale(tup, t) / x


def decay_constant(tup) -> float:
    """``7 alpha / 8`` with ``alpha = 1 / (8 + I^2)``; reported, not used for control."""
    alpha = 1.0 / (8.0 + _as_tuple(tup).inv_sum ** 2)
    return 7.0 * alpha / 8.0


def log_g_ratio(tup, m: int, z, t: float):
    """``log G_m(z, t)``: the Gamma product shifted by ``z`` over the unshifted one."""
    tup = _as_tuple(tup)
    if m not in (1, 2):
        raise ParameterError("m must be 1 or 2")
    z = np.asarray(z, dtype=complex)
    sign = 1 if m == 1 else -1
    out = np.zeros(z.shape, dtype=complex)
    for a in tup.entries:
        out += log_gamma(0.5 * (0.5 + sign * 1j * a * t + z)) - log_gamma(0.5 * (0.5 + 1j * a * t))
    return out


def log_smoothing(tup, z, t: float):
    """``log H(z, t) = z^2 / t - i xi pi z / 4``."""
    z = np.asarray(z, dtype=complex)
    return z * z / t - 1j * _as_tuple(tup).xi * math.pi * z / 4


def afe_kernels(tup, m: int, z, t: float, x: float):
    """Integrand ``G_m(z,t) (pi^(k/2) x)^(-z) H(+-z, t) / z``."""
    tup = _as_tuple(tup)
    z = np.asarray(z, dtype=complex)
    zz = z if m == 1 else -z
    logv = (
        log_g_ratio(tup, m, z, t)
        + log_smoothing(tup, zz, t)
        - z * math.log(math.pi ** (tup.k / 2) * x)
        - np.log(z)
    )
    with np.errstate(over="ignore"):
        v = np.exp(logv)
    if not np.all(np.isfinite(v)):
        raise AccuracyError("kernel overflow after log-space reduction")
    return v


def _local_frequency(tup: AdmissibleTuple, t: float, height: float, xmax: float) -> float:
    """Upper estimate of |d/dy arg| of the integrand on the truncated contour."""
    gam = sum(0.5 * math.log(max((abs(a) * t + height) / 2, 1.0)) for a in tup.entries)
    return gam + math.log(math.pi ** (tup.k / 2) * xmax) + 2 * height / t + math.pi * abs(tup.xi) / 4


class _Contour:
    """Nodes and weights on ``Re z = real_part``, ``|Im z| <= height``."""

    def __init__(self, tup: AdmissibleTuple, t: float, spec: ContourSpec, xmax: float):
        self.height = spec.height_factor * math.sqrt(t) * math.log(t)
        span = 2 * self.height
        need = span * 4 * _local_frequency(tup, t, self.height, xmax) / math.pi
        count = spec.step_count
        if count < need:
            if spec.strict:
                raise AccuracyError(
                    f"step_count {count} too small: node spacing {span / count:.3g} exceeds "
                    f"pi/(4 * local frequency) = {span / need:.3g}",
                    achieved=span / count,
                )
            count = int(math.ceil(need))
        panels = max(math.ceil(span), math.ceil(count / PANEL_NODES))
        x, w = roots_legendre(PANEL_NODES)
        edges = np.linspace(-self.height, self.height, panels + 1)
        mid = (edges[1:] + edges[:-1]) / 2
        half = (edges[1:] - edges[:-1]) / 2
        self.y = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        self.w = (half[:, None] * w[None, :]).ravel()
        self.z = spec.real_part + 1j * self.y
        self.nodes = self.y.size


def _integrate(tup, m, t, xs, contour: _Contour, block=256):
    """``I_m(x, t)`` for every ``x`` in ``xs`` plus a truncation-tail estimate."""
    z = contour.z
    zz = z if m == 1 else -z
    base = log_g_ratio(tup, m, z, t) + log_smoothing(tup, zz, t) - np.log(z)
    with np.errstate(over="ignore"):
        wb = contour.w * np.exp(base)
    if not np.all(np.isfinite(wb)):
        raise AccuracyError("kernel overflow after log-space reduction")
    logpx = np.log(math.pi ** (tup.k / 2) * np.asarray(xs, dtype=float))
    out = np.empty(len(logpx), dtype=complex)
    for s in range(0, len(logpx), block):
        lp = logpx[s : s + block]
        out[s : s + block] = np.exp(-np.outer(lp, z)) @ wb / (2 * math.pi)
    # Gaussian tail beyond the truncation: |f(H)| * t / (2H) at each end
    H = contour.height
    edge = np.abs(np.exp(base[[0, -1]]))
    scale = np.exp(-contour.z.real[0] * logpx).max(initial=1.0)
    tail = float(edge.sum()) * scale * t / (2 * H) / (2 * math.pi)
    return out, float(tail + math.exp(-(H * H) / t) * scale)


def i_m_term(tup, m: int, x: float, t: float, contour: ContourSpec = ContourSpec()):
    """``I_m(x, t)`` as ``(value, est_error)``."""
    tup = _as_tuple(tup)
    if not t > 1:
        raise ParameterError("t must exceed 1")
    if not x >= 1:
        raise ParameterError("x must be >= 1")
    c = _Contour(tup, t, contour, x)
    vals, err = _integrate(tup, m, t, [x], c)
    return complex(vals[0]), float(err)


@dataclass(frozen=True)
class PsiG:
    psi: complex
    g: float


def psi_and_g(tup, t: float) -> PsiG:
    tup = _as_tuple(tup)
    if not t > 0:
        raise ParameterError("t must be positive")
    g = sum(a * t * (math.log(abs(a) * t / 2) - 1) for a in tup.entries)
    ph = tup.xi * math.pi / 4 - g
    return PsiG(complex(math.cos(ph), math.sin(ph)), g)


def g_derivative(tup, t: float) -> float:
    return sum(a * math.log(abs(a) * t / 2) for a in _as_tuple(tup).entries)


ZERO, ONE, TRANSITION = "zero", "one", "transition"


def k_step(tup, x: float, t: float) -> str:
    """Which side of the smoothed step ``A(x, t) = 1`` the point lies on."""
    if not t > 1:
        raise ParameterError("t must exceed 1")
    logA = math.log(a_ratio(tup, x, t))
    band = math.log(t) / math.sqrt(t)
    if logA > band:
        return ONE
    if logA < -band:
        return ZERO
    return TRANSITION


def product_tuples(k: int, pmax: float) -> np.ndarray:
    """All ``n`` in N^k with ``n_1 ... n_k <= pmax``, shape ``(count, k)``."""
    pmax = int(math.floor(pmax))
    if pmax < 1:
        return np.zeros((0, k), dtype=np.int64)
    cols = [np.arange(1, pmax + 1, dtype=np.int64)]
    prod = cols[0].copy()
    for _ in range(k - 1):
        reps = pmax // prod
        idx = np.repeat(np.arange(len(prod)), reps)
        starts = np.cumsum(reps) - reps
        nxt = np.arange(len(idx), dtype=np.int64) - np.repeat(starts, reps) + 1
        cols = [c[idx] for c in cols] + [nxt]
        prod = prod[idx] * nxt
    return np.stack(cols, axis=1)


def afe_sum(
    tup,
    t: float,
    margin: float = 2.0,
    contour: ContourSpec = ContourSpec(),
    term_cap: int = DEFAULT_TERM_CAP,
) -> AfeResult:
    """Approximate ``prod_j zeta(1/2 + i a_j t)`` by the truncated AFE sum.

    Terms are restricted to ``P_n <= margin * |Q|^(1/2) (t / 2 pi)^(k/2)`` and
    summed in increasing ``P_n`` with lexicographic ties.  The second branch
    carries the factor ``pi^(i t sum a_j)`` which the functional equation
    produces when ``B_2`` is moved back to ``Re z = 1``.
    """
    tup = _as_tuple(tup)
    if not t > 10:
        raise ParameterError("afe_sum needs t > 10")
    if margin < 1:
        raise ParameterError("margin must be >= 1")
    cutoff = margin * length_scale(tup, t)
    # cheap size estimate before materialising tuples
    est = cutoff * math.log(cutoff + 1) ** (tup.k - 1)
    if est > 4 * term_cap:
        raise ResourceError(f"AFE term count ~{est:.3g} exceeds cap {term_cap}", cap=term_cap)
    n = product_tuples(tup.k, cutoff)
    if len(n) > term_cap:
        raise ResourceError(f"AFE term count {len(n)} exceeds cap {term_cap}", cap=term_cap)
    P = np.prod(n, axis=1)
    order = np.lexsort(tuple(n[:, j] for j in range(tup.k - 1, -1, -1)) + (P,))
    n, P = n[order], P[order]
    distinct = np.arange(1, int(P.max()) + 1)
    c = _Contour(tup, t, contour, float(distinct[-1]))
    I1, e1 = _integrate(tup, 1, t, distinct, c)
    I2, e2 = _integrate(tup, 2, t, distinct, c)
    logL = -(np.log(n.astype(float)) @ np.array(tup.entries))
    twist = np.exp(1j * t * sum(tup.entries) * math.log(math.pi))
    terms = P ** -0.5 * (
        np.exp(1j * t * logL) * I1[P - 1] + np.exp(-1j * t * logL) * I2[P - 1] * twist
    )
    value = complex(np.sum(terms))
    est = float(np.sum(P ** -0.5) * (e1 + e2))
    return AfeResult(value, len(n), c.height, est, cutoff, len(distinct))


@dataclass(frozen=True)
class AfeRow:
    t: float
    direct: complex
    afe: complex
    abs_err: float
    rel_err: float


@dataclass(frozen=True)
class AfeTable:
    rows: tuple[AfeRow, ...]
    monotone: bool


def afe_validate(
    tup, t_grid: Sequence[float], contour: ContourSpec = ContourSpec(), margin: float = 2.0
) -> AfeTable:
    """Compare ``afe_sum`` with the Euler-Maclaurin product on a grid of ``t``."""
    tup = _as_tuple(tup)
    grid = sorted(float(t) for t in t_grid)
    if not grid:
        raise ParameterError("t grid is empty")
    if grid[0] <= 10:
        raise ParameterError("all t must exceed 10")
    rows = []
    for t in grid:
        direct = zeta_product(tup.entries, t)
        approx = afe_sum(tup, t, margin, contour).value
        err = abs(direct - approx)
        rows.append(AfeRow(t, direct, approx, err, err / abs(direct) if direct else math.inf))
    rel = [r.rel_err for r in rows]
    return AfeTable(tuple(rows), all(b <= a for a, b in zip(rel, rel[1:])))


def write_afe_csv(table: AfeTable, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "direct_re", "direct_im", "afe_re", "afe_im", "abs_err", "rel_err"])
    for r in table.rows:
        w.writerow(
            [repr(r.t)]
            + [f"{v:.17g}" for v in (r.direct.real, r.direct.imag, r.afe.real, r.afe.imag)]
            + [f"{r.abs_err:.6e}", f"{r.rel_err:.6e}"]
        )
