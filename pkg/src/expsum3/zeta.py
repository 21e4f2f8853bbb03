"""zeta(1/2 + it) by Euler-Maclaurin, the three-factor product and its integral."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from expsum3.errors import AccuracyError, ParameterError
from expsum3.params import ExponentTriple, require_grade
from expsum3.quadrature import QuadratureSpec, adaptive_panels

T_LIMIT = 1e6
MIN_TOL = 1e-12
DEFAULT_TOL = 1e-10
BERNOULLI_TERMS = 16
MAX_TERMS = 4_000_000
_BATCH = 256

_B = bernoulli(2 * BERNOULLI_TERMS + 2)
_EM_COEF = np.array([_B[2 * k] / math.factorial(2 * k) for k in range(1, BERNOULLI_TERMS + 2)])


LD = np.longdouble
_TWO_PI_LD = 2 * np.arccos(LD(-1))
_EPS = np.finfo(float).eps
_EPS_LD = float(np.finfo(LD).eps)


def _neg_power(t: np.ndarray, logn: np.ndarray) -> np.ndarray:
    """``n^(-1/2 - i t)`` for every pair; the phase ``t log n`` is reduced mod
    ``2 pi`` in extended precision because it reaches ``~1e5`` radians."""
    ph = np.fmod(np.multiply.outer(t.astype(LD), logn), _TWO_PI_LD).astype(float)
    mag = np.exp(-0.5 * logn.astype(float))
    return mag * (np.cos(ph) - 1j * np.sin(ph))


def _direct_sum(t: np.ndarray, N: int) -> np.ndarray:
    """sum_{n <= N} n^-s with ``s = 1/2 + i t`` for a batch sharing one N."""
    total = np.zeros(len(t), dtype=complex)
    step = max(1, 2_000_000 // max(len(t), 1))
    for start in range(1, N + 1, step):
        logn = np.log(np.arange(start, min(N, start + step - 1) + 1, dtype=LD))
        total += _neg_power(t, logn).sum(axis=1)
    return total


def _em_batch(t: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Euler-Maclaurin value, the size of the first omitted correction and a
    rounding allowance for the direct sum."""
    s = 0.5 + 1j * t
    nps = _neg_power(t, np.log(np.array([N], dtype=LD)))[:, 0]  # N^-s
    val = _direct_sum(t, N) + N * nps / (s - 1) - 0.5 * nps
    rising = s.copy()  # s (s+1) ... (s+2k-2)
    npow = nps / N
    for k in range(BERNOULLI_TERMS):
        val = val + _EM_COEF[k] * rising * npow
        rising = rising * (s + 2 * k + 1) * (s + 2 * k + 2)
        npow = npow / (N * N)
    err = np.abs(_EM_COEF[BERNOULLI_TERMS] * rising * npow)
    return val, err, _rounding(N, np.abs(t))


def _rounding(N: int, t: np.ndarray) -> np.ndarray:
    # per-term errors ~eps n^-1/2 add in quadrature, pairwise summation adds
    # ~eps log2 N, and the extended-precision phase carries ~eps_ld t log n
    lg = math.log(N)
    return 16 * _EPS * (math.sqrt(lg) + math.log2(N)) + 2 * _EPS_LD * t * lg * math.sqrt(lg)


def _base_terms(t: np.ndarray) -> np.ndarray:
    return np.maximum(10, np.ceil(np.abs(t) / 2)).astype(np.int64)


def zeta_with_error(t, tol: float = DEFAULT_TOL):
    """``(value, error estimate)`` of ``zeta(1/2 + i t)`` elementwise."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if not np.all(np.isfinite(t)) or np.any(np.abs(t) > T_LIMIT):
        raise ParameterError(f"|t| must be finite and <= {T_LIMIT:g}")
    tol = max(float(tol), MIN_TOL)
    val = np.empty(len(t), dtype=complex)
    err = np.empty(len(t))
    order = np.argsort(np.abs(t), kind="stable")
    Nreq = _base_terms(t)
    for start in range(0, len(t), _BATCH):
        idx = order[start : start + _BATCH]
        N = int(Nreq[idx].max())
        while True:
            v, e, r = _em_batch(t[idx], N)
            if np.all(e + r <= tol) or 2 * N > MAX_TERMS or np.any(r > tol):
                break
            N *= 2
        e = e + r
        if np.any(e > tol):
            raise AccuracyError(
                f"zeta tolerance {tol:g} not reached with {N} terms", achieved=float(e.max())
            )
        val[idx], err[idx] = v, e
    if scalar:
        return complex(val[0]), float(err[0])
    return val, err


def zeta_critical(t, tol: float = DEFAULT_TOL):
    """``zeta(1/2 + i t)``; accepts a scalar or an array of ``t``."""
    return zeta_with_error(t, tol)[0]


def zeta_product(entries, t, tol: float = DEFAULT_TOL):
    """``prod_j zeta(1/2 + i a_j t)`` with per-factor tolerances rebalanced once
    against the sizes of the other factors."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    k = len(entries)
    vals = [zeta_critical(a * t, tol / k) for a in entries]
    mags = np.array([np.abs(v) for v in vals])
    for j, a in enumerate(entries):
        others = np.prod(np.delete(mags, j, axis=0), axis=0)
        need = tol / (k * np.maximum(1.0, others))
        if np.any(need < tol / k):
            vals[j] = zeta_critical(a * t, float(need.min()))
    out = np.prod(np.array(vals), axis=0)
    return complex(out[0]) if scalar else out


def product_integrand(triple: ExponentTriple, t, tol: float = DEFAULT_TOL):
    """``zeta(1/2 + i a t) zeta(1/2 - i b t) zeta(1/2 - i c t)``."""
    require_grade(triple)
    return zeta_product(triple.signed, t, tol)


# --- moment integral ---------------------------------------------------------

@dataclass(frozen=True)
class MomentResult:
    value: complex
    error: float
    evaluations: int
    panels: int


def panel_width_cap(triple: ExponentTriple, T: float) -> float:
    a, b, c = triple.as_tuple()
    return 2 * math.pi / (5 * (a + b + c) * max(1.0, math.log(max(T, 1.0))))


def moment_integral(
    triple: ExponentTriple, T: float, quad: QuadratureSpec = QuadratureSpec(), t0: float = 0.0
) -> MomentResult:
    """Integral of ``product_integrand`` over ``[t0, T]`` to ``quad.abs_tol``.

    Panels never exceed the oscillation-resolving width cap taken at ``T``.
    """
    require_grade(triple)
    if T > 5000:
        raise ParameterError("moment_integral is limited to T <= 5000")
    if not 0 <= t0 <= T:
        raise ParameterError("need 0 <= t0 <= T")
    if T == t0:
        return MomentResult(0j, 0.0, 0, 0)
    ztol = min(1e-10, quad.abs_tol / (10 * (T - t0)))

    def f(t):
        return product_integrand(triple, t, ztol)

    n0 = max(1, math.ceil((T - t0) / panel_width_cap(triple, T)))
    value, err, evals, panels = adaptive_panels(f, np.linspace(t0, T, n0 + 1), quad)
    return MomentResult(value, err, evals, panels)
