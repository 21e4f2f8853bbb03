"""Vectorised adaptive panel quadrature shared by the real-line integrals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from expsum3.errors import AccuracyError, ParameterError

GAUSS_LEGENDRE = "gauss_legendre_panel"
ADAPTIVE_SIMPSON = "adaptive_simpson"
GL_ORDER = 8


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-6
    max_subdivisions: int = 200_000
    rule: str = GAUSS_LEGENDRE

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ParameterError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ParameterError("max_subdivisions must be >= 1")
        if self.rule not in (GAUSS_LEGENDRE, ADAPTIVE_SIMPSON):
            raise ParameterError(f"unknown quadrature rule {self.rule!r}")


_GL_X, _GL_W = roots_legendre(GL_ORDER)


def _gl(lo, hi, f):
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return (vals * _GL_W[None, :]).sum(axis=1) * half, nodes.size


def _simpson(lo, hi, f):
    mid = (lo + hi) / 2
    vals = f(np.concatenate([lo, mid, hi])).reshape(3, -1)
    return (hi - lo) / 6 * (vals[0] + 4 * vals[1] + vals[2]), 3 * len(lo)


def _ordered_sum(los, vals, errs):
    # left-to-right order makes the sum independent of refinement history
    lo = np.concatenate(los)
    order = np.argsort(lo, kind="stable")
    return complex(np.sum(np.concatenate(vals)[order])), float(np.sum(np.concatenate(errs)))


def adaptive_panels(
    f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, quad: QuadratureSpec
) -> tuple[complex, float, int, int]:
    """Integrate ``f`` over ``[edges[0], edges[-1]]`` starting from the given panels.

    Each panel is compared against its two halves and split until the
    difference is below its share ``abs_tol * width / span``.  Returns
    ``(value, error_estimate, evaluations, panels)``.
    """
    rule = _gl if quad.rule == GAUSS_LEGENDRE else _simpson
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    span = edges[-1] - edges[0]
    done_lo, done_val, done_err = [], [], []
    panels = len(lo)
    whole, evals = rule(lo, hi, f)
    while len(lo):
        mid = (lo + hi) / 2
        left, n1 = rule(lo, mid, f)
        right, n2 = rule(mid, hi, f)
        evals += n1 + n2
        halves = left + right
        diff = np.abs(halves - whole)
        ok = diff <= quad.abs_tol * (hi - lo) / span
        done_lo.append(lo[ok])
        done_val.append(halves[ok])
        done_err.append(diff[ok])
        bad = ~ok
        if not bad.any():
            break
        panels += int(bad.sum())
        if panels > quad.max_subdivisions:
            done_lo.append(lo[bad])
            done_val.append(halves[bad])
            done_err.append(diff[bad])
            best, err = _ordered_sum(done_lo, done_val, done_err)
            raise AccuracyError(
                f"subdivision budget {quad.max_subdivisions} exhausted", achieved=err, best=best
            )
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    value, err = _ordered_sum(done_lo, done_val, done_err)
    return value, err, evals, panels
