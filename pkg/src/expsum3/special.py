"""Complex log-Gamma by Stirling's series with an upward recurrence shift."""

from __future__ import annotations

import numpy as np
from scipy.special import bernoulli

from expsum3.errors import ParameterError

SHIFT_RADIUS = 10.0
STIRLING_TERMS = 8

_B = bernoulli(2 * STIRLING_TERMS)
# B_2k / (2k (2k-1)) for k = 1..STIRLING_TERMS
_STIRLING = np.array([_B[2 * k] / (2 * k * (2 * k - 1)) for k in range(1, STIRLING_TERMS + 1)])
_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


def _stirling(z: np.ndarray) -> np.ndarray:
    out = (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI
    zinv = 1.0 / z
    zinv2 = zinv * zinv
    # Horner in 1/z^2, then one extra 1/z
    acc = np.zeros_like(z)
    for coef in _STIRLING[::-1]:
        acc = acc * zinv2 + coef
    return out + acc * zinv


def log_gamma(z):
    """Principal branch of ``log Gamma(z)``, vectorised over numpy inputs.

    Points with ``|z| < 10`` or ``Re z < 0`` are shifted to ``z + m`` (``Re(z + m) >= 10``)
    and corrected with ``-sum(log(z + j))``; the principal logs make the
    result agree with the usual branch cut along the negative real axis.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if pole.any():
        raise ParameterError(f"log_gamma has a pole at {z[pole][0].real:g}")
    # the series remainder grows like sec(arg z / 2)^(2K+2), so the left half-plane is always shifted
    need = (np.abs(z) < SHIFT_RADIUS) | (z.real < 0)
    m = np.where(need, np.ceil(np.maximum(SHIFT_RADIUS - z.real, 0.0)), 0.0).astype(np.int64)
    corr = np.zeros_like(z)
    for j in range(int(m.max(initial=0))):
        active = m > j
        corr[active] += np.log(z[active] + j)
    out = _stirling(z + m) - corr
    return out[0] if scalar else out
