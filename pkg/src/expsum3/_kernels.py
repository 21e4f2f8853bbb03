"""Compiled inner loops for the weighted exponential sums.

Accumulators are Kahan-compensated and carried in a 4-slot ``state`` array
``[re, im, re_comp, im_comp]`` so a chunk can be fed in several batches.
"""

import math

import numba as nb
import numpy as np

TWO_PI = 2.0 * math.pi


@nb.njit(cache=True, nogil=True)
def _kahan_add(state, re, im):
    y = re - state[2]
    t = state[0] + y
    state[2] = (t - state[0]) - y
    state[0] = t
    y = im - state[3]
    t = state[1] + y
    state[3] = (t - state[1]) - y
    state[1] = t


@nb.njit(cache=True, nogil=True)
def sum_runs_double(n1, mid, lo, hi, a, b, c, kappa, sign, unit_phase, state):
    """Runs with ``n2`` innermost: for each ``(n1[i], n3 = mid[i])`` the values
    ``n2 = lo[i] .. hi[i]``.  Returns the largest phase argument in cycles."""
    wa = -(1.0 + a) / 2.0
    wb = (b - 1.0) / 2.0
    wc = (c - 1.0) / 2.0
    max_x = 0.0
    for i in range(n1.shape[0]):
        l1 = math.log(n1[i])
        l3 = math.log(mid[i])
        base = c * l3 - a * l1
        wbase = wc * l3 + wa * l1
        for n2 in range(lo[i], hi[i] + 1):
            l2 = math.log(n2)
            w = math.exp(wb * l2 + wbase)
            if unit_phase:
                _kahan_add(state, w, 0.0)
                continue
            x = kappa * math.exp(b * l2 + base)
            if x > max_x:
                max_x = x
            frac = x - math.floor(x + 0.5)
            ang = sign * TWO_PI * frac
            _kahan_add(state, w * math.cos(ang), w * math.sin(ang))
    return max_x


@nb.njit(cache=True, nogil=True)
def sum_fracs(frac, weight, sign, state):
    """Accumulate ``weight * e(sign * frac)`` for pre-reduced fractions."""
    for i in range(frac.shape[0]):
        ang = sign * TWO_PI * frac[i]
        _kahan_add(state, weight[i] * math.cos(ang), weight[i] * math.sin(ang))


def new_state():
    return np.zeros(4)
