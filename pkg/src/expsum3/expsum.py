"""The weighted exponential sum over the summation domain and the mu-sum.

Each chunk (an ``n1`` slab from ``chunk_domain``) is summed with a
compensated accumulator; chunk values are combined by a fixed pairwise tree,
so a given chunk count always reproduces the same bits regardless of how many
workers ran.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from expsum3 import ENGINE_VERSION, _kernels
from expsum3.domain import CN_WINDOW, DomainChunk, DomainSpec, Runs, chunk_domain
from expsum3.errors import ParameterError
from expsum3.params import ExponentTriple, eta_of, require_grade

DOUBLE = "double"
EXTENDED = "extended"
AUTO = "auto"
EXTENDED_ABOVE = 1e4
_BATCH_TERMS = 1 << 22

LD = np.longdouble


def weight_omega(triple: ExponentTriple, h: int, n: int, m: int) -> float:
    """``h^(-1/2 + b/2) n^(-1/2 + c/2) m^(-1/2 - a/2)``."""
    if min(h, n, m) < 1:
        raise ParameterError("weight arguments must be >= 1")
    a, b, c = triple.as_tuple()
    return h ** (-0.5 + b / 2) * n ** (-0.5 + c / 2) * m ** (-0.5 - a / 2)


@dataclass(frozen=True)
class SumResult:
    value: complex
    term_count: int
    chunks: int
    phase_precision: str
    max_phase: float
    T: float = 0.0
    convention: str = ""
    cached: bool = field(default=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "abs": abs(self.value),
            "term_count": self.term_count,
            "chunks": self.chunks,
            "phase_precision": self.phase_precision,
            "max_phase": self.max_phase,
            "cached": self.cached,
        }


def resolve_precision(precision: str, T: float) -> str:
    if precision == AUTO:
        return EXTENDED if T > EXTENDED_ABOVE else DOUBLE
    if precision not in (DOUBLE, EXTENDED):
        raise ParameterError(f"unknown precision {precision!r}")
    return precision


def _extended_batches(runs: Runs, a, b, c, kappa):
    """Yield ``(frac, weight, max_x)`` per batch; phases built in longdouble."""
    a_, b_, c_, k_ = LD(a), LD(b), LD(c), LD(kappa)
    lens = runs.hi - runs.lo + 1
    start = 0
    while start < len(runs):
        stop = start
        total = 0
        while stop < len(runs) and (total == 0 or total + lens[stop] <= _BATCH_TERMS):
            total += int(lens[stop])
            stop += 1
        sl = slice(start, stop)
        ln = lens[sl]
        rep = np.repeat(np.arange(stop - start), ln)
        offs = np.arange(total) - np.repeat(np.cumsum(ln) - ln, ln)
        n2 = runs.lo[sl][rep] + offs
        l1 = np.log(runs.n1[sl].astype(LD))[rep]
        l3 = np.log(runs.mid[sl].astype(LD))[rep]
        l2 = np.log(n2.astype(LD))
        x = k_ * np.exp(b_ * l2 + c_ * l3 - a_ * l1)
        frac = (x - np.floor(x + LD(0.5))).astype(np.float64)
        w = np.exp(
            (b - 1) / 2 * l2.astype(float) + (c - 1) / 2 * l3.astype(float) - (1 + a) / 2 * l1.astype(float)
        )
        yield frac, w, float(x.max()) if total else 0.0
        start = stop


def _chunk_sum(chunk: DomainChunk, precision: str, sign: int, unit_phase: bool):
    runs = chunk.runs(inner="n2")
    a, b, c = chunk.spec.triple.as_tuple()
    kappa = eta_of(a, b, c) / (2 * math.pi)
    state = _kernels.new_state()
    if precision == DOUBLE or unit_phase:
        max_x = _kernels.sum_runs_double(
            runs.n1, runs.mid, runs.lo, runs.hi, a, b, c, kappa, float(sign), unit_phase, state
        )
    else:
        max_x = 0.0
        for frac, w, mx in _extended_batches(runs, a, b, c, kappa):
            _kernels.sum_fracs(frac, w, float(sign), state)
            max_x = max(max_x, mx)
    return complex(state[0], state[1]), runs.count, max_x


def pairwise_tree(values: Sequence[complex]) -> complex:
    vals = list(values)
    if not vals:
        return 0j
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _run_chunks(spec, chunks, precision, sign, unit_phase, workers):
    require_grade(spec.triple)
    if chunks < 1:
        raise ParameterError("chunk count must be >= 1")
    parts = chunk_domain(spec, chunks)
    if workers is None:
        workers = min(len(parts), os.cpu_count() or 1)
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            res = list(pool.map(lambda ch: _chunk_sum(ch, precision, sign, unit_phase), parts))
    else:
        res = [_chunk_sum(ch, precision, sign, unit_phase) for ch in parts]
    value = pairwise_tree([r[0] for r in res])
    return value, sum(r[1] for r in res), len(parts), max((r[2] for r in res), default=0.0)


def sum_S(
    spec: DomainSpec,
    chunks: int = 1,
    precision: str = AUTO,
    workers: int | None = None,
    unit_phase: bool = False,
    cache_dir: str | os.PathLike | None = None,
) -> SumResult:
    """``sum over the domain of omega(h, n, m) e(kappa h^b n^c m^-a)`` with
    ``(h, n, m) = (n2, n3, n1)``.

    ``unit_phase`` replaces every phase by 1, giving the triangle bound.
    """
    prec = resolve_precision(precision, spec.T)
    cache = ResultCache(cache_dir, spec, "S") if cache_dir and not unit_phase else None
    if cache:
        hit = cache.get(spec.T, prec)
        if hit is not None:
            return hit
    value, count, k, mx = _run_chunks(spec, chunks, prec, 1, unit_phase, workers)
    res = SumResult(value, count, k, prec, mx, spec.T, spec.convention)
    if cache:
        cache.put(res)
    return res


def sum_mu(
    spec: DomainSpec,
    chunks: int = 1,
    precision: str = AUTO,
    workers: int | None = None,
    cache_dir: str | os.PathLike | None = None,
) -> SumResult:
    """``sum of mu(n)`` over ``tau_n <= c_n <= T``.

    With ``c_n = eta X`` one has ``mu(n) = eta^(1/2) omega(n2, n3, n1) e(-kappa X)``.
    """
    if spec.convention != CN_WINDOW:
        raise ParameterError("sum_mu needs the cn_window convention")
    prec = resolve_precision(precision, spec.T)
    cache = ResultCache(cache_dir, spec, "mu") if cache_dir else None
    if cache:
        hit = cache.get(spec.T, prec)
        if hit is not None:
            return hit
    value, count, k, mx = _run_chunks(spec, chunks, prec, -1, False, workers)
    a, b, c = spec.triple.as_tuple()
    res = SumResult(math.sqrt(eta_of(a, b, c)) * value, count, k, prec, mx, spec.T, spec.convention)
    if cache:
        cache.put(res)
    return res


# --- cache -------------------------------------------------------------------

CACHE_HEADER = ["T", "value_re", "value_im", "term_count", "precision", "engine_version"]


class ResultCache:
    """``<dir>/<a>_<c>_<convention>/sums.csv``; hits need an exact
    ``(T, precision, engine_version)`` match."""

    def __init__(self, root, spec: DomainSpec, kind: str = "S"):
        a, c = spec.triple.a, spec.triple.c
        conv = spec.convention if kind == "S" else f"{spec.convention}_mu"
        self.path = Path(root) / f"{a!r}_{c!r}_{conv}" / "sums.csv"
        self.spec = spec

    def _rows(self):
        if not self.path.exists():
            return []
        with self.path.open(newline="") as fh:
            return list(csv.DictReader(fh))

    def get(self, T: float, precision: str) -> SumResult | None:
        for row in self._rows():
            if (
                float(row["T"]) == float(T)
                and row["precision"] == precision
                and row["engine_version"] == ENGINE_VERSION
            ):
                return SumResult(
                    complex(float(row["value_re"]), float(row["value_im"])),
                    int(row["term_count"]),
                    0,
                    precision,
                    math.nan,
                    float(T),
                    self.spec.convention,
                    cached=True,
                )
        return None

    def put(self, res: SumResult) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        new = not self.path.exists()
        with self.path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(CACHE_HEADER)
            w.writerow(
                [repr(float(res.T)), repr(res.value.real), repr(res.value.imag), res.term_count,
                 res.phase_precision, ENGINE_VERSION]
            )


# --- growth fit ----------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    intercept: float
    r2: float
    dropped: tuple = ()

    @property
    def warning(self) -> bool:
        return bool(self.dropped)


def fit_growth(samples: Iterable[tuple[float, float]]) -> GrowthFit:
    """Least-squares line through ``(log T, log magnitude)``."""
    samples = list(samples)
    kept = [(T, m) for T, m in samples if m > 0 and T > 0]
    dropped = tuple((T, m) for T, m in samples if not (m > 0 and T > 0))
    if len(kept) < 3:
        raise ParameterError("need at least 3 samples with positive magnitude")
    x = np.log([T for T, _ in kept])
    y = np.log([m for _, m in kept])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return GrowthFit(float(slope), float(icpt), r2, dropped)


def log_spaced(Tmin: float, Tmax: float, points: int) -> list[float]:
    if points < 1 or Tmin <= 0 or Tmax < Tmin:
        raise ParameterError("need 0 < Tmin <= Tmax and points >= 1")
    return [float(v) for v in np.geomspace(Tmin, Tmax, points)]
