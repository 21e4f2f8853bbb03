"""Per-tuple thresholds and enumeration of the two summation domains.

Both domains are two-sided monomial constraints

    lam * (n1 n2 n3)^(2/3)  <=  X(n) = n2^b n3^c n1^(-a)  <=  U

which are linear in ``y = log n``.  Enumeration therefore works on the
polytope in log space: Fourier-Motzkin elimination bounds ``n1`` and ``n2``,
and for every ``(n1, n2)`` the admissible ``n3`` form one contiguous run whose
ends are settled by an exact membership test in extended precision.

``paper_DT`` uses ``lam = (abc)^(-1/3)``, ``U = T``; ``cn_window`` is
``tau_n <= c_n <= T``, i.e. ``lam = 2 pi (abc)^(-1/3) / eta`` and ``U = T / eta``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, TextIO

import numpy as np

from expsum3.errors import ParameterError, ResourceError
from expsum3.params import ExponentTriple, eta_of, require_grade

PAPER_DT = "paper_DT"
CN_WINDOW = "cn_window"
CONVENTIONS = (PAPER_DT, CN_WINDOW)

DEFAULT_CAP = 10**8
GUARD_BAND = 1e-12

LD = np.longdouble


class Tuple3(NamedTuple):
    n1: int
    n2: int
    n3: int


class Geometry(NamedTuple):
    tau: float
    c: float
    X: float


@dataclass(frozen=True)
class DomainSpec:
    triple: ExponentTriple
    T: float
    convention: str = PAPER_DT
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"unknown convention {self.convention!r}")
        if not (math.isfinite(self.T) and self.T >= 1):
            raise ParameterError(f"cutoff T must be >= 1, got {self.T!r}")
        if self.cap < 1:
            raise ParameterError("cap must be positive")


def normalize_convention(name: str) -> str:
    aliases = {"paper": PAPER_DT, "paper_dt": PAPER_DT, "window": CN_WINDOW, "cn_window": CN_WINDOW}
    try:
        return aliases[name.lower()]
    except KeyError:
        raise ParameterError(f"unknown convention {name!r}") from None


def tuple_geometry(triple: ExponentTriple, n) -> Geometry:
    require_grade(triple)
    a, b, c = triple.as_tuple()
    n1, n2, n3 = n
    if min(n1, n2, n3) < 1:
        raise ParameterError("tuple entries must be >= 1")
    X = math.exp(b * math.log(n2) + c * math.log(n3) - a * math.log(n1))
    tau = 2 * math.pi * (n1 * n2 * n3) ** (2 / 3) * (a * b * c) ** (-1 / 3)
    return Geometry(tau=tau, c=eta_of(a, b, c) * X, X=X)


# --- log-space description ---------------------------------------------------


@dataclass(frozen=True)
class _LogBox:
    """Constraint data in extended precision: ``log_lam``, ``log_U`` and
    the exponents as longdoubles."""

    a: np.longdouble
    b: np.longdouble
    c: np.longdouble
    log_lam: np.longdouble
    log_U: np.longdouble

    @property
    def log_pmax(self):
        return LD(1.5) * (self.log_U - self.log_lam)

    def rows(self) -> list[tuple[np.ndarray, float]]:
        """Half-spaces ``coef . y <= rhs`` (float64) including ``y >= 0`` and the
        implied product bound."""
        a, b, c = float(self.a), float(self.b), float(self.c)
        t = 2.0 / 3.0
        out = [
            (np.array([-a, b, c]), float(self.log_U)),
            (np.array([t + a, t - b, t - c]), -float(self.log_lam)),
            (np.array([1.0, 1.0, 1.0]), float(self.log_pmax)),
        ]
        for i in range(3):
            e = np.zeros(3)
            e[i] = -1.0
            out.append((e, 0.0))
        return out


def _log_box(spec: DomainSpec) -> _LogBox:
    a, b, c = (LD(v) for v in spec.triple.as_tuple())
    log_abc = np.log(a) + np.log(b) + np.log(c)
    log_lam = -log_abc / 3
    log_U = np.log(LD(spec.T))
    if spec.convention == CN_WINDOW:
        s = b + c - a
        log_eta = np.log(LD(2)) + (a * np.log(a) - b * np.log(b) - c * np.log(c)) / s
        log_lam = log_lam + np.log(2 * LD(np.pi)) - log_eta
        log_U = log_U - log_eta
    return _LogBox(a, b, c, log_lam, log_U)


def _eliminate(rows, idx):
    pos = [r for r in rows if r[0][idx] > 1e-15]
    neg = [r for r in rows if r[0][idx] < -1e-15]
    out = [r for r in rows if abs(r[0][idx]) <= 1e-15]
    for cp, rp in pos:
        for cn, rn in neg:
            wp, wn = -cn[idx], cp[idx]
            coef = wp * cp + wn * cn
            coef[idx] = 0.0
            out.append((coef, wp * rp + wn * rn))
    return out


def _range_of(rows, idx, fixed: dict[int, float]) -> tuple[float, float]:
    lo, hi = -math.inf, math.inf
    for coef, rhs in rows:
        rest = rhs - sum(coef[j] * v for j, v in fixed.items())
        k = coef[idx]
        if k > 1e-15:
            hi = min(hi, rest / k)
        elif k < -1e-15:
            lo = max(lo, rest / k)
        elif rest < -1e-9:
            return (1.0, 0.0)
    return lo, hi


def _int_range(lo: float, hi: float) -> tuple[int, int]:
    """Integers n >= 1 with log n in [lo, hi], widened by one on each side."""
    if hi < lo - 1e-9:
        return (1, 0)
    nlo = 1 if lo <= 0 else max(1, math.floor(math.exp(lo)) - 1)
    nhi = math.floor(math.exp(min(hi, 700.0))) + 1
    return nlo, nhi


@dataclass
class Runs:
    """Domain as runs of consecutive values of the ``inner`` coordinate for each
    ``(n1, mid)`` pair.

    With ``inner == "n3"`` (the default) iteration is lexicographic in
    ``(n1, n2, n3)``; ``inner == "n2"`` gives far fewer, longer runs and is the
    layout the summation kernels use.
    """

    n1: np.ndarray
    mid: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    inner: str = "n3"
    flagged: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return int(np.sum(self.hi - self.lo + 1)) if len(self.n1) else 0

    def __len__(self) -> int:
        return len(self.n1)

    def __iter__(self) -> Iterator[Tuple3]:
        inner_n3 = self.inner == "n3"
        for i in range(len(self.n1)):
            n1, m = int(self.n1[i]), int(self.mid[i])
            for v in range(int(self.lo[i]), int(self.hi[i]) + 1):
                yield Tuple3(n1, m, v) if inner_n3 else Tuple3(n1, v, m)

    def per_n1_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for n1, lo, hi in zip(self.n1, self.lo, self.hi):
            out[int(n1)] = out.get(int(n1), 0) + int(hi - lo + 1)
        return out


def _gaps(box: _LogBox, l1, l2, l3):
    """Signed log-gaps of both inequalities (member iff both <= 0)."""
    logX = box.b * l2 + box.c * l3 - box.a * l1
    upper = logX - box.log_U
    lower = box.log_lam + (l1 + l2 + l3) * (LD(2) / 3) - logX
    return upper, lower


class _Layout:
    def __init__(self, inner: str):
        if inner not in ("n2", "n3"):
            raise ParameterError(f"inner axis must be 'n2' or 'n3', got {inner!r}")
        self.inner = inner
        self.i_in, self.i_mid = (2, 1) if inner == "n3" else (1, 2)

    def gaps(self, box, l1, lmid, lin):
        if self.inner == "n3":
            return _gaps(box, l1, lmid, lin)
        return _gaps(box, l1, lin, lmid)

    def member(self, box, l1, lmid, n):
        up, lo = self.gaps(box, l1, lmid, np.log(np.maximum(n, 1).astype(LD)))
        return (up <= 0) & (lo <= 0) & (n >= 1)


def n1_extent(spec: DomainSpec) -> tuple[int, int]:
    box = _log_box(spec)
    rows1 = _eliminate(_eliminate(box.rows(), 2), 1)
    lo, hi = _range_of(rows1, 0, {})
    return _int_range(lo, hi)


def domain_runs(
    spec: DomainSpec, n1_range: tuple[int, int] | None = None, inner: str = "n3"
) -> Runs:
    """Build the run representation of the domain, optionally restricted to
    ``n1_lo <= n1 <= n1_hi``.  Raises ``ResourceError`` past ``spec.cap``."""
    lay = _Layout(inner)
    box = _log_box(spec)
    rows = box.rows()
    rows_mid = _eliminate(rows, lay.i_in)
    n1lo, n1hi = n1_extent(spec)
    if n1_range is not None:
        n1lo, n1hi = max(n1lo, n1_range[0]), min(n1hi, n1_range[1])
    parts_n1, parts_mid, parts_lo, parts_hi, flagged = [], [], [], [], []
    total = 0
    for n1 in range(n1lo, n1hi + 1):
        lo_m, hi_m = _range_of(rows_mid, lay.i_mid, {0: math.log(n1)})
        mlo, mhi = _int_range(lo_m, hi_m)
        if mhi < mlo:
            continue
        mid = np.arange(mlo, mhi + 1, dtype=np.int64)
        l1 = np.log(LD(n1))
        lmid = np.log(mid.astype(LD))
        lo_in = np.zeros(len(mid), dtype=LD)
        hi_in = np.full(len(mid), LD(np.inf))
        feasible = np.ones(len(mid), dtype=bool)
        for coef, rhs in rows:
            k = coef[lay.i_in]
            rest = LD(rhs) - LD(coef[0]) * l1 - LD(coef[lay.i_mid]) * lmid
            if k > 1e-15:
                hi_in = np.minimum(hi_in, rest / LD(k))
            elif k < -1e-15:
                lo_in = np.maximum(lo_in, rest / LD(k))
            else:
                feasible &= rest >= -1e-9
        feasible &= hi_in >= lo_in - LD(1e-9)
        if not feasible.any():
            continue
        mid, lmid = mid[feasible], lmid[feasible]
        lo_in, hi_in = lo_in[feasible], hi_in[feasible]
        a3 = np.maximum(np.ceil(np.exp(lo_in)).astype(np.int64), 1)
        b3 = np.floor(np.exp(np.minimum(hi_in, LD(60)))).astype(np.int64)
        # settle both run ends exactly
        for _ in range(6):
            down = (a3 > 1) & lay.member(box, l1, lmid, a3 - 1)
            a3 = a3 - down
            up = (a3 <= b3) & ~lay.member(box, l1, lmid, a3)
            a3 = a3 + up
            grow = (b3 >= a3 - 1) & lay.member(box, l1, lmid, b3 + 1)
            b3 = b3 + grow
            shrink = (b3 >= a3) & ~lay.member(box, l1, lmid, b3)
            b3 = b3 - shrink
            if not (down.any() or up.any() or grow.any() or shrink.any()):
                break
        keep = b3 >= a3
        if not keep.any():
            continue
        mid, lmid, a3, b3 = mid[keep], lmid[keep], a3[keep], b3[keep]
        total += int(np.sum(b3 - a3 + 1))
        if total > spec.cap:
            raise ResourceError(
                f"domain for T={spec.T} exceeds the tuple cap {spec.cap}", cap=spec.cap
            )
        flagged.extend(_flag_ends(box, lay, n1, mid, l1, lmid, a3, b3))
        parts_n1.append(np.full(len(mid), n1, dtype=np.int64))
        parts_mid.append(mid)
        parts_lo.append(a3)
        parts_hi.append(b3)
    if not parts_n1:
        e = np.zeros(0, dtype=np.int64)
        return Runs(e, e.copy(), e.copy(), e.copy(), inner, flagged)
    return Runs(
        np.concatenate(parts_n1),
        np.concatenate(parts_mid),
        np.concatenate(parts_lo),
        np.concatenate(parts_hi),
        inner,
        flagged,
    )


def _flag_ends(box, lay, n1, mid, l1, lmid, a3, b3):
    """Tuples at or just outside the run ends whose log-gap lies inside the guard band."""
    out = []
    for cand in (a3 - 1, a3, b3, b3 + 1):
        up, lo = lay.gaps(box, l1, lmid, np.log(np.maximum(cand, 1).astype(LD)))
        near = (cand >= 1) & ((np.abs(up) <= GUARD_BAND) | (np.abs(lo) <= GUARD_BAND))
        for i in np.nonzero(near)[0]:
            m, v = int(mid[i]), int(cand[i])
            n = Tuple3(n1, m, v) if lay.inner == "n3" else Tuple3(n1, v, m)
            out.append((n, float(up[i]), float(lo[i])))
    return out


def enumerate_domain(spec: DomainSpec) -> Iterator[Tuple3]:
    """Yield the domain's tuples in lexicographic ``(n1, n2, n3)`` order."""
    return iter(domain_runs(spec))


def domain_count(spec: DomainSpec) -> int:
    return domain_runs(spec, inner="n2").count


@dataclass(frozen=True)
class DomainChunk:
    spec: DomainSpec
    n1_lo: int
    n1_hi: int
    est_count: int

    def runs(self, inner: str = "n3") -> Runs:
        return domain_runs(self.spec, (self.n1_lo, self.n1_hi), inner)

    def __iter__(self) -> Iterator[Tuple3]:
        return iter(self.runs())


def _partition(weights: list[int], k: int) -> list[tuple[int, int]]:
    """Split ``weights`` into at most ``k`` contiguous non-empty groups with
    minimal maximum load (binary search on the capacity)."""
    n = len(weights)
    k = max(1, min(k, n))

    def groups_for(cap):
        out, start, load = [], 0, 0
        for i, w in enumerate(weights):
            if load + w > cap and i > start:
                out.append((start, i - 1))
                start, load = i, 0
            load += w
        out.append((start, n - 1))
        return out

    lo, hi = max(weights), sum(weights)
    while lo < hi:
        mid = (lo + hi) // 2
        if len(groups_for(mid)) <= k:
            hi = mid
        else:
            lo = mid + 1
    groups = groups_for(lo)
    # use the spare chunk budget to split further where it does not hurt the max
    while len(groups) < k:
        idx = max(range(len(groups)), key=lambda g: groups[g][1] - groups[g][0])
        s, e = groups[idx]
        if e == s:
            break
        m = (s + e) // 2
        groups[idx : idx + 1] = [(s, m), (m + 1, e)]
    return groups


def chunk_domain(spec: DomainSpec, k: int) -> list[DomainChunk]:
    """Partition the ``n1`` axis into at most ``k`` disjoint, non-empty slabs
    balanced by tuple count."""
    if k < 1:
        raise ParameterError("chunk count must be >= 1")
    counts = domain_runs(spec, inner="n2").per_n1_counts()
    if not counts:
        lo, hi = n1_extent(spec)
        return [DomainChunk(spec, lo, max(lo, hi), 0)]
    keys = sorted(counts)
    groups = _partition([counts[n] for n in keys], k)
    return [
        DomainChunk(spec, keys[s], keys[e], sum(counts[keys[i]] for i in range(s, e + 1)))
        for s, e in groups
    ]


def write_tuples_csv(spec: DomainSpec, fh: TextIO) -> int:
    """Write ``n1,n2,n3,tau,c,X`` rows (17 significant digits); returns row count."""
    a, b, c = spec.triple.as_tuple()
    eta = eta_of(a, b, c)
    tau0 = 2 * math.pi * (a * b * c) ** (-1 / 3)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n1", "n2", "n3", "tau", "c", "X"])
    rows = 0
    for n1, n2, n3 in enumerate_domain(spec):
        X = math.exp(b * math.log(n2) + c * math.log(n3) - a * math.log(n1))
        tau = tau0 * (n1 * n2 * n3) ** (2 / 3)
        w.writerow([n1, n2, n3, f"{tau:.17g}", f"{eta * X:.17g}", f"{X:.17g}"])
        rows += 1
    return rows
