import csv
import io
import math
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_domain
from reference_values import GEOMETRY

from expsum3.domain import (
    CN_WINDOW,
    PAPER_DT,
    DomainSpec,
    chunk_domain,
    domain_count,
    domain_runs,
    enumerate_domain,
    n1_extent,
    normalize_convention,
    tuple_geometry,
    write_tuples_csv,
)
from expsum3.errors import ParameterError, ResourceError
from expsum3.params import ExponentTriple, eta_of

REF = ExponentTriple(0.5, 0.9, 0.6)


@pytest.mark.parametrize("n", sorted(GEOMETRY))
def test_geometry_matches_reference(n):
    g = tuple_geometry(REF, n)
    tau, c, X = GEOMETRY[n]
    assert g.tau == pytest.approx(tau, rel=1e-13)
    assert g.c == pytest.approx(c, rel=1e-13)
    assert g.X == pytest.approx(X, rel=1e-13)


def test_geometry_window_membership_examples():
    g = tuple_geometry(REF, (2, 3, 2))
    assert g.tau > g.c
    g = tuple_geometry(REF, (1, 700, 1))
    assert g.tau < g.c < 769
    assert (1, 700, 1) in set(enumerate_domain(DomainSpec(REF, 769, CN_WINDOW)))
    assert (1, 700, 1) not in set(enumerate_domain(DomainSpec(REF, 767, CN_WINDOW)))


@pytest.mark.parametrize(
    "T, conv",
    [(100, PAPER_DT), (300, PAPER_DT), (57.5, PAPER_DT), (2, CN_WINDOW), (500, CN_WINDOW), (1500, CN_WINDOW)],
)
def test_matches_brute_force(T, conv):
    got = list(enumerate_domain(DomainSpec(REF, T, conv)))
    assert got == sorted(got)
    assert [tuple(t) for t in got] == brute_domain(0.5, 0.9, 0.6, T, conv)
    assert domain_count(DomainSpec(REF, T, conv)) == len(got)


def test_other_triple_matches_brute_force():
    t = ExponentTriple(0.6, 0.9, 0.7)
    got = [tuple(v) for v in enumerate_domain(DomainSpec(t, 200, PAPER_DT))]
    assert got == brute_domain(0.6, 0.9, 0.7, 200, PAPER_DT)


def test_tiny_windows_are_empty():
    assert list(enumerate_domain(DomainSpec(REF, 2, CN_WINDOW))) == []
    assert list(enumerate_domain(DomainSpec(REF, 500, CN_WINDOW))) == []


def test_window_members_satisfy_inequalities():
    T = 3000
    for n in enumerate_domain(DomainSpec(REF, T, CN_WINDOW)):
        g = tuple_geometry(REF, n)
        assert g.tau <= g.c * (1 + 1e-12) and g.c <= T * (1 + 1e-12)


def test_window_is_rescaled_product_domain():
    """cn_window(T) membership equals the D_T-style inequalities with X <= T/eta and tau <= eta X."""
    eta = eta_of(0.5, 0.9, 0.6)
    T = 2000
    window = set(enumerate_domain(DomainSpec(REF, T, CN_WINDOW)))
    assert window
    for n in enumerate_domain(DomainSpec(REF, T / eta, PAPER_DT)):
        g = tuple_geometry(REF, n)
        assert (n in window) == (g.tau <= eta * g.X)
    for n in window:
        assert tuple_geometry(REF, n).X <= T / eta * (1 + 1e-12)


@given(st.floats(1, 250), st.floats(1, 250))
def test_monotone_in_T(t1, t2):
    lo, hi = sorted((t1, t2))
    for conv in (PAPER_DT, CN_WINDOW):
        small = set(enumerate_domain(DomainSpec(REF, lo, conv)))
        big = set(enumerate_domain(DomainSpec(REF, hi, conv)))
        assert small <= big


def test_inner_layouts_agree():
    spec = DomainSpec(REF, 400)
    a = list(domain_runs(spec, inner="n3"))
    b = sorted(domain_runs(spec, inner="n2"))
    assert a == b
    assert domain_runs(spec, inner="n2").per_n1_counts() == Counter(t.n1 for t in a)


def test_single_chunk_is_identity():
    spec = DomainSpec(REF, 300)
    (ch,) = chunk_domain(spec, 1)
    assert list(ch) == list(enumerate_domain(spec))


@pytest.mark.parametrize("T, conv, k", [(1500, CN_WINDOW, 4), (5000, CN_WINDOW, 4), (300, PAPER_DT, 7)])
def test_chunks_partition_the_domain(T, conv, k):
    spec = DomainSpec(REF, T, conv)
    chunks = chunk_domain(spec, k)
    assert 1 <= len(chunks) <= k
    joined = [t for ch in chunks for t in ch]
    assert joined == list(enumerate_domain(spec))
    for left, right in zip(chunks, chunks[1:]):
        assert left.n1_hi < right.n1_lo


@pytest.mark.parametrize("T, conv, k", [(20000, PAPER_DT, 8), (20000, CN_WINDOW, 4), (20000, PAPER_DT, 3)])
def test_chunk_load_is_bottlenecked_only_by_one_slab(T, conv, k):
    spec = DomainSpec(REF, T, conv)
    chunks = chunk_domain(spec, k)
    counts = [ch.est_count for ch in chunks]
    heaviest = max(domain_runs(spec, inner="n2").per_n1_counts().values())
    assert sum(counts) == domain_count(spec)
    assert max(counts) <= max(2 * sum(counts) / len(counts), heaviest)
    assert [ch.runs().count for ch in chunks] == counts


def test_chunks_within_factor_two_when_attainable():
    spec = DomainSpec(REF, 20000)
    counts = [ch.est_count for ch in chunk_domain(spec, 2)]
    assert len(counts) == 2
    assert max(counts) <= 2 * sum(counts) / len(counts)


def test_huge_chunk_count_degrades_gracefully():
    spec = DomainSpec(REF, 60)
    chunks = chunk_domain(spec, 10**6)
    lo, hi = n1_extent(spec)
    assert len(chunks) <= hi - lo + 1
    assert all(ch.est_count > 0 for ch in chunks)
    assert sum(len(list(ch)) for ch in chunks) == domain_count(spec)


def test_empty_domain_chunks():
    chunks = chunk_domain(DomainSpec(REF, 2, CN_WINDOW), 4)
    assert len(chunks) == 1 and list(chunks[0]) == []


def test_cap_raises_resource_error():
    with pytest.raises(ResourceError) as exc:
        domain_count(DomainSpec(REF, 10**5, cap=1000))
    assert exc.value.cap == 1000


@pytest.mark.parametrize("kw", [{"T": 0.5}, {"T": math.nan}, {"T": 10, "convention": "other"}, {"T": 10, "cap": 0}])
def test_spec_validation(kw):
    with pytest.raises(ParameterError):
        DomainSpec(REF, **kw)


def test_convention_aliases():
    assert normalize_convention("paper") == PAPER_DT
    assert normalize_convention("window") == CN_WINDOW
    with pytest.raises(ParameterError):
        normalize_convention("both")


def test_geometry_rejects_zero_entries():
    with pytest.raises(ParameterError):
        tuple_geometry(REF, (0, 1, 1))


def test_csv_export():
    spec = DomainSpec(REF, 100)
    buf = io.StringIO()
    rows = write_tuples_csv(spec, buf)
    lines = list(csv.reader(io.StringIO(buf.getvalue())))
    assert lines[0] == ["n1", "n2", "n3", "tau", "c", "X"]
    assert rows == len(lines) - 1 == 789
    n = tuple(int(v) for v in lines[1][:3])
    g = tuple_geometry(REF, n)
    assert float(lines[1][3]) == g.tau and float(lines[1][5]) == g.X
    assert len(lines[1][4].replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17
