import csv
import io
import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from reference_values import AFE_DIRECT, AFE_DIRECT_B50

from expsum3.afe import (
    ContourSpec,
    a_ratio,
    afe_kernels,
    afe_sum,
    afe_validate,
    decay_constant,
    g_derivative,
    i_m_term,
    k_step,
    length_scale,
    log_g_ratio,
    log_smoothing,
    product_tuples,
    psi_and_g,
    write_afe_csv,
)
from expsum3.errors import AccuracyError, ParameterError, ResourceError
from expsum3.special import log_gamma
from expsum3.zeta import zeta_product

TUP = (0.5, -0.9, -0.6)


def rel_err(t, tup=TUP, direct=None, **kw):
    direct = AFE_DIRECT[t] if direct is None else direct
    return abs(afe_sum(tup, t, **kw).value - direct) / abs(direct)


def test_reference_products_agree_with_zeta_eval():
    for t, v in AFE_DIRECT.items():
        assert abs(zeta_product(TUP, t, 1e-12) - v) <= 1e-10


@pytest.mark.parametrize("t", [20.0, 100.0, 1000.0])
def test_kernels_at_origin(t):
    assert log_smoothing(TUP, 0.0, t) == 0
    assert log_g_ratio(TUP, 1, 0.0, t) == 0
    # the second branch shares the first branch's normaliser, so at z = 0 it
    # is the unit-modulus ratio of conjugate Gamma products
    g2 = log_g_ratio(TUP, 2, 0.0, t)
    assert abs(g2.real) <= 1e-12
    expect = sum(log_gamma(0.25 - 0.5j * a * t) - log_gamma(0.25 + 0.5j * a * t) for a in TUP)
    assert abs(np.exp(1j * (g2.imag - expect.imag)) - 1) <= 1e-12


def test_kernel_gaussian_decay():
    t = 100.0
    y = math.sqrt(t) * math.log(t)
    for m in (1, 2):
        ratio = abs(afe_kernels(TUP, m, 1 + 1j * y, t, 10.0)) / abs(afe_kernels(TUP, m, 1.0, t, 10.0))
        assert 0.5 < math.log(ratio) / -(math.log(t) ** 2) < 1.5


def test_kernel_rejects_bad_branch():
    with pytest.raises(ParameterError):
        afe_kernels(TUP, 3, 1.0, 50.0, 10.0)


def test_i_m_step_count_refinement():
    base, err = i_m_term(TUP, 1, 10.0, 50.0, ContourSpec(step_count=1024))
    finer, _ = i_m_term(TUP, 1, 10.0, 50.0, ContourSpec(step_count=2048))
    assert abs(finer - base) < err


def test_i_m_height_refinement():
    base, err = i_m_term(TUP, 1, 10.0, 50.0)
    taller, _ = i_m_term(TUP, 1, 10.0, 50.0, ContourSpec(height_factor=2.0))
    assert abs(taller - base) < 2 * err


def test_strict_contour_refuses_coarse_grid():
    with pytest.raises(AccuracyError):
        i_m_term(TUP, 1, 10.0, 50.0, ContourSpec(step_count=64, strict=True))
    # the non-strict default refines instead
    v, _ = i_m_term(TUP, 1, 10.0, 50.0, ContourSpec(step_count=64))
    assert abs(v - i_m_term(TUP, 1, 10.0, 50.0)[0]) < 1e-6


@pytest.mark.parametrize("t", [100.0, 400.0])
def test_step_behaviour(t):
    L = length_scale(TUP, t)
    for m in (1, 2):
        assert abs(abs(i_m_term(TUP, m, L / 4, t)[0]) - 1) < 1e-6
        assert abs(i_m_term(TUP, m, 4 * L, t)[0]) < 1e-6
        assert abs(abs(i_m_term(TUP, m, L, t)[0]) - 0.5) < 0.05


def test_dyadic_blocks_decay_past_cutoff():
    t = 60.0
    L = length_scale(TUP, t)
    floor = i_m_term(TUP, 1, L, t)[1]
    sums = []
    for j in range(3):
        lo, hi = math.ceil(L * 2**j), math.floor(L * 2 ** (j + 1))
        sums.append(sum(P**-0.5 * sum(abs(i_m_term(TUP, m, P, t)[0]) for m in (1, 2)) for P in range(lo, hi + 1)))
    for prev, nxt in zip(sums, sums[1:]):
        if nxt > 100 * floor * L:
            assert nxt / prev < 0.1


def test_contour_spec_validation():
    for kw in ({"real_part": 0}, {"real_part": 2.5}, {"height_factor": 0.5}, {"step_count": 10}):
        with pytest.raises(ParameterError):
            ContourSpec(**kw)


def test_i_m_preconditions():
    with pytest.raises(ParameterError):
        i_m_term(TUP, 1, 10.0, 1.0)
    with pytest.raises(ParameterError):
        i_m_term(TUP, 1, 0.5, 50.0)


@given(st.floats(0.01, 1e5))
def test_psi_unit_modulus(t):
    assert abs(abs(psi_and_g(TUP, t).psi) - 1) <= 1e-14


def test_g_closed_form_and_derivative():
    t = 100.0
    expect = sum(a * t * (math.log(abs(a) * t / 2) - 1) for a in TUP)
    assert psi_and_g(TUP, t).g == pytest.approx(expect, rel=1e-15)
    h = 1e-4
    fd = (psi_and_g(TUP, t + h).g - psi_and_g(TUP, t - h).g) / (2 * h)
    assert abs(fd - g_derivative(TUP, t)) <= 1e-6


def test_k_step_examples():
    t = 400.0
    L = length_scale(TUP, t)
    assert k_step(TUP, L / 2, t) == "one"
    assert k_step(TUP, 2 * L, t) == "zero"
    assert k_step(TUP, L, t) == "transition"
    assert a_ratio(TUP, L, t) == pytest.approx(1.0, abs=1e-15)
    assert L == pytest.approx(math.sqrt(0.27) * (t / (2 * math.pi)) ** 1.5, rel=1e-14)


def test_decay_constant_is_reported():
    assert decay_constant(TUP) == pytest.approx(7 / 8 / (8 + (7 / 9) ** 2), rel=1e-14)


@pytest.mark.parametrize("pmax", [1, 7, 30, 100.5])
def test_product_tuples_brute_force(pmax):
    got = {tuple(r) for r in product_tuples(3, pmax).tolist()}
    n = int(pmax)
    brute = {p for p in product(range(1, n + 1), repeat=3) if p[0] * p[1] * p[2] <= pmax}
    assert got == brute
    assert len(product_tuples(3, pmax)) == len(brute)


def test_afe_reference_accuracy():
    errs = [rel_err(t) for t in sorted(AFE_DIRECT)]
    assert errs[-1] < 1e-2
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0]


def test_afe_second_tuple():
    assert rel_err(50.0, (0.6, -0.9, -0.7), AFE_DIRECT_B50) < 5e-2


def test_afe_conjugate_tuple():
    t = 60.0
    a = afe_sum(TUP, t)
    b = afe_sum(tuple(-e for e in TUP), t)
    assert abs(b.value - a.value.conjugate()) <= max(a.est_error, 1e-12)


def test_margin_tail():
    t = 120.0
    direct = AFE_DIRECT[t]
    by_margin = {m: afe_sum(TUP, t, margin=m).value for m in (1.0, 2.0, 3.0, 4.0)}
    # past margin 3 the omitted terms no longer matter
    assert abs(by_margin[3.0] - by_margin[4.0]) < 0.01 * abs(by_margin[2.0] - direct)
    # at margin 2 the remaining error is the omitted tail itself
    tail = abs(by_margin[2.0] - by_margin[3.0])
    assert tail == pytest.approx(abs(by_margin[2.0] - direct), rel=0.01)
    # margin 1 stops inside the transition band and misses order-one mass
    assert abs(by_margin[1.0] - direct) > 0.1


def test_afe_result_metadata():
    r = afe_sum(TUP, 30.0)
    assert r.terms_used >= 1
    assert r.cutoff == pytest.approx(2 * length_scale(TUP, 30.0))
    assert r.distinct_products == math.floor(r.cutoff)
    assert r.truncation_height >= math.sqrt(30) * math.log(30)


def test_afe_preconditions():
    with pytest.raises(ParameterError):
        afe_sum(TUP, 5.0)
    with pytest.raises(ParameterError):
        afe_sum(TUP, 30.0, margin=0.5)
    with pytest.raises(ResourceError):
        afe_sum(TUP, 240.0, term_cap=100)


def test_validate_table_and_csv():
    table = afe_validate(TUP, [60.0, 30.0])
    assert [r.t for r in table.rows] == [30.0, 60.0]
    assert table.monotone
    single = afe_validate(TUP, [45.0])
    assert len(single.rows) == 1 and single.monotone
    buf = io.StringIO()
    write_afe_csv(table, buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["t", "direct_re", "direct_im", "afe_re", "afe_im", "abs_err", "rel_err"]
    assert len(rows) == 3
    assert complex(float(rows[1][1]), float(rows[1][2])) == table.rows[0].direct


def test_validate_rejects_bad_grids():
    with pytest.raises(ParameterError):
        afe_validate(TUP, [])
    with pytest.raises(ParameterError):
        afe_validate(TUP, [5.0, 30.0])


def test_vectorised_kernels():
    z = 1 + 1j * np.linspace(-20, 20, 9)
    vec = afe_kernels(TUP, 1, z, 50.0, 3.0)
    assert vec.shape == z.shape
    assert vec[4] == afe_kernels(TUP, 1, z[4], 50.0, 3.0)
