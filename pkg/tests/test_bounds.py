import csv
import io
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from strategies import theorem_triples

from expsum3.bounds import (
    GRID_HEADER,
    DyadicBox,
    appendix_inequalities,
    balanced_box,
    balanced_box_window,
    f_poly,
    f_positivity,
    rs_bound,
    weighted_rs_bound,
    winner_grid,
    write_grid_csv,
)
from expsum3.errors import ParameterError
from expsum3.params import ExponentTriple, exponent_table

REF = ExponentTriple(0.5, 0.9, 0.6)


def test_rs_bound_unit_box():
    assert rs_bound(DyadicBox(1, 1, 1, 1.0)) == 4.0
    assert rs_bound(DyadicBox.of(REF, 1, 1, 1), eps=0.3) == 4.0
    with pytest.raises(ParameterError):
        rs_bound(DyadicBox(1, 1, 1, 1.0), eps=-0.1)
    with pytest.raises(ParameterError):
        DyadicBox(1, 1, 1, 0.0)
    with pytest.raises(ParameterError):
        DyadicBox.of(REF, 0, 1, 1)


def test_rs_bound_grows_with_eps():
    box = DyadicBox.of(REF, 4, 64, 16)
    assert rs_bound(box, 0.01) > rs_bound(box, 0.0)
    assert box.X == pytest.approx(64**0.9 * 16**0.6 * 4**-0.5)


@pytest.mark.parametrize("T", [1e4, 1e6])
def test_balanced_boxes_make_weighted_bound_large(T):
    for N3 in (1.0, T**0.25, T**0.5):
        box = balanced_box(REF, T, N3)
        assert box.X == pytest.approx(T, rel=1e-9)
        assert box.N1 * box.N2 * box.N3 == pytest.approx(T**1.5, rel=1e-9)
        lead = math.sqrt(box.X * box.N1 * box.N2 * box.N3) / math.sqrt(N3)
        assert lead == pytest.approx(T**1.25 / math.sqrt(N3), rel=1e-9)
        assert lead >= T * (1 - 1e-12)
        assert weighted_rs_bound(box) >= lead


def test_box_window_nonempty():
    win = balanced_box_window(REF, 1e4)
    assert win.nonempty
    assert win.lower_exp == pytest.approx((0.9 - 0.5 - 0.3) / 0.3)
    lo, hi = win.n2_range
    assert lo < hi and hi >= 1e4**1.5


def test_reference_grid_row():
    rep = winner_grid(50)
    row = next(r for r in rep.rows if (r.a, r.c) == (Fraction(1, 2), Fraction(3, 5)))
    assert row.winner == "theorem" and row.in_range13
    assert row.b == Fraction(9, 10)


def test_grid_identities():
    rep = winner_grid(50)
    assert rep.rows and rep.in_range_count > 0
    assert rep.violations == ()
    for r in rep.rows:
        assert r.vdc_e - r.theorem_e2 == Fraction(1, 2)
        assert 0 < r.a < r.c < 2 * r.a and r.c < r.b
        if r.in_range13:
            assert r.theorem_strict
            assert r.c**2 + 2 * r.a**2 < 3 * r.a * r.c
            assert r.theorem_e1 < r.vdc_e


def test_grid_refinement_is_consistent():
    coarse = {(r.a, r.c): r for r in winner_grid(10).rows}
    for n in (20, 50):
        fine = {(r.a, r.c): r for r in winner_grid(n).rows}
        assert set(coarse) <= set(fine)
        for key, row in coarse.items():
            assert fine[key] == row


def test_grid_eps_flag():
    rep = winner_grid(20, eps=0.01)
    base = {(r.a, r.c): r for r in winner_grid(20).rows}
    assert rep.eps == Fraction(0.01)
    for r in rep.rows:
        assert r.ep_e == base[(r.a, r.c)].ep_e + rep.eps


def test_grid_csv():
    rep = winner_grid(12)
    buf = io.StringIO()
    n = write_grid_csv(rep, buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == GRID_HEADER
    assert n == len(rows) - 1 == len(rep.rows)
    assert {r[-1] for r in rows[1:]} <= {"true", "false"}
    assert float(rows[1][0]) == float(rep.rows[0].a)


def test_grid_size_check():
    with pytest.raises(ParameterError):
        winner_grid(1)


def test_f_polynomial():
    assert f_poly(Fraction(1, 2)) == 0
    chk = f_positivity()
    assert chk.holds and chk.lhs > 0


def test_reference_inequalities():
    rep = appendix_inequalities(REF)
    assert rep.ok
    c = rep.by_name("c^2+2a^2<3ac")
    assert (c.lhs, c.rhs) == (pytest.approx(0.86), pytest.approx(0.9))
    c = rep.by_name("42a+34c<55b")
    assert (c.lhs, c.rhs) == (pytest.approx(41.4), pytest.approx(49.5))
    assert rep.by_name("theorem_beats_vdc_and_ep").holds


@given(theorem_triples())
def test_inequality_chain_in_range(t):
    rec = exponent_table(t)
    assume(rec.in_range_13)
    rep = appendix_inequalities(t)
    assert rep.ok, [c for c in rep.checks if not c.holds]
    assert rec.theorem_e1 < rec.vdc_e


@given(theorem_triples())
def test_closed_form_gap_everywhere(t):
    rep = appendix_inequalities(t)
    assert rep.by_name("e1_minus_vdc_closed_form").holds
    assert rep.by_name("c^2_f(a/c)_identity").holds
    assert rep.by_name("e1<ep_equiv").holds and rep.by_name("e2<ep_equiv").holds
