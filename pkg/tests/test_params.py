import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from reference_values import ETA, I_A, KAPPA
from strategies import theorem_triples

from expsum3.errors import ParameterError
from expsum3.params import (
    BASIC,
    INVALID,
    THEOREM,
    AdmissibleTuple,
    ExponentTriple,
    admissibility_rhs,
    check_admissibility,
    derive_constants,
    exponent_table,
    validate_triple,
)


@pytest.mark.parametrize(
    "triple, grade",
    [((0.5, 0.9, 0.6), THEOREM), ((0.5, 0.8, 0.7), THEOREM), ((0.7, 0.9, 0.6), INVALID), ((0.4, 0.7, 0.7), BASIC)],
)
def test_grades(triple, grade):
    assert validate_triple(*triple).grade == grade


def test_invalid_reason_lists_ordering():
    rep = validate_triple(0.7, 0.9, 0.6)
    assert "a<c violated" in rep.reasons


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite(bad):
    rep = validate_triple(0.5, bad, 0.6)
    assert rep.grade == INVALID and rep.reasons == ("non-finite",)


def test_c_above_2a_is_basic_only():
    rep = validate_triple(0.2, 0.7, 0.5)
    assert rep.grade == BASIC and "c<2a violated" in rep.reasons


def test_normalisation_rejects_drift():
    assert ExponentTriple.from_ac(0.5, 0.6).b == pytest.approx(0.9, abs=1e-15)
    ExponentTriple.from_ac(0.5, 0.6, 0.9 + 5e-13)
    with pytest.raises(ParameterError):
        ExponentTriple.from_ac(0.5, 0.6, 0.9 + 1e-9)


def test_reference_constants(ref_triple):
    dc = derive_constants(ref_triple)
    assert dc.xi == -1
    assert dc.I_a == pytest.approx(I_A, rel=1e-14)
    assert dc.Q_a == pytest.approx(0.27, rel=1e-14)
    assert dc.eta == pytest.approx(ETA, rel=1e-14)
    assert dc.kappa == pytest.approx(KAPPA, rel=1e-14)
    assert dc.kappa == dc.eta / (2 * math.pi)
    assert dc.Lambda == pytest.approx(math.sqrt(2 * math.pi), abs=1e-15)
    assert dc.in_range_13


def test_basic_triple_has_constants_but_no_exponents():
    dc = derive_constants(ExponentTriple(0.4, 0.7, 0.7))
    assert dc.exponents is None and dc.xi == -1


def test_derive_rejects_invalid():
    with pytest.raises(ParameterError):
        derive_constants(ExponentTriple(0.7, 0.9, 0.6))


def test_reference_exponents(ref_triple):
    rec = exponent_table(ref_triple)
    assert rec.theorem_e1 == pytest.approx(0.95, abs=1e-14)
    assert rec.theorem_e2 == pytest.approx(11 / 12, abs=1e-14)
    assert rec.vdc_e == pytest.approx(17 / 12, abs=1e-14)
    assert rec.ep_e == pytest.approx(26 / 21, abs=1e-14)
    assert rec.winner == "theorem" and rec.in_range_13


def test_second_exponent_example():
    rec = exponent_table(ExponentTriple(0.6, 0.9, 0.7))
    assert rec.theorem_e1 == pytest.approx(23 / 24, abs=1e-12)
    assert rec.theorem_e2 == pytest.approx(1.5, abs=1e-12)
    assert rec.vdc_e == pytest.approx(2.0, abs=1e-12)
    assert rec.ep_e == pytest.approx(19 / 21 + 0.625, abs=1e-12)
    assert rec.in_range_13


def test_out_of_range_example():
    rec = exponent_table(ExponentTriple(0.5, 0.8, 0.7))
    assert not rec.in_range_13
    assert (42 * 0.5 + 34 * 0.7) / 55 == pytest.approx(0.814545, abs=1e-6)


def test_exponent_table_needs_theorem_grade():
    with pytest.raises(ParameterError):
        exponent_table(ExponentTriple(0.4, 0.7, 0.7))


def test_admissibility_examples():
    rep = check_admissibility((0.5, -0.9, -0.6))
    assert rep.admissible
    assert rep.rows[1].rhs == pytest.approx(math.pi / 4 * -0.6, abs=1e-15)
    assert rep.rows[0].rhs == 0.0
    rep = check_admissibility((0.6, -0.9, -0.7))
    assert rep.admissible and rep.rows[2].rhs == pytest.approx(0.0, abs=1e-15)


def test_zero_entry_rejected():
    with pytest.raises(ParameterError):
        AdmissibleTuple((0.5, 0.0, -0.6))


def test_tuple_helpers():
    tup = AdmissibleTuple((0.5, -0.9, -0.6))
    assert tup.k == 3 and tup.xi == -1
    assert tup.conjugate().entries == (-0.5, 0.9, 0.6)
    assert tup.conjugate().xi == 1


@given(theorem_triples())
def test_structural_identities(t):
    dc = derive_constants(t)
    assert dc.xi == -1
    assert abs(dc.Lambda - math.sqrt(2 * math.pi)) <= 1e-12
    assert abs(admissibility_rhs(t.signed, 0)) <= 1e-12
    rec = dc.exponents
    assert abs(rec.vdc_e - rec.theorem_e2 - 0.5) <= 1e-12
    assert rec.theorem_e1 > 0.75
    assert all(v > 0 and math.isfinite(v) for v in (rec.theorem_e1, rec.theorem_e2, rec.vdc_e, rec.ep_e))


@given(theorem_triples())
def test_in_range_theorem_wins(t):
    rec = exponent_table(t)
    if rec.in_range_13:
        assert rec.theorem_max < min(rec.vdc_e, rec.ep_e)


@given(theorem_triples())
def test_derive_is_pure(t):
    assert derive_constants(t).to_dict() == derive_constants(t).to_dict()


@given(st.lists(st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3), min_size=2, max_size=6))
def test_xi_bounded(entries):
    tup = AdmissibleTuple(tuple(entries))
    assert -tup.k <= tup.xi <= tup.k
    assert len(check_admissibility(tup).rows) == tup.k
