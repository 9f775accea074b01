from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from conftest import exact_lists
from polarber.metric import m_value
from polarber.symparam import (
    SymParamList,
    abs_op,
    canonicalize,
    is_canonical,
    list_from_csv,
    list_from_json,
    list_to_csv,
    list_to_json,
    read_list,
    require_valid,
    sigma_op,
    validate,
    write_list,
)


def L(*pairs):
    return SymParamList.from_pairs(pairs)


def test_abs_op_examples():
    assert abs_op(L(("1/2", "-0.78"), ("1/2", "0.78"))).entries == L(("1/2", "0.78"), ("1/2", "0.78")).entries
    assert abs_op(L((1, 0))).entries == L((1, 0)).entries
    assert abs_op(L(("0.3", "-0.2"), ("0.7", "0.5"))).entries == L(("0.3", "0.2"), ("0.7", "0.5")).entries


def test_sigma_op_examples():
    assert sigma_op(L(("1/2", "0.78"), ("1/2", "0.78"))).entries == L((1, "0.78")).entries
    assert sigma_op(L((0, "0.9"), (1, "0.3"))).entries == L((1, "0.3")).entries
    got = sigma_op(L(("0.2", "0.5"), ("0.3", "0.5"), ("0.5", 0)))
    assert got.multiset() == L(("0.5", "0.5"), ("0.5", 0)).multiset()


def test_canonicalize_examples():
    assert canonicalize(L(("1/2", "-0.78"), ("1/2", "0.78"))).entries == ((F(1), F(39, 50)),)
    assert canonicalize(L(("0.2", "-0.5"), ("0.3", "0.5"), ("0.5", 0))).entries == (
        (F(1, 2), F(0)),
        (F(1, 2), F(1, 2)),
    )
    one = canonicalize(L((1, "0.3")))
    assert one.entries == ((F(1), F(3, 10)),) and one.canonical


def test_validate_examples():
    assert validate(L((1, "0.78"))).ok
    d = validate(L(("0.5", "0.3")))
    assert not d.ok and d.mass_defect == F(1, 2)
    d = validate(L((1, "1.5")))
    assert not d.ok and d.theta_out_of_range == [0]
    bad = SymParamList(((F(1, 2), F(1, 2)), (F(1, 2), F(1, 4))), canonical=True)
    assert validate(bad).ordering_violations == [1]
    with pytest.raises(ValueError):
        require_valid(L(("0.5", "0.3")))


def test_validate_never_mutates():
    P = L(("0.5", "0.3"))
    before = P.entries
    validate(P)
    assert P.entries == before


def test_mixed_backends_rejected():
    with pytest.raises(TypeError):
        SymParamList(((F(1), 0.5),))


def test_float_sigma_merges_near_duplicates():
    P = SymParamList(((0.5, 0.3), (0.5, 0.3 + 1e-15)))
    Pc = canonicalize(P)
    assert len(Pc) == 1 and abs(Pc.entries[0][0] - 1.0) < 1e-15


def test_json_and_csv_round_trip(tmp_path):
    P = L(("1/3", "-2/7"), ("2/3", "0.78"))
    assert list_from_json(list_to_json(P)).entries == P.entries
    assert list_from_csv(list_to_csv(P)).entries == P.entries
    for name in ("p.json", "p.csv"):
        write_list(P, str(tmp_path / name))
        assert read_list(str(tmp_path / name)).entries == P.entries
    assert '"mu": "1/3"' in list_to_json(P)
    with pytest.raises(ValueError):
        list_from_json('{"rows": []}')
    with pytest.raises(ValueError):
        list_from_csv("a,b\n1,2\n")


@settings(max_examples=1000, deadline=None)
@given(exact_lists())
def test_m_invariant_under_canonicalizing_operators(P):
    m = m_value(P)
    assert m_value(abs_op(P)) == m
    assert m_value(sigma_op(P)) == m
    assert m_value(canonicalize(P)) == m


@settings(max_examples=500, deadline=None)
@given(exact_lists())
def test_canonical_form_properties(P):
    Pc = canonicalize(P)
    assert is_canonical(Pc) and validate(Pc).ok
    assert canonicalize(Pc).multiset() == Pc.multiset()
    assert sum(Pc.mus) == 1
