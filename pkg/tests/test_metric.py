import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from conftest import canonical_lists, exact_lists
from polarber.metric import (
    binary_entropy,
    binary_entropy_inv,
    comparison_metrics,
    error_prob,
    m_of_word,
    m_plus_canonical,
    m_value,
)
from polarber.symparam import SymParamList, canonicalize
from polarber.transform import apply_word, plus


def L(*pairs):
    return SymParamList.from_pairs(pairs)


def test_m_value_examples():
    assert m_value(L((1, "0.78"))) == F(39, 50)
    assert m_value(L((1, 0))) == 0
    assert m_value(L(("0.5", 0), ("0.5", "0.5"))) == F(1, 4)
    assert error_prob(F(39, 50)) == F(11, 100)


def test_m_plus_canonical_examples():
    th = F(39, 50)
    assert m_plus_canonical(canonicalize(L((1, th)))) == th
    assert m_plus_canonical(canonicalize(L(("0.5", "0.2"), ("0.5", "0.6")))) == F(1, 2)
    assert m_plus_canonical(canonicalize(L((1, 0)))) == 0
    with pytest.raises(ValueError):
        m_plus_canonical(L(("0.5", "0.6"), ("0.5", "0.2")))


def test_m_of_word_examples():
    th = F(39, 50)
    P = L((1, th))
    m = m_of_word(P, "--------")
    assert m == th**256
    assert error_prob(m) == F(1, 2) - th**256 / 2
    assert m_of_word(P, "+-------") == th**128
    assert m_of_word(L((1, "0.5")), "-") == F(1, 4)
    with pytest.raises(ValueError):
        m_of_word(P, "")


def test_constant_value_along_single_plus_words():
    th = F(39, 50)
    n = 6
    for k in range(n):
        w = "-" * k + "+" + "-" * (n - k - 1)
        assert m_of_word(L((1, th)), w) == th ** (2 ** (n - 1))


def test_comparison_metrics_examples():
    r = comparison_metrics(L((1, 0)))
    assert r.h_cond == 1 and r.z == 1 and r.h_quad == F(1, 2) and r.error_prob == F(1, 2)
    r = comparison_metrics(L((1, 1)))
    assert r.h_cond == 0 and r.z == 0 and r.h_quad == 0 and r.error_prob == 0
    r = comparison_metrics(L((1, "0.78")))
    assert math.isclose(r.z, math.sqrt(1 - 0.78**2), rel_tol=1e-14)
    assert r.error_prob == F(11, 100)
    assert r.in_z_interval() and r.in_h_interval()


def test_binary_entropy_inverse():
    for p in (1e-9, 0.01, 0.11, 0.3, 0.5):
        assert abs(binary_entropy_inv(binary_entropy(p)) - p) < 1e-12


@settings(max_examples=1000, deadline=None)
@given(canonical_lists(max_size=64))
def test_one_pass_plus_matches_enumeration(Pc):
    assert m_plus_canonical(Pc) == m_value(plus(Pc))


@settings(max_examples=1000, deadline=None)
@given(exact_lists())
def test_error_probability_sandwiches(P):
    r = comparison_metrics(P)
    assert r.in_z_interval() and r.in_h_interval()
    m = float(r.m)
    assert 1 - m <= r.h_cond + 1e-12
    assert r.h_cond <= binary_entropy(float(r.error_prob)) + 1e-12


@settings(max_examples=500, deadline=None)
@given(exact_lists())
def test_m_is_variational_distance(P):
    joint = {(u, i): mu * (1 + (1 - 2 * u) * t) / 2 for i, (mu, t) in enumerate(P.entries) for u in (0, 1)}
    dist = sum(abs(joint[u, i] - mu / 2) for i, (mu, _) in enumerate(P.entries) for u in (0, 1))
    assert dist == m_value(P)


@settings(max_examples=200, deadline=None)
@given(exact_lists(max_size=4))
def test_m_of_word_matches_materialized_list(P):
    for w in ("-", "+", "-+", "+-", "++", "-+-"):
        assert m_of_word(P, w) == m_value(apply_word(P, w))
