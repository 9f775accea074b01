import random
from fractions import Fraction as F

import pytest

import heavy
import oracle
from polarber import kernels
from polarber.construct import (
    CodeSpec,
    IndexRecord,
    analyze_all,
    bit_reverse,
    bit_reverse_sets,
    block_error_bounds,
    codespec_from_dict,
    codespec_to_dict,
    grid_bits_for,
    paper_value,
    parse_ber_cell,
    records_from_csv,
    records_to_csv,
    select_frozen,
)
from polarber.metric import m_of_word
from polarber.symparam import SymParamList, canonicalize
from polarber.transform import word_from_bits

BSC = SymParamList.from_pairs([(1, "0.78")])
BACKENDS = sorted(kernels.available())


def random_list(rng, size, den=12):
    w = [rng.randint(1, 9) for _ in range(size)]
    return SymParamList(tuple((F(x, sum(w)), F(rng.randint(-den, den), den)) for x in w))


def test_noiseless_base_has_zero_error():
    for mode in ("exact", "interval"):
        recs = analyze_all(SymParamList.from_pairs([(1, 1)]), 4, mode, Q=4)
        assert len(recs) == 16
        assert all(r.ber_lower == 0 and r.ber_upper == 0 for r in recs)


def test_records_are_in_index_order_and_consistent():
    recs = analyze_all(BSC, 4, "exact")
    assert [r.index for r in recs] == [format(i, "04b") for i in range(16)]
    for r in recs:
        assert r.m_lower == r.m_upper == m_of_word(BSC, word_from_bits(r.index))
        assert r.ber_upper == (1 - r.m_lower) / 2


def test_constant_value_along_single_plus_indices():
    n = 6
    recs = {r.index: r for r in analyze_all(BSC, n, "exact")}
    th = F(39, 50)
    for k in range(n):
        b = "0" * k + "1" + "0" * (n - k - 1)
        assert recs[b].ber_upper == (1 - th ** (2 ** (n - 1))) / 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exact_matches_brute_force_oracle(n):
    rng = random.Random(1000 + n)
    for _ in range(20):
        base = random_list(rng, rng.randint(1, 2 if n == 3 else 3))
        got = [r.m_lower for r in analyze_all(base, n, "exact")]
        assert got == oracle.index_m_values(base, n)


def test_exact_matches_brute_force_oracle_n4():
    base = SymParamList.from_pairs([(1, "1/2")])
    got = [r.m_lower for r in analyze_all(base, 4, "exact")]
    assert got == oracle.index_m_values(base, 4)


@pytest.mark.parametrize("backend", BACKENDS)
def test_backends_and_threads_agree(backend):
    rng = random.Random(7)
    base = random_list(rng, 3)
    ref = analyze_all(base, 5, "exact", backend="python")
    assert analyze_all(base, 5, "exact", backend=backend, threads=3) == ref
    ref = analyze_all(base, 5, "interval", Q=6, backend="python")
    assert analyze_all(base, 5, "interval", Q=6, backend=backend, threads=4) == ref


def test_float_mode_tracks_exact():
    base = SymParamList.from_pairs([("0.3", "0.2"), ("0.7", "-0.6")])
    ex = analyze_all(base, 4, "exact")
    fl = analyze_all(base.to_backend("float"), 4, "exact")
    for a, b in zip(ex, fl):
        assert abs(float(a.m_lower) - b.m_lower) < 1e-12


def test_interval_contains_exact_on_random_lists():
    rng = random.Random(11)
    for _ in range(6):
        base = random_list(rng, rng.randint(1, 4))
        ex = analyze_all(base, 5, "exact")
        for Q in (2, 4, 16):
            iv = analyze_all(base, 5, "interval", Q=Q, grid_bits=256)
            for e, r in zip(ex, iv):
                assert r.m_lower <= e.m_lower <= r.m_upper
                assert r.ber_lower <= r.ber_upper


def test_invalid_configs():
    with pytest.raises(ValueError):
        analyze_all(BSC, 0, "exact")
    with pytest.raises(ValueError):
        analyze_all(BSC, 3, "interval", Q=1)
    with pytest.raises(TypeError):
        analyze_all(BSC.to_backend("float"), 3, "interval", Q=4)
    with pytest.raises(ValueError):
        analyze_all(BSC, 3, "approximate")
    assert grid_bits_for(512) > grid_bits_for(64)


def test_bit_reverse_sets():
    assert bit_reverse("001") == "100"
    assert bit_reverse("0110") == "0110"
    spec = bit_reverse_sets(CodeSpec(3, ("001", "011"), ("000", "010", "100", "101", "110", "111")))
    assert spec.I0_reversed == ("100", "110")
    again = bit_reverse_sets(CodeSpec(3, spec.I0_reversed, spec.I1_reversed))
    assert again.I0_reversed == spec.I0


def test_block_error_bounds():
    recs = analyze_all(BSC, 3, "exact")
    assert block_error_bounds(recs, []) == (0, 0)
    one = recs[1]
    assert block_error_bounds(recs, [one.index]) == (one.ber_lower, one.ber_upper)
    two = block_error_bounds(recs, ["110", "111"])
    assert two[1] == recs[6].ber_upper + recs[7].ber_upper
    assert two[0] == max(recs[6].ber_lower, recs[7].ber_lower)
    with pytest.raises(ValueError):
        block_error_bounds(recs, ["1111"])


def test_select_frozen_policies():
    recs = analyze_all(BSC, 4, "exact")
    spec = select_frozen(recs, k=0)
    assert spec.I0 == () and (spec.block_lower, spec.block_upper) == (0, 0)
    spec = select_frozen(recs, k=16)
    assert spec.I1 == () and spec.block_upper == 1
    spec = select_frozen(recs, k=5)
    best = sorted(recs, key=lambda r: (-r.m_lower, r.index))[:5]
    assert set(spec.I0) == {r.index for r in best}
    assert set(spec.I0) | set(spec.I1) == {r.index for r in recs}
    assert spec.block_upper == sum(r.ber_upper for r in best)
    assert spec.frozen_mask().count(True) == 11
    # Threshold policy: beta = 0 keeps indices with m >= 1/2.
    spec = select_frozen(recs, beta=0.0)
    assert set(spec.I0) == {r.index for r in recs if r.m_lower >= F(1, 2)}
    with pytest.raises(ValueError):
        select_frozen(recs, k=17)
    with pytest.raises(ValueError):
        select_frozen(recs)


def test_select_ties_break_toward_smaller_index():
    recs = analyze_all(SymParamList.from_pairs([(1, 0)]), 3, "exact")
    assert select_frozen(recs, k=3).I0 == ("000", "001", "010")


def test_codespec_json_round_trip():
    spec = select_frozen(analyze_all(BSC, 3, "exact"), k=4)
    back = codespec_from_dict(codespec_to_dict(spec))
    assert back == spec
    bad = codespec_to_dict(spec)
    bad["I1"] = bad["I1"][1:]
    with pytest.raises(ValueError):
        codespec_from_dict(bad)


def test_paper_value_rendering():
    th = F(39, 50)
    assert paper_value(F(1, 2) - th**128 / 2, "up") == "-7.710e-15"
    assert paper_value(F(1, 2) - th**128 / 2, "down") == "-7.711e-15"
    assert paper_value(F(1, 3) / 10, "up") == "3.334e-2"
    assert paper_value(F(1, 3) / 10, "down") == "3.333e-2"
    assert paper_value(F(1, 2), "up") == "-0"
    assert paper_value(F(0), "up") == "0"
    assert parse_ber_cell("-7.710e-15") == F(1, 2) - F(7710, 10**18)
    assert parse_ber_cell("2.341e-1") == F(2341, 10**4)


def test_csv_round_trip_both_styles():
    recs = analyze_all(BSC, 3, "interval", Q=2, grid_bits=64)
    text = records_to_csv(recs)
    assert text.splitlines()[0] == "index_bits,ber_lower,ber_upper,m_lower,m_upper"
    assert records_from_csv(text) == list(recs)
    styled = records_from_csv(records_to_csv(recs, paper_style=True))
    for a, b in zip(recs, styled):
        assert b.ber_lower <= a.ber_lower and a.ber_upper <= b.ber_upper
    with pytest.raises(ValueError):
        records_from_csv("a,b\n")


def test_index_record_constructors():
    r = IndexRecord.exact("01", F(1, 2))
    assert r.ber_lower == r.ber_upper == F(1, 4) and r.mode == "exact"
    r = IndexRecord.interval("01", F(1, 4), F(1, 2))
    assert (r.ber_lower, r.ber_upper) == (F(1, 4), F(3, 8))


@pytest.mark.slow
def test_selection_on_exact_n8_matches_reference_sum():
    recs = heavy.exact_n8()
    ref = heavy.reference_n8()
    for k in (64, 128):
        spec = select_frozen(recs, k=k)
        reference_sum = min(1, sum(parse_ber_cell(ref[b]) for b in spec.I0))
        assert abs(spec.block_upper - reference_sum) < F(1, 10**3) * reference_sum
    assert bit_reverse_sets(CodeSpec(8, spec.I0_reversed, spec.I1_reversed)).I0_reversed == spec.I0
    # The decided set is the tail of the table sorted by descending error.
    ranked = sorted(recs, key=lambda r: (-r.ber_upper, r.index))
    assert set(spec.I0) == {r.index for r in ranked[-128:]}


@pytest.mark.slow
def test_interval_n10_overlaps_every_reference_row():
    # Both tables are outward bounds of the same values, so each pair must overlap.
    ref = heavy.reference_n10()
    recs = heavy.interval_n10()
    for r in recs:
        lo, hi = (parse_ber_cell(c) for c in ref[r.index])
        assert r.ber_lower <= hi and lo <= r.ber_upper, r.index
