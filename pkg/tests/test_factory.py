"""Code construction and randomized search."""

import itertools
import random

import pytest

from streampir.conv import ConvCode, is_basic, is_mdp, is_stacked_mds
from streampir.errors import SearchExhaustedError
from streampir.factory import (construct_alpha_power, search_code,
                               verify_suitability)
from streampir.gf import lookup_primitive_spec, prime_field
from streampir.matrices import det_int

GF2 = prime_field(2)


def test_alpha_power_exponent_layout():
    code = construct_alpha_power(2, 1, 1, 131)
    spec = code.spec
    alpha = spec.primitive_element
    expected = [spec.pow(alpha, 2 ** e) for e in range(4)]
    assert code.coeffs[0][0] == expected[0:2]     # alpha^(2^0), alpha^(2^1)
    assert code.coeffs[1][0] == expected[2:4]     # alpha^(2^2), alpha^(2^3)


def test_alpha_power_row_step():
    # k = 2 instance (not streaming-shaped, construction only): rows advance
    # the exponent index by one
    code = construct_alpha_power(3, 2, 0, 131)
    spec = code.spec
    alpha = spec.primitive_element
    assert code.coeffs[0][1][0] == spec.pow(alpha, 2 ** 1)
    assert code.coeffs[0][0][2] == spec.pow(alpha, 2 ** 2)
    assert code.coeffs[0][1][2] == spec.pow(alpha, 2 ** 3)


def test_alpha_power_bound_enforced():
    with pytest.raises(ValueError):
        construct_alpha_power(2, 1, 1, 16)       # bound is 2^7 = 128
    with pytest.raises(ValueError):
        construct_alpha_power(2, 1, 1, 129)      # beyond bound but untabulated


def test_alpha_power_micro_suitability():
    code = construct_alpha_power(2, 1, 1, 131)
    report = verify_suitability(code)
    assert report.is_mdp
    assert report.stacked_mds == {0: True, 1: True}
    assert report.is_basic
    assert report.construction_ok
    assert not report.streaming_shape_ok         # (mu+2)k = 3 > n = 2
    assert not report.all_ok


def test_alpha_power_superregular_spot_check():
    """Every full-size minor of the window-L sliding matrix is zero exactly
    when its column choice is structurally forced to zero, nonzero otherwise;
    stacked matrices have no zero minors at all."""
    code = construct_alpha_power(2, 1, 1, 131)
    spec = code.spec
    rows = code.sliding_rows(code.L)           # 3 x 6
    for cols in itertools.combinations(range(6), 3):
        # structural constraint: the (i+1)-th smallest column must lie past
        # block i (k = 1, n = 2)
        constrained = cols[1] >= 2 and cols[2] >= 4
        d = det_int(spec, [[r[c] for c in cols] for r in rows])
        assert (d != 0) == constrained, cols
    stacked = code.stacked_generator(1).rows
    for cols in itertools.combinations(range(2), 2):
        assert det_int(spec, [[r[c] for c in cols] for r in stacked]) != 0


def test_search_finds_example1_code():
    res = search_code(6, 1, 2, lookup_primitive_spec(8), random.Random(7),
                      max_attempts=500)
    assert res.report.all_ok
    assert res.code.n == 6 and res.code.k == 1 and res.code.memory == 2
    assert is_mdp(res.code)
    assert is_stacked_mds(res.code, 1) and is_stacked_mds(res.code, 2)
    assert is_basic(res.code)


def test_search_deterministic_per_seed():
    a = search_code(4, 1, 1, lookup_primitive_spec(8), random.Random(3))
    b = search_code(4, 1, 1, lookup_primitive_spec(8), random.Random(3))
    assert a.code == b.code and a.attempts == b.attempts


def test_no_2_1_1_mdp_code_over_gf2():
    # exhaustive: all 16 coefficient choices
    good = []
    for g0 in itertools.product(range(2), repeat=2):
        for g1 in itertools.product(range(2), repeat=2):
            try:
                code = ConvCode(GF2, 2, 1, [[list(g0)], [list(g1)]])
            except ValueError:
                continue
            report = verify_suitability(code)
            if report.construction_ok:
                good.append(code)
    assert good == []
    with pytest.raises(SearchExhaustedError) as err:
        search_code(2, 1, 1, GF2, random.Random(0), max_attempts=64)
    assert err.value.attempts == 64
    assert sum(err.value.stats.values()) == 64


def test_search_rejects_impossible_stack():
    with pytest.raises(ValueError):
        search_code(3, 1, 3, GF2, random.Random(0))


def test_verify_suitability_records_failures():
    bad = ConvCode(GF2, 2, 1, [[[1, 1]], [[0, 1]]])
    report = verify_suitability(bad)
    assert not report.is_mdp
    assert not report.streaming_shape_ok
    assert report.field_order == 2
    d = report.to_dict()
    assert d["is_mdp"] is False and d["all_ok"] is False
    assert d["checks"]["mdp_minors"] > 0


def test_verify_flags_streaming_shape():
    spec = lookup_primitive_spec(8)
    res = search_code(4, 1, 1, spec, random.Random(3))
    assert res.report.streaming_shape_ok       # (1+2)*1 <= 4
    assert res.report.all_ok
