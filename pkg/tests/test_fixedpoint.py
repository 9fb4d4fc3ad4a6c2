import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from srfsc.fixedpoint import FLOAT, Q640, QuantSpec, parse_quant, quantize_channel, sat_add

internal = st.integers(-31, 31)


@pytest.mark.parametrize("llr,expected", [(9.3, 7), (-0.4, 0), (-7.5, -7), (2.5, 3), (-2.5, -3), (0.49, 0)])
def test_quantize_channel_q640(llr, expected):
    assert quantize_channel(llr, Q640) == expected


def test_quantize_channel_fraction_bits():
    q = QuantSpec(6, 4, 1)
    assert quantize_channel(1.3, q) == 3  # 2.6 -> 3 units of 1/2
    assert quantize_channel(100.0, q) == 7


def test_quantize_channel_rejects_nan():
    with pytest.raises(ValueError):
        quantize_channel(math.nan, Q640)


def test_quantize_channel_float_is_identity():
    x = np.array([0.1, -3.7, 12.0])
    assert np.array_equal(quantize_channel(x, FLOAT), x)


@pytest.mark.parametrize("a,b,expected", [(20, 15, 31), (-20, 5, -15), (-31, -31, -31)])
def test_sat_add_examples(a, b, expected):
    assert sat_add(a, b, Q640) == expected


@given(internal, internal)
def test_sat_add_commutative_and_bounded(a, b):
    s = sat_add(a, b, Q640)
    assert s == sat_add(b, a, Q640)
    assert abs(s) <= 31


@given(internal)
def test_sat_add_zero_identity(a):
    assert sat_add(a, 0, Q640) == a


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_quantize_channel_monotone(x, y):
    lo, hi = sorted((x, y))
    assert quantize_channel(lo, Q640) <= quantize_channel(hi, Q640)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_float_mode_is_exact(a, b):
    assert sat_add(a, b, FLOAT) == a + b


def test_ranges_are_symmetric():
    assert Q640.internal_max == 31 and Q640.channel_max == 7
    assert Q640.sat(np.array([-40, 40])).tolist() == [-31, 31]


@pytest.mark.parametrize("args", [(4, 6, 0), (6, 1, 0), (6, 4, 4)])
def test_invalid_quant_spec(args):
    with pytest.raises(ValueError):
        QuantSpec(*args)


def test_parse_quant():
    assert parse_quant("6,4,0") == Q640
    assert parse_quant("float").is_float
    for bad in ("6,4", "a,b,c", "6,4,0,1"):
        with pytest.raises(ValueError):
            parse_quant(bad)
    assert str(Q640) == "Q(6,4,0)"
