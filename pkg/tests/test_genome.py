import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trapga._validation import DimensionError
from trapga.genome import (
    as_bitstring,
    complement,
    from_string,
    hamming,
    random_bitstring,
    random_population,
    to_string,
    unitation,
    xor,
    zeros,
)

bits = st.lists(st.integers(0, 1), min_size=1, max_size=64)


def pair(n_max=64):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(*[st.lists(st.integers(0, 1), min_size=n, max_size=n)] * 3)
    )


def test_string_round_trip_keeps_position_order():
    x = from_string("1100101")
    assert x.tolist() == [1, 1, 0, 0, 1, 0, 1]
    assert to_string(x) == "1100101"
    assert to_string(as_bitstring("01")) == "01"


def test_from_string_rejects_other_symbols():
    with pytest.raises(ValueError):
        from_string("01a")


def test_basic_values():
    assert unitation(zeros(30)) == 0
    assert unitation(complement(zeros(30))) == 30
    assert hamming(from_string("1010"), from_string("0110")) == 2


def test_unitation_of_population_is_per_row():
    pop = np.array([[1, 1, 0], [0, 0, 0]])
    assert unitation(pop).tolist() == [2, 0]


def test_length_mismatch_is_dimension_error():
    with pytest.raises(DimensionError):
        hamming(zeros(3), zeros(4))
    with pytest.raises(DimensionError):
        xor(zeros(3), zeros(4))


def test_invalid_values_rejected():
    with pytest.raises(ValueError):
        as_bitstring([0, 2, 1])


@given(pair())
def test_hamming_is_a_metric(abc):
    a, b, c = (np.array(v, dtype=np.uint8) for v in abc)
    assert hamming(a, a) == 0
    assert hamming(a, b) == hamming(b, a)
    assert hamming(a, c) <= hamming(a, b) + hamming(b, c)
    assert hamming(a, b) == unitation(xor(a, b))


@given(pair())
def test_xor_algebra(abc):
    a, b, c = (np.array(v, dtype=np.uint8) for v in abc)
    assert np.array_equal(xor(a, b), xor(b, a))
    assert np.array_equal(xor(xor(a, b), c), xor(a, xor(b, c)))
    assert np.array_equal(xor(xor(a, b), b), a)


@given(bits)
def test_complement_distance(v):
    x = np.array(v, dtype=np.uint8)
    assert hamming(x, complement(x)) == len(v)
    assert unitation(x) + unitation(complement(x)) == len(v)


def test_random_draws_are_seeded():
    a = random_population(5, 20, np.random.default_rng(3))
    b = random_population(5, 20, np.random.default_rng(3))
    assert a.shape == (5, 20) and a.dtype == np.uint8
    assert np.array_equal(a, b)
    x = random_bitstring(4000, np.random.default_rng(0))
    # fair bits: 3 sigma of Binomial(4000, 0.5) is about 95
    assert abs(int(x.sum()) - 2000) < 95
