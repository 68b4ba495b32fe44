import numpy as np
import pytest
from hypothesis import given, strategies as st

from contraction_curvature.vectors import BlockVector, SeqVector, inner, is_finite, is_zero, norm, norm_sq

coeffs = st.dictionaries(st.integers(-10, 10),
                         st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                         max_size=6)


def test_seqvector_basics():
    x = SeqVector.from_dict({3: 2.0, 5: 1j})
    assert x.start == 3 and x.stop == 6
    assert x.support() == [3, 5]
    assert x.coeff(4) == 0 and x.coeff(5) == 1j
    np.testing.assert_array_equal(x.window(2, 6), [0, 2, 0, 1j, 0])
    assert norm_sq(x) == pytest.approx(5.0)


def test_zero_vector():
    z = SeqVector.zero()
    assert z.is_zero() and is_zero(z) and z.support() == []
    assert (z + SeqVector.basis(4)).to_dict() == {4: 1}


def test_scalar_from_numpy_multiplies_blocks():
    b = BlockVector((np.ones(2), SeqVector.basis(1)))
    out = np.float64(2.0) * b
    np.testing.assert_array_equal(out[0], [2, 2])
    assert out[1].to_dict() == {1: 2}


def test_inner_is_linear_in_first_argument():
    x, y = SeqVector.basis(1, 1.0), SeqVector.basis(1, 1.0)
    assert inner(1j * x, y) == 1j
    assert inner(x, 1j * y) == -1j


def test_inner_rejects_mixed_types():
    with pytest.raises(TypeError):
        inner(np.ones(1), SeqVector.basis(1))


def test_is_finite():
    assert is_finite(BlockVector((np.ones(2), SeqVector.basis(0))))
    assert not is_finite(np.array([np.nan]))


@given(coeffs, coeffs)
def test_addition_matches_dict_addition(a, b):
    s = (SeqVector.from_dict(a) + SeqVector.from_dict(b)).to_dict()
    keys = set(a) | set(b)
    expected = {k: a.get(k, 0) + b.get(k, 0) for k in keys}
    assert {k: v for k, v in expected.items() if v != 0} == pytest.approx(s)


@given(coeffs, coeffs)
def test_cauchy_schwarz(a, b):
    x, y = SeqVector.from_dict(a), SeqVector.from_dict(b)
    assert abs(inner(x, y)) <= norm(x) * norm(y) * (1 + 1e-12) + 1e-300


@given(coeffs)
def test_trim_preserves_vector(a):
    x = SeqVector.from_dict(a)
    assert x.trim().to_dict() == x.to_dict()
