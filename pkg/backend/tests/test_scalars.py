import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.errors import UsageError
from app.geometry.scalars import (
    FieldMismatchError,
    FieldTag,
    Scalar,
    conj,
    im,
    modulus,
    mul,
    qabs,
    qconj,
    qinv,
    qmul,
    re,
    random_components,
)

finite = st.integers(min_value=-10**6, max_value=10**6).map(lambda k: k / 1000.0)
quaternions = st.tuples(finite, finite, finite, finite)


def _q(t):
    return Scalar.of(*t)


@given(quaternions, quaternions)
def test_modulus_is_multiplicative(a, b):
    x, y = _q(a), _q(b)
    assert modulus(x * y) == pytest.approx(modulus(x) * modulus(y), rel=1e-12, abs=1e-300)


@given(quaternions, quaternions)
def test_conjugation_reverses_products(a, b):
    x, y = _q(a), _q(b)
    lhs = conj(x * y).components
    rhs = (conj(y) * conj(x)).components
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-9 * max(1.0, modulus(x) * modulus(y)))


@given(quaternions)
def test_real_and_imaginary_parts(a):
    x = _q(a)
    assert re(x) == a[0]
    np.testing.assert_array_equal(im(x).components, [0.0, a[1], a[2], a[3]])
    np.testing.assert_allclose((x * conj(x)).components, [modulus(x) ** 2, 0, 0, 0], atol=1e-9 * (1 + modulus(x) ** 2))


def test_quaternion_units_anticommute():
    i, j, k = Scalar.of(0, 1), Scalar.of(0, 0, 1), Scalar.of(0, 0, 0, 1)
    assert i * j == k
    assert j * i == -k
    assert i * i == Scalar.of(-1.0)


@pytest.mark.parametrize("tag", list(FieldTag))
def test_field_projection_zeroes_foreign_components(tag):
    z = Scalar.of(1.0, 2.0, 3.0, 4.0, field=tag)
    assert np.all(z.components[tag.d:] == 0.0)
    assert np.all(z.components[: tag.d] == [1.0, 2.0, 3.0, 4.0][: tag.d])


def test_complex_multiplication_commutes(rng):
    a = random_components(rng, FieldTag.COMPLEX, 100)
    b = random_components(rng, FieldTag.COMPLEX, 100)
    np.testing.assert_allclose(qmul(a, b), qmul(b, a), atol=1e-14)


def test_mixed_fields_are_rejected():
    with pytest.raises(FieldMismatchError):
        mul(Scalar.of(1.0, field=FieldTag.REAL), Scalar.of(1.0, field=FieldTag.COMPLEX))
    with pytest.raises(UsageError):
        Scalar.of(1.0) + 1.0


def test_inverse(rng):
    a = random_components(rng, FieldTag.QUATERNION, 50)
    one = qmul(a, qinv(a))
    np.testing.assert_allclose(one, np.tile([1.0, 0, 0, 0], (50, 1)), atol=1e-13)
    with pytest.raises(UsageError):
        Scalar.of(0.0).inverse()


@settings(max_examples=50)
@given(st.sampled_from(list(FieldTag)), st.integers(min_value=0, max_value=2**31 - 1))
def test_array_conjugation_is_an_involution(tag, seed):
    a = random_components(np.random.default_rng(seed), tag, 10)
    np.testing.assert_array_equal(qconj(qconj(a)), a)
    np.testing.assert_allclose(qabs(qconj(a)), qabs(a))


def test_field_tag_from_group():
    assert FieldTag.from_group("SU") is FieldTag.COMPLEX
    with pytest.raises(UsageError):
        FieldTag.from_group("gl")
