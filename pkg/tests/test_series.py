from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings

from bsdforms.errors import CatalogMismatch, NotAUnit, OrderViolation
from bsdforms.scalars import Scalar
from bsdforms.series import (
    TSeries,
    catalog,
    coeff_extract,
    conj_involution,
    format_series,
    homogeneous_part,
    invert_unit,
    parse_series,
    s,
    substitute,
    w,
    z,
    zb,
)

from helpers import random_series, rng_of, seeds, small_catalog

C11 = catalog(1, 1)
C12 = catalog(1, 2)
C22 = catalog(2, 2)
I = Scalar(0, 1)


def one(cat, D):
    return TSeries.const(cat, D, 1)


def test_mul_z_zbar():
    p = z(C11, 4, 1, 1) * zb(C11, 4, 1, 1)
    assert len(p) == 1
    assert coeff_extract(p, C11.monomial({("z", 1, 1): 1, ("zb", 1, 1): 1})) == Scalar(1)


def test_weighted_truncation():
    assert (w(C11, 3, 1, 1) * w(C11, 3, 1, 1)).is_zero()
    assert not (w(C11, 4, 1, 1) * w(C11, 4, 1, 1)).is_zero()


def test_difference_of_squares():
    a = one(C11, 4) + z(C11, 4, 1, 1)
    b = one(C11, 4) - z(C11, 4, 1, 1)
    assert a * b == one(C11, 4) - z(C11, 4, 1, 1) ** 2


def test_catalog_mismatch():
    with pytest.raises(CatalogMismatch):
        z(C11, 4, 1, 1) + z(C12, 4, 1, 1)


def test_truncation_of_result_is_min():
    assert (z(C11, 3, 1, 1) + z(C11, 5, 1, 1)).D == 3


def test_conj_examples():
    assert conj_involution(z(C11, 4, 1, 1).scale(I)) == zb(C11, 4, 1, 1).scale(-I)
    assert conj_involution(s(C22, 4, 1, 2)) == s(C22, 4, 2, 1)
    assert conj_involution(s(C22, 4, 1, 1)) == s(C22, 4, 1, 1)


def test_substitute_examples():
    D = 4
    z1, z2 = z(C12, D, 1, 1), z(C12, D, 1, 2)
    out = substitute(z1 ** 2, {("z", 1, 1): z1 + z2})
    assert out == z1 ** 2 + (z1 * z2).scale(2) + z2 ** 2
    img = s(C11, D, 1, 1) + (z(C11, D, 1, 1) * zb(C11, D, 1, 1)).scale(I)
    assert substitute(w(C11, D, 1, 1), {("w", 1, 1): img}) == img
    assert substitute(w(C11, 2, 1, 1) ** 2, {("w", 1, 1): w(C11, 2, 1, 1)}).is_zero()


def test_substitute_order_violation():
    with pytest.raises(OrderViolation):
        substitute(z(C11, 4, 1, 1), {("z", 1, 1): one(C11, 4) + z(C11, 4, 1, 1)})
    shifted = substitute(z(C11, 4, 1, 1), {("z", 1, 1): one(C11, 4) + z(C11, 4, 1, 1)}, allow_affine=True)
    assert shifted == one(C11, 4) + z(C11, 4, 1, 1)


def test_homogeneous_and_coeff():
    a = one(C11, 4) + z(C11, 4, 1, 1) + w(C11, 4, 1, 1)
    assert homogeneous_part(a, 2) == w(C11, 4, 1, 1)
    b = (z(C12, 4, 1, 1) * zb(C12, 4, 1, 2)).scale(3)
    m = C12.monomial({("z", 1, 1): 1, ("zb", 1, 2): 1})
    assert coeff_extract(b, m) == Scalar(3)
    assert coeff_extract(b, C12.unit()) == Scalar(0)


def test_invert_unit_examples():
    D = 3
    x = z(C11, D, 1, 1)
    assert invert_unit(one(C11, D) + x) == one(C11, D) - x + x ** 2 - x ** 3
    assert invert_unit(TSeries.const(C11, D, 2)) == TSeries.const(C11, D, Fr(1, 2))
    with pytest.raises(NotAUnit):
        invert_unit(x)


def test_canonical_text():
    D = 4
    a = z(C12, D, 1, 2) + w(C12, D, 1, 1).scale(Scalar(Fr(1, 2), 1)) + z(C12, D, 1, 1)
    text = format_series(a)
    assert text == format_series(z(C12, D, 1, 1) + z(C12, D, 1, 2) + w(C12, D, 1, 1).scale(Scalar(Fr(1, 2), 1)))
    assert parse_series(text, C12, D) == a


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_ring_laws(seed):
    rng = rng_of(seed)
    cat = small_catalog(rng)
    D = rng.choice([3, 4, 5])
    a, b, c = (random_series(rng, cat, D, with_constant=True) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a - a).is_zero()


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_conj_is_ring_involution(seed):
    rng = rng_of(seed)
    cat = small_catalog(rng)
    a, b = (random_series(rng, cat, 4, with_constant=True) for _ in range(2))
    assert conj_involution(conj_involution(a)) == a
    assert conj_involution(a * b) == conj_involution(a) * conj_involution(b)
    assert conj_involution(a + b) == conj_involution(a) + conj_involution(b)
    for d in range(5):
        assert conj_involution(homogeneous_part(a, d)) == homogeneous_part(conj_involution(a), d)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_invert_unit_multiply_back(seed):
    rng = rng_of(seed)
    cat = small_catalog(rng)
    D = rng.choice([3, 4, 5])
    a = random_series(rng, cat, D) + TSeries.const(cat, D, Scalar(rng.randint(1, 3), rng.randint(-2, 2)))
    assert (a * invert_unit(a) - one(cat, D)).is_zero()


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_homogeneous_partition(seed):
    rng = rng_of(seed)
    cat = small_catalog(rng)
    a = random_series(rng, cat, 5, with_constant=True)
    total = TSeries.zero(cat, 5)
    for d in range(6):
        total = total + homogeneous_part(a, d)
    assert total == a


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_substitute_composition(seed):
    rng = rng_of(seed)
    cat = catalog(1, 2)
    D = 4
    a = random_series(rng, cat, D, kinds=("z",))
    f = {("z", 1, j): random_series(rng, cat, D, terms=2, kinds=("z",)) + z(cat, D, 1, j) for j in (1, 2)}
    g = {("z", 1, j): random_series(rng, cat, D, terms=2, kinds=("z",)) + z(cat, D, 1, j) for j in (1, 2)}
    fg = {k: substitute(v, g) for k, v in f.items()}
    assert substitute(substitute(a, f), g) == substitute(a, fg)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_text_round_trip(seed):
    rng = rng_of(seed)
    cat = small_catalog(rng)
    a = random_series(rng, cat, 5, with_constant=True)
    assert parse_series(format_series(a), cat, 5) == a
