from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings

from bsdforms import cmat
from bsdforms.errors import DimensionMismatch, SingularConstantTerm
from bsdforms.matser import (
    MatrixSeries,
    flatten,
    herm_transpose,
    mat_inverse,
    mat_mul,
    odot,
    pseudo_product,
    tensor_action,
)
from bsdforms.scalars import Scalar
from bsdforms.series import TSeries, catalog, w, z, zb

from helpers import random_matrix_series, random_scalar, random_series, rng_of, seeds

I = Scalar(0, 1)
C12 = catalog(1, 2)
C22 = catalog(2, 2)


def test_herm_transpose_example():
    m = MatrixSeries([[z(C12, 4, 1, 1).scale(I)]])
    assert herm_transpose(m) == MatrixSeries([[zb(C12, 4, 1, 1).scale(-I)]])


def test_identity_times_Z():
    Z = MatrixSeries.variables(C22, 4, "z")
    assert mat_mul(MatrixSeries.identity(C22, 4, 2), Z) == Z


def test_inner_dimension_mismatch():
    Z = MatrixSeries.variables(C22, 4, "z")
    with pytest.raises(DimensionMismatch):
        mat_mul(Z, MatrixSeries.identity(C22, 4, 3))


def test_pseudo_product_example():
    Z = MatrixSeries.variables(C12, 4, "z")
    expect = z(C12, 4, 1, 1) * zb(C12, 4, 1, 1) + z(C12, 4, 1, 2) * zb(C12, 4, 1, 2)
    assert pseudo_product(Z, Z) == MatrixSeries([[expect]])
    zero = MatrixSeries.zeros(C12, 4, 1, 2)
    assert pseudo_product(zero, Z).is_zero()


def test_tensor_action_examples():
    Z = MatrixSeries.variables(C12, 4, "z")
    assert tensor_action(cmat.identity(2), Z) == Z
    assert tensor_action(cmat.identity(2, scale=2), Z) == Z.scale(2)
    swap = cmat.from_values([[0, 1], [1, 0]])
    out = tensor_action(swap, Z)
    assert out[0, 0] == Z[0, 1] and out[0, 1] == Z[0, 0]


def test_flattening_is_row_major():
    Z = MatrixSeries.variables(C22, 4, "z")
    assert [str(e) for e in flatten(Z)] == [str(Z[0, 0]), str(Z[0, 1]), str(Z[1, 0]), str(Z[1, 1])]


def test_odot_examples():
    cat = catalog(1, 2)
    D = 4
    col = MatrixSeries([[z(cat, D, 1, 1)], [z(cat, D, 1, 2)], [w(cat, D, 1, 1)]])
    last = MatrixSeries([[w(cat, D, 1, 1)]])
    out = odot(last, col)
    assert [out[k, 0] for k in range(3)] == [w(cat, D, 1, 1) * col[k, 0] for k in range(3)]
    assert odot(MatrixSeries.zeros(cat, D, 1, 1), col).is_zero()
    Zt = MatrixSeries([[z(cat, D, 1, 1)], [z(cat, D, 1, 2)], [z(cat, D, 1, 1) + z(cat, D, 1, 2)]])
    prod = odot(Zt.block(2, 3, 0, 1), Zt)
    for k in range(3):
        assert prod[k, 0] == prod[k, 0].homogeneous_part(2)


def test_mat_inverse_examples():
    D = 4
    cat = catalog(1, 1)
    W = MatrixSeries([[w(cat, D, 1, 1)]])
    one = MatrixSeries.identity(cat, D, 1)
    assert mat_inverse(one + W) == one - W + mat_mul(W, W)
    assert mat_inverse(MatrixSeries.identity(C22, D, 2, scale=2)) == MatrixSeries.identity(C22, D, 2, scale=Fr(1, 2))
    with pytest.raises(SingularConstantTerm):
        mat_inverse(MatrixSeries.variables(C22, D, "w"))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_herm_transpose_of_product(seed):
    rng = rng_of(seed)
    A = random_matrix_series(rng, C22, 4, 2, 3)
    B = random_matrix_series(rng, C22, 4, 3, 2)
    assert herm_transpose(mat_mul(A, B)) == mat_mul(herm_transpose(B), herm_transpose(A))
    assert herm_transpose(herm_transpose(A)) == A


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_pseudo_product_hermitian_symmetry(seed):
    rng = rng_of(seed)
    Z = random_matrix_series(rng, C22, 4, 2, 2)
    V = random_matrix_series(rng, C22, 4, 2, 2)
    assert pseudo_product(Z, V) == herm_transpose(pseudo_product(V, Z))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_tensor_action_linear(seed):
    rng = rng_of(seed)
    V = [[random_scalar(rng) for _ in range(4)] for _ in range(4)]
    Z1 = random_matrix_series(rng, C22, 4, 2, 2)
    Z2 = random_matrix_series(rng, C22, 4, 2, 2)
    a, b = random_scalar(rng), random_scalar(rng)
    lhs = tensor_action(V, Z1.scale(a) + Z2.scale(b))
    assert lhs == tensor_action(V, Z1).scale(a) + tensor_action(V, Z2).scale(b)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_mat_inverse_multiply_back(seed):
    rng = rng_of(seed)
    D = rng.choice([3, 4])
    n = rng.choice([1, 2])
    A = random_matrix_series(rng, C22, D, n, n, terms=3)
    A = A + MatrixSeries.identity(C22, D, n)
    one = MatrixSeries.identity(C22, D, n)
    inv = mat_inverse(A)
    assert (mat_mul(inv, A) - one).is_zero()
    assert (mat_mul(A, inv) - one).is_zero()
