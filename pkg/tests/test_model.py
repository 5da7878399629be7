import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bsdforms.errors import BasePointMismatch, DimensionMismatch
from bsdforms.matser import MatrixSeries, herm_transpose
from bsdforms.model import (
    BoundaryMap,
    Embedding,
    ModelSignature,
    boundary_defect,
    cayley,
    class_representative,
    evaluate_on_model,
    inverse_cayley,
    model_defect,
    model_substitution,
    residual,
    sample_model,
    sample_shilov,
    symbolic_cayley,
    transport_boundary_map,
    whitney_block,
)
from bsdforms.scalars import Scalar
from bsdforms.series import TSeries, catalog, s, substitute, w, z, zb

S31, S51 = ModelSignature(3, 1), ModelSignature(5, 1)
S42, S62 = ModelSignature(4, 2), ModelSignature(6, 2)
I = Scalar(0, 1)


def linear_31():
    cat = S31.catalog()
    D = 6
    Z = MatrixSeries.variables(cat, D, "z")
    zero = TSeries.zero(cat, D)
    F = MatrixSeries([[Z[0, 0], Z[0, 1], zero, zero]])
    G = MatrixSeries.variables(cat, D, "w")
    return Embedding(S31, S51, F, G)


def test_signature():
    assert S42.N == 2 and S42.ambient_dim == 8
    with pytest.raises(DimensionMismatch):
        ModelSignature(2, 2)


def test_model_substitution_examples():
    cat = catalog(1, 1)
    sub = model_substitution(ModelSignature(2, 1), 4)
    expect = s(cat, 4, 1, 1) + (z(cat, 4, 1, 1) * zb(cat, 4, 1, 1)).scale(I)
    assert sub[("w", 1, 1)] == expect
    im = (sub[("w", 1, 1)] - sub[("wb", 1, 1)]).scale(Scalar(1) / (I * 2))
    assert im == z(cat, 4, 1, 1) * zb(cat, 4, 1, 1)


def test_model_substitution_q2():
    cat = catalog(2, 2)
    sub = model_substitution(S42, 4)
    im = (sub[("w", 1, 2)] - sub[("wb", 2, 1)]).scale(Scalar(1) / (I * 2))
    Z = MatrixSeries.variables(cat, 4, "z")
    expect = Z[0, 0] * zb(cat, 4, 2, 1) + Z[0, 1] * zb(cat, 4, 2, 2)
    assert im == expect


def test_linear_residual_zero():
    rep = residual(linear_31())
    assert rep.is_zero and rep.describe() == "residual: zero to degree 6"


def test_broken_residual():
    E = linear_31()
    F = E.F.map(lambda e: e)
    F.entries[0][0] = F.entries[0][0].scale(2)
    rep = residual(Embedding(S31, S51, F, E.G))
    assert not rep.is_zero
    cat = S31.catalog()
    m = cat.monomial({("z", 1, 1): 1, ("zb", 1, 1): 1})
    assert rep.residual[0, 0].coeff(m) == Scalar(-3)
    assert rep.offender[2] == "z1_1*zb1_1"


def test_cayley_examples():
    sig = ModelSignature(2, 1)
    out = cayley(sig, np.zeros((1, 1)), np.zeros((1, 1)))
    assert np.allclose(out.T, [[-1, 0]])
    out = cayley(sig, np.array([[1j]]), np.array([[1]]))
    assert np.allclose(out.T, [[0, -1j]])
    assert np.allclose(boundary_defect(out), 0)


def test_inverse_cayley_example():
    W, Z = inverse_cayley(ModelSignature(2, 1), np.array([[-1], [0]]))
    assert np.allclose(W, 0) and np.allclose(Z, 0)


@pytest.mark.parametrize("sig", [S31, S42])
def test_symbolic_cayley_on_boundary(sig):
    C = symbolic_cayley(sig, 4)
    d = boundary_defect(C)
    sub = model_substitution(sig, 4)
    assert all(substitute(e, sub).is_zero() for r in d.entries for e in r)


@pytest.mark.parametrize("sig", [S31, S42])
def test_symbolic_round_trip(sig):
    W, Z = inverse_cayley(sig, symbolic_cayley(sig, 4))
    cat = sig.catalog()
    assert W == MatrixSeries.variables(cat, 4, "w")
    assert Z == MatrixSeries.variables(cat, 4, "z")


@pytest.mark.parametrize("sig", [S31, S42])
def test_numeric_round_trip(sig):
    for W, Z in sample_model(sig, 50, seed=3):
        W2, Z2 = inverse_cayley(sig, cayley(sig, W, Z))
        assert np.abs(W2 - W).max() <= 1e-10 and np.abs(Z2 - Z).max() <= 1e-10


def test_class_representative_examples():
    lin = class_representative("linear", S31, S51)
    wh = class_representative("whitney", S31, S51)
    v = np.array([[0.6], [0.0], [0.8j]])
    assert np.allclose(lin(v), [[0.6], [0], [0.8j], [0], [0]])
    out = wh(v)
    assert np.allclose(out.ravel(), [0.6, 0, 0.8j * 0.6, 0, (0.8j) ** 2])
    for x in sample_shilov(S31, 20, seed=1):
        assert abs(np.linalg.norm(wh(x)) - 1) < 1e-12
    v = np.array([[0.6], [0.8], [0]])
    assert np.allclose(wh(v)[:2], lin(v)[:2]) and np.allclose(wh(v)[2:], 0)


def test_whitney_block_q1():
    v = np.array([[1.0], [2.0], [3.0]])
    assert np.allclose(whitney_block(v).ravel(), [1, 2, 3, 6, 9])


@pytest.mark.parametrize("kind,src,tgt", [("linear", S31, S51), ("whitney", S31, S51), ("linear", S42, S62)])
def test_transported_residual_zero(kind, src, tgt):
    E = transport_boundary_map(class_representative(kind, src, tgt), src, tgt, 6)
    assert residual(E).is_zero
    assert E.D == 6


def test_transport_linear_is_identity_map():
    E = transport_boundary_map(class_representative("linear", S31, S51), S31, S51, 6)
    assert E == linear_31()


def test_transport_scaled_map():
    lin = class_representative("linear", S31, S51)
    mv = np.array([[-1], [0], [0], [0], [0]])

    def fn(Zt):
        out = lin(Zt)
        if isinstance(out, MatrixSeries):
            base = MatrixSeries([[TSeries.const(Zt.cat, Zt.D, 1)]] + [[TSeries.zero(Zt.cat, Zt.D)]] * 4)
            return out.scale(2) + base
        return 2 * out + 1 * (mv != 0)

    V = BoundaryMap(S31, S51, fn, "scaled")
    E = transport_boundary_map(V, S31, S51, 4)
    assert not residual(E).is_zero


def test_base_point_mismatch():
    lin = class_representative("linear", S31, S51)
    V = BoundaryMap(S31, S51, lambda Zt: lin(Zt).scale(2) if isinstance(Zt, MatrixSeries) else 2 * lin(Zt))
    with pytest.raises(BasePointMismatch):
        transport_boundary_map(V, S31, S51, 4)


def test_residual_hermitian():
    E = linear_31()
    F = E.F.map(lambda e: e + e * e)
    R = residual(Embedding(S31, S51, F, E.G)).residual
    assert herm_transpose(R) == R


@pytest.mark.parametrize("sig", [S31, S42])
def test_sampling(sig):
    for M in sample_shilov(sig, 20, seed=5):
        assert np.abs(boundary_defect(M)).max() <= 1e-12
    for W, Z in sample_model(sig, 20, seed=5):
        assert np.abs(model_defect(W, Z)).max() <= 1e-12
        assert np.abs(boundary_defect(cayley(sig, W, Z))).max() <= 1e-10
    a = sample_model(sig, 3, seed=9)
    b = sample_model(sig, 3, seed=9)
    assert all(np.array_equal(x[0], y[0]) and np.array_equal(x[1], y[1]) for x, y in zip(a, b))


def test_numeric_symbolic_agreement():
    E = transport_boundary_map(class_representative("whitney", S31, S51), S31, S51, 6)
    R = residual(E).residual
    for W, Z in sample_model(S31, 10, seed=2, scale=0.1):
        assert np.abs(evaluate_on_model(R, S31, W, Z)).max() <= 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_embedding_json_round_trip(seed):
    from bsdforms.scramble import scramble

    E = transport_boundary_map(class_representative("whitney", S31, S51), S31, S51, 4)
    E = scramble(E, 1, seed).embedding
    assert Embedding.loads(E.dumps()) == E
    assert Embedding.loads(E.dumps()).dumps() == E.dumps()
