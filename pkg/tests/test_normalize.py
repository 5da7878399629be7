import json
from fractions import Fraction as Fr

import pytest

from bsdforms import cmat
from bsdforms.autgroup import apply, isotropy, moebius_auto, tensor_auto, translation, unitary_frame
from bsdforms.errors import (
    FactorizationFailed,
    GramRelationViolated,
    HypothesisViolated,
    NotAnEmbedding,
    StageError,
)
from bsdforms.matser import MatrixSeries
from bsdforms.model import Embedding, ModelSignature, residual
from bsdforms.normalize import (
    STAGES,
    Certificate,
    Step,
    apply_step,
    check_huang25,
    check_prop12,
    check_prop13,
    classify,
    g_reduce,
    hamada_factor,
    huang25,
    huangji_reduce,
    linear_frame,
    linear_normal_form,
    prop12,
    prop13,
    psi_identity,
    rank_detect,
    run_steps,
    settle,
    whitney_normal_form,
)
from bsdforms.scalars import Scalar
from bsdforms.scramble import recentre, representative, scramble, scrambled_instance, rational_unitary
from bsdforms.series import TSeries

import normal_targets as nt

S31, S51 = ModelSignature(3, 1), ModelSignature(5, 1)
S42, S62 = ModelSignature(4, 2), ModelSignature(6, 2)


@pytest.fixture(scope="module")
def lin():
    return representative("linear", S31, S51)


@pytest.fixture(scope="module")
def wh():
    return representative("whitney", S31, S51)


@pytest.fixture(scope="module")
def wnf():
    return whitney_normal_form(S31, S51)


def test_prop12_idempotent(lin):
    E, steps = prop12(lin)
    assert E == lin and steps == []


def test_prop12_recovers_lili1(lin):
    E = apply(tensor_auto([[Scalar(4)]], S31), lin, "source")
    assert not check_prop12(E)
    E2, steps = prop12(E)
    assert check_prop12(E2) and nt.lili1(E2) and E2.exact and len(steps) == 1
    assert run_steps(E, steps) == E2


def test_prop12_degenerate():
    cat = S31.catalog()
    E = Embedding(S31, S51, MatrixSeries.zeros(cat, 6, 1, 4), MatrixSeries.zeros(cat, 6, 1, 1))
    assert residual(E).is_zero
    with pytest.raises(NotAnEmbedding):
        prop12(E)


def test_prop13_identity(lin):
    E, steps = prop13(lin)
    assert E == lin and steps == []


def test_prop13_recovers_frame(lin):
    import random

    U = rational_unitary(4, random.Random(5))
    E = apply(unitary_frame(U, S51), lin, "target")
    assert not check_prop13(E)
    E2, steps = prop13(E)
    assert check_prop13(E2) and nt.eq78(E2)
    assert E2 == lin


def test_prop13_row_dependent_q2():
    cat = S42.catalog()
    Z = MatrixSeries.variables(cat, 6, "z")
    zero = TSeries.zero(cat, 6)
    F = MatrixSeries([[Z[0, 0], Z[0, 1], zero, zero], [Z[1, 1], Z[1, 0], zero, zero]])
    E = Embedding(S42, S62, F, MatrixSeries.variables(cat, 6, "w"))
    with pytest.raises(GramRelationViolated):
        linear_frame(E)


def test_huang25_idempotent(lin):
    E, steps, data = huang25(lin)
    assert E == lin and steps == []


def test_huang25_after_translation(lin):
    t = translation([[Scalar(Fr(1, 2)), Scalar(0, 1)]], [[Scalar(Fr(1, 3), Fr(5, 4))]], S31)
    E, _ = recentre(apply_step(lin, Step("source", t)))
    for stage in (prop12, prop13):
        E, _ = stage(E)
    assert nt.lili1(E) and nt.eq78(E)
    E2, steps, data = huang25(E)
    assert nt.eq99te(E2) and nt.eq99se(E2) and check_huang25(E2)
    assert residual(E2).is_zero


def test_huang25_removes_w2(lin):
    E = apply(isotropy([Scalar(0)] * 4, Scalar(Fr(2, 3)), S51), lin, "target")
    cat = S31.catalog()
    assert nt.coeff(E.G[0, 0], cat, ("w", 1, 1), ("w", 1, 1)) == Scalar(Fr(2, 3))
    E2, steps, data = huang25(E)
    assert data.g_ww == Scalar(Fr(2, 3))
    assert nt.coeff(E2.G[0, 0], cat, ("w", 1, 1), ("w", 1, 1)) == Scalar(0)
    assert E2 == lin


def test_rank_detect_examples(lin, wh):
    assert rank_detect(lin).rank == 0
    E = wh
    for stage in (prop12, prop13):
        E, _ = stage(E)
    E, _, _ = huang25(E)
    rep = rank_detect(E)
    assert rep.rank == 1 and rep.sigma == [1]


def test_rank_report_records_constant(wnf):
    rep = rank_detect(wnf)
    assert rep.constant == Scalar(0, Fr(1, 2)) * rep.mu
    cat = S31.catalog()
    m = nt.coeff(wnf.F[0, 0], cat, ("z", 1, 1), ("w", 1, 1))
    assert m == rep.constant


def test_hamada_linear(lin):
    assert hamada_factor(lin, rank_detect(lin)).form == "ooo2"
    assert nt.ooo2(lin)


def test_hamada_whitney(wnf):
    rep = hamada_factor(wnf, rank_detect(wnf))
    assert rep.form == "ooo1" and len(rep.phi_tilde) == 2
    assert nt.ooo1(wnf)


def test_hamada_corrupted(wnf):
    cat = S31.catalog()
    F = wnf.F.map(lambda e: e)
    m = cat.monomial({("z", 1, 2): 1, ("w", 1, 1): 1})
    F.entries[0][2] = F.entries[0][2] + TSeries(cat, 6, {m: Scalar(1)})
    E = Embedding(S31, S51, F, wnf.G)
    with pytest.raises(FactorizationFailed, match="z1_2\\*w1_1"):
        hamada_factor(E, rank_detect(wnf))


def test_g_reduce_linear(lin):
    assert g_reduce(lin) == (lin, [])


def test_g_reduce_whitney(wh):
    E = wh
    for stage in (prop12, prop13):
        E, _ = stage(E)
    E, _, _ = huang25(E)
    E2, steps = g_reduce(E)
    assert nt.vvvq(E2)


def test_g_reduce_scrambled_linear():
    s = scrambled_instance("linear", S31, S51, depth=2, seed=3)
    E = settle(s.embedding)
    for stage in (prop12, prop13):
        E, _ = stage(E)
    E, _, _ = huang25(E)
    E2, _ = g_reduce(E)
    assert E2.isclose(linear_normal_form(S31, S51))


def test_huangji_identity(wnf):
    assert huangji_reduce(wnf, rank_detect(wnf)) == (wnf, [])


def test_huangji_moebius_exact(wh):
    phi = moebius_auto(Scalar(Fr(3, 5)), S31, 6, Scalar(Fr(4, 5)))
    E, _ = recentre(apply_step(wh, Step("source", phi)))
    assert E.exact
    cert = classify(E)
    assert cert.verdict == "Whitney(sigma=[1])"
    assert cert.normal_form.isclose(whitney_normal_form(S31, S51))
    assert cert.check_replay(E)


@pytest.mark.parametrize("a,exact", [(Fr(1, 2), False), (Fr(3, 5), True)])
def test_psi_identity(a, exact):
    rep = psi_identity(Scalar(a))
    assert rep.holds and rep.conformal
    assert rep.c.exact is exact
    assert abs(rep.A - float(a) ** 2) < 1e-12


def test_classify_examples(lin, wh):
    c = classify(lin)
    assert c.verdict == "Linear" and c.identity_only() and c.summary() == "Linear to degree 6"
    c = classify(wh)
    assert c.verdict == "Whitney(sigma=[1])"
    assert [r.stage for r in c.stages] == list(STAGES)


def test_classify_scrambled_whitney():
    s = scrambled_instance("whitney", S31, S51, depth=2, seed=11)
    c = classify(s.embedding)
    assert c.verdict == "Whitney(sigma=[1])" and not c.identity_only()
    assert c.check_replay(s.embedding)
    again = classify(c.normal_form)
    assert again.identity_only() and again.verdict == c.verdict


def test_certificate_json(wh):
    s = scrambled_instance("whitney", S31, S51, depth=1, seed=4)
    c = classify(s.embedding)
    text = c.dumps()
    back = Certificate.loads(text)
    assert back.dumps() == text
    assert back.check_replay(s.embedding)
    assert classify(s.embedding).dumps() == text
    rec = json.loads(text)
    assert all(r["residual"] == "zero" for r in rec["stages"])


def test_classify_q2_linear():
    s = scrambled_instance("linear", S42, S62, depth=2, seed=2)
    c = classify(s.embedding)
    assert c.verdict == "Linear"
    assert c.check_replay(s.embedding)


def test_hypotheses():
    with pytest.raises(HypothesisViolated):
        classify(representative("linear", S31, S51, 3))
    E = representative("linear", ModelSignature(2, 1), ModelSignature(3, 1))
    with pytest.raises(HypothesisViolated):
        classify(E)


def test_rejects_non_embedding(lin):
    F = lin.F.scale(2)
    with pytest.raises(NotAnEmbedding, match="z1_1\\*zb1_1"):
        classify(Embedding(S31, S51, F, lin.G))


def test_stage_error_names_stage():
    cat = S31.catalog()
    E = Embedding(S31, S51, MatrixSeries.zeros(cat, 6, 1, 4), MatrixSeries.zeros(cat, 6, 1, 1))
    with pytest.raises(StageError, match="prop12"):
        classify(E)


def test_alignment_keeps_origin_for_dilation_scramble():
    # the quotient forms agree up to a dilation; the alignment must not swap 0 and infinity
    S31, S51 = ModelSignature(3, 1), ModelSignature(5, 1)
    E = scramble(representative("whitney", S31, S51), 1, 149853,
                 source_kinds=("dilation",), target_kinds=("dilation",)).embedding
    cert = classify(E)
    assert cert.verdict == "Whitney(sigma=[1])"
    assert cert.replay(E) == cert.normal_form
    assert nt.ooo1(cert.normal_form)


def test_psi_identity_float_parameter():
    rep = psi_identity(0.3)
    assert rep.holds and rep.conformal
    assert not rep.c.exact
    assert rep.A == pytest.approx(0.09)
