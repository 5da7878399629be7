"""Normalization pipeline and classifier.

Stages run in the order prop12, prop13, huang25, g_reduce, rank_detect,
hamada_factor, huangji_reduce.  Each stage returns the new embedding and
the certified automorphisms it applied (with the side they act on), so the
whole normalization can be replayed from the original input.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import cmat
from . import kform as kf
from . import projective as proj
from .autgroup import (
    ModelAutomorphism,
    apply,
    automorphism_from_json,
    congruence,
    congruence_coefficients,
    compose,
    isotropy,
    lemma11_construct,
    moebius_auto,
    sphere_matrix_auto,
    projective_auto,
    realign,
    unitary_frame,
)
from .errors import (
    BSDError,
    CertificationFailed,
    FactorizationFailed,
    GramRelationViolated,
    HypothesisViolated,
    NotAnEmbedding,
    NotPositiveDefinite,
    NotRepresentable,
    RankUndetermined,
    ReductionIncomplete,
    StageError,
    UnsupportedSignature,
)
from .model import Embedding, ModelSignature, residual
from .scalars import DEFAULT_TOL, Scalar, format_scalar, gaussian_root, imag_unit, sqrt_pos_real
from .series import TSeries, format_monomial, format_series

STAGES = ("prop12", "prop13", "huang25", "g_reduce", "rank_detect", "hamada_factor", "huangji_reduce")


# coefficient access ------------------------------------------------------------------
def mono(cat, **exps):
    """Monomial from keyword exponents such as ``z1_2=1, w1_1=2``."""
    spec = {}
    for name, e in exps.items():
        kind = name.rstrip("0123456789_")
        i, j = name[len(kind):].split("_")
        spec[(kind, int(i), int(j))] = e
    return cat.monomial(spec)


def _m(cat, *vars_):
    """Monomial from (kind, i, j) factors (repeats allowed)."""
    spec = {}
    for v in vars_:
        spec[v] = spec.get(v, 0) + 1
    return cat.monomial(spec)


def w_linear_part(E):
    """q'^2 x q^2 coefficients of the w_{kl} monomials in G (row-major pairs)."""
    cat = E.source.catalog()
    q, qt = E.source.q, E.target.q
    out = []
    for i in range(qt):
        for j in range(qt):
            out.append([E.G[i, j].coeff(_m(cat, ("w", k + 1, l + 1))) for k in range(q) for l in range(q)])
    return out


def z_linear_part(E, row):
    """Coefficients c[k][j][jj] of z_{k+1, j+1} in F[row, jj]."""
    cat = E.source.catalog()
    q, N, Nt = E.source.q, E.source.N, E.target.N
    return [[[E.F[row, jj].coeff(_m(cat, ("z", k + 1, j + 1))) for jj in range(Nt)] for j in range(N)] for k in range(q)]


def _zero(x, tol):
    return x.is_zero(tol)


# records ---------------------------------------------------------------------------
@dataclass
class Step:
    side: str
    auto: ModelAutomorphism

    def to_json(self):
        return {"side": self.side, "automorphism": self.auto.to_json()}

    @classmethod
    def from_json(cls, rec):
        return cls(rec["side"], automorphism_from_json(rec["automorphism"]))


@dataclass
class StageRecord:
    stage: str
    steps: list = field(default_factory=list)
    residual_zero: bool = True
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "stage": self.stage,
            "steps": [s.to_json() for s in self.steps],
            "residual": "zero" if self.residual_zero else "nonzero",
            "data": self.data,
        }

    @classmethod
    def from_json(cls, rec):
        return cls(rec["stage"], [Step.from_json(s) for s in rec["steps"]], rec["residual"] == "zero", rec.get("data", {}))


def run_steps(E, steps):
    for s in steps:
        E = do_step(E, s)
    return E


def do_step(E, step):
    """Apply one recorded step; every stage and every replay goes through here."""
    return settle(apply_step(E, step))


def apply_step(E, step):
    if step.side == "target":
        return apply(step.auto, E, "target")
    if step.auto.fixes_origin():
        return apply(step.auto, E, "source")
    return apply_source_projective(step.auto, E)


def apply_source_projective(a, E):
    """E o a for a q = 1 automorphism moving the origin (uses the quadratic lift)."""
    if a.matrix is None:
        raise UnsupportedSignature("moving the source origin needs a projective automorphism")
    Q = proj.lift_embedding(E)
    M = a.matrix
    if Q.exact != cmat.is_exact(M):
        Q = Q.to_float()
        M = cmat.to_float(M)
    Q2 = Q.compose_source(M)
    F, G = Q2.series(E.source.catalog(), E.D)
    return Embedding(E.source, E.target, F, G, recentred=False)


# stage helpers ------------------------------------------------------------------------
def _same_q(E, stage):
    if E.source.q != E.target.q:
        raise UnsupportedSignature(f"{stage} implemented for q' = q")


def _require_q1(E, stage):
    if E.source.q != 1 or E.target.q != 1:
        raise UnsupportedSignature(f"{stage} implemented for q = q' = 1")


def congruence_factor(A, tol=DEFAULT_TOL):
    """C with A = C (x) conj(C), from the rank-one realigned matrix.

    For q = 1 the factor is a Gaussian rational c with |c|^2 = A whenever
    one exists, which keeps the exact backend.
    """
    if len(A) == 1:
        lam = A[0][0]
        if not lam.is_real(tol) or lam.re <= 0:
            raise NotPositiveDefinite(f"w-coefficient of g is {format_scalar(lam)}, not positive")
        try:
            return [[gaussian_root(lam, tol)]]
        except NotRepresentable:
            return [[gaussian_root(lam.to_float(), tol)]]
    return lemma11_construct(A, 1, tol)  # with N = 1 this is C itself


# Prop 1.2 --------------------------------------------------------------------------------
def prop12(E, tol=DEFAULT_TOL):
    """Make the w-linear part of G the identity by a target congruence."""
    _same_q(E, "prop12")
    q = E.source.q
    A = w_linear_part(E)
    if cmat.rank(A, tol) < q * q:
        raise NotAnEmbedding("linear part of G(0, W) has no invertible q^2 x q^2 block")
    steps = []
    if not cmat.equal(A, cmat.identity(q * q, E.exact), tol):
        try:
            C = congruence_factor(A, tol)
        except NotPositiveDefinite as exc:
            raise NotAnEmbedding(str(exc)) from None
        a = congruence(cmat.inverse(C), E.target, E.D)
        steps.append(Step("target", a))
        E = do_step(E, steps[-1])
    return E, steps


def check_prop12(E, tol=DEFAULT_TOL):
    q = E.source.q
    return cmat.equal(w_linear_part(E), cmat.identity(q * q, E.exact), tol)


# Prop 1.3 --------------------------------------------------------------------------------
def linear_frame(E, tol=DEFAULT_TOL):
    """Common N x N' matrix M with F^(1) = Z M, validated against the Gram relation."""
    q, N, Nt = E.source.q, E.source.N, E.target.N
    frames = []
    for i in range(q):
        c = z_linear_part(E, i)
        for k in range(q):
            if k != i and not all(_zero(x, tol) for row in c[k] for x in row):
                raise GramRelationViolated(f"row {i + 1} of F depends linearly on row {k + 1} of Z")
        frames.append(c[i])
    M = frames[0]
    for other in frames[1:]:
        if not cmat.equal(M, other, tol):
            raise GramRelationViolated("row-dependent linear parts violate <F_i, F_j> = <Z_i, Z_j>")
    if not cmat.equal(cmat.mul(M, cmat.adjoint(M)), cmat.identity(N, E.exact), tol):
        raise GramRelationViolated("linear part of F is not isometric: <F_i, F_j> != <Z_i, Z_j>")
    return M


def prop13(E, tol=DEFAULT_TOL):
    """Rotate the target so that the linear part of F is (Z, 0)."""
    _same_q(E, "prop13")
    N, Nt = E.source.N, E.target.N
    M = linear_frame(E, tol)
    target = [[Scalar.of(1 if j == k else 0, E.exact) for k in range(Nt)] for j in range(N)]
    if cmat.equal(M, target, tol):
        return E, []
    try:
        U = cmat.complete_orthonormal(M, Nt, tol)
    except NotRepresentable:
        U = cmat.complete_orthonormal(cmat.to_float(M), Nt, tol)
    a = unitary_frame(cmat.adjoint(U), E.target, E.D)
    st = Step("target", a)
    return do_step(E, st), [st]


def check_prop13(E, tol=DEFAULT_TOL):
    N, Nt = E.source.N, E.target.N
    try:
        M = linear_frame(E, tol)
    except GramRelationViolated:
        return False
    return cmat.equal(M, [[Scalar.of(1 if j == k else 0, E.exact) for k in range(Nt)] for j in range(N)], tol)


# first-order eliminations ---------------------------------------------------------------------
@dataclass
class Huang25Data:
    f_w: list
    g_ww: object
    a: list
    r: object

    def to_json(self):
        return {
            "f_w": [format_scalar(x) for x in self.f_w],
            "g_ww": format_scalar(self.g_ww),
            "a": [format_scalar(x) for x in self.a],
            "r": format_scalar(self.r),
        }


def _f_w(E):
    cat = E.source.catalog()
    m = _m(cat, ("w", 1, 1))
    return [E.F[0, k].coeff(m) for k in range(E.target.N)]


def _g_ww(E):
    cat = E.source.catalog()
    return E.G[0, 0].coeff(_m(cat, ("w", 1, 1), ("w", 1, 1)))


def huang25(E, tol=DEFAULT_TOL):
    """Remove the w-linear part of F and the w^2 term of g by target isotropies."""
    _require_q1(E, "huang25")
    steps = []
    c = _f_w(E)
    a = [-x for x in c]
    if not all(_zero(x, tol) for x in c):
        t = isotropy(a, Scalar.of(0, E.exact), E.target, E.D)
        steps.append(Step("target", t))
        E = do_step(E, steps[-1])
    gww = _g_ww(E)
    if not gww.is_real(tol):
        raise ReductionIncomplete(f"w^2 coefficient of g is not real: {gww}")
    r = -gww
    if not _zero(gww, tol):
        zero = [Scalar.of(0, E.exact) for _ in range(E.target.N)]
        t = isotropy(zero, r, E.target, E.D)
        steps.append(Step("target", t))
        E = do_step(E, steps[-1])
    return E, steps, Huang25Data(c, gww, a, r)


def check_huang25(E, tol=DEFAULT_TOL):
    return all(_zero(x, tol) for x in _f_w(E)) and _zero(_g_ww(E), tol)


def _huang25_general(E, tol):
    """Check (for q > 1) that F has no W-linear terms and r_{ijabcd} vanishes."""
    cat = E.source.catalog()
    q = E.source.q
    wvars = [("w", a + 1, b + 1) for a in range(q) for b in range(q)]
    f_w = [E.F[i, k].coeff(_m(cat, v)) for i in range(E.target.q) for k in range(E.target.N) for v in wvars]
    r = []
    for i in range(q):
        for j in range(q):
            for x in range(len(wvars)):
                for y in range(x, len(wvars)):
                    m = _m(cat, wvars[x], wvars[y])
                    r.append((E.G[j, i].coeff(m) + E.G[i, j].coeff(m).conj()) / 2)
    return f_w, r


# settling float noise ------------------------------------------------------------------------
#: float coefficients below this are dropped after every float step
CHOP_TOL = 1e-12


def settle(E):
    """Drop float round-off and mark the embedding recentred when its constants vanish."""
    if E.exact:
        return E
    E = E.chop(CHOP_TOL)
    rec = all(not e.constant_term() for m in (E.F, E.G) for r in m.entries for e in r)
    return Embedding(E.source, E.target, E.F, E.G, recentred=rec)


# geometric rank ------------------------------------------------------------------------------
@dataclass
class RankReport:
    rank: int
    sigma: list
    phi2: list
    A: list | None = None
    mu: object = None
    special: list | None = None
    frame: list | None = None
    constant: object = None
    ambiguous: bool = False

    def to_json(self):
        out = {"rank": self.rank, "sigma": self.sigma, "phi2": self.phi2, "ambiguous": self.ambiguous}
        if self.A is not None:
            out["A"] = [[format_scalar(x) for x in r] for r in self.A]
        if self.mu is not None:
            out["mu"] = format_scalar(self.mu)
        if self.special is not None:
            out["special"] = [format_scalar(x) for x in self.special]
        if self.constant is not None:
            out["constant"] = format_scalar(self.constant)
        return out


def phi2_blocks(E):
    """Pure-Z degree-2 parts of the extra components F[:, N:]."""
    cat = E.source.catalog()
    zpos = set(cat.positions("z"))
    N = E.source.N

    def pure_z(m):
        return all(e == 0 or n in zpos for n, e in enumerate(m))

    return [[E.F[i, k].homogeneous_part(2).filter(pure_z) for k in range(N, E.target.N)] for i in range(E.target.q)]


def _zw_matrix(E):
    """A with a_j(z) = sum_k A_jk z_k, where f_j has the term (i/2) a_j(z) w."""
    cat = E.source.catalog()
    N = E.source.N
    minus_2i = imag_unit(E.exact) * -2
    return [[E.F[0, j].coeff(_m(cat, ("z", 1, k + 1), ("w", 1, 1))) * minus_2i for k in range(N)] for j in range(N)]


def _hermitian_norm_form(E, blocks):
    """Coefficients of |phi^(2)|^2 and of <conj z, a(z)>|z|^2 as dicts over (z-mono, zbar-mono)."""
    cat = E.source.catalog()
    lhs = {}
    for phi in blocks:
        for m1, c1 in phi.terms.items():
            for m2, c2 in phi.terms.items():
                key = (m1, m2)
                lhs[key] = lhs.get(key, Scalar.of(0, E.exact)) + c1 * c2.conj()
    A = _zw_matrix(E)
    N = E.source.N
    rhs = {}
    zeros = cat.unit()
    for j in range(N):
        for k in range(N):
            if A[j][k].is_zero(0.0):
                continue
            for l in range(N):
                key = (_m(cat, ("z", 1, k + 1), ("z", 1, l + 1)), _m(cat, ("z", 1, j + 1), ("z", 1, l + 1)))
                rhs[key] = rhs.get(key, Scalar.of(0, E.exact)) + A[j][k]
    return lhs, rhs, A


def rank_detect(E, tol=DEFAULT_TOL):
    """Geometric rank (0 or 1) from the degree-2 part of the extra components."""
    blocks = phi2_blocks(E)
    phi_text = [[format_series(x) for x in row] for row in blocks]
    q = E.target.q
    if all(x.is_zero(tol) for row in blocks for x in row):
        return RankReport(0, [], phi_text)
    if E.source.q == 1 and q == 1:
        return _rank_detect_q1(E, blocks[0], phi_text, tol)
    sigma, ambiguous = _sigma_from_blocks(E, blocks, tol)
    return RankReport(1, sigma, phi_text, ambiguous=ambiguous)


def _rank_detect_q1(E, blocks, phi_text, tol):
    lhs, rhs, A = _hermitian_norm_form(E, blocks)
    keys = set(lhs) | set(rhs)
    zero = Scalar.of(0, E.exact)
    bad = [k for k in sorted(keys) if not (lhs.get(k, zero) - rhs.get(k, zero)).is_zero(tol)]
    if bad:
        cat = E.source.catalog()
        k = bad[0]
        raise RankUndetermined(
            "degree-4 identity <conj z, a(z)>|z|^2 = |phi^(2)|^2 fails at "
            f"{format_monomial(cat, k[0])} * conj({format_monomial(cat, k[1])})"
        )
    if not cmat.is_hermitian(A, tol):
        raise RankUndetermined("z-w coefficient matrix of f is not Hermitian")
    r = cmat.rank(A, tol)
    if r != 1:
        raise RankUndetermined(f"z-w coefficient matrix has rank {r}; neither the linear nor the Whitney pattern")
    v = _rank_one_vector(A, tol)
    mu = cmat.vdot(v, v)
    try:
        root = gaussian_root(mu, tol)
    except NotRepresentable:
        root = gaussian_root(mu.to_float(), tol)
        v = [x.to_float() for x in v]
    u = [x * root.inv() for x in v]
    try:
        U = cmat.complete_orthonormal([u], len(u), tol)
    except NotRepresentable:
        U = cmat.complete_orthonormal([[x.to_float() for x in u]], len(u), tol)
    half_i = imag_unit(mu.exact) / 2
    return RankReport(1, [1], phi_text, A=A, mu=mu, special=u, frame=U, constant=half_i * mu)


def _rank_one_vector(A, tol):
    """v with A = v v^* for a rank-one PSD Hermitian A."""
    n = len(A)
    k = max(range(n), key=lambda j: abs(A[j][j].to_complex()))
    d = A[k][k]
    if not d.is_real(tol) or d.re <= 0:
        raise RankUndetermined("z-w coefficient matrix is not positive semidefinite")
    try:
        c = gaussian_root(d, tol)
    except NotRepresentable:
        c = gaussian_root(d.to_float(), tol)
        A = cmat.to_float(A)
    # A e_k = v conj(v_k); choose v_k = c (a Gaussian root of d), so v = A e_k / conj(c)
    return [A[j][k] / c.conj() for j in range(n)]


def _block_pattern(E, phi, tol):
    """Set of row pairs (i1, i2) such that phi has a term z_{i1, .} z_{i2, .}."""
    cat = E.source.catalog()
    zpos = cat.positions("z")
    N = E.source.N
    rows = {}
    for n, pos in enumerate(zpos):
        rows[pos] = n // N
    out = set()
    for m, c in phi.terms.items():
        if c.is_zero(tol):
            continue
        rs = sorted(rows[n] for n, e in enumerate(m) for _ in range(e))
        out.add(tuple(rs))
    return out


def _sigma_from_blocks(E, blocks, tol):
    import itertools

    q = E.target.q
    pats = []
    for i in range(q):
        pat = set()
        for phi in blocks[i]:
            pat |= _block_pattern(E, phi, tol)
        pats.append(pat)
    fits = []
    for perm in itertools.permutations(range(q)):
        if all(not pats[i] or pats[i] == {(perm[i], perm[i])} for i in range(q)):
            fits.append([k + 1 for k in perm])
    if not fits:
        raise RankUndetermined(f"bi-block pattern {pats} matches no permutation")
    return fits[0], len(fits) > 1


# normal forms -----------------------------------------------------------------------------------
def linear_normal_form(source, target, D=6, exact=True):
    """(Z, W) -> ((Z, 0), W)."""
    if source.q != target.q:
        raise UnsupportedSignature("linear normal form implemented for q' = q")
    cat = source.catalog()
    zero = TSeries.zero(cat, D, exact)
    F = [[TSeries.var(cat, D, "z", i + 1, j + 1, exact) if j < source.N else zero for j in range(target.N)]
         for i in range(source.q)]
    G = [[TSeries.var(cat, D, "w", i + 1, j + 1, exact) for j in range(source.q)] for i in range(source.q)]
    from .matser import MatrixSeries

    return Embedding(source, target, MatrixSeries(F), MatrixSeries(G))


_WNF_CACHE = {}


def whitney_normal_form(source, target, D=6):
    """Standard Whitney normal form (q = 1).

    The transported Whitney map with its special variable moved to z_1 and
    scaled so that f_1 = z_1 + (i/2) z_1 w + ..., then put through prop12,
    prop13 and huang25.  Exact.
    """
    key = (source, target, D)
    if key in _WNF_CACHE:
        return _WNF_CACHE[key]
    _require_q1(_SigPair(source, target), "whitney_normal_form")
    from .autgroup import congruence as _cong
    from .model import class_representative, transport_boundary_map

    W = transport_boundary_map(class_representative("whitney", source, target), source, target, D)
    N = source.N
    P = cmat.identity(N, True)
    P[0][0] = P[N - 1][N - 1] = Scalar.of(0)
    P[0][N - 1] = P[N - 1][0] = Scalar.of(1)
    s = _cong([[Scalar.of(1) / 2]], source, D, U=P)
    E = apply(s, W, "source")
    E, _ = prop12(E)
    E, _ = prop13(E)
    E, _, _ = huang25(E)
    _WNF_CACHE[key] = E
    return E


@dataclass
class _SigPair:
    source: ModelSignature
    target: ModelSignature


# factorization of rank-one maps ---------------------------------------------------------------------------
@dataclass
class HamadaReport:
    form: str
    frame: list | None = None
    f_tilde: list = field(default_factory=list)
    phi_tilde: list = field(default_factory=list)

    def to_json(self):
        out = {"form": self.form, "f_tilde": self.f_tilde, "phi_tilde": self.phi_tilde}
        if self.frame is not None:
            out["frame"] = [[format_scalar(x) for x in r] for r in self.frame]
        return out


def _first_bad(series, pred, tol):
    for m in sorted(series.terms):
        c = series.terms[m]
        if not c.is_zero(tol) and not pred(m):
            return m
    return None


def divide_by_variable(series, pos, tol=DEFAULT_TOL):
    """series / x for the catalog variable at ``pos``; returns (quotient, offending monomial)."""
    bad = _first_bad(series, lambda m: m[pos] >= 1, tol)
    if bad is not None:
        return None, bad
    w = series.cat.weights[pos]
    terms = {}
    for m, c in series.terms.items():
        if c.is_zero(tol):
            continue
        mm = list(m)
        mm[pos] -= 1
        terms[tuple(mm)] = c
    return TSeries(series.cat, series.D - w, terms, series.exact), None


def _fail(E, where, mono):
    cat = E.source.catalog()
    raise FactorizationFailed(f"{where}: offending monomial {format_monomial(cat, mono)}")


def rotate_special(E, report):
    """E with the special direction of the report moved to z_1 (source and target unitaries)."""
    U = report.frame
    N, Nt = E.source.N, E.target.N
    exact = cmat.is_exact(U)
    if E.exact != exact:
        E = E.to_float()
    src = unitary_frame(U, E.source, E.D)
    Ut = cmat.identity(Nt, exact)
    Ustar = cmat.adjoint(U)
    for j in range(N):
        for k in range(N):
            Ut[j][k] = Ustar[j][k]
    tgt = unitary_frame(Ut, E.target, E.D)
    return settle(apply(tgt, apply(src, E, "source"), "target")), [Step("source", src), Step("target", tgt)]


def hamada_factor(E, report, tol=DEFAULT_TOL):
    """Verify the (ooo2) shape for rank 0 or the (ooo1) divisibility for rank 1."""
    cat = E.source.catalog()
    q, N, Nt = E.source.q, E.source.N, E.target.N
    if report.rank == 0:
        ref = linear_normal_form(E.source, E.target, E.D, E.exact)
        for i in range(E.target.q):
            for k in range(Nt):
                diff = E.F[i, k] - ref.F[i, k]
                bad = _first_bad(diff, lambda m: False, tol)
                if bad is not None:
                    _fail(E, f"F[{i + 1},{k + 1}] differs from the linear form", bad)
            for k in range(E.target.q):
                diff = E.G[i, k] - ref.G[i, k]
                bad = _first_bad(diff, lambda m: False, tol)
                if bad is not None:
                    _fail(E, f"G[{i + 1},{k + 1}] differs from W", bad)
        return HamadaReport("ooo2")
    _require_q1(E, "hamada_factor (rank 1)")
    R, _ = rotate_special(E, report)
    pos = cat.index[("z", 1, 1)]
    f_tilde, phi_tilde = [], []
    q1, bad = divide_by_variable(R.F[0, 0], pos, tol)
    if bad is not None:
        _fail(E, "f_1 is not divisible by the special variable", bad)
    f_tilde.append(format_series(q1))
    for l in range(1, N):
        diff = R.F[0, l] - TSeries.var(cat, R.D, "z", 1, l + 1, R.exact)
        bad = _first_bad(diff, lambda m: False, tol)
        if bad is not None:
            _fail(E, f"f_{l + 1} - z_{l + 1} does not vanish", bad)
        f_tilde.append("0")
    for k in range(N, Nt):
        qk, bad = divide_by_variable(R.F[0, k], pos, tol)
        if bad is not None:
            _fail(E, f"phi_{k - N + 1} is not divisible by the special variable", bad)
        phi_tilde.append(format_series(qk))
    return HamadaReport("ooo1", report.frame, f_tilde, phi_tilde)


# G-reduction and rank-one reduction -------------------------------------------------------------
def vvvq_offenders(E, tol=DEFAULT_TOL):
    """Coefficients violating G = diag(W, 0) and F(0, W) = 0."""
    cat = E.source.catalog()
    q, qt = E.source.q, E.target.q
    zpos = set(cat.positions("z"))
    out = []
    for i in range(qt):
        for j in range(qt):
            ref = TSeries.var(cat, E.D, "w", i + 1, j + 1, E.exact) if i < q and j < q else TSeries.zero(cat, E.D, E.exact)
            for m, c in sorted((E.G[i, j] - ref).terms.items()):
                if not c.is_zero(tol):
                    out.append((f"G[{i + 1},{j + 1}]", format_monomial(cat, m), format_scalar(c)))
        for k in range(E.target.N):
            for m, c in sorted(E.F[i, k].terms.items()):
                if not c.is_zero(tol) and not any(m[n] for n in zpos):
                    out.append((f"F[{i + 1},{k + 1}]", format_monomial(cat, m), format_scalar(c)))
    return out


def _float_matrix(a):
    return [[Scalar.of(complex(x), False) for x in row] for row in np.asarray(a)]


def _lifted_forms(E):
    Q = proj.lift_embedding(E)
    return kf.forms_array(Q)


def _apply_target_matrix(E, Minv, stage):
    a = projective_auto(_float_matrix(Minv), E.target, E.D, tag="projective")
    st = Step("target", a)
    return do_step(E, st), st


def kak_steps(B, sig, D, tol=1e-12):
    """Source automorphism B (model coordinates) as unitary_ball o phi_b o unitary_ball.

    A B fixing the model origin is returned as a single projective map.

    Returns (composite automorphism, b).  K1 phi_b K2 = B up to scale, with K1
    and K2 fixing the ball centre and phi_b the Moebius map of the last
    coordinate.
    """
    N = sig.N
    p = N + 1
    if np.abs(B[1:, 0]).max() <= tol * abs(B[0, 0]):
        # fixes the model origin: one linear fractional map, no factorization
        B = np.where(np.abs(B) < 1e-12 * np.abs(B).max(), 0, B)
        B[1:, 0] = 0
        return projective_auto(_float_matrix(B), sig, D), 0.0
    C = cmat.to_numpy(proj.cayley_matrix(N, False))
    Bs = C @ B @ np.linalg.inv(C)
    v = Bs[:, 0]
    zc = v[1:] / v[0]
    t = float(np.linalg.norm(zc))
    if t < tol:
        a = projective_auto(_float_matrix(B), sig, D, tag="unitary_ball")
        return a, 0.0
    u = zc / t
    # unitary with last column u
    X = np.eye(p, dtype=complex)
    X[:, [0, p - 1]] = X[:, [p - 1, 0]]
    X[:, 0] = u
    Qm, _ = np.linalg.qr(X)
    Qm = Qm * (np.vdot(Qm[:, 0], u) / abs(np.vdot(Qm[:, 0], u)))
    Qm = Qm[:, list(range(1, p)) + [0]]
    K1 = np.eye(p + 1, dtype=complex)
    K1[1:, 1:] = Qm
    root = float(np.sqrt(1 - t * t))
    phi = moebius_auto(Scalar.of(t, False), sig, D, Scalar.of(root, False))
    Phi = cmat.to_numpy(proj.sphere_moebius_matrix(Scalar.of(t, False), p, Scalar.of(root, False), False))
    K2 = np.linalg.solve(K1 @ Phi, Bs)
    off = max(np.abs(K2[0, 1:]).max(), np.abs(K2[1:, 0]).max())
    if off > 1e-8 * np.abs(K2).max():
        raise ReductionIncomplete("KAK factor does not fix the ball centre")
    K2[0, 1:] = 0
    K2[1:, 0] = 0
    k2 = sphere_matrix_auto(_float_matrix(K2), sig, D)
    k1 = sphere_matrix_auto(_float_matrix(K1), sig, D)
    return compose([k2, phi, k1]), t


def quotient_reduce(E, reference, tol=DEFAULT_TOL):
    """Move E onto ``reference`` (same class) by a source and a target automorphism.

    Uses the quotient form K = H'(P)/H of the quadratic lifts: a source
    automorphism B aligning the frames of K, a KAK factorization of B, then the
    target automorphism solved from P o B = M P_ref.
    """
    _require_q1(E, "quotient_reduce")
    N, Nt = E.source.N, E.target.N
    H = kf.model_forms(N)
    Ht = kf.model_forms(Nt)
    P = _lifted_forms(E)
    P_ref = _lifted_forms(reference)
    K = kf.quotient_form(P, H, Ht)
    K_ref = kf.quotient_form(P_ref, H, Ht)
    if kf.rank_of(K) != kf.rank_of(K_ref):
        raise RankUndetermined(f"quotient-form rank {kf.rank_of(K)} differs from the reference's {kf.rank_of(K_ref)}")
    steps = []
    if kf.rank_of(K) == 1:
        B = np.eye(N + 2, dtype=complex)
        M = _linear_target(P, P_ref, K, Ht)
    else:
        e0 = np.zeros(N + 2, dtype=complex)
        e0[0] = 1
        B = kf.align_source(K, K_ref, H, base=e0)
        src, b = kak_steps(B, E.source, E.D)
        B = cmat.to_numpy(src.matrix)
        steps.append(Step("source", src))
        E = do_step(E, steps[-1])
        PB = np.einsum("ba,kbc,cd->kad", B, P, B)
        M = kf.solve_target(PB, P_ref)
    E, st = _apply_target_matrix(E, np.linalg.inv(M), "target")
    steps.append(st)
    return E, steps


def _linear_target(P, P_ref, K, Ht):
    """Complete the linear map hidden in P = m(Y) l(Y) to a target automorphism M with M P_ref ~ P."""
    n = P.shape[1]
    nt = P.shape[0]
    m = kf.range_rows(K)[0]
    # linear least squares for l_k with P_k = sym(m^t l_k)
    rows = []
    for a in range(n):
        for b in range(n):
            r = np.zeros(n, dtype=complex)
            r[b] += m[a] / 2
            r[a] += m[b] / 2
            rows.append(r)
    A = np.array(rows)
    L = np.array([np.linalg.lstsq(A, P[k].ravel(), rcond=None)[0] for k in range(nt)])
    cols_ref = [0] + list(range(1, n - 1)) + [nt - 1]
    Hl = L.conj().T @ Ht @ L
    c = (Hl[n - 1, 0] / kf.model_forms(n - 2)[n - 1, 0]).real
    M = np.zeros((nt, nt), dtype=complex)
    for j, col in enumerate(cols_ref):
        M[:, col] = L[:, j]
    # complement: Ht-orthogonal to range(L), normalized to -c
    G = L.conj().T @ Ht
    _, _, vh = np.linalg.svd(G)
    comp = []
    for x in vh[n:].conj():
        for y in comp:
            x = x - (np.vdot(y, Ht @ x) / np.vdot(y, Ht @ y)) * y
        nrm = np.vdot(x, Ht @ x).real
        comp.append(x * np.sqrt(c / -nrm))
    for j, col in enumerate(range(n - 1, nt - 1)):
        M[:, col] = comp[j]
    return M


def g_reduce(E, tol=DEFAULT_TOL):
    """Reach G = diag(W, 0) with F(0, W) = 0."""
    off = vvvq_offenders(E, tol)
    if not off:
        return E, []
    if E.source.q != 1 or E.target.q != 1:
        raise ReductionIncomplete(f"surviving coefficients {off[:6]}; reduction implemented for q = 1")
    H = kf.model_forms(E.source.N)
    K = kf.quotient_form(_lifted_forms(E), H, kf.model_forms(E.target.N))
    r = kf.rank_of(K)
    if r == 1:
        ref = linear_normal_form(E.source, E.target, E.D)
    elif r == 2:
        ref = whitney_normal_form(E.source, E.target, E.D)
    else:
        raise ReductionIncomplete(f"quotient form of rank {r}; surviving coefficients {off[:6]}")
    E2, steps = quotient_reduce(E, ref, tol)
    left = vvvq_offenders(E2, tol)
    if left:
        raise ReductionIncomplete(f"surviving coefficients {left[:6]}")
    return E2, steps


def huangji_reduce(E, report, tol=DEFAULT_TOL):
    """Move a rank-one normalized map onto the standard Whitney normal form."""
    if report.rank != 1:
        raise ReductionIncomplete("rank-one reduction needs geometric rank 1")
    if E.source.q != 1 or E.target.q != 1:
        raise UnsupportedSignature("full rank-one reduction implemented for q = q' = 1")
    ref = whitney_normal_form(E.source, E.target, E.D)
    if E.isclose(ref, tol):
        return E, []
    E2, steps = quotient_reduce(E, ref, tol)
    if not E2.isclose(ref, tol):
        a, b = (E2.to_float(), ref.to_float()) if E2.exact != ref.exact else (E2, ref)
        diff = [(k, format_series((a.F[0, k] - b.F[0, k]).chop(tol))) for k in range(E.target.N)]
        raise ReductionIncomplete(f"result differs from the Whitney normal form: {diff}")
    return E2, steps


# certificates and the classifier ----------------------------------------------------------------
@dataclass
class Certificate:
    source: ModelSignature
    target: ModelSignature
    degree: int
    verdict: str
    sigma: list
    stages: list
    normal_form: Embedding
    rank: dict = field(default_factory=dict)
    factorization: dict = field(default_factory=dict)
    ambiguous: bool = False

    def steps(self):
        return [s for rec in self.stages for s in rec.steps]

    def identity_only(self, tol=DEFAULT_TOL):
        return all(s.auto.is_identity(tol) for s in self.steps())

    def replay(self, E):
        """Apply the recorded steps to the original embedding."""
        return run_steps(settle(E), self.steps())

    def check_replay(self, E, tol=DEFAULT_TOL):
        """Bit-exact match with the recorded normal form, or within ``tol`` when on floats."""
        out = self.replay(E)
        if out == self.normal_form:
            return True
        return (not out.exact or not self.normal_form.exact) and out.isclose(self.normal_form, tol)

    def summary(self):
        return f"{self.verdict} to degree {self.degree}"

    def to_json(self):
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "truncation": self.degree,
            "verdict": self.verdict,
            "sigma": self.sigma,
            "ambiguous": self.ambiguous,
            "rank": self.rank,
            "factorization": self.factorization,
            "stages": [r.to_json() for r in self.stages],
            "normal_form": self.normal_form.to_json(),
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            ModelSignature.from_json(d["source"]),
            ModelSignature.from_json(d["target"]),
            int(d["truncation"]),
            d["verdict"],
            list(d["sigma"]),
            [StageRecord.from_json(r) for r in d["stages"]],
            Embedding.from_json(d["normal_form"]),
            d.get("rank", {}),
            d.get("factorization", {}),
            bool(d.get("ambiguous", False)),
        )

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


def check_hypotheses(source, target, D=None):
    """q < p, q' < p', p' - q' = 2(p - q), p - q > 1, and D >= 4 for rank detection."""
    p, q, pt, qt = source.p, source.q, target.p, target.q
    if not (q < p and qt < pt):
        raise HypothesisViolated(f"need q < p and q' < p', got ({p},{q}) -> ({pt},{qt})")
    if pt - qt != 2 * (p - q):
        raise HypothesisViolated(f"need p' - q' = 2(p - q), got {pt - qt} vs {2 * (p - q)}")
    if p - q <= 1:
        raise HypothesisViolated("need p - q > 1")
    if D is not None and D < 4:
        raise HypothesisViolated("rank detection needs truncation degree >= 4")


def verdict_text(rank, sigma):
    if rank == 0:
        return "Linear"
    return "Whitney(sigma=[" + ",".join(str(s) for s in sigma) + "])"


def _huang25_stage(E, tol):
    if E.source.q == 1 and E.target.q == 1:
        return huang25(E, tol)
    f_w, r = _huang25_general(E, tol)
    if all(x.is_zero(tol) for x in f_w + r):
        return E, [], None
    raise UnsupportedSignature("huang25 eliminations implemented for q = 1; input for q > 1 does not have its first-order terms eliminated")


def classify(E, tol=DEFAULT_TOL):
    """Run the full pipeline and return the certificate with the verdict."""
    check_hypotheses(E.source, E.target, E.D)
    rep = residual(E, tol=tol)
    if not rep.is_zero:
        raise NotAnEmbedding(rep.describe())
    records = []
    cur = settle(E)

    def stage(name, fn):
        nonlocal cur
        try:
            out = fn(cur)
        except BSDError as exc:
            raise StageError(name, exc) from exc
        new, steps, data = out
        res = residual(new, tol=tol)
        if not res.is_zero:
            raise StageError(name, CertificationFailed(res.describe()))
        records.append(StageRecord(name, steps, True, data))
        cur = new

    stage("prop12", lambda e: (*prop12(e, tol), {}))
    stage("prop13", lambda e: (*prop13(e, tol), {}))

    def h25(e):
        e2, steps, data = _huang25_stage(e, tol)
        return e2, steps, data.to_json() if data is not None else {}

    stage("huang25", h25)
    stage("g_reduce", lambda e: (*g_reduce(e, tol), {}))
    try:
        report = rank_detect(cur, tol)
    except BSDError as exc:
        raise StageError("rank_detect", exc) from exc
    records.append(StageRecord("rank_detect", [], True, report.to_json()))
    try:
        fact = hamada_factor(cur, report, tol)
    except BSDError as exc:
        raise StageError("hamada_factor", exc) from exc
    records.append(StageRecord("hamada_factor", [], True, fact.to_json()))
    if report.rank == 1:
        stage("huangji_reduce", lambda e: (*huangji_reduce(e, report, tol), {}))
    return Certificate(
        E.source, E.target, E.D, verdict_text(report.rank, report.sigma), report.sigma, records, cur,
        report.to_json(), fact.to_json(), report.ambiguous,
    )


# the Psi identity ------------------------------------------------------------------------------
@dataclass
class PsiReport:
    a: object
    c: object
    holds: bool
    conformal: bool
    T: list
    A: float

    def to_json(self):
        return {"a": format_scalar(self.a), "c": format_scalar(self.c), "holds": self.holds,
                "conformal": self.conformal, "A": self.A,
                "T": [[format_scalar(x) for x in r] for r in self.T]}


def moebius_whitney_quad(c, root, p):
    """V_c(X) = (X', X_p (x) phi_c(X)) as quadratic forms on C^{p+1}."""
    exact = c.exact
    n = p + 1

    def form(entries):
        S = cmat.const(n, n, 0, exact)
        for (x, y), v in entries.items():
            S[x][y] = S[x][y] + v
        return S

    one = Scalar.of(1, exact)
    forms = [form({(0, 0): one, (0, p): -c})]
    for k in range(1, p):
        forms.append(form({(k, 0): one, (k, p): -c}))
    for k in range(1, p):
        forms.append(form({(p, k): root}))
    forms.append(form({(p, 0): c, (p, p): -one}))
    return proj.QuadMap(forms, p - 1, 2 * p - 2)


def _solve_left(R, L, tol=DEFAULT_TOL):
    """T with T R = L for row-stacked flattened forms; None when inconsistent."""
    m = len(R)
    cols = len(R[0])
    aug = [[R[k][x] for k in range(m)] + [L[k][x] for k in range(len(L))] for x in range(cols)]
    red, piv = cmat._rref(aug, tol)
    if any(pc >= m for pc in piv) or len(piv) < m:
        return None
    Tt = [red[r][m:] for r in range(m)]
    T = cmat.transpose(Tt)
    if not cmat.equal(cmat.mul(T, R), L, max(tol, 1e-12) if not cmat.is_exact(R) else tol):
        return None
    return T


def psi_identity(a, p=3, tol=DEFAULT_TOL):
    """Check V_c o phi_c = T o W o phi_a, c = 2a/(1+a^2), for a ball automorphism T.

    Exact when sqrt(1 - a^2) is rational (then sqrt(1 - c^2) = (1 - a^2)/(1 + a^2)
    is too); otherwise on floats.  The usage of phi_c^{-1} is phi_c itself,
    phi_c being an involution.
    """
    a = a if isinstance(a, Scalar) else Scalar.of(a, not isinstance(a, float))
    one = Scalar.of(1, a.exact)
    try:
        ra = sqrt_pos_real(one - a * a, tol)
    except NotRepresentable:
        a = a.to_float()
        one = one.to_float()
        ra = sqrt_pos_real(one - a * a, tol)
    c = a * 2 / (one + a * a)
    rc = (one - a * a) / (one + a * a)
    exact = a.exact
    phi_a = proj.sphere_moebius_matrix(a, p, ra, exact)
    phi_c = proj.sphere_moebius_matrix(c, p, rc, exact)
    lhs = moebius_whitney_quad(c, rc, p).compose_source(phi_c)
    rhs = proj.QuadMap(proj.sphere_whitney_quad(p, exact), p - 1, 2 * p - 2).compose_source(phi_a)
    R = [[x for row in S for x in row] for S in rhs.forms]
    L = [[x for row in S for x in row] for S in lhs.forms]
    T = _solve_left(R, L, tol)
    if T is None:
        return PsiReport(a, c, False, False, [], float("nan"))
    rho = proj.sphere_form(2 * p - 1, exact)
    k = proj.isometry_factor(T, rho, tol=tol)
    conformal = k is not None and k.re > 0
    centre = [T[j][0].to_complex() / T[0][0].to_complex() for j in range(1, len(T))]
    A = float(np.linalg.norm(centre))
    return PsiReport(a, c, True, conformal, T, A)
