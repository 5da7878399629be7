"""Model automorphisms: construction, certification, composition and application.

Every automorphism carries an ``act`` rule built from ring operations, so it
can be applied to any pair of matrix series (target-side application) and
expanded at the origin (its coordinate images).  Construction certifies the
images: the self-map must have identically zero model residual.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import cmat
from . import projective as proj
from .errors import (
    CertificationFailed,
    DimensionMismatch,
    NotPositiveDefinite,
    NotRepresentable,
    OrderViolation,
    ParameterOutOfRange,
    PointNotOnModel,
    RealityRelationViolated,
    SignatureMismatch,
    UnsupportedSignature,
)
from .matser import (
    MatrixSeries,
    coeff_mul,
    mat_mul,
    mul_coeff,
    pseudo_product,
    tensor_action,
)
from .model import BoundaryMap, Embedding, ModelSignature, residual
from .scalars import DEFAULT_TOL, Scalar, format_scalar, imag_unit, parse_scalar, sqrt_pos_real

#: working truncation for certificates and images
DEFAULT_D = 6


# coefficient-matrix helpers ---------------------------------------------------------
def realign(A, q):
    """Rearranged matrix with entry ((i,k),(j,l)) = a^{ij}_{kl} (row-major pairs)."""
    R = cmat.const(q * q, q * q, 0, cmat.is_exact(A))
    for i in range(q):
        for j in range(q):
            for k in range(q):
                for l in range(q):
                    R[i * q + k][j * q + l] = A[i * q + j][k * q + l]
    return R


def congruence_coefficients(C):
    """Coefficients of W -> C W C^*, i.e. a^{ij}_{kl} = c_{ik} conj(c_{jl})."""
    return cmat.kron(C, cmat.conj(C))


def is_hermitian_coefficient(A, q, tol=DEFAULT_TOL):
    """a^{ij}_{kl} = conj(a^{ji}_{lk}), equivalently the realigned matrix is Hermitian."""
    return cmat.is_hermitian(realign(A, q), tol)


def lemma11_construct(A, N, tol=DEFAULT_TOL):
    """Z-coefficients V (qN x qN) making W -> A (x) W, Z -> V (x) Z preserve the model.

    The realigned matrix of A must be Hermitian positive semidefinite of rank
    one, i.e. A is the congruence W -> C W C^* with C = vec^{-1} of its range
    vector; then V = C (x) I_N.  Exact when some diagonal entry of the
    realigned matrix is a rational square, otherwise on floats.
    """
    n = len(A)
    q = int(round(n ** 0.5))
    if q * q != n or len(A[0]) != n:
        raise DimensionMismatch(f"coefficient matrix must be q^2 x q^2, got {n}x{len(A[0])}")
    R = realign(A, q)
    if not cmat.is_hermitian(R, tol):
        raise NotPositiveDefinite("coefficient matrix violates a^{ij}_{kl} = conj(a^{ji}_{lk})")
    if cmat.rank(R, tol) != 1:
        raise NotPositiveDefinite(
            f"realigned coefficient matrix has rank {cmat.rank(R, tol)}; "
            "only rank-one (W -> C W C^*) changes preserve the model"
        )
    diag = [R[m][m] for m in range(n)]
    if any(not d.is_real(tol) or d.re < -tol for d in diag):
        raise NotPositiveDefinite("realigned coefficient matrix is not positive semidefinite")
    C = _range_factor(R, q, tol)
    if cmat.rank(C, tol) < q:
        raise NotPositiveDefinite("congruence factor is singular")
    return cmat.kron(C, cmat.identity(N, cmat.is_exact(C)))


def _range_factor(R, q, tol):
    exact = cmat.is_exact(R)
    n = q * q
    candidates = [m for m in range(n) if not R[m][m].is_zero(tol)]
    for m in candidates:
        try:
            root = sqrt_pos_real(R[m][m], tol)
        except NotRepresentable:
            continue
        inv = root.inv()
        v = [R[k][m] * inv for k in range(n)]
        return [[v[i * q + k] for k in range(q)] for i in range(q)]
    if not exact:
        raise NotPositiveDefinite("zero coefficient matrix")
    return _range_factor(cmat.to_float(R), q, tol)


def hermitian_to_congruence(H, tol=DEFAULT_TOL):
    """Cholesky factor L of a Hermitian PD H (exact when the pivots allow)."""
    try:
        return cmat.cholesky(H, tol)
    except NotRepresentable:
        return cmat.cholesky(cmat.to_float(H), tol)


# automorphism type --------------------------------------------------------------------
@dataclass
class ModelAutomorphism:
    """Certified coordinate change of one model.

    ``act(Z, W)`` evaluates the change on matrix series arguments; ``images``
    are its values on the coordinate functions at truncation ``D``.
    """

    sig: ModelSignature
    tag: str
    params: dict
    act: object = field(repr=False)
    inverse_fn: object = field(repr=False, default=None)
    D: int = DEFAULT_D
    exact: bool = True
    parts: tuple = ()
    matrix: list | None = field(default=None, repr=False)
    images: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.images is None:
            cat = self.sig.catalog()
            Z = MatrixSeries.variables(cat, self.D, "z", self.exact)
            W = MatrixSeries.variables(cat, self.D, "w", self.exact)
            self.images = self.act(Z, W)

    @property
    def Z_image(self):
        return self.images[0]

    @property
    def W_image(self):
        return self.images[1]

    def fixes_origin(self, tol=DEFAULT_TOL):
        return all(c.is_zero(tol) for m in self.images for r in m.constant() for c in r)

    def certificate(self, tol=DEFAULT_TOL):
        E = Embedding(self.sig, self.sig, self.images[0], self.images[1], recentred=False)
        return residual(E, tol=tol)

    def certify(self, tol=DEFAULT_TOL):
        rep = self.certificate(tol)
        if not rep.is_zero:
            raise CertificationFailed(f"{self.tag}: {rep.describe()}")
        return self

    def inverse(self):
        if self.inverse_fn is None:
            raise NotImplementedError(f"{self.tag} has no inverse")
        return self.inverse_fn()

    def is_identity(self, tol=DEFAULT_TOL):
        cat = self.sig.catalog()
        Z = MatrixSeries.variables(cat, self.D, "z", self.exact)
        W = MatrixSeries.variables(cat, self.D, "w", self.exact)
        if not self.exact:
            Z, W = Z.to_float(), W.to_float()
        return self.images[0].isclose(Z, tol) and self.images[1].isclose(W, tol)

    # serialization ----------------------------------------------------------------
    def to_json(self):
        rec = {"tag": self.tag, "sig": self.sig.to_json(), "D": self.D,
               "backend": "exact" if self.exact else "float"}
        if self.tag == "composite":
            rec["parts"] = [a.to_json() for a in self.parts]
        else:
            rec["params"] = self.params
        return rec

    @classmethod
    def from_json(cls, rec):
        return automorphism_from_json(rec)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _mat_text(M):
    return [[format_scalar(x) for x in row] for row in M]


def _mat_parse(rows, exact):
    return [[parse_scalar(x, exact) for x in row] for row in rows]


def _vec_text(v):
    return [format_scalar(x) for x in v]


def _like(M, series):
    """Coefficient matrix converted to the backend of ``series``."""
    return M if cmat.is_exact(M) == series.exact or series.exact else cmat.to_float(M)


def _backend_of(*mats):
    for m in mats:
        if m and m[0]:
            return cmat.is_exact(m)
    return True


# constructors ---------------------------------------------------------------------------
def tensor_linear(A, V, sig, D=DEFAULT_D, tag="tensor_linear", extra=None, certify=True):
    """W' = A (x) W, Z' = V (x) Z."""
    q, N = sig.q, sig.N
    if cmat.shape(A) != (q * q, q * q) or cmat.shape(V) != (q * N, q * N):
        raise DimensionMismatch("tensor coefficients have the wrong size")
    exact = _backend_of(A)
    if cmat.is_exact(V) != exact:
        A, V = cmat.to_float(A), cmat.to_float(V)
        exact = False

    def act(Z, W):
        return tensor_action(_like(V, Z), Z), tensor_action(_like(A, W), W)

    def inverse():
        return tensor_linear(cmat.inverse(A), cmat.inverse(V), sig, D, tag, extra)

    params = {"A": _mat_text(A), "V": _mat_text(V)}
    if extra:
        params.update(extra)
    matrix = None
    if q == 1:
        M = cmat.const(N + 2, N + 2, 0, exact)
        M[0][0] = Scalar.of(1, exact)
        for j in range(N):
            for k in range(N):
                M[1 + j][1 + k] = V[j][k]
        M[N + 1][N + 1] = A[0][0]
        matrix = M
    a = ModelAutomorphism(sig, tag, params, act, inverse, D, exact, matrix=matrix)
    return a.certify() if certify else a


def tensor_auto(A, sig, D=DEFAULT_D):
    """W' = A (x) W with the Z-coefficients supplied by `lemma11_construct`."""
    V = lemma11_construct(A, sig.N)
    return tensor_linear(A, V, sig, D, "tensor_linear")


def congruence(C, sig, D=DEFAULT_D, U=None):
    """W' = C W C^*, Z' = C Z U (U unitary N x N, default identity)."""
    exact = _backend_of(C)
    U = cmat.identity(sig.N, exact) if U is None else U
    if cmat.is_exact(U) != exact:
        C, U = cmat.to_float(C), cmat.to_float(U)
    A = congruence_coefficients(C)
    V = cmat.kron(C, cmat.transpose(U))
    return tensor_linear(A, V, sig, D)


def dilation(c, sig, D=DEFAULT_D):
    """(Z, W) -> (c Z, |c|^2 W)."""
    exact = c.exact
    return congruence(cmat.identity(sig.q, exact, c), sig, D)


def unitary_frame(U, sig, D=DEFAULT_D):
    """Z -> Z U for an N x N unitary U; a list of per-row unitaries must agree."""
    if U and isinstance(U[0][0], list):
        first = U[0]
        for other in U[1:]:
            if not cmat.equal(first, other):
                raise CertificationFailed(
                    "per-row unitaries differ; <Z_i U_i, Z_j U_j> = <Z_i, Z_j> forces equality"
                )
        U = first
    N = sig.N
    if cmat.shape(U) != (N, N):
        raise DimensionMismatch(f"unitary must be {N}x{N}")
    if not cmat.equal(cmat.mul(U, cmat.adjoint(U)), cmat.identity(N, cmat.is_exact(U))):
        raise CertificationFailed("matrix is not unitary")
    exact = cmat.is_exact(U)
    A = cmat.identity(sig.q * sig.q, exact)
    V = cmat.kron(cmat.identity(sig.q, exact), cmat.transpose(U))
    return tensor_linear(A, V, sig, D, tag="unitary_frame", extra={"U": _mat_text(U)})


def _on_model_point(Z0, W0, tol):
    """(W0 - W0^*)/2i - Z0 Z0^* == 0."""
    q = len(W0)
    exact = cmat.is_exact(W0)
    half_i = Scalar.of(1, exact) / (imag_unit(exact) * 2)
    lhs = cmat.scale(cmat.sub(W0, cmat.adjoint(W0)), half_i)
    rhs = cmat.mul(Z0, cmat.adjoint(Z0))
    return cmat.equal(lhs, rhs, tol if not exact else 0.0)


def translation(Z0, W0, sig, D=DEFAULT_D, tag="translation", tol=1e-12):
    """sigma(Z, W) = (Z + Z0, W + W0 + 2i <Z, Z0>) for a model point (Z0, W0)."""
    Z0 = cmat.from_values(Z0) if not isinstance(Z0[0][0], Scalar) else Z0
    W0 = cmat.from_values(W0) if not isinstance(W0[0][0], Scalar) else W0
    exact = cmat.is_exact(W0)
    if cmat.is_exact(Z0) != exact:
        Z0, W0 = cmat.to_float(Z0), cmat.to_float(W0)
        exact = False
    if cmat.shape(Z0) != (sig.q, sig.N) or cmat.shape(W0) != (sig.q, sig.q):
        raise DimensionMismatch("translation point has the wrong shape")
    if not _on_model_point(Z0, W0, tol):
        raise PointNotOnModel("translation point is not on the model")
    i = imag_unit(exact)
    shifted = cmat.add(W0, cmat.identity(sig.q, exact, i))
    if cmat.rank(shifted) < sig.q:
        raise PointNotOnModel("W0 + iI is singular")

    def act(Z, W):
        Z0c, W0c = _like(Z0, Z), _like(W0, Z)
        Z0m = MatrixSeries.from_coeffs(Z.cat, Z.D, Z0c)
        W0m = MatrixSeries.from_coeffs(Z.cat, Z.D, W0c)
        cross = mul_coeff(Z, cmat.adjoint(Z0c)).scale(imag_unit(Z.exact) * 2)
        return Z + Z0m, W + W0m + cross

    def inverse():
        negZ = cmat.scale(Z0, Scalar.of(-1, exact))
        negW = cmat.scale(cmat.adjoint(W0), Scalar.of(-1, exact))
        other = "recentre_target" if tag == "translation" else "translation"
        return translation(negZ, negW, sig, D, other, tol)

    matrix = proj.translation_matrix(Z0[0], W0[0][0], exact) if sig.q == 1 else None
    params = {"Z0": _mat_text(Z0), "W0": _mat_text(W0)}
    return ModelAutomorphism(sig, tag, params, act, inverse, D, exact, matrix=matrix).certify()


def recentre_target(Z0, W0, sig, D=DEFAULT_D):
    """Inverse translation: moves the model point (Z0, W0) to the origin."""
    exact = cmat.is_exact(W0)
    negZ = cmat.scale(Z0, Scalar.of(-1, exact))
    negW = cmat.scale(cmat.adjoint(W0), Scalar.of(-1, exact))
    a = translation(negZ, negW, sig, D, "recentre_target")
    a.params = {"Z0": _mat_text(Z0), "W0": _mat_text(W0)}
    return a


def recentre(E, Z0, W0):
    """Moving point trick: E_p = tau o E o sigma_p, with tau the target translation to 0.

    The source translation moves the origin, so this goes through the
    projective lift of the embedding (rank-one models).
    """
    from .normalize import Step, apply_step

    sigma = translation(Z0, W0, E.source, E.D)
    if sigma.is_identity():
        return E
    E2 = apply_step(E, Step("source", sigma))
    F0, G0 = E2.F.constant(), E2.G.constant()
    tau = recentre_target(F0, G0, E.target, E.D)
    return apply(tau, E2, "target")


def projective_auto(M, sig, D=DEFAULT_D, tag="projective", extra=None, tol=DEFAULT_TOL):
    """Projective matrix M with M^* H M = c H, c > 0 (rank-one models only)."""
    if sig.q != 1:
        raise UnsupportedSignature("projective automorphisms need q = 1")
    N = sig.N
    if cmat.shape(M) != (N + 2, N + 2):
        raise DimensionMismatch(f"need a {N + 2}x{N + 2} matrix")
    exact = cmat.is_exact(M)
    H = proj.form_matrix(N, exact)
    c = proj.isometry_factor(M, H, tol=tol)
    if c is None or c.re <= 0:
        raise CertificationFailed("matrix does not preserve the model form")

    def act(Z, W):
        return proj.act_matrix(_like(M, Z), Z, W)

    def inverse():
        return projective_auto(cmat.inverse(M), sig, D, tag, extra, tol)

    params = {"M": _mat_text(M)}
    if extra:
        params.update(extra)
    return ModelAutomorphism(sig, tag, params, act, inverse, D, exact, matrix=M).certify(tol)


def isotropy(a, r, sig, D=DEFAULT_D):
    """T_{a,r}(z, w) = ((z + a w)/q, w/q), q = 1 - 2i<z,a> - (r + i|a|^2) w  (q = 1 models)."""
    if sig.q != 1:
        raise UnsupportedSignature("isotropy family implemented for q = 1")
    a = [Scalar.of(x) if not isinstance(x, Scalar) else x for x in a]
    r = r if isinstance(r, Scalar) else Scalar.of(r, a[0].exact)
    if not r.is_real():
        raise ParameterOutOfRange("r must be real")
    exact = a[0].exact
    if r.exact != exact:
        a = [x.to_float() for x in a]
        r = r.to_float()
        exact = False
    M = proj.isotropy_matrix(a, r, exact)
    extra = {"a": _vec_text(a), "r": format_scalar(r)}
    auto = projective_auto(M, sig, D, "isotropy", extra)
    neg = [-x for x in a]
    auto.inverse_fn = lambda: isotropy(neg, -r, sig, D)
    return auto


def block_shear(C, sig, split, D=DEFAULT_D, B=None, Dblk=None, tol=DEFAULT_TOL):
    """W' = P W P^*, Z' = P Z with P = [[I, 0], [C, I]] split after row ``split``.

    On the blocks this is W21 += C W11, W12 += W11 C^*, W22 += C W12 + W21 C^* + C W11 C^*.
    Optional B (the W12 coefficient) and Dblk (the W11-coefficient in W22) are
    checked against the reality relations B = C^*, Dblk = C C^*.
    """
    q = sig.q
    if not 0 < split < q:
        raise DimensionMismatch("shear split must lie strictly inside the W-block")
    if cmat.shape(C) != (q - split, split):
        raise DimensionMismatch(f"C must be {q - split}x{split}")
    if B is not None and not cmat.equal(B, cmat.adjoint(C), tol):
        raise RealityRelationViolated("B must equal C^*")
    if Dblk is not None and not cmat.equal(Dblk, cmat.mul(C, cmat.adjoint(C)), tol):
        raise RealityRelationViolated("D must equal C C^*")
    exact = cmat.is_exact(C)
    P = cmat.identity(q, exact)
    for i in range(q - split):
        for j in range(split):
            P[split + i][j] = C[i][j]
    a = congruence(P, sig, D)
    a.tag = "block_shear"
    a.params = {"C": _mat_text(C), "split": split}
    inv_C = cmat.scale(C, Scalar.of(-1, exact))
    a.inverse_fn = lambda: block_shear(inv_C, sig, split, D)
    return a


def identity_auto(sig, D=DEFAULT_D, exact=True):
    return compose([], sig, D, exact)


def compose(autos, sig=None, D=DEFAULT_D, exact=True):
    """Composite applying ``autos[0]`` first; nested composites are flattened."""
    flat = []
    for a in autos:
        flat.extend(a.parts if a.tag == "composite" else [a])
    if flat:
        sig = flat[0].sig
        D = min(a.D for a in flat)
        exact = all(a.exact for a in flat)
        if any(a.sig != sig for a in flat):
            raise SignatureMismatch("composite parts act on different models")

    def act(Z, W):
        for a in flat:
            Z, W = a.act(Z, W)
        return Z, W

    def inverse():
        return compose([a.inverse() for a in reversed(flat)], sig, D, exact)

    matrix = None
    if sig.q == 1 and all(a.matrix is not None for a in flat):
        M = cmat.identity(sig.N + 2, exact)
        for a in flat:
            am = a.matrix if exact else cmat.to_float(a.matrix)
            M = cmat.mul(am, M if exact else cmat.to_float(M))
        matrix = M
    return ModelAutomorphism(sig, "composite", {}, act, inverse, D, exact, tuple(flat), matrix)


# boundary transformations ------------------------------------------------------------
def moebius(b, sig, root=None):
    """phi_b on the boundary: M^t = [X | Y] -> (I - bY)^{-1} [sqrt(1-b^2) X, bI - Y].

    Y is the last q columns of M^t (the last q rows of the boundary matrix).
    ``root`` may supply sqrt(1 - b^2) exactly; otherwise it is computed, on
    floats when irrational.
    """
    b = b if isinstance(b, Scalar) else Scalar.of(b)
    if not b.is_real() or b.re < 0 or b.re >= 1:
        raise ParameterOutOfRange("need 0 <= b < 1")
    if root is None:
        one_minus = Scalar.of(1, b.exact) - b * b
        try:
            root = sqrt_pos_real(one_minus)
        except NotRepresentable:
            b = b.to_float()
            root = sqrt_pos_real(one_minus.to_float())
    p, q = sig.p, sig.q

    def fn(Zt):
        if isinstance(Zt, MatrixSeries):
            from .matser import hstack, mat_inverse, transpose

            Mt = transpose(Zt)
            X = Mt.block(0, q, 0, p - q)
            Y = Mt.block(0, q, p - q, p)
            one = MatrixSeries.identity(Zt.cat, Zt.D, q, Zt.exact)
            inv = mat_inverse(one - Y.scale(b))
            return transpose(mat_mul(inv, hstack(X.scale(root), one.scale(b) - Y)))
        Zt = np.asarray(Zt, dtype=complex)
        Mt = Zt.T
        X, Y = Mt[:, : p - q], Mt[:, p - q:]
        bb, rr = b.to_complex().real, root.to_complex().real
        inv = np.linalg.inv(np.eye(q) - bb * Y)
        return (inv @ np.hstack([rr * X, bb * np.eye(q) - Y])).T

    return BoundaryMap(sig, sig, fn, "moebius", {"b": format_scalar(b), "root": format_scalar(root)})


def moebius_target(a, sig, root=None):
    """Target-side variant with parameter a^2."""
    a = a if isinstance(a, Scalar) else Scalar.of(a)
    return moebius(a * a, sig, root)


def moebius_auto(b, sig, D=DEFAULT_D, root=None):
    """phi_b as a (non origin-fixing) model automorphism, q = 1."""
    phi = moebius(b, sig, root)
    bb = parse_scalar(phi.params["b"])
    rr = parse_scalar(phi.params["root"])
    M = proj.to_model(proj.sphere_moebius_matrix(bb, sig.p, rr, bb.exact), sig.N)
    a = projective_auto(M, sig, D, "moebius", {"b": phi.params["b"], "root": phi.params["root"]})
    a.inverse_fn = lambda: moebius_auto(b, sig, D, root)
    return a


def sphere_matrix_auto(Ms, sig, D=DEFAULT_D, tag="unitary_ball"):
    """Ball automorphism given by a U(1, p) matrix, transported to the model (q = 1)."""
    return projective_auto(proj.to_model(Ms, sig.N), sig, D, tag)


# application ------------------------------------------------------------------------------
def apply(a, E, side="target", lift=None):
    """Compose an automorphism with an embedding on the given side."""
    if side == "target":
        if a.sig != E.target:
            raise SignatureMismatch(f"automorphism of {a.sig} applied on target {E.target}")
        if not a.exact and E.exact:
            E = E.to_float()
        F2, G2 = a.act(E.F, E.G)
        rec = all(not c for m in (F2, G2) for r in m.constant() for c in r)
        return Embedding(E.source, E.target, F2, G2, recentred=rec)
    if side == "source":
        if a.sig != E.source:
            raise SignatureMismatch(f"automorphism of {a.sig} applied on source {E.source}")
        if not a.fixes_origin():
            raise OrderViolation("source-side application needs an origin-fixing automorphism")
        Zi, Wi = a.images
        if not a.exact and E.exact:
            E = E.to_float()
        elif a.exact and not E.exact:
            Zi, Wi = Zi.to_float(), Wi.to_float()
        mapping = {}
        for (kind, i, j) in E.source.catalog().variables:
            if kind == "z":
                mapping[(kind, i, j)] = Zi[i - 1, j - 1]
            elif kind == "w":
                mapping[(kind, i, j)] = Wi[i - 1, j - 1]
        return Embedding(E.source, E.target, E.F.substitute(mapping), E.G.substitute(mapping), E.recentred)
    raise ValueError(f"side must be 'source' or 'target', got {side!r}")


def automorphism_from_json(rec):
    sig = ModelSignature.from_json(rec["sig"])
    D = int(rec.get("D", DEFAULT_D))
    exact = rec.get("backend", "exact") == "exact"
    tag = rec["tag"]
    if tag == "composite":
        return compose([automorphism_from_json(r) for r in rec["parts"]], sig, D, exact)
    p = rec["params"]
    if tag == "tensor_linear":
        return tensor_linear(_mat_parse(p["A"], exact), _mat_parse(p["V"], exact), sig, D)
    if tag == "unitary_frame":
        return unitary_frame(_mat_parse(p["U"], exact), sig, D)
    if tag == "translation":
        return translation(_mat_parse(p["Z0"], exact), _mat_parse(p["W0"], exact), sig, D)
    if tag == "recentre_target":
        return recentre_target(_mat_parse(p["Z0"], exact), _mat_parse(p["W0"], exact), sig, D)
    if tag == "isotropy":
        return isotropy([parse_scalar(x, exact) for x in p["a"]], parse_scalar(p["r"], exact), sig, D)
    if tag == "block_shear":
        return block_shear(_mat_parse(p["C"], exact), sig, int(p["split"]), D)
    if tag == "moebius":
        return moebius_auto(parse_scalar(p["b"], exact), sig, D, parse_scalar(p["root"], exact))
    if tag in ("projective", "unitary_ball"):
        return projective_auto(_mat_parse(p["M"], exact), sig, D, tag)
    raise ValueError(f"unknown automorphism tag {tag!r}")


__all__ = [
    "ModelAutomorphism",
    "apply",
    "block_shear",
    "compose",
    "congruence",
    "congruence_coefficients",
    "dilation",
    "isotropy",
    "lemma11_construct",
    "moebius",
    "moebius_auto",
    "moebius_target",
    "projective_auto",
    "realign",
    "recentre_target",
    "tensor_auto",
    "tensor_linear",
    "translation",
    "unitary_frame",
]
