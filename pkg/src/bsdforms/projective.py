"""Homogeneous coordinates for rank-one models (q = 1).

A model point (z, w) is the line through Y = (1, z_1, ..., z_N, w).  The model
is the null cone of the Hermitian form

    H(Y) = (Y_w conj(Y_0) - Y_0 conj(Y_w)) / 2i - sum_j |Y_j|^2,

so model automorphisms are projective matrices M with M^* H M = c H, c > 0.
Maps in the linear and Whitney classes are quadratic in these coordinates:
each `QuadMap` component is a quadratic form Y^t S_k Y.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import cmat
from .errors import (
    DimensionMismatch,
    ReductionIncomplete,
    SingularConstantTerm,
    UnsupportedSignature,
)
from .matser import MatrixSeries
from .scalars import DEFAULT_TOL, Scalar, imag_unit
from .series import TSeries


def form_matrix(N, exact=True):
    """Matrix of H on C^{N+2}, coordinates (Y_0, Y_1..Y_N, Y_w)."""
    n = N + 2
    H = cmat.const(n, n, 0, exact)
    i = imag_unit(exact)
    half = Scalar.of(1, exact) / 2
    H[0][n - 1] = -(i * half)
    H[n - 1][0] = i * half
    for j in range(1, N + 1):
        H[j][j] = Scalar.of(-1, exact)
    return H


def sphere_form(p, exact=True):
    """rho(X) = -|X_0|^2 + sum |X_i|^2 on C^{p+1}."""
    R = cmat.identity(p + 1, exact)
    R[0][0] = Scalar.of(-1, exact)
    return R


def cayley_matrix(N, exact=True):
    """X = C Y with X_0 = Y_w + i Y_0, X_1 = Y_w - i Y_0, X_{1+j} = 2 Y_j.

    Satisfies C^* rho C = -4 H, so boundary maps and model maps correspond by
    conjugation with C.
    """
    n = N + 2
    i = imag_unit(exact)
    C = cmat.const(n, n, 0, exact)
    C[0][n - 1] = Scalar.of(1, exact)
    C[0][0] = i
    C[1][n - 1] = Scalar.of(1, exact)
    C[1][0] = -i
    for j in range(1, N + 1):
        C[1 + j][j] = Scalar.of(2, exact)
    return C


def to_model(Msphere, N):
    """Boundary matrix in U(1, p) -> model projective matrix."""
    exact = cmat.is_exact(Msphere)
    C = cayley_matrix(N, exact)
    return cmat.mul(cmat.inverse(C), cmat.mul(Msphere, C))


def to_sphere(Mmodel, N):
    exact = cmat.is_exact(Mmodel)
    C = cayley_matrix(N, exact)
    return cmat.mul(C, cmat.mul(Mmodel, cmat.inverse(C)))


def isometry_factor(M, H_src, H_tgt=None, tol=DEFAULT_TOL):
    """Return c with M^* H_tgt M = c H_src, or None."""
    H_tgt = H_src if H_tgt is None else H_tgt
    lhs = cmat.mul(cmat.adjoint(M), cmat.mul(H_tgt, M))
    n = len(H_src)
    ref = next((a, b) for a in range(n) for b in range(n) if H_src[a][b])
    c = lhs[ref[0]][ref[1]] / H_src[ref[0]][ref[1]]
    if not c.is_real(tol):
        return None
    if not cmat.equal(lhs, cmat.scale(H_src, c), tol):
        return None
    return c


# projective matrices acting on series --------------------------------------------
def homogeneous_vector(Z, W):
    """(1, z_1..z_N, w) from 1 x N and 1 x 1 matrix series."""
    one = TSeries.const(Z.cat, Z.D, 1, Z.exact)
    return [one] + list(Z.entries[0]) + [W.entries[0][0]]


def dehomogenize(Y):
    inv = Y[0].invert_unit()
    Z = MatrixSeries([[y * inv for y in Y[1:-1]]])
    W = MatrixSeries([[Y[-1] * inv]])
    return Z, W


def apply_matrix(M, Y):
    out = []
    for row in M:
        acc = TSeries.zero(Y[0].cat, Y[0].D, Y[0].exact)
        for m, y in zip(row, Y):
            if m and y.terms:
                acc = acc + y.scale(m)
        out.append(acc)
    return out


def act_matrix(M, Z, W):
    """Projective action of M on series arguments (Z, W)."""
    Y = apply_matrix(M, homogeneous_vector(Z, W))
    if not Y[0].constant_term():
        raise SingularConstantTerm("image leaves the affine chart at the expansion point")
    return dehomogenize(Y)


# standard matrices (model coordinates) ------------------------------------------
def translation_matrix(Z0, W0, exact=True):
    """(z, w) -> (z + z0, w + w0 + 2i <z, z0>)."""
    N = len(Z0)
    n = N + 2
    i = imag_unit(exact)
    M = cmat.identity(n, exact)
    for j in range(N):
        M[1 + j][0] = Z0[j]
        M[n - 1][1 + j] = i * 2 * Z0[j].conj()
    M[n - 1][0] = W0
    return M


def isotropy_matrix(a, r, exact=True):
    """(z, w) -> ((z + a w)/q, w/q), q = 1 - 2i<z,a> - (r + i|a|^2) w."""
    N = len(a)
    n = N + 2
    i = imag_unit(exact)
    M = cmat.identity(n, exact)
    norm = sum((x.abs2() for x in a), Scalar.of(0, exact))
    for j in range(N):
        M[0][1 + j] = -(i * 2) * a[j].conj()
        M[1 + j][n - 1] = a[j]
    M[0][n - 1] = -(r + i * norm)
    return M


def linear_matrix(c, U, exact=True):
    """(z, w) -> (c z U, |c|^2 w) with U unitary N x N, c a nonzero scalar."""
    N = len(U)
    n = N + 2
    M = cmat.const(n, n, 0, exact)
    M[0][0] = Scalar.of(1, exact)
    for j in range(N):
        for k in range(N):
            M[1 + j][1 + k] = c * U[k][j]
    M[n - 1][n - 1] = c.abs2()
    return M


def sphere_moebius_matrix(b, p, root, exact=True):
    """phi_b(zeta', zeta_p) = (root zeta', b - zeta_p) / (1 - b zeta_p), root = sqrt(1 - b^2)."""
    M = cmat.const(p + 1, p + 1, 0, exact)
    M[0][0] = Scalar.of(1, exact)
    M[0][p] = -b
    for j in range(1, p):
        M[j][j] = root
    M[p][0] = b
    M[p][p] = Scalar.of(-1, exact)
    return M


# quadratic maps -------------------------------------------------------------------
class QuadMap:
    """Projective map Y -> (Y^t S_k Y)_k with symmetric S_k.

    ``forms`` holds one (n x n) coefficient matrix per target coordinate,
    ordered (Y'_0, Y'_1..Y'_{N'}, Y'_w).
    """

    def __init__(self, forms, N_src, N_tgt):
        self.forms = [_symmetrize(S) for S in forms]
        self.N_src = N_src
        self.N_tgt = N_tgt
        if len(forms) != N_tgt + 2:
            raise DimensionMismatch("need N' + 2 quadratic forms")

    @property
    def exact(self):
        return cmat.is_exact(self.forms[0])

    def compose_source(self, M):
        """Y -> self(M Y)."""
        Mt = cmat.transpose(M)
        return QuadMap([cmat.mul(Mt, cmat.mul(S, M)) for S in self.forms], self.N_src, self.N_tgt)

    def compose_target(self, M):
        """Y -> M self(Y)."""
        n = len(self.forms[0])
        out = []
        for row in M:
            acc = cmat.const(n, n, 0, self.exact)
            for m, S in zip(row, self.forms):
                if m:
                    acc = cmat.add(acc, cmat.scale(S, m))
            out.append(acc)
        return QuadMap(out, self.N_src, len(M) - 2)

    def scale(self, c):
        return QuadMap([cmat.scale(S, c) for S in self.forms], self.N_src, self.N_tgt)

    def to_float(self):
        return QuadMap([cmat.to_float(S) for S in self.forms], self.N_src, self.N_tgt)

    def evaluate(self, Y):
        Y = np.asarray(Y, dtype=complex)
        return np.array([Y @ cmat.to_numpy(S) @ Y for S in self.forms])

    def series(self, cat, D):
        """Affine expansion at the origin: (F, G) as matrix series."""
        exact = self.exact
        Z = MatrixSeries.variables(cat, D, "z", exact)
        W = MatrixSeries.variables(cat, D, "w", exact)
        Y = homogeneous_vector(Z, W)
        P = []
        for S in self.forms:
            acc = TSeries.zero(cat, D, exact)
            for a, ya in enumerate(Y):
                for b, yb in enumerate(Y):
                    if S[a][b]:
                        acc = acc + (ya * yb).scale(S[a][b])
            P.append(acc)
        if not P[0].constant_term():
            raise SingularConstantTerm("origin maps outside the affine chart")
        return dehomogenize(P)

    def equals_projectively(self, other, tol=DEFAULT_TOL):
        a = [x for S in self.forms for row in S for x in row]
        b = [x for S in other.forms for row in S for x in row]
        k = next((j for j, x in enumerate(b) if not x.is_zero(tol)), None)
        if k is None or a[k].is_zero(tol):
            return False
        c = a[k] / b[k]
        return all((x - c * y).is_zero(tol) for x, y in zip(a, b))


def _symmetrize(S):
    n = len(S)
    half = Scalar.of(1, cmat.is_exact(S)) / 2
    return [[(S[a][b] + S[b][a]) * half for b in range(n)] for a in range(n)]


def sphere_whitney_quad(p, exact=True):
    """Whitney map X -> (X_0^2, X_0 X_1..X_0 X_{p-1}, X_p X_1..X_p X_p) on C^{p+1}."""
    n = p + 1
    forms = []

    def prod(a, b):
        S = cmat.const(n, n, 0, exact)
        S[a][b] = S[a][b] + 1
        return S

    forms.append(prod(0, 0))
    for k in range(1, p):
        forms.append(prod(0, k))
    for k in range(1, p + 1):
        forms.append(prod(p, k))
    return forms


def sphere_linear_quad(p, p_t, exact=True):
    """X -> X_0 (X_0, X_1..X_p, 0..0): the linear class, written quadratically."""
    n = p + 1
    forms = []
    for k in range(p_t + 1):
        S = cmat.const(n, n, 0, exact)
        if k <= p:
            S[0][k] = S[0][k] + 1
        forms.append(S)
    return forms


def model_quadmap_from_sphere(sphere_forms, N, N_t):
    """Conjugate a spherical quadratic map by the Cayley matrices."""
    exact = cmat.is_exact(sphere_forms[0])
    C = cayley_matrix(N, exact)
    Ct_inv = cmat.inverse(cayley_matrix(N_t, exact))
    q = QuadMap(sphere_forms, N, N_t)
    return q.compose_source(C).compose_target(Ct_inv)


def quad_whitney(N, exact=True):
    return model_quadmap_from_sphere(sphere_whitney_quad(N + 1, exact), N, 2 * N)


def quad_linear(N, exact=True):
    return model_quadmap_from_sphere(sphere_linear_quad(N + 1, 2 * N + 1, exact), N, 2 * N)


# rational lift from series ---------------------------------------------------------
def _ordinary_monomials(cat, max_deg):
    """Holomorphic monomials (z, w only) of ordinary degree <= max_deg, as exponent tuples."""
    hol = list(cat.positions("z")) + list(cat.positions("w"))
    out = []
    for d in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(hol, d):
            m = [0] * cat.nvars
            for n in combo:
                m[n] += 1
            out.append(tuple(m))
    return out


def _ord(m):
    return sum(m)


def lift_embedding(E, tol=DEFAULT_TOL):
    """Projective quadratic lift of a q = 1 embedding known to degree D.

    Finds a common denominator Q (ordinary degree <= 2, Q(0) = 1) such that
    Q F and Q G are polynomials of ordinary degree <= 2, checks every known
    coefficient, and homogenizes.  Raises `ReductionIncomplete` when no such
    lift matches the data.
    """
    if E.source.q != 1 or E.target.q != 1:
        raise UnsupportedSignature("projective lift needs q = q' = 1")
    cat = E.source.catalog()
    D = E.D
    exact = E.exact
    comps = list(E.F.entries[0]) + [E.G.entries[0][0]]
    for den_deg in (0, 1, 2):
        num_deg = 2
        den_monos = [m for m in _ordinary_monomials(cat, den_deg) if _ord(m) >= 1]
        sol = _solve_denominator(comps, den_monos, num_deg, cat, D, exact, tol)
        if sol is None:
            continue
        Q = TSeries.const(cat, D, 1, exact)
        for m, c in zip(den_monos, sol):
            if c:
                Q = Q + TSeries(cat, D, {m: c}, exact)
        nums = [(Q * f) for f in comps]
        if any(_ord(m) > num_deg for f in nums for m, c in f.terms.items() if not c.is_zero(tol)):
            continue
        # verify: nums / Q reproduces every component to D
        inv = Q.invert_unit()
        if not all(((n * inv) - f).is_zero(tol) for n, f in zip(nums, comps)):
            continue
        nums = [n.filter(lambda m: _ord(m) <= num_deg) for n in nums]
        return _homogenize([Q] + nums, cat, E.source.N, E.target.N, exact)
    raise ReductionIncomplete("no quadratic rational lift matches the series data")


def _solve_denominator(comps, den_monos, num_deg, cat, D, exact, tol):
    if not den_monos:
        ok = all(_ord(m) <= num_deg for f in comps for m in f.terms)
        return [] if ok else None
    rows = []
    rhs = []
    deg = cat.degree
    targets = set()
    for f in comps:
        for m in f.terms:
            for dm in den_monos + [cat.unit()]:
                prod = tuple(x + y for x, y in zip(m, dm))
                if _ord(prod) > num_deg and deg(prod) <= D:
                    targets.add(prod)
    for f in comps:
        for mu in sorted(targets):
            row = []
            for dm in den_monos:
                rest = tuple(x - y for x, y in zip(mu, dm))
                row.append(f.coeff(rest) if min(rest) >= 0 else Scalar.of(0, exact))
            rows.append(row)
            rhs.append(-f.coeff(mu))
    if not rows:
        return [Scalar.of(0, exact) for _ in den_monos]
    aug = [r + [b] for r, b in zip(rows, rhs)]
    if exact:
        m, piv = cmat._rref(aug, tol)
        if len(den_monos) in piv:
            return None
        if len(piv) < len(den_monos):
            raise ReductionIncomplete(f"quadratic lift is underdetermined at truncation {D}")
        sol = [Scalar.of(0, exact) for _ in den_monos]
        for r, pc in enumerate(piv):
            sol[pc] = m[r][-1]
        return sol
    A = np.array([[x.to_complex() for x in r] for r in rows])
    b = np.array([x.to_complex() for x in rhs])
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if np.abs(A @ x - b).max(initial=0.0) > 1e3 * tol:
        return None
    if rank < len(den_monos):
        raise ReductionIncomplete(f"quadratic lift is underdetermined at truncation {D}")
    return [Scalar.of(complex(v), False) for v in x]


def _homogenize(polys, cat, N, N_t, exact):
    """Degree-<=2 polynomials in (z, w) -> symmetric forms in (Y_0, Y_z, Y_w)."""
    n = N + 2
    index = {}
    for j, pos in enumerate(cat.positions("z")):
        index[pos] = 1 + j
    index[cat.positions("w")[0]] = n - 1
    forms = []
    for P in polys:
        S = cmat.const(n, n, 0, exact)
        for m, c in P.terms.items():
            slots = [index[pos] for pos, e in enumerate(m) for _ in range(e)]
            slots += [0] * (2 - len(slots))
            a, b = slots
            S[a][b] = S[a][b] + c
        forms.append(S)
    return QuadMap(forms, N, N_t)
