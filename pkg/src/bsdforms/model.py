"""Quadric models Im W = Z Z^*, embeddings between them, and the Cayley transform.

A signature (p, q) gives the Shilov boundary of p x q matrices with
orthonormal columns and the model in coordinates (W, Z), W of size q x q and
Z of size q x N with N = p - q.  Boundary points are p x q matrices whose
first q rows are the W-block of the Cayley transform.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import cmat
from .errors import BasePointMismatch, DimensionMismatch, SingularConstantTerm
from .matser import (
    MatrixSeries,
    evaluate,
    hstack,
    herm_transpose,
    mat_inverse,
    mat_mul,
    odot,
    pseudo_product,
    transpose,
    vstack,
)
from .scalars import DEFAULT_TOL, Scalar, format_scalar, imag_unit
from .series import TSeries, catalog, format_monomial, monomial_key


@dataclass(frozen=True)
class ModelSignature:
    """Signature (p, q) with q < p."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or self.p <= self.q:
            raise DimensionMismatch(f"need 1 <= q < p, got p={self.p}, q={self.q}")

    @property
    def N(self):
        return self.p - self.q

    @property
    def ambient_dim(self):
        return self.q * self.N + self.q * self.q

    def catalog(self):
        return catalog(self.q, self.N)

    def to_json(self):
        return {"p": self.p, "q": self.q}

    @classmethod
    def from_json(cls, d):
        return cls(int(d["p"]), int(d["q"]))


@dataclass
class Embedding:
    """Formal map (Z, W) -> (F, G) from the source model to the target model."""

    source: ModelSignature
    target: ModelSignature
    F: MatrixSeries
    G: MatrixSeries
    recentred: bool = True

    def __post_init__(self):
        t = self.target
        if self.F.shape != (t.q, t.N) or self.G.shape != (t.q, t.q):
            raise DimensionMismatch(
                f"F must be {t.q}x{t.N} and G {t.q}x{t.q}, got {self.F.shape}, {self.G.shape}"
            )
        cat = self.source.catalog()
        for m in (self.F, self.G):
            if m.cat is not cat:
                raise DimensionMismatch("F and G must live in the source catalog")
            for r in m.entries:
                for e in r:
                    if e.kinds_present() - {"z", "w"}:
                        raise ValueError("F and G must be holomorphic in (Z, W)")
        if self.recentred:
            for m in (self.F, self.G):
                if any(e.constant_term() for r in m.entries for e in r):
                    raise ValueError("F(0) and G(0) must vanish")

    @property
    def D(self):
        return min(self.F.D, self.G.D)

    @property
    def exact(self):
        return self.F.exact

    def to_float(self):
        return Embedding(self.source, self.target, self.F.to_float(), self.G.to_float(), self.recentred)

    def chop(self, tol=DEFAULT_TOL):
        return Embedding(self.source, self.target, self.F.chop(tol), self.G.chop(tol), self.recentred)

    def truncate(self, D):
        return Embedding(self.source, self.target, self.F.truncate(D), self.G.truncate(D), self.recentred)

    def isclose(self, other, tol=DEFAULT_TOL):
        a, b = self, other
        if a.exact != b.exact:
            a, b = a.to_float(), b.to_float()
        return a.F.isclose(b.F, tol) and a.G.isclose(b.G, tol)

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.F == other.F
            and self.G == other.G
        )

    # serialization ----------------------------------------------------------
    def to_json(self):
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "truncation": self.D,
            "backend": "exact" if self.exact else "float",
            "F": self.F.to_text(),
            "G": self.G.to_text(),
        }

    @classmethod
    def from_json(cls, d):
        src = ModelSignature.from_json(d["source"])
        tgt = ModelSignature.from_json(d["target"])
        D = int(d["truncation"])
        exact = d.get("backend", "exact") == "exact"
        cat = src.catalog()
        F = MatrixSeries.from_text(d["F"], cat, D, exact)
        G = MatrixSeries.from_text(d["G"], cat, D, exact)
        return cls(src, tgt, F, G)

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


@dataclass
class ResidualReport:
    """Residual (G - G^*)/2i - F F^* after model substitution."""

    residual: MatrixSeries
    degree: int
    is_zero: bool
    offender: tuple | None = None  # (row, col, monomial text, coefficient text)
    max_abs: float = 0.0

    def describe(self):
        if self.is_zero:
            return f"residual: zero to degree {self.degree}"
        i, j, mono, c = self.offender
        return f"residual: nonzero at entry ({i + 1},{j + 1}), monomial {mono}, coefficient {c}"


# model substitution -----------------------------------------------------------
def model_substitution(sig, D=6, exact=True):
    """Map w[k,l] -> s[k,l] + i<Z,Z>_{kl} and wb[k,l] -> s[l,k] - i<Z,Z>_{lk}."""
    cat = sig.catalog()
    Z = MatrixSeries.variables(cat, D, "z", exact)
    zz = pseudo_product(Z, Z)
    i = imag_unit(exact)
    q = sig.q
    out = {}
    for k in range(1, q + 1):
        for l in range(1, q + 1):
            out[("w", k, l)] = TSeries.var(cat, D, "s", k, l, exact) + zz[k - 1, l - 1].scale(i)
            out[("wb", k, l)] = TSeries.var(cat, D, "s", l, k, exact) - zz[l - 1, k - 1].scale(i)
    return out


def _on_model(m, sig, D):
    sub = model_substitution(sig, D, m.exact)
    return m.truncate(D).substitute({k: v for k, v in sub.items() if k[0] == "w"})


def residual(E, D=None, tol=DEFAULT_TOL):
    """Residual report of the embedding equation, truncated at ``D``.

    On the float backend ``tol`` is relative: it is scaled by the square of
    the largest coefficient of F and G (the residual is quadratic in them).
    """
    D = E.D if D is None else min(D, E.D)
    if not E.exact:
        size = max((e.max_abs() for m in (E.F, E.G) for r in m.entries for e in r), default=0.0)
        tol = tol * max(1.0, size) ** 2
    G = _on_model(E.G, E.source, D)
    F = _on_model(E.F, E.source, D)
    half_over_i = Scalar.of(1, E.exact) / (imag_unit(E.exact) * 2)
    R = (G - herm_transpose(G)).scale(half_over_i) - pseudo_product(F, F)
    R = R.chop(tol)
    return _report(R, D, tol)


def _report(R, D, tol):
    offender = None
    best = None
    for i, row in enumerate(R.entries):
        for j, e in enumerate(row):
            for m, c in e.terms.items():
                if c.is_zero(tol):
                    continue
                key = (monomial_key(e.cat, m), i, j)
                if best is None or key < best:
                    best = key
                    offender = (i, j, format_monomial(e.cat, m), format_scalar(c))
    max_abs = max((e.max_abs() for r in R.entries for e in r), default=0.0)
    return ResidualReport(R, D, offender is None, offender, max_abs)


# Cayley transform ---------------------------------------------------------------
def cayley(sig, W, Z):
    """Boundary point C(W, Z) (p x q) with C^t = (W + iI)^{-1} [W - iI, 2Z].

    ``W``, ``Z`` are numpy arrays (numeric mode) or `MatrixSeries`
    (symbolic mode, expanded at the origin).
    """
    q = sig.q
    if isinstance(W, MatrixSeries):
        i = imag_unit(W.exact)
        iI = MatrixSeries.identity(W.cat, W.D, q, W.exact, i)
        inv = mat_inverse(W + iI)
        Ct = mat_mul(inv, hstack(W - iI, Z.scale(2)))
        return transpose(Ct)
    W = np.asarray(W, dtype=complex)
    Z = np.asarray(Z, dtype=complex)
    I = np.eye(q)
    M = W + 1j * I
    if abs(np.linalg.det(M)) < 1e-14:
        raise SingularConstantTerm("W + iI is singular")
    Ct = np.linalg.solve(M, np.hstack([W - 1j * I, 2 * Z]))
    return Ct.T


def inverse_cayley(sig, Zt):
    """Inverse transform of a p x q boundary matrix: returns (W, Z)."""
    q = sig.q
    if isinstance(Zt, MatrixSeries):
        if Zt.shape != (sig.p, q):
            raise DimensionMismatch(f"expected {sig.p}x{q}, got {Zt.shape}")
        X = transpose(Zt.block(0, q, 0, q))
        Y = transpose(Zt.block(q, sig.p, 0, q))
        one = MatrixSeries.identity(Zt.cat, Zt.D, q, Zt.exact)
        i = imag_unit(Zt.exact)
        W = mat_mul(one + X, mat_inverse(one - X)).scale(i)
        Z = mat_mul(W + one.scale(i), Y).scale(Scalar.of(1, Zt.exact) / 2)
        return W, Z
    Zt = np.asarray(Zt, dtype=complex)
    X = Zt[:q, :].T
    Y = Zt[q:, :].T
    I = np.eye(q)
    if abs(np.linalg.det(I - X)) < 1e-14:
        raise SingularConstantTerm("I - zeta_1 is singular")
    W = 1j * (I + X) @ np.linalg.inv(I - X)
    Z = (W + 1j * I) @ Y / 2
    return W, Z


def base_point(sig):
    """cayley(0, 0): -I on the W-block, zero below."""
    out = np.zeros((sig.p, sig.q), dtype=complex)
    out[: sig.q, : sig.q] = -np.eye(sig.q)
    return out


def symbolic_cayley(sig, D=6, exact=True):
    cat = sig.catalog()
    W = MatrixSeries.variables(cat, D, "w", exact)
    Z = MatrixSeries.variables(cat, D, "z", exact)
    return cayley(sig, W, Z)


def boundary_defect(Zt):
    """I - Zt^* Zt for a boundary matrix (series or numeric)."""
    if isinstance(Zt, MatrixSeries):
        one = MatrixSeries.identity(Zt.cat, Zt.D, Zt.cols, Zt.exact)
        return one - mat_mul(herm_transpose(Zt), Zt)
    Zt = np.asarray(Zt)
    return np.eye(Zt.shape[1]) - Zt.conj().T @ Zt


# boundary maps ------------------------------------------------------------------
@dataclass
class BoundaryMap:
    """Polynomial map between boundaries, usable on series and numeric matrices.

    ``fn`` takes a p x q matrix (a `MatrixSeries` or numpy array) and returns
    a p' x q' matrix of the same kind, using only ring operations.
    """

    source: ModelSignature
    target: ModelSignature
    fn: object
    name: str = "map"
    params: dict = field(default_factory=dict)

    def __call__(self, Zt):
        return self.fn(Zt)

    def then(self, other, name=None):
        if other.source != self.target:
            raise DimensionMismatch("boundary maps do not compose")
        f, g = self.fn, other.fn
        return BoundaryMap(self.source, other.target, lambda Zt: g(f(Zt)), name or f"{other.name}*{self.name}")


def _pad(Zt_rows, sig_t, q_src, like):
    """Place a block with q_src columns into a target boundary matrix.

    The extra columns carry -I in the W-block rows q_src..q'-1, so the base
    point goes to the target base point and columns stay orthonormal.
    """
    p_t, q_t = sig_t.p, sig_t.q
    if isinstance(like, MatrixSeries):
        zero = TSeries.zero(like.cat, like.D, like.exact)
        minus_one = TSeries.const(like.cat, like.D, -1, like.exact)
    else:
        zero, minus_one = 0j, -1 + 0j
    out = [[zero] * q_t for _ in range(p_t)]
    for k in range(q_t - q_src):
        out[q_src + k][q_src + k] = minus_one
    return out


def class_representative(kind, source, target):
    """Linear or Whitney representative as a `BoundaryMap`."""
    p, q = source.p, source.q
    pt, qt = target.p, target.q
    if target.N != 2 * source.N:
        raise DimensionMismatch("target must satisfy p' - q' = 2 (p - q)")
    if qt < q:
        raise DimensionMismatch("target has fewer columns than source")
    if kind == "linear":
        if pt < p + (qt - q):
            raise DimensionMismatch("target cannot host the linear block")

        def fn(Zt):
            series = isinstance(Zt, MatrixSeries)
            rows = Zt.entries if series else Zt
            out = _pad(None, target, q, Zt)
            for r in range(q):
                out[r][:q] = list(rows[r])
            for r in range(q, p):
                out[r + (qt - q)][:q] = list(rows[r])
            return MatrixSeries(out) if series else np.array(out, dtype=complex)

    elif kind == "whitney":
        if pt < 2 * p - 1 + (qt - q):
            raise DimensionMismatch(f"target with p'={pt} cannot host {2 * p - 1} Whitney rows")

        def fn(Zt):
            series = isinstance(Zt, MatrixSeries)
            block = whitney_block(Zt)
            rows = block.entries if series else block
            out = _pad(None, target, q, Zt)
            for r in range(q):
                out[r][:q] = list(rows[r])
            for r in range(q, 2 * p - 1):
                out[r + (qt - q)][:q] = list(rows[r])
            return MatrixSeries(out) if series else np.array(out, dtype=complex)

    else:
        raise ValueError(f"unknown class {kind!r}")
    return BoundaryMap(source, target, fn, kind)


def whitney_block(Zt):
    """Rows 1..p-1 of Zt followed by the rows z_{p j} z_{k j}, k = 1..p."""
    if isinstance(Zt, MatrixSeries):
        last = Zt.block(Zt.rows - 1, Zt.rows, 0, Zt.cols)
        return vstack(Zt.block(0, Zt.rows - 1, 0, Zt.cols), odot(last, Zt))
    Zt = np.asarray(Zt)
    return np.vstack([Zt[:-1], Zt[-1][None, :] * Zt])


@dataclass
class BlockDefectReport:
    """I - B^* B for the Whitney block B of the symbolic Cayley point, on the model."""

    sig: ModelSignature
    degree: int
    defect: MatrixSeries
    is_zero: bool
    terms: list  # (row, col, monomial text, coefficient text), canonical order

    def describe(self):
        if self.is_zero:
            return f"whitney block: on the boundary to degree {self.degree}"
        return f"whitney block: {len(self.terms)} surviving terms to degree {self.degree}"


def whitney_block_defect(sig, D=4, exact=True):
    """Boundary defect of the displayed Whitney block at (p, q), reported verbatim."""
    B = whitney_block(symbolic_cayley(sig, D, exact))
    d = boundary_defect(B)
    sub = model_substitution(sig, D, exact)
    R = d.map(lambda e: e.substitute(sub))
    terms = []
    for i, row in enumerate(R.entries):
        for j, e in enumerate(row):
            for m in sorted(e.terms, key=lambda m: monomial_key(e.cat, m)):
                terms.append((i + 1, j + 1, format_monomial(e.cat, m), format_scalar(e.terms[m])))
    return BlockDefectReport(sig, D, R, not terms, terms)


def transport_boundary_map(V, source=None, target=None, D=6, exact=True, tol=1e-12):
    """Embedding C'^{-1} o V o C, expanded at the origin to degree ``D``."""
    source = source or V.source
    target = target or V.target
    image = V(base_point(source))
    if np.abs(np.asarray(image) - base_point(target)).max() > tol:
        raise BasePointMismatch("map does not send the base point to the target base point")
    Zt = symbolic_cayley(source, D, exact)
    Wt, Ft = inverse_cayley(target, V(Zt))
    return Embedding(source, target, Ft, Wt)


# sampling -----------------------------------------------------------------------
def sample_shilov(sig, count, seed=0):
    """Random boundary points via QR of Gaussian matrices."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.standard_normal((sig.p, sig.q)) + 1j * rng.standard_normal((sig.p, sig.q))
        Q, R = np.linalg.qr(a)
        out.append(Q * (np.sign(np.diag(R).real) + (np.diag(R).real == 0)))
    return out


def sample_model(sig, count, seed=0, scale=1.0):
    """Random model points (W, Z) with W = S + i Z Z^*, S Hermitian."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        Z = scale * (rng.standard_normal((sig.q, sig.N)) + 1j * rng.standard_normal((sig.q, sig.N)))
        A = scale * (rng.standard_normal((sig.q, sig.q)) + 1j * rng.standard_normal((sig.q, sig.q)))
        S = (A + A.conj().T) / 2
        out.append((S + 1j * Z @ Z.conj().T, Z))
    return out


def model_defect(W, Z):
    """(W - W^*)/2i - Z Z^* at a numeric point."""
    return (W - W.conj().T) / 2j - Z @ Z.conj().T


def model_point_vector(sig, W, Z):
    """Catalog-ordered values (z, zb, w, wb, s) at a numeric model point."""
    S = (W + W.conj().T) / 2
    vals = []
    vals += list(Z.reshape(-1))
    vals += list(Z.conj().reshape(-1))
    vals += list(W.reshape(-1))
    vals += list(W.conj().reshape(-1))
    vals += list(S.reshape(-1))
    return np.array(vals, dtype=complex)


def evaluate_on_model(m, sig, W, Z):
    return evaluate(m, model_point_vector(sig, W, Z))


def write_samples_csv(path_or_file, mats):
    """Rows of re/im interleaved entries, row-major."""
    close = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if close else path_or_file
    try:
        w = csv.writer(fh)
        for m in mats:
            flat = np.asarray(m).reshape(-1)
            w.writerow([f"{v:.17g}" for x in flat for v in (x.real, x.imag)])
    finally:
        if close:
            fh.close()


