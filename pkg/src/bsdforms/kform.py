"""Quotient forms of projective quadratic maps between rank-one models.

For a quadratic lift P of an embedding, H'(P(Y)) = H(Y) K(Y) with K a
Hermitian form on C^{N+2}.  K is rank one for the linear class and rank
two, of split signature on the dual form, for the Whitney class.  Its range
rows (normalized against H^{-1}) together with an orthonormal complement
give a frame; matching frames of two maps yields the source automorphism
taking one K to the other.  Everything here is numerical (numpy).
"""
from __future__ import annotations

import numpy as np

from . import cmat
from . import projective as proj
from .errors import RankUndetermined, ReductionIncomplete

#: relative threshold for the numerical rank of K
RANK_TOL = 1e-8


def forms_array(Q):
    """Stacked symmetric forms of a `QuadMap` as a complex array (m, n, n)."""
    return np.array([cmat.to_numpy(S) for S in Q.forms], dtype=complex)


def _quad(forms, Y):
    return np.einsum("a,kab,b->k", Y, forms, Y)


def quotient_form(forms, H, Ht, samples=None, seed=0):
    """Hermitian K with Ht(P(Y)) = H(Y) K(Y), by least squares on sample points."""
    n = H.shape[0]
    rng = np.random.default_rng(seed)
    count = samples or 4 * n * n
    rows, rhs = [], []
    for _ in range(count):
        Y = rng.normal(size=n) + 1j * rng.normal(size=n)
        P = _quad(forms, Y)
        lhs = np.vdot(P, Ht @ P)
        h = np.vdot(Y, H @ Y)
        rows.append(h * np.outer(Y.conj(), Y).ravel())
        rhs.append(lhs)
    A = np.array(rows)
    b = np.array(rhs)
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    scale = max(np.abs(b).max(), 1.0)
    if np.abs(A @ x - b).max() > 1e-7 * scale:
        raise ReductionIncomplete("H'(P) is not divisible by H: input is not a model map")
    K = x.reshape(n, n)
    return (K + K.conj().T) / 2


def range_rows(K):
    """Rows R with K = R^* R (K positive semidefinite), via eigendecomposition."""
    vals, vecs = np.linalg.eigh(K)
    top = max(np.abs(vals).max(), 1e-300)
    if vals.min() < -RANK_TOL * top:
        raise RankUndetermined(f"quotient form is indefinite (eigenvalues {vals})")
    keep = [k for k in range(len(vals)) if vals[k] > RANK_TOL * top]
    return np.array([np.sqrt(vals[k]) * vecs[:, k].conj() for k in reversed(keep)])


def frame(K, H):
    """H^{-1}-orthonormal rows: normalized range rows of K then a complement.

    Returns (F, signs) with F Hinv F^* = diag(signs).  Range rows come first,
    positive before negative.
    """
    Hinv = np.linalg.inv(H)
    R = range_rows(K)
    G = R @ Hinv @ R.conj().T
    G = (G + G.conj().T) / 2
    vals, vecs = np.linalg.eigh(G)
    order = np.argsort(-vals)
    vals, vecs = vals[order], vecs[:, order]
    if np.any(np.abs(vals) < RANK_TOL * max(np.abs(vals).max(), 1e-300)):
        raise RankUndetermined("range of the quotient form is degenerate for the model form")
    R1 = vecs.conj().T @ R
    R1 = R1 / np.sqrt(np.abs(vals))[:, None]
    signs = list(np.sign(vals).astype(int))
    # complement: x Hinv R1^* = 0, orthonormal for -Hinv (negative definite there)
    M = Hinv @ R1.conj().T
    _, s, vh = np.linalg.svd(M.T)
    null = vh[len(R1):].conj()
    comp = []
    for x in null:
        for c in comp:
            x = x - (-(x @ Hinv @ c.conj())) * c
        nrm = -(x @ Hinv @ x.conj()).real
        if nrm <= 0:
            raise RankUndetermined("complement of the quotient range is not definite")
        comp.append(x / np.sqrt(nrm))
    F = np.vstack([R1] + ([np.array(comp)] if comp else []))
    return F, signs + [-1] * len(comp)


def _unit_to(v, u):
    """Unitary Q taking the direction of v to that of u (identity if either vanishes)."""
    n = len(v)
    nv, nu = np.linalg.norm(v), np.linalg.norm(u)
    if nv < 1e-14 or nu < 1e-14:
        return np.eye(n, dtype=complex)
    a, b = v / nv, u / nu

    def basis(x):
        Q, _ = np.linalg.qr(np.column_stack([x, np.eye(n, dtype=complex)]))
        d = Q[:, 0].conj() @ x
        Q[:, 0] *= d / abs(d)
        return Q

    return basis(b) @ basis(a).conj().T


def align_source(K, K_ref, H, base=None):
    """Matrix B with B^* H B = H and K(B Y) proportional to K_ref(Y).

    The frames fix B up to phases on the range rows and a unitary on the
    complement.  With ``base`` given, that freedom is spent on keeping B(base)
    close to base: B fixes it whenever some admissible B does.
    """
    F, s = frame(K, H)
    F_ref, s_ref = frame(K_ref, H)
    if s != s_ref:
        raise RankUndetermined(f"quotient-form signatures differ: {s} vs {s_ref}")
    if base is not None:
        k = len(range_rows(K))
        u, v = F @ base, F_ref @ base
        G = np.eye(len(F), dtype=complex)
        for i in range(k):
            if abs(u[i]) > 1e-12 and abs(v[i]) > 1e-12:
                G[i, i] = (u[i] / abs(u[i])) / (v[i] / abs(v[i]))
        G[k:, k:] = _unit_to(v[k:], u[k:])
        F_ref = G @ F_ref
    return np.linalg.solve(F, F_ref)


def solve_target(forms, forms_ref, tol=1e-9):
    """U with sum_l U_kl P_ref,l = P_k for all k, by least squares on the forms."""
    m = forms.shape[0]
    A = forms_ref.reshape(forms_ref.shape[0], -1)
    B = forms.reshape(m, -1)
    X, *_ = np.linalg.lstsq(A.T, B.T, rcond=None)
    U = X.T
    err = np.abs(U @ A - B).max()
    if err > tol * max(np.abs(B).max(), 1.0):
        raise ReductionIncomplete(f"maps differ by more than a target automorphism (misfit {err:.3e})")
    return U


def rank_of(K):
    vals = np.linalg.eigvalsh(K)
    top = max(np.abs(vals).max(), 1e-300)
    return int(np.sum(np.abs(vals) > RANK_TOL * top))


def model_forms(N):
    return np.array(cmat.to_numpy(proj.form_matrix(N, False)), dtype=complex)
