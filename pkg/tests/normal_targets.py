"""Literal coefficient conditions of each normalization stage (q = 1).

Written directly against the series terms, independent of the pipeline's own
checkers.
"""
from __future__ import annotations

from bsdforms.scalars import Scalar


def _is(m, cat, *vars_):
    want = [0] * cat.nvars
    for v in vars_:
        want[cat.index[v]] += 1
    return tuple(want) == m


def coeff(series, cat, *vars_):
    want = [0] * cat.nvars
    for v in vars_:
        want[cat.index[v]] += 1
    return series.coeff(tuple(want))


def zero(c, tol):
    return c.is_zero(tol) if not c.exact else not c


def lili1(E, tol=1e-9):
    """G = w + O(2): the w-coefficient of g is 1 and g has no z-linear terms."""
    cat = E.source.catalog()
    g = E.G[0, 0]
    ok = zero(coeff(g, cat, ("w", 1, 1)) - Scalar.of(1, E.exact), tol)
    return ok and all(zero(coeff(g, cat, ("z", 1, j + 1)), tol) for j in range(E.source.N))


def eq78(E, tol=1e-9):
    """F = (Z + O(2), O(2)): z-linear part of F is (Z, 0)."""
    cat = E.source.catalog()
    for k in range(E.target.N):
        for j in range(E.source.N):
            c = coeff(E.F[0, k], cat, ("z", 1, j + 1))
            want = Scalar.of(1 if j == k else 0, E.exact)
            if not zero(c - want, tol):
                return False
    return True


def eq99te(E, tol=1e-9):
    """df/dw(0) = 0."""
    cat = E.source.catalog()
    return all(zero(coeff(E.F[0, k], cat, ("w", 1, 1)), tol) for k in range(E.target.N))


def eq99se(E, tol=1e-9):
    """Symmetrized w^2 coefficient of g vanishes: (g_ww + conj g_ww)/2 = 0."""
    cat = E.source.catalog()
    c = coeff(E.G[0, 0], cat, ("w", 1, 1), ("w", 1, 1))
    return zero((c + c.conj()) / 2, tol)


def vvvq(E, tol=1e-9):
    """G = w exactly and F(0, w) = 0."""
    cat = E.source.catalog()
    zpos = cat.positions("z")
    w = cat.index[("w", 1, 1)]
    for m, c in E.G[0, 0].terms.items():
        unit_w = sum(m) == 1 and m[w] == 1
        if unit_w:
            if not zero(c - Scalar.of(1, E.exact), tol):
                return False
        elif not zero(c, tol):
            return False
    for k in range(E.target.N):
        for m, c in E.F[0, k].terms.items():
            if not any(m[n] for n in zpos) and not zero(c, tol):
                return False
    return True


def ooo2(E, tol=1e-9):
    """f = Z, phi = 0, g = w exactly."""
    from bsdforms.series import TSeries

    cat = E.source.catalog()
    for k in range(E.target.N):
        want = TSeries.var(cat, E.D, "z", 1, k + 1, E.exact) if k < E.source.N else TSeries.zero(cat, E.D, E.exact)
        if not all(zero(c, tol) for c in (E.F[0, k] - want).terms.values()):
            return False
    return vvvq(E, tol)


def ooo1(E, tol=1e-9):
    """Special variable z_1: f_1 and phi divisible by z_1, f_l = z_l for l >= 2."""
    cat = E.source.catalog()
    p1 = cat.index[("z", 1, 1)]
    N = E.source.N
    for k in range(E.target.N):
        for m, c in E.F[0, k].terms.items():
            if zero(c, tol):
                continue
            if 1 <= k < N:
                if not (_is(m, cat, ("z", 1, k + 1)) and zero(c - Scalar.of(1, E.exact), tol)):
                    return False
            elif m[p1] == 0:
                return False
    return True
