"""Dense coefficient matrices over `Scalar` (lists of row lists).

Small and exact: Gauss-Jordan elimination, rank and kernels, Cholesky with
rational pivots, and unitary completion.  Float matrices use the same code
with a pivot tolerance.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, NotRepresentable, SingularConstantTerm
from .scalars import DEFAULT_TOL, Scalar, gaussian_root, sqrt_pos_real


def shape(a):
    return (len(a), len(a[0]) if a else 0)


def const(rows, cols, value=0, exact=True):
    v = Scalar.of(value, exact)
    return [[v for _ in range(cols)] for _ in range(rows)]


def identity(n, exact=True, scale=1):
    one = Scalar.of(scale, exact)
    zero = Scalar.of(0, exact)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def from_values(rows, exact=True):
    """Coerce nested lists of numbers (or a numpy array) to Scalars."""
    if isinstance(rows, np.ndarray):
        rows = rows.tolist()
    return [[Scalar.of(v, exact) for v in row] for row in rows]


def to_numpy(a):
    return np.array([[x.to_complex() for x in row] for row in a], dtype=complex)


def to_float(a):
    return [[x.to_float() for x in row] for row in a]


def is_exact(a):
    return a[0][0].exact if a and a[0] else True


def add(a, b):
    if shape(a) != shape(b):
        raise DimensionMismatch(f"{shape(a)} + {shape(b)}")
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a, b):
    if shape(a) != shape(b):
        raise DimensionMismatch(f"{shape(a)} - {shape(b)}")
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a, k):
    return [[x * k for x in row] for row in a]


def mul(a, b):
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise DimensionMismatch(f"{ra}x{ca} @ {rb}x{cb}")
    exact = is_exact(a)
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            acc = Scalar.of(0, exact)
            for k in range(ca):
                x = a[i][k]
                if x:
                    y = b[k][j]
                    if y:
                        acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def transpose(a):
    return [list(col) for col in zip(*a)]


def conj(a):
    return [[x.conj() for x in row] for row in a]


def adjoint(a):
    """Conjugate transpose."""
    return transpose(conj(a))


def kron(a, b):
    ra, ca = shape(a)
    rb, cb = shape(b)
    return [
        [a[i // rb][j // cb] * b[i % rb][j % cb] for j in range(ca * cb)]
        for i in range(ra * rb)
    ]


def equal(a, b, tol=DEFAULT_TOL):
    if shape(a) != shape(b):
        return False
    return all((x - y).is_zero(tol) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_hermitian(a, tol=DEFAULT_TOL):
    return equal(a, adjoint(a), tol)


def _rref(a, tol):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = [list(row) for row in a]
    rows, cols = shape(m)
    exact = is_exact(m)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        if exact:
            piv = next((i for i in range(r, rows) if m[i][c]), None)
        else:
            best = max(range(r, rows), key=lambda i: abs(m[i][c].to_complex()))
            piv = best if not m[best][c].is_zero(tol) else None
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c].inv()
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a, tol=DEFAULT_TOL):
    if not a or not a[0]:
        return 0
    if not is_exact(a):
        return int(np.linalg.matrix_rank(to_numpy(a), tol=tol))
    return len(_rref(a, tol)[1])


def inverse(a, tol=DEFAULT_TOL):
    n, c = shape(a)
    if n != c:
        raise DimensionMismatch("inverse of a non-square matrix")
    exact = is_exact(a)
    aug = [list(row) + e for row, e in zip(a, identity(n, exact))]
    m, piv = _rref(aug, tol)
    if piv[:n] != list(range(n)):
        raise SingularConstantTerm("matrix is singular")
    return [row[n:] for row in m]


def solve(a, b, tol=DEFAULT_TOL):
    """Solve ``a x = b`` for square invertible ``a``."""
    return mul(inverse(a, tol), b)


def nullspace(a, tol=DEFAULT_TOL):
    """Basis (list of column vectors as lists) of the right kernel."""
    rows, cols = shape(a)
    exact = is_exact(a)
    m, piv = _rref(a, tol)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = [Scalar.of(0, exact) for _ in range(cols)]
        v[f] = Scalar.of(1, exact)
        for r, pc in enumerate(piv):
            v[pc] = -m[r][f]
        basis.append(v)
    return basis


def vdot(u, v):
    """Hermitian product sum(u_k * conj(v_k))."""
    acc = u[0] * 0
    for x, y in zip(u, v):
        acc = acc + x * y.conj()
    return acc


def cholesky(h, tol=DEFAULT_TOL):
    """Lower-triangular L with h = L L^*.

    Exact input stays exact when every pivot is a rational perfect square;
    otherwise `NotRepresentable` is raised so the caller can lift.
    Non-positive pivots raise `NotPositiveDefinite`.
    """
    n, c = shape(h)
    if n != c or not is_hermitian(h, tol):
        raise NotPositiveDefinite("matrix is not Hermitian")
    exact = is_exact(h)
    L = const(n, n, 0, exact)
    for j in range(n):
        d = h[j][j]
        for k in range(j):
            d = d - L[j][k] * L[j][k].conj()
        if not d.is_real(tol) or d.re <= (0 if exact else tol):
            raise NotPositiveDefinite(f"pivot {j} is {d}")
        root = sqrt_pos_real(Scalar._raw(d.re, d.re * 0, exact), tol)
        L[j][j] = root
        inv = root.inv()
        for i in range(j + 1, n):
            acc = h[i][j]
            for k in range(j):
                acc = acc - L[i][k] * L[j][k].conj()
            L[i][j] = acc * inv
    return L


def is_positive_definite(h, tol=DEFAULT_TOL):
    if not is_hermitian(h, tol):
        return False
    ev = np.linalg.eigvalsh(to_numpy(h))
    return bool(ev.min() > tol)


def _rational_unit_candidates(n, exact):
    """Vectors of small Gaussian-integer entries, for exact orthonormal completion."""
    yield from (
        [Scalar.of(1 if k == j else 0, exact) for k in range(n)] for j in range(n)
    )
    vals = [1, -1, 2, -2]
    for i in range(n):
        for j in range(i + 1, n):
            for a in vals:
                for b in vals:
                    v = [Scalar.of(0, exact) for _ in range(n)]
                    v[i] = Scalar.of(a, exact)
                    v[j] = Scalar.of(b, exact)
                    yield v


def complete_orthonormal(rows, n, tol=DEFAULT_TOL):
    """Extend orthonormal row vectors in C^n to a unitary n x n matrix.

    Gram-Schmidt on candidate vectors; on the exact backend a candidate is
    accepted only when its residual norm is a sum of two rational squares, otherwise
    `NotRepresentable` is raised.
    """
    exact = is_exact(rows) if rows else True
    basis = [list(r) for r in rows]
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            target = 1 if i == j else 0
            if not (vdot(u, v) - target).is_zero(tol):
                raise NotPositiveDefinite("rows are not orthonormal")
    for cand in _rational_unit_candidates(n, exact):
        if len(basis) == n:
            break
        v = list(cand)
        for u in basis:
            c = vdot(v, u)
            v = [x - c * y for x, y in zip(v, u)]
        nrm = vdot(v, v)
        if nrm.is_zero(tol) or (not exact and nrm.re < 1e-6):
            continue
        try:
            r = gaussian_root(Scalar._raw(nrm.re, nrm.re * 0, exact), tol)
        except NotRepresentable:
            continue
        inv = r.inv()
        basis.append([x * inv for x in v])
    if len(basis) < n:
        raise NotRepresentable("no rational orthonormal completion found")
    return basis
