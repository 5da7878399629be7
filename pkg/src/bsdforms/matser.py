"""Matrices whose entries are truncated series."""
from __future__ import annotations

import numpy as np

from . import cmat
from .errors import DimensionMismatch, SingularConstantTerm
from .scalars import DEFAULT_TOL, Scalar
from .series import TSeries, format_series, parse_series


class MatrixSeries:
    """Rectangular matrix of `TSeries` sharing one catalog, truncation and backend."""

    __slots__ = ("rows", "cols", "entries", "cat", "D", "exact")

    def __init__(self, entries):
        if not entries or not entries[0]:
            raise DimensionMismatch("empty matrix")
        cols = len(entries[0])
        if any(len(r) != cols for r in entries):
            raise DimensionMismatch("ragged rows")
        first = entries[0][0]
        self.cat = first.cat
        self.exact = first.exact
        self.D = min(e.D for r in entries for e in r)
        self.entries = [[e if e.D == self.D else e.truncate(self.D) for e in r] for r in entries]
        self.rows = len(entries)
        self.cols = cols

    # constructors ---------------------------------------------------------
    @classmethod
    def zeros(cls, cat, D, rows, cols, exact=True):
        z = TSeries.zero(cat, D, exact)
        return cls([[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, cat, D, n, exact=True, scale=1):
        return cls.from_coeffs(cat, D, cmat.identity(n, exact, scale))

    @classmethod
    def from_coeffs(cls, cat, D, m):
        exact = cmat.is_exact(m)
        return cls([[TSeries.const(cat, D, x, exact) for x in row] for row in m])

    @classmethod
    def variables(cls, cat, D, kind, exact=True):
        """The matrix Z, Zb, W, Wb or S of catalog variables."""
        if kind in ("z", "zb"):
            rows, cols = cat.q, cat.N
        else:
            rows, cols = cat.q, cat.q
        return cls([[TSeries.var(cat, D, kind, i, j, exact) for j in range(1, cols + 1)] for i in range(1, rows + 1)])

    # access ---------------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def map(self, fn):
        return MatrixSeries([[fn(e) for e in r] for r in self.entries])

    def block(self, r0, r1, c0, c1):
        return MatrixSeries([r[c0:c1] for r in self.entries[r0:r1]])

    def constant(self):
        return [[e.constant_term() for e in r] for r in self.entries]

    def is_zero(self, tol=DEFAULT_TOL):
        return all(e.is_zero(tol) for r in self.entries for e in r)

    def truncate(self, D):
        return self.map(lambda e: e.truncate(D))

    def to_float(self):
        return self.map(lambda e: e.to_float())

    def chop(self, tol=DEFAULT_TOL):
        return self.map(lambda e: e.chop(tol))

    def homogeneous_part(self, d):
        return self.map(lambda e: e.homogeneous_part(d))

    def isclose(self, other, tol=DEFAULT_TOL):
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, MatrixSeries):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    __hash__ = None

    def __repr__(self):
        body = "; ".join(", ".join(format_series(e) for e in r) for r in self.entries)
        return f"MatrixSeries({self.rows}x{self.cols}: [{body}])"

    # arithmetic -----------------------------------------------------------
    def _same_shape(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        self._same_shape(other)
        return MatrixSeries([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._same_shape(other)
        return MatrixSeries([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, k):
        return self.map(lambda e: e.scale(k))

    def __matmul__(self, other):
        return mat_mul(self, other)

    def substitute(self, mapping, allow_affine=False):
        return self.map(lambda e: e.substitute(mapping, allow_affine))

    # text -----------------------------------------------------------------
    def to_text(self):
        return [[format_series(e) for e in r] for r in self.entries]

    @classmethod
    def from_text(cls, rows, cat, D, exact=True):
        return cls([[parse_series(t, cat, D, exact) for t in r] for r in rows])


def mat_mul(a, b):
    if a.cols != b.rows:
        raise DimensionMismatch(f"{a.shape} @ {b.shape}")
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = None
            for k in range(a.cols):
                x, y = a.entries[i][k], b.entries[k][j]
                if x.terms and y.terms:
                    t = x * y
                    acc = t if acc is None else acc + t
            if acc is None:
                acc = TSeries.zero(a.cat, min(a.D, b.D), a.exact)
            row.append(acc)
        out.append(row)
    return MatrixSeries(out)


def coeff_mul(m, a):
    """Coefficient matrix times matrix series."""
    r, c = cmat.shape(m)
    if c != a.rows:
        raise DimensionMismatch(f"{r}x{c} @ {a.shape}")
    return MatrixSeries([[_lincomb(m[i], [a.entries[k][j] for k in range(c)], a) for j in range(a.cols)] for i in range(r)])


def mul_coeff(a, m):
    """Matrix series times coefficient matrix."""
    r, c = cmat.shape(m)
    if a.cols != r:
        raise DimensionMismatch(f"{a.shape} @ {r}x{c}")
    return MatrixSeries([[_lincomb([m[k][j] for k in range(r)], a.entries[i], a) for j in range(c)] for i in range(a.rows)])


def _lincomb(weights, series, like):
    acc = TSeries.zero(like.cat, like.D, like.exact)
    for wgt, e in zip(weights, series):
        if wgt and e.terms:
            acc = acc + e.scale(wgt)
    return acc


def herm_transpose(a):
    return MatrixSeries([[a.entries[i][j].conj() for i in range(a.rows)] for j in range(a.cols)])


def transpose(a):
    return MatrixSeries([[a.entries[i][j] for i in range(a.rows)] for j in range(a.cols)])


def pseudo_product(z, v):
    """<Z, V> = Z conj(V)^t."""
    if z.cols != v.cols:
        raise DimensionMismatch(f"pseudo-product needs equal column counts, got {z.shape}, {v.shape}")
    return mat_mul(z, herm_transpose(v))


def hstack(*blocks):
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise DimensionMismatch("hstack row counts differ")
    return MatrixSeries([sum((b.entries[i] for b in blocks), []) for i in range(rows)])


def vstack(*blocks):
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise DimensionMismatch("vstack column counts differ")
    return MatrixSeries([list(r) for b in blocks for r in b.entries])


def flatten(a):
    """Row-major list of entries."""
    return [e for r in a.entries for e in r]


def unflatten(items, rows, cols):
    return MatrixSeries([items[i * cols:(i + 1) * cols] for i in range(rows)])


def tensor_action(v, z):
    """(V (x) Z)_{ij} = sum_{kl} v^{ij}_{kl} z_{kl} under row-major flattening."""
    n = z.rows * z.cols
    if cmat.shape(v) != (n, n):
        raise DimensionMismatch(f"tensor action needs {n}x{n} coefficients, got {cmat.shape(v)}")
    flat = flatten(z)
    return unflatten([_lincomb(v[r], flat, z) for r in range(n)], z.rows, z.cols)


def odot(z2, z):
    """Whitney product: entry (k, j) is z2[0, j] * z[k, j]."""
    if z2.rows != 1 or z2.cols != z.cols:
        raise DimensionMismatch(f"odot needs a 1x{z.cols} row, got {z2.shape}")
    return MatrixSeries([[z2.entries[0][j] * z.entries[k][j] for j in range(z.cols)] for k in range(z.rows)])


def mat_inverse(a, tol=DEFAULT_TOL):
    """Inverse via Neumann series around the constant part."""
    if a.rows != a.cols:
        raise DimensionMismatch("inverse of a non-square matrix")
    try:
        c_inv = cmat.inverse(a.constant(), tol)
    except SingularConstantTerm:
        raise SingularConstantTerm("constant term matrix is singular") from None
    n = a.rows
    # a = c (I + c^{-1} h), so a^{-1} = sum_k (-c^{-1} h)^k c^{-1}
    h = a.map(lambda e: e - e.constant_term())
    u = coeff_mul(cmat.scale(c_inv, Scalar.of(-1, a.exact)), h)
    total = MatrixSeries.identity(a.cat, a.D, n, a.exact)
    power = total
    for _ in range(a.D):
        power = mat_mul(power, u)
        if power.is_zero(0.0):
            break
        total = total + power
    return mul_coeff(total, c_inv)


def evaluate(a, point):
    """Numeric value at ``point`` (sequence of complex values in catalog order)."""
    return np.array([[evaluate_series(e, point) for e in r] for r in a.entries], dtype=complex)


def evaluate_series(e, point):
    total = 0j
    for m, c in e.terms.items():
        t = c.to_complex()
        for n, k in enumerate(m):
            if k:
                t *= point[n] ** k
        total += t
    return total
