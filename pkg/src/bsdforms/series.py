"""Weighted truncated multivariate power series over `Scalar`.

Variables of a `VariableCatalog` for signature (q, N):

* ``z[i,j]`` and ``zb[i,j]`` (1 <= i <= q, 1 <= j <= N), weight 1;
* ``w[k,l]`` and ``wb[k,l]`` (1 <= k, l <= q), weight 2;
* ``s[k,l]`` (1 <= k, l <= q), weight 2 -- Hermitian parameters with
  ``conj(s[k,l]) = s[l,k]``, so ``s[k,k]`` is real.

Monomials are dense exponent tuples in catalog order.  A `TSeries` keeps every
term of weighted degree <= D and nothing else.
"""
from __future__ import annotations

import functools
import re

from .errors import BackendMismatch, CatalogMismatch, NotAUnit, OrderViolation
from .scalars import DEFAULT_TOL, Scalar, format_scalar, parse_scalar

KINDS = ("z", "zb", "w", "wb", "s")
WEIGHTS = {"z": 1, "zb": 1, "w": 2, "wb": 2, "s": 2}
_CONJ_KIND = {"z": "zb", "zb": "z", "w": "wb", "wb": "w", "s": "s"}


class VariableCatalog:
    """Variable list for one model signature; use `catalog(q, N)`."""

    def __init__(self, q, N):
        if q < 1 or N < 1:
            raise ValueError(f"catalog needs q >= 1 and N >= 1, got q={q}, N={N}")
        self.q = q
        self.N = N
        names = []
        for kind in KINDS:
            rows, cols = (q, N) if kind in ("z", "zb") else (q, q)
            for i in range(1, rows + 1):
                for j in range(1, cols + 1):
                    names.append((kind, i, j))
        self.variables = tuple(names)
        self.index = {v: n for n, v in enumerate(names)}
        self.weights = tuple(WEIGHTS[k] for k, _, _ in names)
        self.nvars = len(names)
        perm = []
        for kind, i, j in names:
            if kind == "s":
                perm.append(self.index[("s", j, i)])
            else:
                perm.append(self.index[(_CONJ_KIND[kind], i, j)])
        self.conj_perm = tuple(perm)
        self._kind_mask = {
            kind: tuple(n for n, v in enumerate(names) if v[0] == kind) for kind in KINDS
        }

    def __repr__(self):
        return f"VariableCatalog(q={self.q}, N={self.N})"

    def __reduce__(self):
        return (catalog, (self.q, self.N))

    def degree(self, mono):
        return sum(e * w for e, w in zip(mono, self.weights) if e)

    def unit(self):
        return (0,) * self.nvars

    def monomial(self, exps):
        """Build a monomial from ``{(kind, i, j): exponent}``."""
        m = [0] * self.nvars
        for var, e in exps.items():
            m[self.index[var]] += e
        return tuple(m)

    def describe(self, mono):
        """Sparse view ``{(kind, i, j): exponent}`` of a monomial."""
        return {self.variables[n]: e for n, e in enumerate(mono) if e}

    def positions(self, kind):
        return self._kind_mask[kind]

    def var_name(self, var):
        kind, i, j = var
        return f"{kind}{i}_{j}"


@functools.lru_cache(maxsize=None)
def catalog(q, N):
    return VariableCatalog(q, N)


def _mono_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


class TSeries:
    """Immutable truncated series; ``terms`` maps monomial tuples to Scalars."""

    __slots__ = ("cat", "D", "terms", "exact")

    def __init__(self, cat, D, terms=None, exact=True, _trusted=False):
        self.cat = cat
        self.D = D
        self.exact = exact
        if _trusted:
            self.terms = terms
            return
        clean = {}
        for m, c in (terms or {}).items():
            c = Scalar.of(c, exact)
            if c.exact != exact:
                raise BackendMismatch("coefficient backend differs from series backend")
            if c and cat.degree(m) <= D:
                clean[m] = c
        self.terms = clean

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, cat, D, exact=True):
        return cls(cat, D, {}, exact, _trusted=True)

    @classmethod
    def const(cls, cat, D, value, exact=True):
        value = Scalar.of(value, exact)
        if not value:
            return cls.zero(cat, D, exact)
        return cls(cat, D, {cat.unit(): value}, exact, _trusted=True)

    @classmethod
    def var(cls, cat, D, kind, i, j, exact=True, coeff=1):
        m = cat.monomial({(kind, i, j): 1})
        return cls(cat, D, {m: Scalar.of(coeff, exact)}, exact)

    def _like(self, terms, D=None):
        return TSeries(self.cat, self.D if D is None else D, terms, self.exact, _trusted=True)

    # basic queries --------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def is_zero(self, tol=DEFAULT_TOL):
        return all(c.is_zero(tol) for c in self.terms.values())

    def coeff(self, mono):
        c = self.terms.get(mono)
        return c if c is not None else Scalar.of(0, self.exact)

    def constant_term(self):
        return self.coeff(self.cat.unit())

    def order(self):
        """Lowest weighted degree present (infinity for the zero series)."""
        if not self.terms:
            return float("inf")
        return min(self.cat.degree(m) for m in self.terms)

    def max_degree(self):
        if not self.terms:
            return -1
        return max(self.cat.degree(m) for m in self.terms)

    def kinds_present(self):
        found = set()
        for m in self.terms:
            for n, e in enumerate(m):
                if e:
                    found.add(self.cat.variables[n][0])
        return found

    def max_abs(self):
        return max((abs(c.to_complex()) for c in self.terms.values()), default=0.0)

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if other.cat is not self.cat:
            raise CatalogMismatch(f"{self.cat} vs {other.cat}")
        if other.exact != self.exact:
            raise BackendMismatch("series backends differ")

    def _lift(self, other):
        if isinstance(other, TSeries):
            self._check(other)
            return other
        return TSeries.const(self.cat, self.D, other, self.exact)

    def __add__(self, other):
        other = self._lift(other)
        D = min(self.D, other.D)
        out = {m: c for m, c in self.terms.items()}
        for m, c in other.terms.items():
            if m in out:
                s = out[m] + c
                if s:
                    out[m] = s
                else:
                    del out[m]
            else:
                out[m] = c
        if D < max(self.D, other.D):
            out = {m: c for m, c in out.items() if self.cat.degree(m) <= D}
        return self._like(out, D)

    __radd__ = __add__

    def __neg__(self):
        return self._like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, k):
        k = Scalar.of(k, self.exact)
        if not k:
            return self._like({})
        return self._like({m: c * k for m, c in self.terms.items()})

    def _graded(self):
        deg = self.cat.degree
        return sorted(((deg(m), m, c) for m, c in self.terms.items()), key=lambda t: t[0])

    def __mul__(self, other):
        if not isinstance(other, TSeries):
            return self.scale(other)
        self._check(other)
        D = min(self.D, other.D)
        out = {}
        b_list = other._graded()
        for da, ma, ca in self._graded():
            room = D - da
            if room < 0:
                break
            for db, mb, cb in b_list:
                if db > room:
                    break
                m = _mono_add(ma, mb)
                c = ca * cb
                prev = out.get(m)
                out[m] = c if prev is None else prev + c
        return self._like({m: c for m, c in out.items() if c}, D)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("nonnegative integer powers only")
        result = TSeries.const(self.cat, self.D, 1, self.exact)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conj(self):
        """Bar involution: z <-> zb, w <-> wb, s[k,l] <-> s[l,k], coefficients conjugated."""
        perm = self.cat.conj_perm
        out = {}
        for m, c in self.terms.items():
            nm = [0] * len(m)
            for n, e in enumerate(m):
                if e:
                    nm[perm[n]] = e
            out[tuple(nm)] = c.conj()
        return self._like(out)

    def truncate(self, D):
        D = min(D, self.D)
        deg = self.cat.degree
        return self._like({m: c for m, c in self.terms.items() if deg(m) <= D}, D)

    def homogeneous_part(self, d):
        deg = self.cat.degree
        return self._like({m: c for m, c in self.terms.items() if deg(m) == d})

    def parts(self):
        """Homogeneous components ``{degree: TSeries}``."""
        deg = self.cat.degree
        buckets = {}
        for m, c in self.terms.items():
            buckets.setdefault(deg(m), {})[m] = c
        return {d: self._like(t) for d, t in sorted(buckets.items())}

    def filter(self, pred):
        """Keep the terms whose monomial satisfies ``pred``."""
        return self._like({m: c for m, c in self.terms.items() if pred(m)})

    def invert_unit(self):
        c0 = self.constant_term()
        if not c0:
            raise NotAUnit("constant term vanishes")
        inv0 = c0.inv()
        u = self.scale(inv0) - 1  # order >= 1
        result = TSeries.const(self.cat, self.D, 1, self.exact)
        power = TSeries.const(self.cat, self.D, 1, self.exact)
        neg_u = -u
        for _ in range(self.D):
            power = power * neg_u
            if not power.terms:
                break
            result = result + power
        return result.scale(inv0)

    def substitute(self, mapping, allow_affine=False):
        """Compose with ``{(kind, i, j): TSeries}``.

        Images must have weighted order at least the weight of the variable
        they replace; otherwise truncation would be unsound and
        `OrderViolation` is raised.  ``allow_affine=True`` waives the check
        for callers that know ``self`` is an exact polynomial.
        """
        if not mapping:
            return self
        images = {}
        target_cat = None
        D = self.D
        exact = self.exact
        for var, img in mapping.items():
            n = self.cat.index[var]
            if target_cat is None:
                target_cat, exact = img.cat, img.exact
            elif img.cat is not target_cat:
                raise CatalogMismatch("substitution images live in different catalogs")
            elif img.exact != exact:
                raise BackendMismatch("substitution images mix backends")
            if not allow_affine and img.order() < self.cat.weights[n]:
                raise OrderViolation(
                    f"image of {self.cat.var_name(var)} has order {img.order()} "
                    f"< weight {self.cat.weights[n]}"
                )
            D = min(D, img.D)
            images[n] = img
        if exact != self.exact:
            raise BackendMismatch("substitution images and series differ in backend")
        same = target_cat is self.cat
        unmapped_used = set()
        for m in self.terms:
            for n, e in enumerate(m):
                if e and n not in images:
                    unmapped_used.add(n)
        if unmapped_used and not same:
            names = ", ".join(self.cat.var_name(self.cat.variables[n]) for n in sorted(unmapped_used))
            raise CatalogMismatch(f"unmapped variables {names} cannot move to {target_cat}")
        for n in unmapped_used:
            images[n] = TSeries(target_cat, D, {target_cat.monomial({self.cat.variables[n]: 1}): 1}, exact)

        powers = {}

        def power(n, e):
            key = (n, e)
            if key not in powers:
                powers[key] = images[n] if e == 1 else power(n, e - 1) * images[n]
            return powers[key]

        total = TSeries.zero(target_cat, D, exact)
        for m, c in sorted(self.terms.items(), key=lambda t: self.cat.degree(t[0])):
            term = TSeries.const(target_cat, D, c, exact)
            for n, e in enumerate(m):
                if e:
                    term = term * power(n, e)
                    if not term.terms:
                        break
            if term.terms:
                total = total + term
        return total

    # backends ---------------------------------------------------------------
    def to_float(self):
        if not self.exact:
            return self
        return TSeries(self.cat, self.D, {m: c.to_float() for m, c in self.terms.items()}, False, _trusted=True)

    def chop(self, tol=DEFAULT_TOL):
        """Drop float coefficients below ``tol`` (no-op on the exact backend)."""
        if self.exact:
            return self
        return self._like({m: c for m, c in self.terms.items() if not c.is_zero(tol)})

    def isclose(self, other, tol=DEFAULT_TOL):
        return (self - other).is_zero(tol)

    def __eq__(self, other):
        if not isinstance(other, TSeries):
            return NotImplemented
        return (
            self.cat is other.cat
            and self.D == other.D
            and self.exact == other.exact
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.D, frozenset(self.terms.items())))

    # text -----------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: monomial_key(self.cat, t[0]))

    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return f"TSeries(D={self.D}, {format_series(self)})"


def monomial_key(cat, mono):
    """Graded order: weighted degree first, then lexicographically larger exponents first."""
    return (cat.degree(mono), tuple(-e for e in mono))


def format_monomial(cat, mono):
    parts = []
    for n, e in enumerate(mono):
        if e:
            name = cat.var_name(cat.variables[n])
            parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def format_series(a):
    if not a.terms:
        return "0"
    return " + ".join(f"({format_scalar(c)})*{format_monomial(a.cat, m)}" for m, c in a.sorted_terms())


_VAR_RE = re.compile(r"^(zb|wb|z|w|s)(\d+)_(\d+)(?:\^(\d+))?$")


def parse_series(text, cat, D, exact=True):
    """Inverse of `format_series`."""
    text = text.strip()
    if text == "0":
        return TSeries.zero(cat, D, exact)
    terms = {}
    for chunk in text.split(" + "):
        chunk = chunk.strip()
        if not chunk.startswith("("):
            raise ValueError(f"bad term {chunk!r}")
        close = chunk.index(")")
        coef = parse_scalar(chunk[1:close], exact)
        rest = chunk[close + 1:]
        if not rest.startswith("*"):
            raise ValueError(f"bad term {chunk!r}")
        mono = [0] * cat.nvars
        for factor in rest[1:].split("*"):
            if factor == "1":
                continue
            m = _VAR_RE.match(factor)
            if not m:
                raise ValueError(f"bad variable {factor!r}")
            var = (m.group(1), int(m.group(2)), int(m.group(3)))
            if var not in cat.index:
                raise CatalogMismatch(f"{factor} not in {cat}")
            mono[cat.index[var]] += int(m.group(4) or 1)
        mono = tuple(mono)
        terms[mono] = terms[mono] + coef if mono in terms else coef
    return TSeries(cat, D, terms, exact)


# convenience ---------------------------------------------------------------
def z(cat, D, i, j, exact=True):
    return TSeries.var(cat, D, "z", i, j, exact)


def zb(cat, D, i, j, exact=True):
    return TSeries.var(cat, D, "zb", i, j, exact)


def w(cat, D, k, l, exact=True):
    return TSeries.var(cat, D, "w", k, l, exact)


def s(cat, D, k, l, exact=True):
    return TSeries.var(cat, D, "s", k, l, exact)


def conj_involution(a):
    return a.conj()


def homogeneous_part(a, d):
    return a.homogeneous_part(d)


def coeff_extract(a, mono):
    return a.coeff(mono)


def invert_unit(a):
    return a.invert_unit()


def substitute(a, mapping, allow_affine=False):
    return a.substitute(mapping, allow_affine)


__all__ = [
    "KINDS",
    "TSeries",
    "VariableCatalog",
    "catalog",
    "coeff_extract",
    "conj_involution",
    "format_series",
    "homogeneous_part",
    "invert_unit",
    "parse_series",
    "substitute",
]
