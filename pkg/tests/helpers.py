"""Shared strategies and random generators for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction as Fr

from hypothesis import strategies as st

from bsdforms.matser import MatrixSeries
from bsdforms.scalars import Scalar
from bsdforms.series import TSeries, catalog

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
exact_scalars = st.builds(lambda a, b: Scalar(a, b), small_fracs, small_fracs)
nonzero_scalars = exact_scalars.filter(lambda x: bool(x))
float_scalars = st.builds(
    lambda a, b: Scalar(a, b, exact=False),
    st.floats(-10, 10, allow_nan=False),
    st.floats(-10, 10, allow_nan=False),
)


def random_scalar(rng, exact=True):
    a = Fr(rng.randint(-6, 6), rng.randint(1, 4))
    b = Fr(rng.randint(-6, 6), rng.randint(1, 4))
    s = Scalar(a, b)
    return s if exact else s.to_float()


def random_series(rng, cat, D, terms=5, kinds=None, exact=True, with_constant=False):
    """Sparse random series built from degree <= D monomials of the catalog."""
    kinds = kinds or ("z", "zb", "w", "s")
    variables = [v for v in cat.variables if v[0] in kinds]
    out = TSeries.const(cat, D, random_scalar(rng, exact) if with_constant else 0, exact)
    for _ in range(terms):
        t = TSeries.const(cat, D, random_scalar(rng, exact), exact)
        for _ in range(rng.randint(1, 3)):
            kind, i, j = rng.choice(variables)
            t = t * TSeries.var(cat, D, kind, i, j, exact)
        out = out + t
    return out


def random_matrix_series(rng, cat, D, rows, cols, **kw):
    return MatrixSeries([[random_series(rng, cat, D, **kw) for _ in range(cols)] for _ in range(rows)])


seeds = st.integers(min_value=0, max_value=10 ** 6)


def rng_of(seed):
    return random.Random(seed)


def small_catalog(rng):
    q = rng.choice([1, 2])
    N = rng.choice([1, 2])
    return catalog(q, N)
