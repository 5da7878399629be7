"""Deterministic scrambling of embeddings by certified automorphisms.

Parameters are drawn from small Gaussian rationals (and Pythagorean data for
rotations and Moebius maps), so scrambles of exact embeddings stay exact.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction as Fr

from . import cmat
from .autgroup import (
    apply,
    block_shear,
    congruence,
    dilation,
    isotropy,
    moebius_auto,
    recentre_target,
    translation,
    unitary_frame,
)
from .errors import UnsupportedSignature
from .model import Embedding, class_representative, transport_boundary_map
from .scalars import Scalar

PYTHAGOREAN = [(Fr(3, 5), Fr(4, 5)), (Fr(5, 13), Fr(12, 13)), (Fr(8, 17), Fr(15, 17))]
SMALL = [Fr(0), Fr(1, 2), Fr(-1, 2), Fr(1), Fr(-1), Fr(1, 3)]
DILATIONS = [(2, 0), (1, 1), (Fr(1, 2), 0), (1, -1), (Fr(1, 2), Fr(1, 2)), (3, 0)]

SOURCE_KINDS_Q1 = ("dilation", "unitary_frame", "isotropy", "translation", "moebius")
TARGET_KINDS_Q1 = ("dilation", "unitary_frame", "isotropy")
SOURCE_KINDS = ("dilation", "unitary_frame", "congruence", "block_shear")
TARGET_KINDS = ("dilation", "unitary_frame", "congruence", "block_shear")


def _gauss(rng, pool=SMALL):
    return Scalar.of(rng.choice(pool)) + Scalar.of(rng.choice(pool)) * Scalar._raw(Fr(0), Fr(1), True)


def rational_unitary(n, rng):
    """Permutation times unit phases times a Pythagorean rotation on a random pair."""
    perm = list(range(n))
    rng.shuffle(perm)
    phases = [Scalar.of(1), Scalar.of(-1), Scalar._raw(Fr(0), Fr(1), True), Scalar._raw(Fr(0), Fr(-1), True)]
    U = cmat.const(n, n, 0)
    for j in range(n):
        U[j][perm[j]] = rng.choice(phases)
    if n >= 2:
        c, s = rng.choice(PYTHAGOREAN)
        i, k = sorted(rng.sample(range(n), 2))
        R = cmat.identity(n)
        R[i][i], R[i][k], R[k][i], R[k][k] = Scalar.of(c), Scalar.of(-s), Scalar.of(s), Scalar.of(c)
        U = cmat.mul(U, R)
    return U


def random_automorphism(sig, rng, kind, D=6):
    q, N = sig.q, sig.N
    if kind == "dilation":
        a, b = rng.choice(DILATIONS)
        return dilation(Scalar._raw(Fr(a), Fr(b), True), sig, D)
    if kind == "unitary_frame":
        return unitary_frame(rational_unitary(N, rng), sig, D)
    if kind == "congruence":
        C = cmat.identity(q)
        for i in range(q):
            for j in range(q):
                if i != j:
                    C[i][j] = Scalar.of(rng.choice(SMALL))
        C[0][0] = Scalar.of(rng.choice([1, 2, Fr(1, 2)]))
        if cmat.rank(C) < q:
            C = cmat.identity(q)
        return congruence(C, sig, D)
    if kind == "block_shear":
        if q < 2:
            raise UnsupportedSignature("block shear needs q >= 2")
        split = rng.randrange(1, q)
        C = [[Scalar.of(rng.choice(SMALL[1:])) for _ in range(split)] for _ in range(q - split)]
        return block_shear(C, sig, split, D)
    if kind == "isotropy":
        a = [_gauss(rng) for _ in range(N)]
        r = Scalar.of(rng.choice(SMALL))
        return isotropy(a, r, sig, D)
    if kind == "translation":
        Z0 = [[_gauss(rng) for _ in range(N)] for _ in range(q)]
        S = cmat.const(q, q, 0)
        for i in range(q):
            S[i][i] = Scalar.of(rng.choice(SMALL))
        ZZ = cmat.mul(Z0, cmat.adjoint(Z0))
        W0 = cmat.add(S, cmat.scale(ZZ, Scalar._raw(Fr(0), Fr(1), True)))
        return translation(Z0, W0, sig, D)
    if kind == "moebius":
        b, root = rng.choice(PYTHAGOREAN)
        return moebius_auto(Scalar.of(b), sig, D, Scalar.of(root))
    raise ValueError(f"unknown automorphism kind {kind!r}")


@dataclass
class Scrambled:
    embedding: Embedding
    source_autos: list = field(default_factory=list)
    target_autos: list = field(default_factory=list)


def recentre(E):
    """Compose with the target translation taking E(0) back to the origin."""
    Z0, W0 = E.F.constant(), E.G.constant()
    if all(not x for r in Z0 for x in r) and all(not x for r in W0 for x in r):
        return E, None
    a = recentre_target(Z0, W0, E.target, E.D)
    return apply(a, E, "target"), a


def scramble(E, depth=2, seed=0, source_kinds=None, target_kinds=None):
    """E composed with ``depth`` random automorphisms on each side, then recentred."""
    from .normalize import Step, apply_step

    rng = random.Random(seed)
    q1 = E.source.q == 1 and E.target.q == 1
    sk = source_kinds or (SOURCE_KINDS_Q1 if q1 else SOURCE_KINDS)
    tk = target_kinds or (TARGET_KINDS_Q1 if q1 else TARGET_KINDS)
    out = Scrambled(E)
    for _ in range(depth):
        a = random_automorphism(E.source, rng, rng.choice(sk), E.D)
        E = apply_step(E, Step("source", a))
        out.source_autos.append(a)
        E, r = recentre(E)
        if r is not None:
            out.target_autos.append(r)
        b = random_automorphism(E.target, rng, rng.choice(tk), E.D)
        E = apply(b, E, "target")
        out.target_autos.append(b)
    E, r = recentre(E)
    if r is not None:
        out.target_autos.append(r)
    out.embedding = E
    return out


def representative(kind, source, target, D=6):
    """Transported class representative as an exact embedding."""
    return transport_boundary_map(class_representative(kind, source, target), source, target, D)


def scrambled_instance(kind, source, target, depth=2, seed=0, D=6):
    return scramble(representative(kind, source, target, D), depth, seed)
