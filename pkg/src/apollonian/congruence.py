"""Finite quotients of the Apollonian group, admissibility, and stabilizers.

The quotient of Gamma modulo q is computed by breadth-first closure over
the images of the free generators S1S2, S2S3, S3S4 and their inverses,
with matrices canonically encoded as 16 bytes of entries in [0, q).  The
order of the special orthogonal group of the Descartes form over F_p is
computed independently by orbit-stabilizer counting on spheres, giving an
oracle for the structure of the quotients at primes away from 2 and 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np

from . import core
from .orbit import CapExceededError

_GENS6 = np.array(core.GAMMA_GENERATORS + core.GAMMA_GENERATOR_INVERSES,
                  dtype=np.int64)


@dataclass
class QuotientClosure:
    q: int
    elements: np.ndarray  # (n, 16) uint8, row-major entries in [0, q)

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    def element_set(self) -> set:
        buf = self.elements.tobytes()
        return {buf[16 * i: 16 * (i + 1)] for i in range(self.order)}


def _keys(arr_flat_u8: np.ndarray) -> list:
    buf = arr_flat_u8.tobytes()
    return [buf[16 * i: 16 * (i + 1)] for i in range(arr_flat_u8.shape[0])]


def quotient_closure(q: int, gens=None, cap: int = 100_000_000) -> QuotientClosure:
    """Image of Gamma (or of the given 4x4 generators) in matrices mod q."""
    if q < 1:
        raise ValueError("q >= 1")
    if q > 255:
        raise CapExceededError("modulus above byte range is past the supported cap")
    if gens is None:
        gmats = _GENS6 % q
    else:
        gm = []
        for g in gens:
            ga = np.array(g, dtype=np.int64) % q
            gm.append(ga)
            gm.append(np.array(core.mat_inv(tuple(map(tuple, g))), dtype=object))
        # exact inverses may be rational only if det not unit; expect group input
        gmats = np.array([np.array(x, dtype=np.int64) % q for x in gm], dtype=np.int64)
    if q == 1:
        return QuotientClosure(1, np.zeros((1, 16), dtype=np.uint8))

    ident = (np.eye(4, dtype=np.int64) % q).astype(np.uint8).reshape(1, 16)
    seen = set(_keys(ident))
    frontier = ident.reshape(1, 4, 4).astype(np.int64)
    all_rows = [ident]
    while frontier.shape[0]:
        children = np.einsum("nij,gjk->ngik", frontier, gmats) % q
        children = children.reshape(-1, 16).astype(np.uint8)
        # in-batch dedup then set-diff against seen
        children = np.unique(children, axis=0)
        fresh_rows = []
        for key, row in zip(_keys(children), children):
            if key not in seen:
                seen.add(key)
                fresh_rows.append(row)
        if not fresh_rows:
            break
        fresh = np.stack(fresh_rows)
        all_rows.append(fresh)
        if sum(a.shape[0] for a in all_rows) > cap:
            raise CapExceededError(f"closure mod {q} exceeded cap {cap}")
        frontier = fresh.reshape(-1, 4, 4).astype(np.int64)
    return QuotientClosure(q, np.concatenate(all_rows))


@lru_cache(maxsize=64)
def quotient_order(q: int) -> int:
    return quotient_closure(q).order


def _count_norm(gram: np.ndarray, p: int, target: int) -> int:
    """#{v in F_p^k : v^t gram v = target}, by vectorized enumeration."""
    k = gram.shape[0]
    grids = np.meshgrid(*[np.arange(p)] * k, indexing="ij")
    v = np.stack([g.ravel() for g in grids])  # (k, p^k)
    q = np.einsum("in,ij,jn->n", v, gram % p, v) % p
    return int((q == target % p).sum())


def _orthogonal_complement_gram(gram: np.ndarray, u: np.ndarray, p: int):
    """Gram matrix of the form restricted to the hyperplane orthogonal to u."""
    k = gram.shape[0]
    w = (gram @ u) % p
    # basis of the kernel of w^t x = 0 mod p
    basis = []
    pivot = next(i for i in range(k) if w[i] % p)
    inv = pow(int(w[pivot]), -1, p)
    for i in range(k):
        if i == pivot:
            continue
        e = np.zeros(k, dtype=np.int64)
        e[i] = 1
        e[pivot] = (-w[i] * inv) % p
        basis.append(e)
    b = np.stack(basis, axis=1)  # k x (k-1)
    return (b.T @ gram @ b) % p, b


def so_f_order(p: int) -> int:
    """|SO of the Descartes form over F_p| by orbit-stabilizer on spheres.

    Independent of the group generators:  |O(Q_k)| = N_k * |O(Q_{k-1})|
    where N_k counts the vectors of the chosen anisotropic norm, down to
    |O(Q_1)| = 2; then halve for SO.
    """
    if p in (2, 3) or p > 13:
        raise ValueError("oracle supports primes 5 <= p <= 13")
    gram = np.array(core.GRAM, dtype=np.int64) % p
    total = 1
    dim = 4
    while dim >= 2:
        u = _anisotropic_vector(gram, p)
        target = int(u @ gram @ u % p)
        total *= _count_norm(gram, p, target)
        gram, _ = _orthogonal_complement_gram(gram, u, p)
        dim -= 1
    total *= 2  # |O(Q_1)| = 2
    return total // 2


def _anisotropic_vector(gram: np.ndarray, p: int) -> np.ndarray:
    k = gram.shape[0]
    for i in range(k):
        if gram[i, i] % p:
            e = np.zeros(k, dtype=np.int64)
            e[i] = 1
            return e
    for i in range(k):
        for j in range(i + 1, k):
            if gram[i, j] % p:
                e = np.zeros(k, dtype=np.int64)
                e[i] = 1
                e[j] = 1
                if (e @ gram @ e) % p:
                    return e
    raise ValueError("form is degenerate mod p")


def so_f_order_pairs(p: int) -> int:
    """Cross-check of so_f_order via a 2-transitive (pair-orbit) decomposition.

    |O(Q_4)| = #{v : Q(v)=c1} * #{w : Q(w)=c2, B(v0,w)=t} * |O(Q_2'')| for the
    stabilizer of a fixed nondegenerate pair, counted by brute force.
    """
    if p in (2, 3) or p > 13:
        raise ValueError("oracle supports primes 5 <= p <= 13")
    gram = np.array(core.GRAM, dtype=np.int64) % p
    u1 = _anisotropic_vector(gram, p)
    c1 = int(u1 @ gram @ u1 % p)
    n1 = _count_norm(gram, p, c1)
    # second vector: anisotropic in the complement
    g3, b3 = _orthogonal_complement_gram(gram, u1, p)
    u2r = _anisotropic_vector(g3, p)
    u2 = (b3 @ u2r) % p
    c2 = int(u2 @ gram @ u2 % p)
    t = int(u1 @ gram @ u2 % p)
    # count w with Q(w)=c2, B(u1,w)=t
    grids = np.meshgrid(*[np.arange(p)] * 4, indexing="ij")
    v = np.stack([g.ravel() for g in grids])
    qv = np.einsum("in,ij,jn->n", v, gram, v) % p
    bv = (u1 @ gram @ v) % p
    m = int(((qv == c2 % p) & (bv == t % p)).sum())
    # stabilizer of the pair: O of the 2-dim complement, brute force over 2x2
    g2h, b2 = _orthogonal_complement_gram(gram, u1, p)
    # restrict again by u2r inside the 3-dim space
    g2, _ = _orthogonal_complement_gram(g2h, u2r, p)
    cnt = 0
    for a in range(p):
        for b in range(p):
            for c in range(p):
                for d in range(p):
                    m22 = np.array([[a, b], [c, d]], dtype=np.int64)
                    if ((m22.T @ g2 @ m22) % p == g2 % p).all():
                        cnt += 1
    return n1 * m * cnt // 2


def vector_orbit(root, q: int, cap: int = 10_000_000) -> np.ndarray:
    """Orbit of the root quadruple mod q under Gamma, as an (n, 4) array."""
    if q < 1:
        raise ValueError("q >= 1")
    if q == 1:
        return np.zeros((1, 4), dtype=np.int64)
    gens = _GENS6 % q
    start = tuple(int(x) % q for x in root)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        fr = np.array(frontier, dtype=np.int64)
        imgs = np.einsum("gij,nj->gni", gens, fr) % q
        for gset in imgs:
            for row in gset:
                t = tuple(int(x) for x in row)
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        if len(seen) > cap:
            raise CapExceededError(f"vector orbit mod {q} exceeded cap")
        frontier = nxt
    return np.array(sorted(seen), dtype=np.int64)


@lru_cache(maxsize=256)
def _orbit_cached(root, q):
    return vector_orbit(root, q)


def admissible_classes(q: int, root=(-11, 21, 24, 28)) -> set:
    """Residues mod q arising as some entry of the orbit of the root."""
    if q == 1:
        return {0}
    orb = _orbit_cached(tuple(root), q)
    return {int(x) for x in np.unique(orb)}


def is_admissible(n: int, root=(-11, 21, 24, 28)) -> bool:
    return n % 24 in admissible_classes(24, root)


def stabilizer_index(q: int, root=(-11, 21, 24, 28)) -> int:
    """Index of the mod-q stabilizer of the root = size of its orbit mod q.

    The affine orbit grows like q^3; the projective count (see
    stabilizer_index_projective) grows like q^2."""
    if q == 1:
        return 1
    return _orbit_cached(tuple(root), q).shape[0]


def stabilizer_index_projective(q: int, root=(-11, 21, 24, 28)) -> int:
    """Number of scalar classes in the orbit of the root mod q."""
    if q == 1:
        return 1
    orb = _orbit_cached(tuple(root), q)
    seen = set()
    count = 0
    for r in orb.tolist():
        if tuple(r) in seen:
            continue
        count += 1
        for lam in range(1, q):
            if gcd(lam, q) == 1:
                seen.add(tuple(lam * x % q for x in r))
    return count
