"""Random node corpus with independent dense oracles.

Every generated node is paired with a numpy matrix built purely from numpy
operations on the children's oracle matrices, so toarray/verify checks have a
second, independent route.
"""
import numpy as np

import blockenc as be

MAX_MAIN_QUBITS = 4


def dft_matrix(n):
    N = 1 << n
    w = np.exp(2j * np.pi / N)
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return w ** (j * k) / np.sqrt(N)


def shift_matrix(N, c=1):
    return np.roll(np.eye(N, dtype=complex), c, axis=0)


def integer_addition_matrix(s, t):
    m = np.zeros((1 << (s + t), 1 << (s + t)), dtype=complex)
    for a in range(1 << s):
        for b in range(1 << t):
            m[(a << t) + ((b + a) % (1 << t)), (a << t) + b] = 1
    return m


def random_primitive(rng):
    kind = rng.integers(0, 7)
    if kind == 0:
        d = int(rng.integers(2, 9))
        return be.Identity(dim=d), np.eye(d, dtype=complex)
    if kind == 1:
        n = int(rng.integers(1, 4))
        return be.Increment(n), shift_matrix(1 << n)
    if kind == 2:
        n = int(rng.integers(1, 4))
        c = int(rng.integers(-5, 6))
        return be.ConstantIntegerAddition(n, c), shift_matrix(1 << n, c)
    if kind == 3:
        s = int(rng.integers(1, 3))
        t = int(rng.integers(1, 4 - s))
        return be.IntegerAddition(s, t), integer_addition_matrix(s, t)
    if kind == 4:
        n = int(rng.integers(1, 3))
        return be.QFT(n), dft_matrix(n)
    if kind == 5:
        d = int(rng.integers(1, 9))
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        return be.ConstantVector(v), v[:, None].astype(complex)
    q = int(rng.integers(1, 4))
    perm = [int(p) for p in rng.permutation(1 << q)]
    m = np.zeros((1 << q, 1 << q), dtype=complex)
    for i, p in enumerate(perm):
        m[p, i] = 1
    return be.Permutation(perm), m


def _match_shape(pool, rng, shape):
    hits = [(n, m) for n, m in pool if m.shape == shape]
    if hits:
        return hits[rng.integers(len(hits))]
    return None


def _match_chain(pool, rng, dim_in):
    hits = [(n, m) for n, m in pool if m.shape[0] == dim_in]
    if hits:
        return hits[rng.integers(len(hits))]
    return None


def extend(pool, rng):
    """Create one new composite (node, oracle) from the pool, or None."""
    node, mat = pool[rng.integers(len(pool))]
    op = rng.integers(0, 7)
    if op == 0:
        return node.adjoint(), mat.conj().T
    if op == 1:
        c = complex(rng.standard_normal(), rng.standard_normal())
        return c * node, c * mat
    if op == 2:
        x = int(rng.integers(1, mat.shape[0] + 1))
        y = int(rng.integers(1, mat.shape[1] + 1))
        if rng.integers(2) and x >= 2:
            sl = slice(None, x, 2)
            return node[sl, :y], mat[sl, :y]
        return node[:x, :y], mat[:x, :y]
    if op == 3:
        other, omat = pool[rng.integers(len(pool))]
        if node.main_qubits + other.main_qubits > MAX_MAIN_QUBITS:
            return None
        return node & other, np.kron(mat, omat)
    if op == 4:
        other, omat = pool[rng.integers(len(pool))]
        if max(node.main_qubits, other.main_qubits) + 1 > MAX_MAIN_QUBITS:
            return None
        out = np.zeros((mat.shape[0] + omat.shape[0], mat.shape[1] + omat.shape[1]),
                       dtype=complex)
        out[: mat.shape[0], : mat.shape[1]] = mat
        out[mat.shape[0]:, mat.shape[1]:] = omat
        return node | other, out
    if op == 5:
        hit = _match_shape(pool, rng, mat.shape)
        if hit is None:
            c = complex(rng.standard_normal(), rng.standard_normal())
            return node + c * node, mat + c * mat
        other, omat = hit
        if max(node.main_qubits, other.main_qubits) + 1 > MAX_MAIN_QUBITS:
            return None
        return node + other, mat + omat
    hit = _match_chain(pool, rng, mat.shape[1])
    if hit is None:
        return node @ be.Identity(node.subspace_in), mat.copy()
    other, omat = hit
    if max(node.main_qubits, other.main_qubits) > MAX_MAIN_QUBITS:
        return None
    return node @ other, mat @ omat


def build_corpus(seed, primitives=6, composites=12):
    """List of (node, oracle matrix) pairs; the tail entries are composites."""
    rng = np.random.default_rng(seed)
    pool = [random_primitive(rng) for _ in range(primitives)]
    made = []
    guard = 0
    while len(made) < composites and guard < 200:
        guard += 1
        out = extend(pool + made, rng)
        if out is None:
            continue
        node, mat = out
        if node.main_qubits > MAX_MAIN_QUBITS:
            continue
        made.append((node, mat))
    return pool, made
