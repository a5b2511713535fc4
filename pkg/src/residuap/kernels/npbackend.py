"""Vectorized kernel implementations on numpy integer tables."""

import numpy as np


def _as_table(mult):
    t = np.asarray(mult, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("multiplication table must be square")
    return t


def validate_table(mult, sample_cap=256, seed=0):
    t = _as_table(mult)
    n = t.shape[0]
    idx = np.arange(n)
    if not (np.array_equal(t[0], idx) and np.array_equal(t[:, 0], idx)):
        raise ValueError("index 0 is not an identity")
    if not (np.array_equal(np.sort(t, axis=1), np.tile(idx, (n, 1)))
            and np.array_equal(np.sort(t, axis=0), np.tile(idx[:, None], (1, n)))):
        raise ValueError("table is not a latin square")
    inv = (t == 0).argmax(axis=1)
    if not (np.array_equal(t[idx, inv], np.zeros(n, dtype=np.int64))
            and np.array_equal(t[inv, idx], np.zeros(n, dtype=np.int64))):
        raise ValueError("missing two-sided inverses")
    if n <= sample_cap:
        # left[i,j,k] = t[t[i,j],k],  right[i,j,k] = t[i,t[j,k]]
        left = t[t, :]
        right = t[np.arange(n)[:, None, None], t[None, :, :]]
        if not np.array_equal(left, right):
            raise ValueError("associativity fails")
    else:
        rng = np.random.default_rng(seed)
        m = sample_cap ** 2
        i = rng.integers(0, n, m)
        j = rng.integers(0, n, m)
        k = rng.integers(0, n, m)
        if not np.array_equal(t[t[i, j], k], t[i, t[j, k]]):
            raise ValueError("associativity fails on sampled triples")


def inverse_table(mult):
    t = _as_table(mult)
    return (t == 0).argmax(axis=1)


def closure(mult, inv, gens):
    t = _as_table(mult)
    inv = np.asarray(inv, dtype=np.int64)
    n = t.shape[0]
    member = np.zeros(n, dtype=bool)
    member[0] = True
    gens = np.asarray(sorted({int(g) for g in gens}), dtype=np.int64)
    if gens.size:
        member[gens] = True
        member[inv[gens]] = True
    frontier = np.flatnonzero(member)
    cur = frontier
    while frontier.size:
        prods = np.unique(np.concatenate([
            t[np.ix_(cur, frontier)].ravel(),
            t[np.ix_(frontier, cur)].ravel(),
        ]))
        fresh = prods[~member[prods]]
        member[fresh] = True
        frontier = fresh
        cur = np.flatnonzero(member)
    return [int(x) for x in np.flatnonzero(member)]


def bulk_mult(mult, xs, ys):
    t = _as_table(mult)
    xs = np.asarray(list(xs), dtype=np.int64)
    ys = np.asarray(list(ys), dtype=np.int64)
    if xs.size == 0 or ys.size == 0:
        return []
    return [int(v) for v in np.unique(t[np.ix_(xs, ys)])]


def commutators(mult, inv, xs, ys):
    t = _as_table(mult)
    inv = np.asarray(inv, dtype=np.int64)
    xs = np.asarray(list(xs), dtype=np.int64)
    ys = np.asarray(list(ys), dtype=np.int64)
    if xs.size == 0 or ys.size == 0:
        return []
    a = t[np.ix_(inv[xs], inv[ys])]          # x^-1 y^-1
    b = t[a, xs[:, None]]                    # x^-1 y^-1 x
    c = t[b, ys[None, :]]                    # x^-1 y^-1 x y
    return [int(v) for v in np.unique(c)]


def powers(mult, xs, e):
    t = _as_table(mult)
    xs = np.asarray(list(xs), dtype=np.int64)
    if xs.size == 0:
        return []
    acc = np.zeros(len(xs), dtype=np.int64)
    for _ in range(e):
        acc = t[acc, xs]
    return [int(v) for v in np.unique(acc)]


def conjugates(mult, inv, xs, gs):
    t = _as_table(mult)
    inv = np.asarray(inv, dtype=np.int64)
    xs = np.asarray(list(xs), dtype=np.int64)
    gs = np.asarray(list(gs), dtype=np.int64)
    if xs.size == 0 or gs.size == 0:
        return []
    gx = t[np.ix_(gs, xs)]
    out = t[gx, inv[gs][:, None]]
    return [int(v) for v in np.unique(out)]


def is_homomorphism(mult_dom, mult_cod, mapping):
    td = _as_table(mult_dom)
    tc = _as_table(mult_cod)
    m = np.asarray(mapping, dtype=np.int64)
    if m[0] != 0:
        return False
    return bool(np.array_equal(m[td], tc[m[:, None], m[None, :]]))


def rref_mod_p(rows, p, ncols=None):
    mat = np.array([[int(x) % p for x in r] for r in rows], dtype=np.int64)
    if mat.size == 0:
        return []
    m = ncols if ncols is not None else mat.shape[1]
    pivots = []
    rank = 0
    for col in range(m):
        piv = None
        for r in range(rank, mat.shape[0]):
            if mat[r, col] % p:
                piv = r
                break
        if piv is None:
            continue
        mat[[rank, piv]] = mat[[piv, rank]]
        mat[rank] = (mat[rank] * pow(int(mat[rank, col]), -1, p)) % p
        coef = mat[:, col].copy()
        coef[rank] = 0
        mat = (mat - np.outer(coef, mat[rank])) % p
        pivots.append(col)
        rank += 1
    return [[int(x) for x in mat[r]] for r in range(rank)]
