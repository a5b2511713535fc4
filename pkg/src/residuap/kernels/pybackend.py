"""Pure-Python kernel implementations.

Reference semantics for the vectorized backend; every function here must
agree with its counterpart in ``npbackend`` on all inputs.  Tables are
indexable 2-d structures (nested sequences or numpy arrays) over element
indices ``0..n-1`` with the identity at index 0.
"""

import random


def validate_table(mult, sample_cap=256, seed=0):
    """Check the Cayley-table group axioms, raising ValueError on failure.

    Identity at index 0, rows/columns are permutations, every element has a
    two-sided inverse, and associativity.  Associativity is exhaustive for
    order <= sample_cap and randomly sampled (seeded) above.
    """
    n = len(mult)
    rng = range(n)
    full = set(rng)
    for g in rng:
        if mult[0][g] != g or mult[g][0] != g:
            raise ValueError(f"index 0 is not an identity at {g}")
    for i in rng:
        if set(int(x) for x in mult[i]) != full:
            raise ValueError(f"row {i} is not a permutation")
        if set(int(mult[j][i]) for j in rng) != full:
            raise ValueError(f"column {i} is not a permutation")
    inv = inverse_table(mult)
    for g in rng:
        if mult[g][inv[g]] != 0 or mult[inv[g]][g] != 0:
            raise ValueError(f"element {g} has no two-sided inverse")
    if n <= sample_cap:
        triples = ((i, j, k) for i in rng for j in rng for k in rng)
    else:
        r = random.Random(seed)
        triples = ((r.randrange(n), r.randrange(n), r.randrange(n))
                   for _ in range(sample_cap ** 2))
    for i, j, k in triples:
        if mult[int(mult[i][j])][k] != mult[i][int(mult[j][k])]:
            raise ValueError(f"associativity fails at ({i},{j},{k})")


def inverse_table(mult):
    n = len(mult)
    inv = [0] * n
    for g in range(n):
        row = mult[g]
        for h in range(n):
            if row[h] == 0:
                inv[g] = h
                break
    return inv


def closure(mult, inv, gens):
    """Smallest subset containing 0 and gens, closed under mult and inverse."""
    elems = {0}
    frontier = []
    for g in gens:
        g = int(g)
        if g not in elems:
            elems.add(g)
            frontier.append(g)
        gi = int(inv[g])
        if gi not in elems:
            elems.add(gi)
            frontier.append(gi)
    while frontier:
        new = []
        base = sorted(elems)
        for a in base:
            row = mult[a]
            for b in frontier:
                c = int(row[b])
                if c not in elems:
                    elems.add(c)
                    new.append(c)
        for b in frontier:
            row = mult[b]
            for a in base:
                c = int(row[a])
                if c not in elems:
                    elems.add(c)
                    new.append(c)
        frontier = new
    return sorted(elems)


def bulk_mult(mult, xs, ys):
    """All products x*y for x in xs, y in ys, as a sorted deduplicated list."""
    out = set()
    for x in xs:
        row = mult[int(x)]
        for y in ys:
            out.add(int(row[int(y)]))
    return sorted(out)


def commutators(mult, inv, xs, ys):
    """Sorted set of [x,y] = x^-1 y^-1 x y over the two index sets."""
    out = set()
    for x in xs:
        x = int(x)
        xi = int(inv[x])
        for y in ys:
            y = int(y)
            yi = int(inv[y])
            out.add(int(mult[int(mult[int(mult[xi][yi])][x])][y]))
    return sorted(out)


def powers(mult, xs, e):
    """Sorted set of x^e (e >= 0) for x in xs."""
    out = set()
    for x in xs:
        x = int(x)
        acc = 0
        for _ in range(e):
            acc = int(mult[acc][x])
        out.add(acc)
    return sorted(out)


def conjugates(mult, inv, xs, gs):
    """Sorted set of g x g^-1 for x in xs, g in gs."""
    out = set()
    for g in gs:
        g = int(g)
        gi = int(inv[g])
        for x in xs:
            out.add(int(mult[int(mult[g][int(x)])][gi]))
    return sorted(out)


def is_homomorphism(mult_dom, mult_cod, mapping):
    n = len(mult_dom)
    if mapping[0] != 0:
        return False
    for x in range(n):
        row = mult_dom[x]
        mx = int(mapping[x])
        crow = mult_cod[mx]
        for y in range(n):
            if mapping[int(row[y])] != crow[int(mapping[y])]:
                return False
    return True


def rref_mod_p(rows, p, ncols=None):
    """Reduced row echelon form over F_p; returns list of nonzero rows."""
    work = [[int(x) % p for x in r] for r in rows]
    if not work:
        return []
    m = ncols if ncols is not None else len(work[0])
    basis = []  # list of (pivot_col, row)
    for r in work:
        for pc, br in basis:
            c = r[pc] % p
            if c:
                for j in range(m):
                    r[j] = (r[j] - c * br[j]) % p
        lead = next((j for j in range(m) if r[j] % p), None)
        if lead is None:
            continue
        cinv = pow(r[lead], -1, p)
        r = [(cinv * x) % p for x in r]
        for pc, br in basis:
            c = br[lead] % p
            if c:
                for j in range(m):
                    br[j] = (br[j] - c * r[j]) % p
        basis.append((lead, r))
    basis.sort(key=lambda t: t[0])
    return [row for _, row in basis]
