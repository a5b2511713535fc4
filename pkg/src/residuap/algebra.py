"""Modular group algebras F_p[G], augmentation-ideal powers, Jennings'
filtration, wreath products with standard embeddings, and the identities
relating ideal powers to central series of wreath products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .filtration import Filtration, dimension_series, lower_central_p_series, \
    lower_central_series
from .groups import (CapExceeded, FiniteGroup, Homomorphism, Subgroup,
                     trivial_subgroup)

DEFAULT_WREATH_CAP = 4096


class AlgebraElement:
    """An element of F_p[G] as a coefficient vector indexed by group elements."""

    __slots__ = ("group", "p", "coeffs")

    def __init__(self, group: FiniteGroup, p: int, coeffs):
        c = np.asarray(coeffs, dtype=np.int64) % p
        if c.shape != (group.order,):
            raise ValueError("coefficient vector has wrong length")
        self.group = group
        self.p = p
        self.coeffs = c

    @staticmethod
    def basis(group: FiniteGroup, p: int, g: int) -> "AlgebraElement":
        c = np.zeros(group.order, dtype=np.int64)
        c[g] = 1
        return AlgebraElement(group, p, c)

    @staticmethod
    def hat(group: FiniteGroup, p: int) -> "AlgebraElement":
        """The sum of all group elements."""
        return AlgebraElement(group, p, np.ones(group.order, dtype=np.int64))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.group, self.p, self.coeffs + other.coeffs)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.group, self.p, self.coeffs - other.coeffs)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = np.zeros(self.group.order, dtype=np.int64)
        t = self.group.mult
        for g in np.flatnonzero(self.coeffs):
            out[t[int(g)]] += int(self.coeffs[g]) * other.coeffs
        return AlgebraElement(self.group, self.p, out)

    def scale(self, c: int) -> "AlgebraElement":
        return AlgebraElement(self.group, self.p, self.coeffs * c)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement) and self.group is other.group
                and self.p == other.p and np.array_equal(self.coeffs, other.coeffs))

    def __repr__(self) -> str:
        return f"AlgebraElement(p={self.p}, {list(map(int, self.coeffs))})"


class IdealBasis:
    """A row-reduced basis of a two-sided ideal of F_p[G]."""

    __slots__ = ("group", "p", "rows")

    def __init__(self, group: FiniteGroup, p: int, rows, check_two_sided: bool = True):
        self.group = group
        self.p = p
        self.rows = [tuple(int(x) % p for x in r)
                     for r in kernels.rref_mod_p(list(rows), p, ncols=group.order)]
        if check_two_sided and not self._two_sided():
            raise ValueError("row space is not a two-sided ideal")

    def _two_sided(self) -> bool:
        t = self.group.mult
        n = self.group.order
        for row in self.rows:
            for g in range(n):
                left = [0] * n
                right = [0] * n
                for h in range(n):
                    left[int(t[g, h])] = row[h]
                    right[int(t[h, g])] = row[h]
                if not (self.contains_vector(left) and self.contains_vector(right)):
                    return False
        return True

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains_vector(self, vec) -> bool:
        vec = [int(x) % self.p for x in vec]
        for row in self.rows:
            lead = next(j for j, x in enumerate(row) if x)
            c = vec[lead]
            if c:
                vec = [(a - c * b) % self.p for a, b in zip(vec, row)]
        return not any(vec)

    def contains(self, el: AlgebraElement) -> bool:
        return self.contains_vector(el.coeffs)

    def multiply(self, other: "IdealBasis") -> "IdealBasis":
        """Basis of the product ideal (self * other)."""
        t = self.group.mult
        n = self.group.order
        prods = []
        for r in self.rows:
            sup = [g for g in range(n) if r[g]]
            for s in other.rows:
                out = np.zeros(n, dtype=np.int64)
                for g in sup:
                    out[t[g]] += r[g] * np.asarray(s, dtype=np.int64)
                prods.append(out % self.p)
        return IdealBasis(self.group, self.p, prods, check_two_sided=False)

    def row_set(self) -> frozenset:
        return frozenset(self.rows)

    def __eq__(self, other) -> bool:
        return (isinstance(other, IdealBasis) and self.group is other.group
                and self.p == other.p and self.rows == other.rows)

    def __repr__(self) -> str:
        return f"IdealBasis(dim={self.dim} in F_{self.p}[{self.group.name}])"


def _require_p_group(G: FiniteGroup, p: int):
    if not G.is_p_group(p) or (G.order > 1 and G.order % p != 0):
        raise ValueError(f"{G.name} is not a {p}-group")


def augmentation_ideal(G: FiniteGroup, p: int) -> IdealBasis:
    rows = []
    for g in range(1, G.order):
        row = [0] * G.order
        row[0] = -1
        row[g] = (row[g] + 1) % p
        rows.append([x % p for x in row])
    return IdealBasis(G, p, rows, check_two_sided=False)


def augmentation_ideal_powers(G: FiniteGroup, p: int):
    """Bases of omega, omega^2, ... down to zero; returns (bases, dims, d).

    d is the nilpotency class of omega: the largest n with omega^n != 0.
    """
    _require_p_group(G, p)
    omega = augmentation_ideal(G, p)
    bases = []
    cur = omega
    while cur.dim > 0:
        bases.append(cur)
        cur = cur.multiply(omega)
    dims = [b.dim for b in bases] + [0]
    return bases, dims, len(bases)


def jennings_series(G: FiniteGroup, p: int) -> Filtration:
    """The filtration {g : 1 - g in omega^n}; must equal the dimension series."""
    _require_p_group(G, p)
    bases, _, d = augmentation_ideal_powers(G, p)
    terms = []
    for basis in bases:
        elems = [0]
        for g in range(1, G.order):
            vec = [0] * G.order
            vec[0] = 1
            vec[g] = (vec[g] - 1) % p
            vec[0] %= p
            if basis.contains_vector(vec):
                elems.append(g)
        terms.append(Subgroup(G, elems))
        if terms[-1].is_trivial():
            break
    if not terms or not terms[-1].is_trivial():
        terms.append(trivial_subgroup(G))
    jen = Filtration(G, terms, check=False)
    dim = dimension_series(G, p)
    upto = max(len(jen.terms), len(dim.terms)) + 1
    for n in range(1, upto):
        if jen.term(n).elems != dim.term(n).elems:
            raise AssertionError(f"Jennings filtration differs from the "
                                 f"dimension series at level {n}")
    return jen


def annihilator_omega(G: FiniteGroup, p: int) -> IdealBasis:
    """ann(omega) = span of the all-ones element; checked against omega^d."""
    _require_p_group(G, p)
    n = G.order
    t = G.mult
    # a * (g - 1) = 0 for all g <=> coefficient vector constant
    cols = []
    for g in range(1, n):
        # map a |-> a*(g-1), as a matrix acting on coefficient vectors
        m = np.zeros((n, n), dtype=np.int64)
        for h in range(n):
            m[int(t[h, g]), h] += 1
            m[h, h] -= 1
        cols.append(m % p)
    big = np.vstack(cols) if cols else np.zeros((0, n), dtype=np.int64)
    ns = _nullspace_mod_p(big, p, n)
    ann = IdealBasis(G, p, ns, check_two_sided=False)
    hat = AlgebraElement.hat(G, p)
    if ann.dim != 1 or not ann.contains(hat):
        raise AssertionError("ann(omega) is not the span of the all-ones element")
    bases, _, d = augmentation_ideal_powers(G, p)
    if d > 0:
        top = bases[-1]
        if top.dim != 1 or not top.contains(hat):
            raise AssertionError("omega^d is not the span of the all-ones element")
    return ann


def _nullspace_mod_p(m: np.ndarray, p: int, ncols: int) -> list[list[int]]:
    rows = kernels.rref_mod_p([list(map(int, r)) for r in m], p, ncols=ncols)
    pivots = []
    for r in rows:
        pivots.append(next(j for j, x in enumerate(r) if x))
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        vec = [0] * ncols
        vec[f] = 1
        for r, pc in zip(rows, pivots):
            vec[pc] = (-r[f]) % p
        basis.append(vec)
    return basis


# -- wreath products -----------------------------------------------------------

@dataclass
class WreathProduct:
    """The wreath product X wr H as a Cayley group, with structure maps.

    Elements are pairs (top, f) with top in H and f: H -> X, indexed
    top-major: index = top * |X|^|H| + sum_k f(k) |X|^k.
    """
    group: FiniteGroup
    X: FiniteGroup
    H: FiniteGroup
    base_embedding: Homomorphism    # X^H -> W on base-index order
    top_embedding: Homomorphism     # H -> W

    def index_of(self, top: int, digits: Sequence[int]) -> int:
        nx = self.X.order
        base = 0
        for k in reversed(range(self.H.order)):
            base = base * nx + int(digits[k])
        return top * nx ** self.H.order + base

    def decompose(self, w: int) -> tuple[int, tuple[int, ...]]:
        nx, nh = self.X.order, self.H.order
        top, base = divmod(int(w), nx ** nh)
        digits = []
        for _ in range(nh):
            base, d = divmod(base, nx)
            digits.append(d)
        return top, tuple(digits)

    def base_subgroup(self) -> Subgroup:
        nx, nh = self.X.order, self.H.order
        return Subgroup(self.group, range(nx ** nh), check=False)

    def base_vector(self, w: int) -> tuple[int, ...]:
        top, digits = self.decompose(w)
        if top != 0:
            raise ValueError("not a base element")
        return digits


def wreath(X: FiniteGroup, H: FiniteGroup, cap: int = DEFAULT_WREATH_CAP) -> WreathProduct:
    """Build X wr H with multiplication (h1,f1)(h2,f2) = (h1 h2, f1^h2 f2),
    where f^h(k) = f(hk)."""
    nx, nh = X.order, H.order
    order = nx ** nh * nh
    if order > cap:
        raise CapExceeded(f"wreath product of order {order} exceeds cap {cap}")
    nbase = nx ** nh
    radix = nx ** np.arange(nh)
    all_digits = np.empty((order, nh), dtype=np.int64)
    rem = np.arange(order) % nbase
    for k in range(nh):
        all_digits[:, k] = rem % nx
        rem //= nx
    tops = np.arange(order) // nbase
    table = np.empty((order, order), dtype=np.int64)
    for y in range(order):
        h2, f2 = int(tops[y]), all_digits[y]
        perm = H.mult[h2]                       # k -> h2 k
        twisted = all_digits[:, perm]           # f1^{h2}(k) = f1(h2 k)
        prod_digits = X.mult[twisted, f2[None, :]]
        new_tops = H.mult[tops, h2]
        table[:, y] = new_tops * nbase + prod_digits @ radix
    # exhaustive group-axiom validation up to order 256, sampled above
    W = FiniteGroup(table, name=f"{X.name}wr{H.name}", validate=True)
    BaseG = _power_group(X, nh)
    base_emb = Homomorphism(BaseG, W, np.arange(nbase, dtype=np.int64), check=False)
    top_emb = Homomorphism(H, W, np.arange(nh, dtype=np.int64) * nbase, check=False)
    return WreathProduct(W, X, H, base_emb, top_emb)


def _power_group(X: FiniteGroup, n: int) -> FiniteGroup:
    """X^n with little-endian digit indexing (digit k has weight |X|^k)."""
    nx = X.order
    order = nx ** n
    digits = np.empty((order, n), dtype=np.int64)
    rem = np.arange(order)
    for k in range(n):
        digits[:, k] = rem % nx
        rem //= nx
    radix = nx ** np.arange(n)
    table = np.empty((order, order), dtype=np.int64)
    for y in range(order):
        table[:, y] = X.mult[digits, digits[y][None, :]] @ radix
    return FiniteGroup(table, name=f"{X.name}^{n}", validate=False)


def standard_embedding(A: FiniteGroup, theta: Homomorphism,
                       wp: WreathProduct,
                       x_in_t: Optional[Homomorphism] = None) -> Homomorphism:
    """The standard embedding A -> T wr H attached to theta: A -> H.

    The countermap is fixed deterministically: minimal-index right coset
    representatives of theta(A) in H, minimal preimages, and identity
    offsets.  x_in_t embeds Ker(theta) into wp.X (identity-on-indices when
    omitted); the result is verified to be an injective homomorphism.
    """
    H = wp.H
    if theta.cod is not H:
        raise ValueError("theta must land in the wreath top group")
    ker = theta.kernel()
    K, to_parent, _ = ker.as_group()
    if x_in_t is None:
        from .groups import find_isomorphism
        iso = find_isomorphism(K, wp.X)
        if iso is None:
            raise ValueError("kernel is not isomorphic to the base factor")
        emb = {to_parent[i]: int(iso.map[i]) for i in range(K.order)}
    else:
        if x_in_t.dom is not K and x_in_t.dom.order != K.order:
            raise ValueError("x_in_t must be defined on the kernel")
        if not x_in_t.is_injective():
            raise ValueError("x_in_t must be injective")
        emb = {to_parent[i]: int(x_in_t.map[i]) for i in range(K.order)}
    counter = _countermap(A, theta)
    rows = []
    for a in range(A.order):
        top = theta(a)
        digits = []
        for h in range(H.order):
            th = int(H.mult[top, h])
            x = A.word([A.inverse(counter[th]), a, counter[h]])
            if x not in ker:
                raise AssertionError("countermap defect: f_a(h) outside the kernel")
            digits.append(emb[x])
        rows.append(wp.index_of(top, digits))
    hom = Homomorphism(A, wp.group, rows)  # verified
    if not hom.is_injective():
        raise AssertionError("standard embedding failed to be injective")
    return hom


def _countermap(A: FiniteGroup, theta: Homomorphism) -> list[int]:
    """counter[h] in A with theta(counter[theta(a) h]) = theta(a) theta(counter[h])."""
    H = theta.cod
    image = sorted(set(int(x) for x in theta.map))
    img_set = set(image)
    # minimal-index right coset representatives of theta(A) in H
    rep_of = {}
    for h in range(H.order):
        if h in rep_of:
            continue
        coset = sorted(int(H.mult[x, h]) for x in image)
        s = coset[0]
        for c in coset:
            rep_of[c] = s
    minimal_preimage = {}
    for a in range(A.order):
        v = int(theta.map[a])
        if v not in minimal_preimage:
            minimal_preimage[v] = a
        else:
            minimal_preimage[v] = min(minimal_preimage[v], a)
    out = []
    for h in range(H.order):
        s = rep_of[h]
        v = int(H.mult[h, H.inverse(s)])
        if v not in img_set:
            raise AssertionError("coset bookkeeping error")
        out.append(minimal_preimage[v])
    return out


# -- Buckley-type identities ----------------------------------------------------

def buckley_check(p: int, H: FiniteGroup, n_max: int,
                  cap: int = DEFAULT_WREATH_CAP) -> dict:
    """For W = F_p wr H, verify for 0 <= n <= n_max the chain of equalities

        D^p_{n+1}(W) ^ base = gamma^p_{n+1}(W) ^ base
                            = gamma_{n+1}(W) ^ base = omega^n,

    where base is the additive group of F_p[H] inside W.
    """
    from .catalog import cyclic
    _require_p_group(H, p)
    wp = wreath(cyclic(p), H, cap=cap)
    W = wp.group
    base = wp.base_subgroup()
    gamma = lower_central_series(W)
    gamma_p = lower_central_p_series(W, p)
    dim = dimension_series(W, p)
    omega = augmentation_ideal(H, p)
    levels = []
    ok_all = True
    cur = None
    for n in range(0, n_max + 1):
        if n == 0:
            ideal_rows = [[1 if j == i else 0 for j in range(H.order)]
                          for i in range(H.order)]
            ideal = IdealBasis(H, p, ideal_rows, check_two_sided=False)
        elif n == 1:
            ideal = omega
        else:
            ideal = cur.multiply(omega)
        cur = ideal
        expected = _base_vectors_of_ideal(wp, ideal)
        got = {}
        for nm, filt in (("gamma", gamma), ("gamma_p", gamma_p), ("dim", dim)):
            inter = [g for g in filt.term(n + 1).elems if g in base]
            got[nm] = frozenset(wp.base_vector(g) for g in inter)
        ok = all(v == expected for v in got.values())
        ok_all = ok_all and ok
        levels.append({"n": n, "omega_dim": ideal.dim, "equal": ok,
                       "sizes": {k: len(v) for k, v in got.items()},
                       "expected_size": len(expected)})
    return {"group": W.name, "ok": ok_all, "levels": levels}


def _base_vectors_of_ideal(wp: WreathProduct, ideal: IdealBasis) -> frozenset:
    """All coefficient vectors in the row space, as digit tuples."""
    import itertools
    p = ideal.p
    vecs = set()
    rows = [np.asarray(r, dtype=np.int64) for r in ideal.rows]
    n = len(rows)
    if n == 0:
        return frozenset({tuple([0] * wp.H.order)})
    for coeffs in itertools.product(range(p), repeat=n):
        v = np.zeros(wp.H.order, dtype=np.int64)
        for c, r in zip(coeffs, rows):
            v += c * r
        vecs.add(tuple(int(x) % p for x in v))
    return frozenset(vecs)


def wreath_class_formula(p: int, H: FiniteGroup,
                         cap: int = DEFAULT_WREATH_CAP) -> dict:
    """Nilpotency class of F_p wr H, via the gamma series and via Jennings."""
    from .catalog import cyclic
    wp = wreath(cyclic(p), H, cap=cap)
    gamma = lower_central_series(wp.group)
    cls = len(gamma.terms) - 1 if gamma.terms[-1].is_trivial() else None
    _, dims, d = augmentation_ideal_powers(H, p)
    dimser = dimension_series(H, p)
    total = 0
    n = 1
    while len(dimser.term(n)) > 1 or n == 1:
        dn = len(dimser.term(n))
        dn1 = len(dimser.term(n + 1))
        k = 0
        q = dn // dn1
        while q > 1:
            q //= p
            k += 1
        total += n * k
        if dn1 == 1:
            break
        n += 1
    predicted = 1 + (p - 1) * total
    return {"class_gamma": cls, "class_formula": predicted,
            "omega_class": d, "agree": cls == predicted == 1 + d}
