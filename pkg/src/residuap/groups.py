"""Concrete finite groups as Cayley tables, with subgroups, quotients and
homomorphisms.

Conventions used throughout the package:

* elements of a group of order n are the indices ``0..n-1``;
* index 0 is always the identity;
* all values are immutable after construction and every operation is a pure
  function of its inputs.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels

DEFAULT_ORDER_CAP = 4096
DEFAULT_AUT_CAP = 256
DEFAULT_AUT_SIZE_CAP = 200_000


class CapExceeded(ValueError):
    """A construction would exceed the configured desk-scale cap."""


class FiniteGroup:
    """A finite group given by its full multiplication table."""

    __slots__ = ("order", "mult", "inv", "name", "_abelian", "_orders")

    def __init__(self, mult, name: str = "G", validate: bool = True):
        t = np.ascontiguousarray(np.asarray(mult, dtype=np.int64))
        if validate:
            kernels.validate_table(t)
        self.mult = t
        self.order = int(t.shape[0])
        self.inv = np.asarray(kernels.inverse_table(t), dtype=np.int64)
        self.name = name
        self._abelian: Optional[bool] = None
        self._orders: Optional[list[int]] = None

    # -- basic element arithmetic ------------------------------------------

    def mul(self, a: int, b: int) -> int:
        return int(self.mult[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def conj(self, g: int, x: int) -> int:
        """g x g^-1."""
        return int(self.mult[self.mult[g, x], self.inv[g]])

    def comm(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        t = self.mult
        return int(t[t[t[self.inv[a], self.inv[b]], a], b])

    def power(self, a: int, e: int) -> int:
        if e < 0:
            return self.power(self.inverse(a), -e)
        acc, base = 0, a
        while e:
            if e & 1:
                acc = int(self.mult[acc, base])
            base = int(self.mult[base, base])
            e >>= 1
        return acc

    def word(self, letters: Iterable[int]) -> int:
        acc = 0
        for x in letters:
            acc = int(self.mult[acc, x])
        return acc

    def element_order(self, a: int) -> int:
        return self.element_orders()[a]

    def element_orders(self) -> list[int]:
        if self._orders is None:
            orders = [1] * self.order
            for a in range(1, self.order):
                x, n = a, 1
                while x != 0:
                    x = int(self.mult[x, a])
                    n += 1
                orders[a] = n
            self._orders = orders
        return self._orders

    def exponent(self) -> int:
        e = 1
        for o in set(self.element_orders()):
            e = e * o // _gcd(e, o)
        return e

    @property
    def is_abelian(self) -> bool:
        if self._abelian is None:
            self._abelian = bool(np.array_equal(self.mult, self.mult.T))
        return self._abelian

    def is_p_group(self, p: int) -> bool:
        n = self.order
        while n % p == 0:
            n //= p
        return n == 1

    def prime(self) -> Optional[int]:
        """The prime p when the order is a nontrivial p-power, else None."""
        n = self.order
        if n == 1:
            return None
        p = _least_prime_factor(n)
        return p if self.is_p_group(p) else None

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _least_prime_factor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


class Subgroup:
    """A subgroup of a FiniteGroup, stored as a strictly increasing index list."""

    __slots__ = ("parent", "elems", "_set")

    def __init__(self, parent: FiniteGroup, elems: Sequence[int], check: bool = True):
        elems = tuple(sorted({int(x) for x in elems}))
        if check:
            if not elems or elems[0] != 0:
                raise ValueError("subgroup must contain the identity 0")
            es = set(elems)
            for a in elems:
                if int(parent.inv[a]) not in es:
                    raise ValueError("not closed under inverse")
            prods = kernels.bulk_mult(parent.mult, elems, elems)
            if not set(prods) <= es:
                raise ValueError("not closed under multiplication")
            if parent.order % len(elems) != 0:
                raise ValueError("Lagrange violation (corrupt table?)")
        self.parent = parent
        self.elems = elems
        self._set = frozenset(elems)

    def __contains__(self, x: int) -> bool:
        return int(x) in self._set

    def __len__(self) -> int:
        return len(self.elems)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subgroup) and self.parent is other.parent
                and self.elems == other.elems)

    def __hash__(self) -> int:
        return hash((id(self.parent), self.elems))

    def __le__(self, other: "Subgroup") -> bool:
        return self._set <= other._set

    def is_normal(self) -> bool:
        G = self.parent
        conj = kernels.conjugates(G.mult, G.inv, self.elems, range(G.order))
        return set(conj) <= self._set

    def is_trivial(self) -> bool:
        return len(self.elems) == 1

    def as_group(self, name: Optional[str] = None):
        """The subgroup as a FiniteGroup of its own, with index maps.

        Returns (group, to_parent, from_parent) where to_parent[i] is the
        parent index of local element i and from_parent maps back.
        """
        G = self.parent
        to_parent = list(self.elems)
        from_parent = {g: i for i, g in enumerate(to_parent)}
        n = len(to_parent)
        table = np.empty((n, n), dtype=np.int64)
        sub = G.mult[np.ix_(to_parent, to_parent)]
        for i in range(n):
            table[i] = [from_parent[int(x)] for x in sub[i]]
        name = name or f"{G.name}|sub{n}"
        return FiniteGroup(table, name=name, validate=False), to_parent, from_parent

    def __repr__(self) -> str:
        return f"Subgroup(order={len(self.elems)} of {self.parent.name})"


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (0,), check=False)


def full_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, range(G.order), check=False)


class Homomorphism:
    """A verified group homomorphism, stored as an index array."""

    __slots__ = ("dom", "cod", "map")

    def __init__(self, dom: FiniteGroup, cod: FiniteGroup, mapping, check: bool = True):
        m = np.asarray(mapping, dtype=np.int64)
        if m.shape != (dom.order,):
            raise ValueError("map length must equal the domain order")
        if check and not kernels.is_homomorphism(dom.mult, cod.mult, m):
            raise ValueError("not a homomorphism")
        self.dom = dom
        self.cod = cod
        self.map = m

    def __call__(self, x: int) -> int:
        return int(self.map[x])

    def is_injective(self) -> bool:
        return len(set(int(x) for x in self.map)) == self.dom.order

    def is_surjective(self) -> bool:
        return len(set(int(x) for x in self.map)) == self.cod.order

    def image(self) -> Subgroup:
        return Subgroup(self.cod, sorted(set(int(x) for x in self.map)), check=False)

    def kernel(self) -> Subgroup:
        return Subgroup(self.dom, [i for i in range(self.dom.order) if self.map[i] == 0],
                        check=False)

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """self o inner (inner applied first)."""
        if inner.cod is not self.dom:
            raise ValueError("composition domain mismatch")
        return Homomorphism(inner.dom, self.cod, self.map[inner.map], check=False)

    def restrict(self, sub: Subgroup) -> "Homomorphism":
        """Restriction to a subgroup, as a map on the subgroup's own group."""
        S, to_parent, _ = sub.as_group()
        return Homomorphism(S, self.cod, [int(self.map[g]) for g in to_parent],
                            check=False)

    def preimage(self, sub: Subgroup) -> Subgroup:
        inside = sub._set
        return Subgroup(self.dom,
                        [i for i in range(self.dom.order) if int(self.map[i]) in inside],
                        check=False)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Homomorphism) and self.dom is other.dom
                and self.cod is other.cod and np.array_equal(self.map, other.map))

    def __repr__(self) -> str:
        return f"Homomorphism({self.dom.name} -> {self.cod.name})"


def identity_hom(G: FiniteGroup) -> Homomorphism:
    return Homomorphism(G, G, np.arange(G.order), check=False)


def trivial_hom(G: FiniteGroup, H: FiniteGroup) -> Homomorphism:
    return Homomorphism(G, H, np.zeros(G.order, dtype=np.int64), check=False)


# -- subgroup constructions -------------------------------------------------

def subgroup_generated(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = [int(g) for g in gens]
    for g in gens:
        if not 0 <= g < G.order:
            raise ValueError(f"generator index {g} out of range")
    return Subgroup(G, kernels.closure(G.mult, G.inv, gens), check=False)


def normal_closure(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = sorted({int(g) for g in gens})
    for g in gens:
        if not 0 <= g < G.order:
            raise ValueError(f"generator index {g} out of range")
    elems = set(kernels.closure(G.mult, G.inv, gens))
    while True:
        conj = set(kernels.conjugates(G.mult, G.inv, sorted(elems), range(G.order)))
        if conj <= elems:
            break
        elems = set(kernels.closure(G.mult, G.inv, sorted(elems | conj)))
    return Subgroup(G, sorted(elems), check=False)


def intersect(a: Subgroup, b: Subgroup) -> Subgroup:
    if a.parent is not b.parent:
        raise ValueError("subgroups of different parents")
    return Subgroup(a.parent, sorted(a._set & b._set), check=False)


def product_subgroup(a: Subgroup, b: Subgroup) -> Subgroup:
    """The subgroup generated by a and b (equals AB when one is normal)."""
    return subgroup_generated(a.parent, list(a.elems) + list(b.elems))


def commutator_subgroup(G: FiniteGroup, a: Subgroup, b: Subgroup) -> Subgroup:
    gens = kernels.commutators(G.mult, G.inv, a.elems, b.elems)
    return subgroup_generated(G, gens)


def power_subgroup(G: FiniteGroup, a: Subgroup, e: int) -> Subgroup:
    """Subgroup generated by the e-th powers of the elements of a."""
    return subgroup_generated(G, kernels.powers(G.mult, a.elems, e))


def centralizer(G: FiniteGroup, sub: Subgroup) -> Subgroup:
    t = G.mult
    elems = [g for g in range(G.order)
             if all(t[g, x] == t[x, g] for x in sub.elems)]
    return Subgroup(G, elems, check=False)


def center(G: FiniteGroup) -> Subgroup:
    return centralizer(G, full_subgroup(G))


# -- quotients ---------------------------------------------------------------

def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, Homomorphism]:
    """The quotient G/N with minimal-index coset representatives."""
    if N.parent is not G:
        raise ValueError("subgroup of a different group")
    if not N.is_normal():
        raise ValueError("subgroup is not normal")
    narr = np.asarray(N.elems, dtype=np.int64)
    rep = G.mult[:, narr].min(axis=1)          # rep[g] = min(gN)
    reps = sorted(set(int(x) for x in rep))
    index_of = {r: i for i, r in enumerate(reps)}
    q = len(reps)
    table = np.empty((q, q), dtype=np.int64)
    for i, r in enumerate(reps):
        table[i] = [index_of[int(rep[G.mult[r, s]])] for s in reps]
    Q = FiniteGroup(table, name=f"{G.name}/N{len(N)}", validate=False)
    proj = Homomorphism(G, Q, [index_of[int(rep[g])] for g in range(G.order)],
                        check=False)
    return Q, proj


# -- products ----------------------------------------------------------------

def direct_product(G: FiniteGroup, H: FiniteGroup,
                   name: Optional[str] = None) -> tuple[FiniteGroup, Homomorphism, Homomorphism]:
    """G x H with lexicographic indexing (G-index major).

    Returns (product, embed_G, embed_H).
    """
    n, m = G.order, H.order
    if n * m > DEFAULT_ORDER_CAP * 16:
        raise CapExceeded(f"direct product of order {n*m} is too large")
    gi, hi = np.divmod(np.arange(n * m), m)
    a1 = G.mult[gi[:, None], gi[None, :]]
    a2 = H.mult[hi[:, None], hi[None, :]]
    table = a1 * m + a2
    P = FiniteGroup(table, name=name or f"{G.name}x{H.name}", validate=False)
    eg = Homomorphism(G, P, np.arange(n) * m, check=False)
    eh = Homomorphism(H, P, np.arange(m), check=False)
    return P, eg, eh


class GroupAction:
    """An action of `actor` on `target` by automorphisms.

    perms[a] is the permutation of target indices given by the element a of
    the actor; the assignment a -> perms[a] must be a homomorphism into the
    symmetric group and each perms[a] an automorphism of target.
    """

    __slots__ = ("actor", "target", "perms")

    def __init__(self, actor: FiniteGroup, target: FiniteGroup, perms, check: bool = True):
        perms = np.asarray(perms, dtype=np.int64)
        if perms.shape != (actor.order, target.order):
            raise ValueError("perms must be actor.order x target.order")
        if check:
            for a in range(actor.order):
                if not kernels.is_homomorphism(target.mult, target.mult, perms[a]):
                    raise ValueError(f"act({a}) is not an endomorphism")
                if len(set(int(x) for x in perms[a])) != target.order:
                    raise ValueError(f"act({a}) is not bijective")
            for a in range(actor.order):
                for b in range(actor.order):
                    c = int(actor.mult[a, b])
                    if not np.array_equal(perms[a][perms[b]], perms[c]):
                        raise ValueError("action is not a homomorphism")
        self.actor = actor
        self.target = target
        self.perms = perms

    def apply(self, a: int, x: int) -> int:
        return int(self.perms[a, x])


def trivial_action(actor: FiniteGroup, target: FiniteGroup) -> GroupAction:
    perms = np.tile(np.arange(target.order), (actor.order, 1))
    return GroupAction(actor, target, perms, check=False)


def semidirect_product(B: FiniteGroup, H: FiniteGroup, action: GroupAction,
                       name: Optional[str] = None,
                       ) -> tuple[FiniteGroup, Homomorphism, Homomorphism]:
    """B x| H for an action of H on B; B-index-major lexicographic indexing.

    Product rule (b1,h1)(b2,h2) = (b1 * h1(b2), h1 h2).  Returns the group
    together with the canonical embeddings of B (normal) and H.
    """
    if action.actor is not H or action.target is not B:
        raise ValueError("action must be of H on B")
    nb, nh = B.order, H.order
    n = nb * nh
    if n > DEFAULT_ORDER_CAP * 16:
        raise CapExceeded(f"semidirect product of order {n} is too large")
    bi, hi = np.divmod(np.arange(n), nh)
    table = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        b1, h1 = int(bi[x]), int(hi[x])
        acted = action.perms[h1][bi]                 # h1(b2) over all y
        bb = B.mult[b1, acted]
        hh = H.mult[h1, hi]
        table[x] = bb * nh + hh
    P = FiniteGroup(table, name=name or f"{B.name}:{H.name}", validate=False)
    eb = Homomorphism(B, P, np.arange(nb) * nh, check=False)
    eh = Homomorphism(H, P, np.arange(nh), check=False)
    return P, eb, eh


# -- generating sets, automorphisms, isomorphism -----------------------------

def generating_sequence(G: FiniteGroup) -> list[int]:
    """A small generating sequence picked greedily by index."""
    gens: list[int] = []
    cur = {0}
    while len(cur) < G.order:
        nxt = min(x for x in range(G.order) if x not in cur)
        gens.append(nxt)
        cur = set(kernels.closure(G.mult, G.inv, gens))
    return gens


def _extend_map(G: FiniteGroup, H: FiniteGroup, gens: Sequence[int],
                images: Sequence[int]) -> Optional[np.ndarray]:
    """Try to extend gens -> images to a homomorphism on <gens>; None if inconsistent.

    The returned array maps every element of <gens> (entries outside stay -1).
    """
    m = np.full(G.order, -1, dtype=np.int64)
    m[0] = 0
    frontier = [0]
    for g, im in zip(gens, images):
        if m[g] == -1:
            m[g] = im
            frontier.append(g)
        elif m[g] != im:
            return None
    known = [x for x in range(G.order) if m[x] != -1]
    while frontier:
        new = []
        for x in known:
            for y in frontier:
                for a, b in ((x, y), (y, x)):
                    z = int(G.mult[a, b])
                    w = int(H.mult[m[a], m[b]])
                    if m[z] == -1:
                        m[z] = w
                        new.append(z)
                    elif m[z] != w:
                        return None
        known.extend(new)
        frontier = new
    return m


def iter_homomorphisms(G: FiniteGroup, H: FiniteGroup, image_filter=None):
    """Yield all homomorphisms G -> H by backtracking over generator images.

    image_filter(gen, candidate) may prune candidate images.
    """
    gens = generating_sequence(G)
    orders_G = G.element_orders()
    orders_H = H.element_orders()
    cands = []
    for g in gens:
        og = orders_G[g]
        c = [h for h in range(H.order) if og % orders_H[h] == 0]
        if image_filter is not None:
            c = [h for h in c if image_filter(g, h)]
        cands.append(c)
    for images in itertools.product(*cands):
        m = _extend_map(G, H, gens, images)
        if m is None or (m == -1).any():
            continue
        if kernels.is_homomorphism(G.mult, H.mult, m):
            yield Homomorphism(G, H, m, check=False)


def is_retract(G: FiniteGroup, H: Subgroup) -> Optional[Homomorphism]:
    """A homomorphism G -> G with image in H restricting to the identity on H."""
    if H.parent is not G:
        raise ValueError("subgroup of a different group")
    gens = generating_sequence(G)
    orders = G.element_orders()
    cands = [[h for h in H.elems if orders[g] % orders[h] == 0] for g in gens]
    hset = H._set
    for images in itertools.product(*cands):
        m = _extend_map(G, G, gens, images)
        if m is None or (m == -1).any():
            continue
        if not all(int(x) in hset for x in m):
            continue
        if not all(m[h] == h for h in H.elems):
            continue
        if kernels.is_homomorphism(G.mult, G.mult, m):
            return Homomorphism(G, G, m, check=False)
    return None


def automorphisms(G: FiniteGroup, cap: int = DEFAULT_AUT_CAP,
                  size_cap: int = DEFAULT_AUT_SIZE_CAP,
                  search_cap: int = 2_000_000) -> list[np.ndarray]:
    """All automorphisms of G as permutation arrays, sorted lexicographically."""
    if G.order > cap:
        raise CapExceeded(f"automorphism enumeration capped at order {cap}")
    gens = generating_sequence(G)
    orders = G.element_orders()
    by_order: dict[int, list[int]] = {}
    for x in range(G.order):
        by_order.setdefault(orders[x], []).append(x)
    volume = 1
    for g in gens:
        volume *= len(by_order[orders[g]])
    if volume > search_cap:
        raise CapExceeded(f"automorphism search space {volume} beyond cap")
    out = []
    for images in itertools.product(*[by_order[orders[g]] for g in gens]):
        m = _extend_map(G, G, gens, images)
        if m is None or (m == -1).any():
            continue
        if len(set(int(x) for x in m)) != G.order:
            continue
        if kernels.is_homomorphism(G.mult, G.mult, m):
            out.append(m.copy())
            if len(out) > size_cap:
                raise CapExceeded("automorphism group larger than size cap")
    out.sort(key=lambda a: tuple(int(x) for x in a))
    return out


def automorphism_group(G: FiniteGroup, cap: int = DEFAULT_AUT_CAP):
    """Aut(G) as a FiniteGroup of permutations plus the tautological action."""
    perms = automorphisms(G, cap=cap)
    index = {tuple(int(x) for x in p): i for i, p in enumerate(perms)}
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(int(x) for x in p[q])]
    # identity must sit at index 0: the identity permutation is lexicographically
    # minimal among permutations fixing 0 only when no automorphism sorts below
    # it, so reorder explicitly.
    ident = index[tuple(range(G.order))]
    if ident != 0:
        order = [ident] + [i for i in range(n) if i != ident]
        pos = {old: new for new, old in enumerate(order)}
        table = np.array([[pos[int(table[a, b])] for b in order] for a in order],
                         dtype=np.int64)
        perms = [perms[i] for i in order]
    A = FiniteGroup(table, name=f"Aut({G.name})", validate=False)
    action = GroupAction(A, G, np.stack(perms), check=False)
    return A, action


def permutation_closure(G: FiniteGroup, perms: Sequence[np.ndarray],
                        size_cap: int = DEFAULT_AUT_SIZE_CAP):
    """Subgroup of Sym(G) generated by permutation arrays; returns the list."""
    ident = tuple(range(G.order))
    seen = {ident}
    out = [np.arange(G.order, dtype=np.int64)]
    frontier = []
    for p in perms:
        key = tuple(int(x) for x in p)
        if key not in seen:
            seen.add(key)
            out.append(np.asarray(p, dtype=np.int64))
            frontier.append(np.asarray(p, dtype=np.int64))
    gens = list(frontier)
    while frontier:
        new = []
        for p in list(out):
            for q in gens:
                r = q[p]
                key = tuple(int(x) for x in r)
                if key not in seen:
                    seen.add(key)
                    out.append(r)
                    new.append(r)
                    if len(out) > size_cap:
                        raise CapExceeded("permutation closure exceeds size cap")
        frontier = new
    out.sort(key=lambda a: tuple(int(x) for x in a))
    return out


def find_isomorphism(G: FiniteGroup, H: FiniteGroup) -> Optional[Homomorphism]:
    """An isomorphism G -> H, or None; backtracking with invariant pruning."""
    if G.order != H.order:
        return None
    if sorted(G.element_orders()) != sorted(H.element_orders()):
        return None
    if G.is_abelian != H.is_abelian:
        return None
    gens = generating_sequence(G)
    orders_G = G.element_orders()
    orders_H = H.element_orders()
    by_order: dict[int, list[int]] = {}
    for x in range(H.order):
        by_order.setdefault(orders_H[x], []).append(x)
    for images in itertools.product(*[by_order[orders_G[g]] for g in gens]):
        m = _extend_map(G, H, gens, images)
        if m is None or (m == -1).any():
            continue
        if len(set(int(x) for x in m)) != G.order:
            continue
        if kernels.is_homomorphism(G.mult, H.mult, m):
            return Homomorphism(G, H, m, check=False)
    return None


def is_isomorphic(G: FiniteGroup, H: FiniteGroup) -> bool:
    return find_isomorphism(G, H) is not None


def all_subgroups(G: FiniteGroup, cap: int = 100_000) -> list[Subgroup]:
    """Every subgroup of G, as sorted element tuples in lexicographic order.

    Breadth-first closure: repeatedly extend known subgroups by one
    generator.  Desk-scale only (the count explodes beyond order ~64).
    """
    seen = {(0,)}
    frontier = [(0,)]
    while frontier:
        new = []
        for elems in frontier:
            known = set(elems)
            for x in range(1, G.order):
                if x in known:
                    continue
                bigger = tuple(kernels.closure(G.mult, G.inv, list(elems) + [x]))
                if bigger not in seen:
                    seen.add(bigger)
                    new.append(bigger)
                    if len(seen) > cap:
                        raise CapExceeded("subgroup enumeration cap exceeded")
        frontier = new
    return [Subgroup(G, e, check=False) for e in sorted(seen)]


def abelian_invariants(G: FiniteGroup) -> list[int]:
    """Invariant factors d_1 | d_2 | ... of a finite abelian group."""
    if not G.is_abelian:
        raise ValueError("abelian_invariants needs an abelian group")
    if G.order == 1:
        return []
    # primary decomposition via element counts: for each prime p, the number
    # of elements of order dividing p^k determines the p-part multiset.
    n = G.order
    primes = []
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            primes.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        primes.append(m)
    orders = G.element_orders()
    primary: dict[int, list[int]] = {}
    for p in primes:
        counts = []
        k = 1
        while True:
            c = sum(1 for o in orders if p ** k % o == 0)
            counts.append(c)
            if c == sum(1 for o in orders if _is_ppower(o, p)):
                break
            k += 1
        # counts[k-1] = p ** sum_i min(k, e_i); recover the exponent multiset
        exps = []
        prev = 0
        logs = [round(_ilog(c, p)) for c in counts]
        for k in range(len(logs), 0, -1):
            here = logs[k - 1] - (logs[k - 2] if k >= 2 else 0)
            newly = here - prev
            exps.extend([k] * newly)
            prev = here
        primary[p] = sorted(exps)
    rmax = max(len(v) for v in primary.values())
    factors = []
    for i in range(rmax):
        f = 1
        for p, exps in primary.items():
            pad = rmax - len(exps)
            j = i - pad
            if j >= 0:
                f *= p ** exps[j]
        factors.append(f)
    return factors


def _is_ppower(o: int, p: int) -> bool:
    while o % p == 0:
        o //= p
    return o == 1


def _ilog(c: int, p: int) -> int:
    k = 0
    while c > 1:
        c //= p
        k += 1
    return k
