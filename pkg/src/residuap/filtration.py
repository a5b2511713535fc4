"""Filtrations of finite groups: gamma series, dimension subgroups, chief
refinements, stretchings and potency reports.

A filtration is a descending chain G_1 >= G_2 >= ... of subgroups with the
trailing-term convention: the stored sequence is read as continuing with its
last term forever, so "finite length" means the last stored term is trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import kernels
from .groups import (FiniteGroup, Homomorphism, Subgroup, commutator_subgroup,
                     full_subgroup, intersect, power_subgroup, quotient,
                     subgroup_generated, trivial_subgroup)


class Filtration:
    """A descending chain of subgroups of one group (1-based indexing)."""

    __slots__ = ("group", "terms")

    def __init__(self, group: FiniteGroup, terms: Sequence[Subgroup], check: bool = True):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a filtration needs at least one term")
        if check:
            for t in terms:
                if t.parent is not group:
                    raise ValueError("term belongs to a different group")
            for a, b in zip(terms, terms[1:]):
                if not b <= a:
                    raise ValueError("terms must be descending")
        self.group = group
        self.terms = terms

    def term(self, n: int) -> Subgroup:
        """G_n with the trailing convention (n >= 1)."""
        if n < 1:
            raise ValueError("terms are indexed from 1")
        return self.terms[min(n, len(self.terms)) - 1]

    @property
    def complete(self) -> bool:
        return len(self.terms[0]) == self.group.order

    def is_normal(self) -> bool:
        return all(t.is_normal() for t in self.terms)

    def length(self) -> Optional[int]:
        """Smallest n with G_{n+1} = 1, or None if the tail is nontrivial."""
        if not self.terms[-1].is_trivial():
            return None
        n = len(self.terms)
        while n >= 2 and self.terms[n - 2].is_trivial():
            n -= 1
        return n - 1

    def essential_length(self) -> int:
        return len({t.elems for t in self.terms if len(t) > 1})

    def stabilized_length(self) -> int:
        """Number of stored terms after dropping a repeated tail (at least 1)."""
        n = len(self.terms)
        while n >= 2 and self.terms[n - 1].elems == self.terms[n - 2].elems:
            n -= 1
        return n

    def is_central_p(self, p: int) -> bool:
        if not self.complete:
            return False
        G = self.group
        for n in range(1, len(self.terms) + 1):
            nxt = self.term(n + 1)
            comms = kernels.commutators(G.mult, G.inv, range(G.order),
                                        self.term(n).elems)
            pows = kernels.powers(G.mult, self.term(n).elems, p)
            if not (set(comms) <= nxt._set and set(pows) <= nxt._set):
                return False
        return True

    def layer(self, n: int):
        """The layer G_n / G_{n+1}.

        Returns (Q, proj, to_parent): Q the quotient group, proj the
        projection from G_n realized as its own group, and to_parent the list
        sending local G_n indices to parent indices.
        """
        top, to_parent, from_parent = self.term(n).as_group()
        below = [from_parent[g] for g in self.term(n + 1).elems]
        Q, proj = quotient(top, Subgroup(top, below, check=False))
        return Q, proj, to_parent

    def intersection(self, elems_or_sub) -> "Filtration":
        """Intersection filtration with a subgroup of the same parent."""
        sub = elems_or_sub
        return Filtration(self.group, [intersect(t, sub) for t in self.terms],
                          check=False)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Filtration) and self.group is other.group
                and self.terms == other.terms)

    def equivalent(self, other: "Filtration") -> bool:
        """Same set of terms, which is equivalence of filtrations up to
        stretching."""
        return ({t.elems for t in self.terms} == {t.elems for t in other.terms}
                and self.group is other.group)

    def __repr__(self) -> str:
        sizes = ">=".join(str(len(t)) for t in self.terms)
        return f"Filtration({self.group.name}: {sizes})"


@dataclass(frozen=True)
class StretchMap:
    """A strictly increasing index map iota with iota(1) = 1."""

    iota: tuple[int, ...]

    def __post_init__(self):
        if not self.iota or self.iota[0] != 1:
            raise ValueError("iota must start at 1")
        if any(b <= a for a, b in zip(self.iota, self.iota[1:])):
            raise ValueError("iota must be strictly increasing")

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("indices start at 1")
        if n <= len(self.iota):
            return self.iota[n - 1]
        return self.iota[-1] + (n - len(self.iota))

    @staticmethod
    def identity(length: int = 1) -> "StretchMap":
        return StretchMap(tuple(range(1, length + 1)))

    def compose(self, inner: "StretchMap") -> "StretchMap":
        """Index map of a stretching applied after `inner`.

        The stored prefix must cover the nonlinear part of both maps, so it
        extends past both stored tuples.
        """
        upto = len(inner.iota) + len(self.iota) + 1
        return StretchMap(tuple(self(inner(n)) for n in range(1, upto + 1)))


def stretch(F: Filtration, sm: StretchMap, total: Optional[int] = None) -> Filtration:
    """The stretching of F along sm: term m equals F_j for iota(j) <= m < iota(j+1)."""
    n_terms = len(F.terms)
    total = total if total is not None else sm(n_terms)
    out = []
    j = 1
    for m in range(1, total + 1):
        while sm(j + 1) <= m:
            j += 1
        out.append(F.term(j))
    return Filtration(F.group, out, check=False)


# -- canonical series ---------------------------------------------------------

def lower_central_series(G: FiniteGroup) -> Filtration:
    """gamma_1 = G, gamma_{n+1} = [G, gamma_n], computed to stabilization."""
    terms = [full_subgroup(G)]
    while True:
        nxt = commutator_subgroup(G, full_subgroup(G), terms[-1])
        if nxt.elems == terms[-1].elems:
            break
        terms.append(nxt)
    return Filtration(G, terms, check=False)


def lower_central_p_series(G: FiniteGroup, p: int) -> Filtration:
    """gamma^p_1 = G, gamma^p_{n+1} = [G, gamma^p_n] (gamma^p_n)^p."""
    _require_prime(p)
    terms = [full_subgroup(G)]
    while True:
        cur = terms[-1]
        gens = list(commutator_subgroup(G, full_subgroup(G), cur).elems)
        gens += kernels.powers(G.mult, cur.elems, p)
        nxt = subgroup_generated(G, gens)
        if nxt.elems == cur.elems:
            break
        terms.append(nxt)
    return Filtration(G, terms, check=False)


def dimension_series(G: FiniteGroup, p: int) -> Filtration:
    """Dimension subgroups in characteristic p.

    Computed by the recursive definition
    D_1 = G, D_n = (D_ceil(n/p))^p prod_{i+j=n} [D_i, D_j]
    and cross-checked against Lazard's closed formula
    D_n = prod_{i p^j >= n} gamma_i(G)^(p^j); the two must agree.
    """
    _require_prime(p)
    D = [full_subgroup(G)]  # D[k] = D_{k+1}
    n = 2
    while not D[-1].is_trivial():
        ceil_np = (n + p - 1) // p
        gens = list(power_subgroup(G, D[ceil_np - 1], p).elems)
        for i in range(1, n):
            j = n - i
            gens += kernels.commutators(G.mult, G.inv, D[i - 1].elems, D[j - 1].elems)
        D.append(subgroup_generated(G, gens))
        n += 1
    rec = Filtration(G, D, check=False)
    laz = _lazard_series(G, p, len(D))
    for k in range(1, len(D) + 1):
        if rec.term(k).elems != laz.term(k).elems:
            raise AssertionError(
                f"dimension series mismatch at n={k}: recursive vs Lazard")
    return rec


def _lazard_series(G: FiniteGroup, p: int, upto: int) -> Filtration:
    gamma = lower_central_series(G)
    gmax = len(gamma.terms)
    terms = []
    for n in range(1, upto + 1):
        gens: list[int] = []
        for i in range(1, gmax + 1):
            j = 0
            while i * p ** j < n:
                j += 1
            gens += kernels.powers(G.mult, gamma.term(i).elems, p ** j)
        terms.append(subgroup_generated(G, gens))
    return Filtration(G, terms, check=False)


def _require_prime(p: int):
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ValueError(f"{p} is not prime")


# -- chief filtrations ---------------------------------------------------------

def _minimal_normal_over(G: FiniteGroup, floor: Subgroup, ceil: Subgroup) -> list[Subgroup]:
    """All minimal members of {N normal in G : floor < N <= ceil}, sorted."""
    from .groups import normal_closure
    cands: dict[tuple, Subgroup] = {}
    floor_set = floor._set
    for x in ceil.elems:
        if x in floor_set:
            continue
        N = subgroup_generated(G, list(floor.elems) + list(normal_closure(G, [x]).elems))
        if not set(N.elems) <= ceil._set:
            continue
        cands[N.elems] = N
    mins = []
    for key, N in cands.items():
        if not any(set(other) < set(key) for other in cands if other != key):
            mins.append(N)
    mins.sort(key=lambda s: (len(s), s.elems))
    return mins


def chief_refinement(F: Filtration) -> Filtration:
    """Refine a normal finite-length filtration to a chief filtration.

    Between consecutive terms a maximal chain of subgroups normal in G is
    inserted, ascending from the lower term; at every step the
    lexicographically least minimal candidate is chosen.
    """
    if not F.is_normal():
        raise ValueError("chief refinement needs a normal filtration")
    if F.length() is None:
        raise ValueError("chief refinement needs finite length")
    G = F.group
    stored = list(F.terms)
    if len(stored[0]) != G.order:
        stored.insert(0, full_subgroup(G))
    chain = [stored[0]]
    for upper, lower in zip(stored, stored[1:]):
        if upper.elems == lower.elems:
            continue
        # climb from lower towards upper, then emit the segment descending
        seg = [lower]
        while seg[-1].elems != upper.elems:
            seg.append(_minimal_normal_over(G, seg[-1], upper)[0])
        chain.extend(reversed(seg[:-1]))
    if not chain[-1].is_trivial():
        chain.append(trivial_subgroup(G))
    return Filtration(G, chain, check=False)


def chief_series(G: FiniteGroup, cap: int = 100_000) -> list[tuple[Subgroup, ...]]:
    """All chief filtrations of G, each as a descending tuple G > ... > 1."""
    out: list[tuple[Subgroup, ...]] = []

    def ascend(chain: list[Subgroup]):
        if len(out) > cap:
            raise ValueError("chief series enumeration cap exceeded")
        if chain[-1].elems == tuple(range(G.order)):
            out.append(tuple(reversed(chain)))
            return
        for N in _minimal_normal_over(G, chain[-1], full_subgroup(G)):
            ascend(chain + [N])

    ascend([trivial_subgroup(G)])
    return out


# -- alignment ----------------------------------------------------------------

class AlignmentError(ValueError):
    pass


def induced_chain(F: Filtration, emb: Homomorphism) -> list[tuple[int, ...]]:
    """Per-level pullbacks of F under an injective map U -> F.group, as U-index tuples."""
    image = {int(emb.map[u]): u for u in range(emb.dom.order)}
    chain = []
    for n in range(1, len(F.terms) + 1):
        chain.append(tuple(sorted(image[g] for g in F.term(n).elems if g in image)))
    return chain


def reduced_chain(F: Filtration, emb: Homomorphism) -> tuple[tuple[int, ...], ...]:
    """Distinct terms of the induced chain on U, in descending order."""
    seen = []
    for level in induced_chain(F, emb):
        if not seen or seen[-1] != level:
            seen.append(level)
    if seen and len(seen) >= 2 and seen[-1] == seen[-2]:
        seen.pop()
    return tuple(seen)


def align_filtrations(FG: Filtration, FH: Filtration,
                      uG: Homomorphism, uH: Homomorphism,
                      ) -> tuple[Filtration, Filtration, StretchMap, StretchMap]:
    """Stretch two filtrations so they intersect to the same chain on U.

    uG and uH are the injective maps of the common subgroup U into the two
    groups.  Raises AlignmentError when the induced filtrations on U are not
    equivalent.
    """
    cG = induced_chain(FG, uG)
    cH = induced_chain(FH, uH)
    # trailing convention: pad conceptually with the final value
    distinct_G = list(dict.fromkeys(cG))
    distinct_H = list(dict.fromkeys(cH))
    if distinct_G != distinct_H:
        raise AlignmentError("filtrations do not induce equivalent chains on U")
    levels = distinct_G

    def segments(chain):
        segs = []
        start = 0
        for i in range(1, len(chain) + 1):
            if i == len(chain) or chain[i] != chain[start]:
                segs.append((start + 1, i))  # 1-based [start, end]
                start = i
        return segs

    segG = segments(cG)
    segH = segments(cH)
    if len(segG) != len(segH):
        raise AlignmentError("induced chains have different segment structure")
    outG, outH = [], []
    iotaG, iotaH = [], []
    for (ag, bg), (ah, bh) in zip(segG, segH):
        width = max(bg - ag, bh - ah) + 1
        for k in range(width):
            iotaG.append(min(ag + k, bg))
            iotaH.append(min(ah + k, bh))
            outG.append(FG.term(min(ag + k, bg)))
            outH.append(FH.term(min(ah + k, bh)))
    FGs = Filtration(FG.group, outG, check=False)
    FHs = Filtration(FH.group, outH, check=False)
    # the stretch maps: position of the first slot where original index j appears
    def to_stretchmap(iota_slots, n_orig):
        first = {}
        for slot, j in enumerate(iota_slots, start=1):
            if j not in first:
                first[j] = slot
        vals = [first.get(j) for j in range(1, n_orig + 1)]
        # indices never used (duplicated terms in the original) inherit positions
        fixed = []
        prev = 0
        for v in vals:
            if v is None or v <= prev:
                v = prev + 1
            fixed.append(v)
            prev = v
        return StretchMap(tuple(fixed))

    smG = to_stretchmap(iotaG, len(FG.terms))
    smH = to_stretchmap(iotaH, len(FH.terms))
    if induced_chain(FGs, uG) != induced_chain(FHs, uH):
        raise AssertionError("alignment failed to equalize induced chains")
    return FGs, FHs, smG, smH


# -- potency ------------------------------------------------------------------

@dataclass
class PotencyLevel:
    n: int
    is_morphism: bool
    kernel: Optional[tuple[int, ...]]
    kernel_matches: bool
    phi_injective: bool
    phi_bijective: bool


@dataclass
class PotencyReport:
    """Potency of a central p-filtration up to an explicit finite horizon.

    The notions are horizon-relative because no nontrivial finite group
    satisfies them at all levels; this finite semantics is a deliberate
    choice of the workbench.
    """
    p: int
    horizon: int
    plain: list[PotencyLevel] = field(default_factory=list)
    strong: list[PotencyLevel] = field(default_factory=list)

    @property
    def p_potent(self) -> bool:
        return all(l.is_morphism and l.kernel_matches for l in self.plain)

    @property
    def strongly_p_potent(self) -> bool:
        return all(l.is_morphism and l.kernel_matches for l in self.strong)

    @property
    def uniformly_p_potent(self) -> bool:
        return self.strongly_p_potent and all(l.phi_bijective for l in self.strong)


def _induced_power_map(G: FiniteGroup, dom: Subgroup, e: int,
                       mid: Subgroup, low: Subgroup):
    """Classify x -> x^e as a map dom -> mid/low.

    Returns (is_morphism, kernel_elems_or_None, surjective).
    """
    top, to_parent, from_parent = mid.as_group()
    low_local = Subgroup(top, [from_parent[g] for g in low.elems], check=False)
    Q, proj = quotient(top, low_local)
    images = {}
    for x in dom.elems:
        px = G.power(x, e)
        if px not in mid:
            return False, None, False
        images[x] = proj(from_parent[px])
    t = G.mult
    for a in dom.elems:
        for b in dom.elems:
            if images[int(t[a, b])] != Q.mul(images[a], images[b]):
                return False, None, False
    kernel = tuple(sorted(x for x in dom.elems if images[x] == 0))
    surjective = len(set(images.values())) == Q.order
    return True, kernel, surjective


def classify_potency(F: Filtration, p: int, horizon: int) -> PotencyReport:
    """Report p-potency, strong and uniform p-potency of F up to a horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not F.is_central_p(p):
        raise ValueError("classify_potency needs a complete central p-filtration")
    G = F.group
    rep = PotencyReport(p=p, horizon=horizon)
    for n in range(1, horizon + 1):
        ok, ker, surj = _induced_power_map(G, F.term(1), p ** n,
                                           F.term(n + 1), F.term(n + 2))
        matches = ok and ker == F.term(2).elems
        rep.plain.append(PotencyLevel(n, ok, ker, matches,
                                      phi_injective=matches,
                                      phi_bijective=matches and surj))
        ok, ker, surj = _induced_power_map(G, F.term(n), p,
                                           F.term(n + 1), F.term(n + 2))
        matches = ok and ker == F.term(n + 1).elems
        rep.strong.append(PotencyLevel(n, ok, ker, matches,
                                       phi_injective=matches,
                                       phi_bijective=matches and surj))
    return rep


class LayerMapHypothesisError(ValueError):
    """The cor-phi_n style hypothesis fails (the p=2, n=1 exceptional case)."""


def power_layer_map(G: FiniteGroup, p: int, n: int, m: int):
    """The verified layer morphism L^p_n(G) -> L^p_{n+m}(G) induced by x -> x^(p^m).

    Requires p odd, n > 1, or [G_n, G_n] <= G_{n+2} for the lower central
    p-series; the exceptional failure is reported via LayerMapHypothesisError.
    """
    _require_prime(p)
    F = lower_central_p_series(G, p)
    Gn = F.term(n)
    if p == 2:
        c = commutator_subgroup(G, Gn, Gn)
        if not c <= F.term(n + 2):
            raise LayerMapHypothesisError(
                f"p=2 and [G_{n},G_{n}] is not inside G_{n+2}")
    topn, to_par_n, _ = Gn.as_group()
    Ln, projn = quotient(topn, Subgroup(topn, [to_par_n.index(g)
                                               for g in F.term(n + 1).elems], check=False))
    topm, to_par_m, _ = F.term(n + m).as_group()
    Lm, projm = quotient(topm, Subgroup(topm, [to_par_m.index(g)
                                               for g in F.term(n + m + 1).elems], check=False))
    # build the map on layer representatives and verify well-definedness
    mapping = {}
    for x in Gn.elems:
        px = G.power(x, p ** m)
        if px not in F.term(n + m):
            raise LayerMapHypothesisError("powers leave the target term")
        src = projn(to_par_n.index(x))
        dst = projm(to_par_m.index(px))
        if src in mapping and mapping[src] != dst:
            raise LayerMapHypothesisError("induced map is not well defined")
        mapping[src] = dst
    arr = [mapping[i] for i in range(Ln.order)]
    return Homomorphism(Ln, Lm, arr)  # raises if not a morphism


def retract_trace(G: FiniteGroup, H: Subgroup, series: str, p: Optional[int] = None,
                  retraction: Optional[Homomorphism] = None) -> dict:
    """Verify Sigma_n(H) = Sigma_n(G) ^ H for a retract H, per series in
    {gamma, gamma_p, dimension}."""
    from .groups import is_retract
    if retraction is None:
        retraction = is_retract(G, H)
    if retraction is None:
        raise ValueError("H is not a retract of G")
    Hgrp, to_parent, _ = H.as_group()

    def build(group):
        if series == "gamma":
            return lower_central_series(group)
        if series == "gamma_p":
            return lower_central_p_series(group, p)
        if series == "dimension":
            return dimension_series(group, p)
        raise ValueError(f"unknown series {series!r}")

    FG = build(G)
    FH = build(Hgrp)
    depth = max(len(FG.terms), len(FH.terms)) + 1
    levels = []
    ok = True
    for n in range(1, depth + 1):
        lhs = tuple(sorted(to_parent[i] for i in FH.term(n).elems))
        rhs = intersect(FG.term(n), H).elems
        levels.append({"n": n, "sigma_H": lhs, "sigma_G_cap_H": rhs,
                       "equal": lhs == rhs})
        ok = ok and lhs == rhs
    return {"series": series, "ok": ok, "levels": levels}
