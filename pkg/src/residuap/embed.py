"""Embedding constructions for finite p-groups: fiber sums, amalgamation of
filtered p-groups into wreath towers, extension of partial automorphisms to
inner automorphisms, and mapping-torus criteria.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .algebra import WreathProduct, wreath
from .filtration import (Filtration, StretchMap, align_filtrations,
                         chief_series, induced_chain, lower_central_p_series,
                         stretch)
from .groups import (CapExceeded, FiniteGroup, GroupAction, Homomorphism,
                     Subgroup, all_subgroups, direct_product, find_isomorphism,
                     full_subgroup, identity_hom, intersect,
                     permutation_closure, quotient, semidirect_product,
                     subgroup_generated, trivial_subgroup)
from .results import NO, UNKNOWN, YES, Decision

DEFAULT_HIGMAN_CAP = 4096


@dataclass
class Amalgam:
    """Two groups with a common subgroup realized by explicit embeddings."""
    G: FiniteGroup
    H: FiniteGroup
    U: FiniteGroup
    uG: Homomorphism
    uH: Homomorphism

    def __post_init__(self):
        if self.uG.dom is not self.U or self.uH.dom is not self.U:
            raise ValueError("amalgam embeddings must start at U")
        if self.uG.cod is not self.G or self.uH.cod is not self.H:
            raise ValueError("amalgam embeddings must land in G and H")
        if not (self.uG.is_injective() and self.uH.is_injective()):
            raise ValueError("amalgam embeddings must be injective")


@dataclass
class StrongEmbedding:
    """A verified strong embedding of an amalgam into W."""
    W: FiniteGroup
    alpha: Homomorphism
    beta: Homomorphism

    def verify(self, am: Amalgam) -> None:
        if not self.alpha.is_injective():
            raise AssertionError("alpha is not injective")
        if not self.beta.is_injective():
            raise AssertionError("beta is not injective")
        for u in range(am.U.order):
            if self.alpha(am.uG(u)) != self.beta(am.uH(u)):
                raise AssertionError("alpha and beta disagree on U")
        ia = {int(self.alpha.map[g]) for g in range(am.G.order)}
        ib = {int(self.beta.map[h]) for h in range(am.H.order)}
        iu = {int(self.alpha.map[am.uG(u)]) for u in range(am.U.order)}
        if ia & ib != iu:
            raise AssertionError("images do not intersect exactly in U")


# -- fiber sums -----------------------------------------------------------------

def fiber_sum(A: FiniteGroup, B: FiniteGroup, phi: Homomorphism,
              psi: Homomorphism):
    """(A + B) / {phi(u) - psi(u)} for injective phi: U -> A, psi: U -> B.

    Returns (S, iota_A, iota_B); the canonical maps are verified injective and
    their images intersect exactly in the image of U.
    """
    if not (A.is_abelian and B.is_abelian):
        raise ValueError("fiber sums need abelian inputs")
    if phi.cod is not A or psi.cod is not B or phi.dom is not psi.dom:
        raise ValueError("mismatched fiber sum data")
    if not (phi.is_injective() and psi.is_injective()):
        raise ValueError("fiber sum identifications must be injective")
    U = phi.dom
    D, eA, eB = direct_product(A, B)
    gens = [D.mul(eA(phi(u)), D.inverse(eB(psi(u)))) for u in range(U.order)]
    K = subgroup_generated(D, gens)
    S, proj = quotient(D, K)
    iota_A = proj.compose(eA)
    iota_B = proj.compose(eB)
    if not (iota_A.is_injective() and iota_B.is_injective()):
        raise AssertionError("fiber sum embeddings failed to be injective")
    ia = {int(iota_A.map[a]) for a in range(A.order)}
    ib = {int(iota_B.map[b]) for b in range(B.order)}
    iu = {int(iota_A.map[phi(u)]) for u in range(U.order)}
    if ia & ib != iu:
        raise AssertionError("fiber sum images do not meet exactly in U")
    return S, iota_A, iota_B


# -- the amalgamation tower ------------------------------------------------------

@dataclass
class HigmanResult:
    embedding: StrongEmbedding
    FW: Filtration
    FG_star: Filtration
    FH_star: Filtration
    stretchG: StretchMap
    stretchH: StretchMap


def predicted_higman_order(am: Amalgam, FG: Filtration, FH: Filtration) -> int:
    """Predicted |W| for the wreath tower, computed on term orders only."""
    if am.uG.is_surjective() and am.uH.is_surjective():
        return am.G.order
    FGs, FHs, _, _ = align_filtrations(FG, FH, am.uG, am.uH)
    iG = [len(t) for t in FGs.terms]
    iH = [len(t) for t in FHs.terms]
    cU = [len(lv) for lv in induced_chain(FGs, am.uG)]
    return _predict(iG, iH, cU)


def _term_of(sizes: list[int], n: int) -> int:
    return sizes[min(n, len(sizes)) - 1]


def _length_of(sizes: list[int]) -> int:
    if sizes[-1] != 1:
        return len(sizes)     # conservative; trailing convention
    n = len(sizes)
    while n >= 2 and sizes[n - 2] == 1:
        n -= 1
    return n - 1


PREDICTION_CEILING = 1 << 62


def _predict(iG: list[int], iH: list[int], cU: list[int]) -> int:
    """Tower-order prediction, clamped: the true value is doubly exponential
    in the chain length, so anything past the ceiling is reported as the
    ceiling (every cap in use is far below it)."""
    lG, lH = _length_of(iG), _length_of(iH)
    if lG == 0 and lH == 0:
        return 1
    n = max(lG, lH, 1)
    x, y, v = _term_of(iG, n), _term_of(iH, n), _term_of(cU, n)
    t = x * y // v
    k = _predict([max(o // x, 1) for o in iG[:n]] + [1],
                 [max(o // y, 1) for o in iH[:n]] + [1],
                 [max(o // v, 1) for o in cU[:n]] + [1])
    if k >= PREDICTION_CEILING:
        return PREDICTION_CEILING
    if t > 1 and k * max(t.bit_length() - 1, 1) >= 63:
        return PREDICTION_CEILING
    size = (t ** k) * k
    return min(size, PREDICTION_CEILING)


def higman_embed(am: Amalgam, FG: Filtration, FH: Filtration,
                 cap: int = DEFAULT_HIGMAN_CAP, verify: bool = True) -> HigmanResult:
    """Strong embedding of a p-group amalgam into a p-group W, with a central
    p-filtration of W inducing compatible stretchings of the inputs.

    The construction is the layerwise wreath-tower recursion: the base case
    is the fiber sum of elementary abelian groups, the inductive step embeds
    the factor amalgam into K, forms W = T wr K with T the fiber sum of the
    last terms, and uses matched standard embeddings built from a shared
    countermap on U.  The predicted order of W is checked against `cap`
    before anything is built, and all output conditions are re-verified.
    """
    p = am.G.prime() or am.H.prime()
    if p is None:
        p = 2
    if not (am.G.is_p_group(p) and am.H.is_p_group(p) and am.U.is_p_group(p)):
        raise ValueError("amalgam groups must be p-groups for one prime")
    if FG.length() is None or FH.length() is None:
        raise ValueError("filtrations must have finite length")
    if not (FG.is_central_p(p) and FH.is_central_p(p)):
        raise ValueError("filtrations must be central p-filtrations")
    predicted = predicted_higman_order(am, FG, FH)
    if predicted > cap:
        raise CapExceeded(f"predicted |W| = {predicted} exceeds cap {cap}")
    FGs, FHs, smG0, smH0 = align_filtrations(FG, FH, am.uG, am.uH)
    W, alpha, beta, FW, sm = _higman_rec(am.G, am.H, am.U, am.uG, am.uH,
                                         FGs, FHs, p, cap)
    FG_star = stretch(FGs, sm, total=len(FW.terms))
    FH_star = stretch(FHs, sm, total=len(FW.terms))
    emb = StrongEmbedding(W, alpha, beta)
    res = HigmanResult(emb, FW, FG_star, FH_star,
                       sm.compose(smG0), sm.compose(smH0))
    if verify:
        verify_higman(am, FG, FH, res, p)
    return res


def _higman_rec(G, H, U, uG, uH, FG, FH, p, cap):
    """Recursive tower step; filtrations must intersect to the same chain on U.

    Returns (W, alpha, beta, FW, stretch_map) where stretch_map applies to
    both FG and FH uniformly.
    """
    if G.order == 1 and H.order == 1:
        W = _trivial_group()
        hom = Homomorphism(G, W, [0], check=False)
        return (W, hom, Homomorphism(H, W, [0], check=False),
                Filtration(W, [full_subgroup(W)], check=False),
                StretchMap.identity(1))
    # identical amalgam shortcut: U = G = H via the embeddings
    if uG.is_surjective() and uH.is_surjective():
        beta_map = [0] * H.order
        for u in range(U.order):
            beta_map[int(uH.map[u])] = int(uG.map[u])
        beta = Homomorphism(H, G, beta_map)
        return (G, identity_hom(G), beta, FG, StretchMap.identity(len(FG.terms)))
    nG = FG.length()
    nH = FH.length()
    n = max(nG, nH, 1)
    X = FG.term(n)
    Y = FH.term(n)
    Vu = [u for u in range(U.order) if uG(u) in X]
    Vu_h = [u for u in range(U.order) if uH(u) in Y]
    if Vu != Vu_h:
        raise AssertionError("filtrations lost alignment at the last level")
    # elementary abelian central last terms
    _check_central_elab(G, X, p)
    _check_central_elab(H, Y, p)
    Xg, toX, fromX = X.as_group()
    Yg, toY, fromY = Y.as_group()
    Vsub_U = Subgroup(U, Vu, check=False)
    Vg, toV, fromV = Vsub_U.as_group()
    phi = Homomorphism(Vg, Xg, [fromX[uG(toV[i])] for i in range(Vg.order)])
    psi = Homomorphism(Vg, Yg, [fromY[uH(toV[i])] for i in range(Vg.order)])
    T, iX, iY = fiber_sum(Xg, Yg, phi, psi)
    # factor amalgam
    Gq, projG = quotient(G, X)
    Hq, projH = quotient(H, Y)
    Uq, projU = quotient(U, Vsub_U)
    uGq = _induced_embedding(projU, projG, uG, Uq, Gq)
    uHq = _induced_embedding(projU, projH, uH, Uq, Hq)
    FGq = Filtration(Gq, [_push_subgroup(projG, FG.term(i)) for i in range(1, n + 1)],
                     check=False)
    FHq = Filtration(Hq, [_push_subgroup(projH, FH.term(i)) for i in range(1, n + 1)],
                     check=False)
    K, abar, bbar, FK, sm_q = _higman_rec(Gq, Hq, Uq, uGq, uHq, FGq, FHq, p, cap)
    theta = abar.compose(projG)
    phiH = bbar.compose(projH)
    # lift the recursion's stretching to the inputs
    FG_l = stretch(FG, sm_q)
    FH_l = stretch(FH, sm_q)
    n_new = max(FG_l.length(), FH_l.length(), 1)
    if FG_l.term(n_new).elems != X.elems or FH_l.term(n_new).elems != Y.elems:
        raise AssertionError("stretch lifting moved the last terms")
    m = FK.length()
    wp = wreath(T, K, cap=cap)
    W = wp.group
    alpha = _tower_embedding(G, U, uG, theta, wp, X, iX, fromX, K, p)
    betaH = _tower_embedding(H, U, uH, phiH, wp, Y, iY, fromY, K, p)
    FW = _tower_filtration(wp, FK, p)
    # the assembled stretch on the lifted inputs: identity through n_new, the
    # last nontrivial term repeated through the tower, trivial at the end
    total = len(FW.terms)
    if total <= n_new:
        raise AssertionError("tower filtration shorter than the input chain")
    sm_step = StretchMap(tuple(range(1, n_new + 1)) + (total,))
    return W, alpha, betaH, FW, sm_step.compose(sm_q)


def _trivial_group() -> FiniteGroup:
    return FiniteGroup(np.zeros((1, 1), dtype=np.int64), name="1", validate=False)


def _check_central_elab(G: FiniteGroup, X: Subgroup, p: int):
    for x in X.elems:
        if G.power(x, p) != 0:
            raise AssertionError("last filtration term is not exponent p")
        for g in range(G.order):
            if G.mul(g, x) != G.mul(x, g):
                raise AssertionError("last filtration term is not central")


def _push_subgroup(proj: Homomorphism, sub: Subgroup) -> Subgroup:
    return Subgroup(proj.cod, sorted({int(proj.map[x]) for x in sub.elems}),
                    check=False)


def _induced_embedding(projU, projV, u_emb, Uq, Vq) -> Homomorphism:
    """The embedding U/V -> G/X induced by u_emb: U -> G."""
    arr = [0] * Uq.order
    # quotient representatives are minimal indices; map each rep through
    reps = {}
    for u in range(projU.dom.order):
        q = int(projU.map[u])
        if q not in reps:
            reps[q] = u
    for q, u in reps.items():
        arr[q] = int(projV.map[u_emb(u)])
    hom = Homomorphism(Uq, Vq, arr)
    if not hom.is_injective():
        raise AssertionError("induced embedding on the factor amalgam not injective")
    return hom


def _right_coset_reps(K: FiniteGroup, subset: Sequence[int]) -> dict[int, int]:
    """rep[k] = min of the right coset (subset)*k."""
    rep = {}
    sub = list(subset)
    for k in range(K.order):
        if k in rep:
            continue
        coset = sorted(int(K.mult[x, k]) for x in sub)
        r = coset[0]
        for c in coset:
            rep[c] = r
    return rep


def _tower_embedding(G, U, u_emb, theta, wp: WreathProduct, X: Subgroup,
                     iX: Homomorphism, fromX, K: FiniteGroup, p: int) -> Homomorphism:
    """Standard embedding G -> T wr K from the shared countermap on U.

    theta: G -> K has kernel X; u_emb: U -> G; iX embeds X's group into T.
    """
    thetaU_img = sorted({int(theta.map[u_emb(u)]) for u in range(U.order)})
    # countermap for theta|U: minimal U-index preimage per value, minimal
    # right coset representatives; both choices are shared by the two sides
    repU = _right_coset_reps(K, thetaU_img)
    min_pre_u: dict[int, int] = {}
    for u in range(U.order):
        v = int(theta.map[u_emb(u)])
        if v not in min_pre_u:
            min_pre_u[v] = u
    counter_u = {}
    for k in range(K.order):
        s = repU[k]
        v = int(K.mult[k, K.inverse(s)])
        counter_u[k] = u_emb(min_pre_u[v])
    # per right-coset-of-theta(G) correction mu, constant on theta(U)-cosets
    img_g = sorted(set(int(x) for x in theta.map))
    repG = _right_coset_reps(K, img_g)
    min_pre_g: dict[int, int] = {}
    for g in range(G.order):
        v = int(theta.map[g])
        if v not in min_pre_g:
            min_pre_g[v] = g
    mu = {}
    for k in range(K.order):
        c_big = repG[k]          # minimal element of the theta(G)-coset
        c_small = repU[k]        # minimal element of the theta(U)-coset
        anchor = repU[c_big]     # theta(U)-coset rep of the G-coset minimum
        ratio = int(K.mult[c_small, K.inverse(anchor)])
        if ratio not in min_pre_g:
            raise AssertionError("coset correction leaves theta(G)")
        mu[c_small] = min_pre_g[ratio]
    counter1 = {k: G.mul(counter_u[k], mu[repU[k]]) for k in range(K.order)}
    rows = []
    xset = X._set
    for g in range(G.order):
        top = int(theta.map[g])
        digits = [0] * K.order
        for k in range(K.order):
            tk = int(K.mult[top, k])
            val = G.word([G.inverse(counter1[tk]), g, counter1[k]])
            if val not in xset:
                raise AssertionError("countermap defect: value outside the kernel")
            digits[k] = int(iX.map[fromX[val]])
        rows.append(wp.index_of(top, digits))
    hom = Homomorphism(G, wp.group, rows)
    if not hom.is_injective():
        raise AssertionError("tower embedding is not injective")
    return hom


def _tower_filtration(wp: WreathProduct, FK: Filtration, p: int) -> Filtration:
    """W_i = K_i T^K for i <= m, then T^K ^ gamma^p_i(W)."""
    W = wp.group
    K = wp.H
    nbase = wp.X.order ** K.order
    m = FK.length()
    terms = []
    for i in range(1, m + 1):
        ki = FK.term(i).elems
        elems = sorted(top * nbase + b for top in ki for b in range(nbase))
        terms.append(Subgroup(W, elems, check=False))
    gp = lower_central_p_series(W, p)
    base = set(range(nbase))
    l = gp.length()
    if l is None:
        raise AssertionError("wreath tower is not a p-group")
    for i in range(1, l + 1):
        elems = sorted(set(gp.term(i).elems) & base)
        terms.append(Subgroup(W, elems, check=False))
    if not terms or not terms[-1].is_trivial():
        terms.append(trivial_subgroup(W))
    return Filtration(W, terms, check=False)


def verify_higman(am: Amalgam, FG: Filtration, FH: Filtration,
                  res: HigmanResult, p: int) -> None:
    """Re-check every contract of the amalgamation output from scratch."""
    res.embedding.verify(am)
    W = res.embedding.W
    if not W.is_p_group(p):
        raise AssertionError("W is not a p-group")
    FW = res.FW
    if FW.length() is None or not FW.is_central_p(p):
        raise AssertionError("W filtration is not central-p of finite length")
    # the outputs must be the stated stretchings of the inputs, term by term
    total = len(FW.terms)
    refG = stretch(FG, res.stretchG, total=total)
    refH = stretch(FH, res.stretchH, total=total)
    for i in range(1, total + 1):
        if res.FG_star.term(i).elems != refG.term(i).elems:
            raise AssertionError("FG* is not the stated stretching of FG")
        if res.FH_star.term(i).elems != refH.term(i).elems:
            raise AssertionError("FH* is not the stated stretching of FH")
    # (A1): W filtration intersects to the stretched inputs
    alpha, beta = res.embedding.alpha, res.embedding.beta
    upto = len(FW.terms) + 1
    for i in range(1, upto + 1):
        wi = FW.term(i)._set
        got_g = tuple(sorted(g for g in range(am.G.order) if int(alpha.map[g]) in wi))
        if got_g != res.FG_star.term(i).elems:
            raise AssertionError(f"(A1) fails on G at level {i}")
        got_h = tuple(sorted(h for h in range(am.H.order) if int(beta.map[h]) in wi))
        if got_h != res.FH_star.term(i).elems:
            raise AssertionError(f"(A1) fails on H at level {i}")
    # (A2): layers of G* and H* meet exactly in the U layer inside L_i(W)
    for i in range(1, upto):
        wnext = FW.term(i + 1)._set
        gi = res.FG_star.term(i).elems
        hi = res.FH_star.term(i).elems
        ui = [u for u in range(am.U.order) if am.uG(u) in res.FG_star.term(i)]
        for g in gi:
            for h in hi:
                d = W.mul(int(alpha.map[g]), W.inverse(int(beta.map[h])))
                if d not in wnext:
                    continue
                hit = any(W.mul(int(alpha.map[g]),
                                W.inverse(int(alpha.map[am.uG(u)]))) in wnext
                          for u in ui)
                if not hit:
                    raise AssertionError(f"(A2) fails at level {i}")


# -- search over chief filtrations ------------------------------------------------

def _chief_trace(series: Sequence[Subgroup], emb: Homomorphism) -> tuple:
    """Reduced chain on U induced by a descending chief series, as U-index tuples."""
    image = {int(emb.map[u]): u for u in range(emb.dom.order)}
    out = []
    for term in series:
        level = tuple(sorted(image[g] for g in term.elems if g in image))
        if not out or out[-1] != level:
            out.append(level)
    return tuple(out)


def amalgam_embeddable(am: Amalgam, series_cap: int = 100_000) -> Decision:
    """Search chief filtrations of G and H (up to stretching) for a pair
    inducing the same filtration on U; exhaustive, so absence is definitive."""
    p = am.G.prime()
    q = am.H.prime()
    if p is None and am.G.order > 1 or q is None and am.H.order > 1 or \
            (p and q and p != q):
        raise ValueError("amalgam_embeddable expects p-groups for one prime")
    sG = chief_series(am.G, cap=series_cap)
    sH = chief_series(am.H, cap=series_cap)
    h_by_trace: dict[tuple, tuple] = {}
    for ser in sH:
        tr = _chief_trace(ser, am.uH)
        h_by_trace.setdefault(tr, ser)
    for ser in sG:
        tr = _chief_trace(ser, am.uG)
        if tr in h_by_trace:
            return Decision(YES, certificate=(ser, h_by_trace[tr]))
    return Decision(NO, reason="no chief filtrations induce the same chain on U")


def _central_p_subchains(G: FiniteGroup, series: Sequence[Subgroup], p: int):
    """Central p-filtrations obtained by deleting interior terms of a chief series."""
    interior = list(series[1:-1])
    out = []
    for r in range(len(interior) + 1):
        for keep in itertools.combinations(range(len(interior)), r):
            chain = [series[0]] + [interior[i] for i in keep] + [series[-1]]
            F = Filtration(G, chain, check=False)
            if F.is_central_p(p):
                out.append(F)
    return out


def feasible_witness(am: Amalgam, witness, p: int, cap: int = DEFAULT_HIGMAN_CAP):
    """Cheapest aligned central-p pair derived from a chief witness pair.

    Scans subchains of the witness chief series (still inducing equal chains
    on U) and returns (FG, FH, predicted) minimizing the predicted tower
    order, or None when every candidate exceeds the cap.
    """
    serG, serH = witness
    best = None
    for FG in _central_p_subchains(am.G, serG, p):
        trG = tuple(t for t in _chief_trace(list(FG.terms), am.uG))
        for FH in _central_p_subchains(am.H, serH, p):
            trH = tuple(t for t in _chief_trace(list(FH.terms), am.uH))
            if trG != trH:
                continue
            pred = predicted_higman_order(am, FG, FH)
            if pred <= cap and (best is None or pred < best[2]):
                best = (FG, FH, pred)
    return best


# -- elementary abelian coordinates and flags --------------------------------------

class ElabSpace:
    """Coordinates on an elementary abelian p-group: indices <-> F_p^d vectors."""

    def __init__(self, V: FiniteGroup):
        p = V.prime()
        if p is None and V.order > 1:
            raise ValueError("not a p-group")
        self.V = V
        self.p = p if p is not None else 2
        if any(V.element_orders()[x] not in (1, self.p) for x in range(V.order)) \
                or not V.is_abelian:
            raise ValueError("not elementary abelian")
        basis = []
        span = {0}
        coords = {0: ()}
        while len(span) < V.order:
            x = min(y for y in range(V.order) if y not in span)
            basis.append(x)
            new = {}
            for g, c in coords.items():
                acc = g
                for e in range(self.p):
                    new[acc] = c + (e,)
                    acc = V.mul(acc, x)
            coords = new
            span = set(coords)
        d = len(basis)
        self.basis = basis
        self.dim = d
        self.coords = {g: tuple(c) + (0,) * (d - len(c)) for g, c in coords.items()}
        self.by_coord = {c: g for g, c in self.coords.items()}

    def vec(self, g: int) -> tuple[int, ...]:
        return self.coords[g]

    def elem(self, vec: Sequence[int]) -> int:
        return self.by_coord[tuple(int(x) % self.p for x in vec)]

    def subspace_elems(self, vectors) -> list[int]:
        """All elements in the span of the given coordinate vectors."""
        span = {(0,) * self.dim}
        for v in vectors:
            v = tuple(int(x) % self.p for x in v)
            span = {tuple((a + c * b) % self.p for a, b in zip(s, v))
                    for s in span for c in range(self.p)}
        return sorted(self.by_coord[s] for s in span)


@dataclass
class PartialAutomorphism:
    """An isomorphism between subgroups A -> B of one group, as an index map."""
    group: FiniteGroup
    A: Subgroup
    B: Subgroup
    mapping: dict[int, int]      # parent index -> parent index

    def __post_init__(self):
        if set(self.mapping) != self.A._set or \
                set(self.mapping.values()) != self.B._set:
            raise ValueError("partial automorphism must biject A onto B")
        t = self.group.mult
        for a in self.A.elems:
            for b in self.A.elems:
                if self.mapping[int(t[a, b])] != t[self.mapping[a], self.mapping[b]]:
                    raise ValueError("partial automorphism is not a morphism")

    def __call__(self, x: int) -> int:
        return self.mapping[x]


@dataclass
class FlagCertificate:
    """An adapted basis v_1..v_d (ascending flag = spans of prefixes) together
    with upper-unitriangular extensions of the partial automorphisms."""
    space: ElabSpace
    basis: tuple[tuple[int, ...], ...]
    matrices: tuple             # one unitriangular matrix per partial automorphism

    def verify(self, pas: Sequence[PartialAutomorphism]) -> None:
        p, d = self.space.p, self.space.dim
        for mat, phi in zip(self.matrices, pas):
            for i in range(d):
                for j in range(d):
                    if i == j and mat[i][j] % p != 1:
                        raise AssertionError("diagonal entry not 1")
                    if i > j and mat[i][j] % p != 0:
                        raise AssertionError("matrix not upper unitriangular")
            # restriction to A equals phi (in flag coordinates)
            for a in phi.A.elems:
                va = self._to_flag(self.space.vec(a))
                img = tuple(sum(mat[i][j] * va[j] for j in range(d)) % p
                            for i in range(d))
                if self.space.elem(self._from_flag(img)) != phi(a):
                    raise AssertionError("extension does not restrict to phi")

    def _to_flag(self, vec):
        # coordinates of vec in the flag basis
        p, d = self.space.p, self.space.dim
        rows = [list(b) + [0] * d for b in self.basis]
        for i in range(d):
            rows[i][d + i] = 1
        reduced = kernels.rref_mod_p([list(map(int, r)) for r in rows], p, ncols=2 * d)
        # solve x * basis = vec by elimination
        target = [int(x) % p for x in vec] + [0] * d
        for r in reduced:
            lead = next(j for j, x in enumerate(r[:d]) if x)
            c = target[lead]
            if c:
                target = [(a - c * b) % p for a, b in zip(target, r)]
        if any(target[:d]):
            raise AssertionError("vector outside the span of the basis")
        return tuple((-x) % p for x in target[d:])

    def _from_flag(self, coeffs):
        p, d = self.space.p, self.space.dim
        out = [0] * d
        for c, b in zip(coeffs, self.basis):
            for i in range(d):
                out[i] = (out[i] + c * b[i]) % p
        return tuple(out)


def _all_subspaces(space: ElabSpace) -> dict[int, list[tuple[int, ...]]]:
    """Subspaces of V grouped by dimension, each as a sorted element tuple."""
    V = space.V
    subs = {s.elems for s in all_subgroups(V)}
    by_dim: dict[int, list] = {}
    for elems in subs:
        d = 0
        n = len(elems)
        while n > 1:
            n //= space.p
            d += 1
        by_dim.setdefault(d, []).append(tuple(elems))
    for d in by_dim:
        by_dim[d].sort()
    return by_dim


def unipotent_flag_extend(V: FiniteGroup, pas: Sequence[PartialAutomorphism],
                          dim_cap: int = 6) -> Decision:
    """A complete flag invariant under every partial automorphism with trivial
    layer action, plus unitriangular extensions; exhaustive, so 'no' is proof.
    """
    space = ElabSpace(V)
    d = space.dim
    if d > dim_cap:
        return Decision(UNKNOWN, reason=f"dimension {d} beyond flag search cap")
    p = space.p
    for phi in pas:
        if phi.group is not V:
            raise ValueError("partial automorphisms must live on V")
    by_dim = _all_subspaces(space)

    def level_ok(upper: tuple, lower: tuple) -> bool:
        upper_set = set(upper)
        lower_set = set(lower)
        for phi in pas:
            au = [a for a in phi.A.elems if a in upper_set]
            bu = [b for b in phi.B.elems if b in upper_set]
            if sorted(phi(a) for a in au) != sorted(bu):
                return False
            for a in au:
                if V.mul(phi(a), V.inverse(a)) not in lower_set:
                    return False
        return True

    full = tuple(range(V.order))
    found = None

    def descend(chain: list[tuple]):
        nonlocal found
        if found is not None:
            return
        cur = chain[-1]
        if len(cur) == 1:
            found = list(chain)
            return
        dim_cur = 0
        n = len(cur)
        while n > 1:
            n //= p
            dim_cur += 1
        for nxt in by_dim.get(dim_cur - 1, []):
            if found is not None:
                return
            if not set(nxt) <= set(cur):
                continue
            if not level_ok(cur, nxt):
                continue
            descend(chain + [nxt])

    descend([full])
    if found is None:
        return Decision(NO, reason="no invariant flag with trivial layer action")
    # adapted basis: v_1 spans the last nontrivial flag term, etc.
    flag = found                      # descending: V = F[0] > F[1] > ... > {0}
    basis_vecs = []
    picked = {0}
    for term in reversed(flag[:-1]):
        cand = min(x for x in term if x not in picked)
        basis_vecs.append(space.vec(cand))
        picked = set(space.subspace_elems(basis_vecs))
    mats = tuple(_extend_in_flag(space, basis_vecs, phi) for phi in pas)
    cert = FlagCertificate(space, tuple(basis_vecs), mats)
    cert.verify(pas)
    return Decision(YES, certificate=cert)


def _extend_in_flag(space: ElabSpace, basis_vecs, phi: PartialAutomorphism):
    """Extend phi to an upper-unitriangular matrix in the adapted basis.

    Processes the flag bottom-up: on A it equals phi, new basis directions at
    level j are fixed modulo the previous level.
    """
    p, d = space.p, space.dim
    cert = FlagCertificate(space, tuple(basis_vecs), ())
    known: dict[tuple, tuple] = {(0,) * d: (0,) * d}    # flag coords -> flag coords

    def add_pair(src, dst):
        items = list(known.items())
        for s0, d0 in items:
            cs, cd = s0, d0
            for _ in range(1, p):
                cs = tuple((a + b) % p for a, b in zip(cs, src))
                cd = tuple((a + b) % p for a, b in zip(cd, dst))
                if cs in known:
                    if known[cs] != cd:
                        raise AssertionError("inconsistent linear extension")
                else:
                    known[cs] = cd

    for a in phi.A.elems:
        add_pair(cert._to_flag(space.vec(a)), cert._to_flag(space.vec(phi(a))))
    for j in range(d):
        e_j = tuple(int(i == j) for i in range(d))
        if e_j in known:
            continue
        # choose the image e_j (trivial layer action is automatic for this choice)
        add_pair(e_j, e_j)
    mat = [[0] * d for _ in range(d)]
    for j in range(d):
        e_j = tuple(int(i == j) for i in range(d))
        col = known[e_j]
        for i in range(d):
            mat[i][j] = col[i]
    return tuple(tuple(row) for row in mat)


# -- inner extensions ----------------------------------------------------------------

@dataclass
class InnerExtension:
    """A p-group Hp >= G with conjugators realizing the partial automorphisms."""
    Hp: FiniteGroup
    embedding: Homomorphism      # G -> Hp
    conjugators: tuple[int, ...]

    def verify(self, G: FiniteGroup, pas: Sequence[PartialAutomorphism], p: int):
        if not self.Hp.is_p_group(p):
            raise AssertionError("Hp is not a p-group")
        if not self.embedding.is_injective():
            raise AssertionError("embedding is not injective")
        for t, phi in zip(self.conjugators, pas):
            for a in phi.A.elems:
                lhs = self.Hp.conj(t, self.embedding(a))
                if lhs != self.embedding(phi(a)):
                    raise AssertionError("conjugator does not realize phi")


def _flag_matrices_to_perms(space: ElabSpace, cert: FlagCertificate) -> list[np.ndarray]:
    """Each unitriangular matrix as a permutation of V's element indices."""
    p, d = space.p, space.dim
    perms = []
    for mat in cert.matrices:
        arr = np.empty(space.V.order, dtype=np.int64)
        for g in range(space.V.order):
            c = cert._to_flag(space.vec(g))
            img = tuple(sum(mat[i][j] * c[j] for j in range(d)) % p
                        for i in range(d))
            arr[g] = space.elem(cert._from_flag(img))
        perms.append(arr)
    return perms


def inner_extension(G: FiniteGroup, pas: Sequence[PartialAutomorphism],
                    aut_cap: int = 64, size_cap: int = DEFAULT_HIGMAN_CAP) -> Decision:
    """A p-group Hp >= G in which every phi_i becomes inner, or a proof of
    absence, or unknown-at-depth.

    Elementary abelian G goes through the complete flag search; general
    p-groups search chief filtrations for the invariance criterion and then
    try to realize extensions inside Aut(G) acting trivially on the layers.
    """
    p = G.prime()
    if p is None and G.order > 1:
        raise ValueError("G must be a p-group")
    if p is None:
        p = 2
    if all(phi(a) == a for phi in pas for a in phi.A.elems):
        # identity partial automorphisms: G itself works with trivial conjugators
        dec = Decision(YES, certificate=InnerExtension(
            G, identity_hom(G), tuple(0 for _ in pas)))
        dec.certificate.verify(G, pas, p)
        return dec
    try:
        space = ElabSpace(G)
        elab = True
    except ValueError:
        elab = False
    if elab:
        flag = unipotent_flag_extend(G, pas)
        if flag.is_no:
            return Decision(NO, reason=flag.reason)
        if flag.status == UNKNOWN:
            return flag
        cert: FlagCertificate = flag.certificate
        perms = _flag_matrices_to_perms(space, cert)
        return _realize_semidirect(G, pas, perms, p, size_cap)
    # general p-group: chief filtrations satisfying the invariance criterion
    witness = None
    for ser in chief_series(G):
        if _criterion3_holds(G, ser, pas):
            witness = ser
            break
    if witness is None:
        return Decision(NO, reason="no invariant chief filtration with "
                                   "trivial layer action")
    if G.order > aut_cap:
        return Decision(UNKNOWN, reason="automorphism search beyond cap")
    from .groups import automorphisms
    try:
        auts = automorphisms(G)
    except CapExceeded as exc:
        return Decision(UNKNOWN, reason=str(exc))
    stab = [a for a in auts if _stabilizes_chain(G, a, witness)]
    perms = []
    for phi in pas:
        found = None
        for a in stab:
            if all(int(a[x]) == phi(x) for x in phi.A.elems):
                found = a
                break
        if found is None:
            return Decision(UNKNOWN, reason="no layer-trivial extension of a "
                                            "partial automorphism in Aut(G)")
        perms.append(found)
    return _realize_semidirect(G, pas, perms, p, size_cap)


def _criterion3_holds(G, series, pas) -> bool:
    for upper, lower in zip(series, series[1:]):
        for phi in pas:
            au = [a for a in phi.A.elems if a in upper]
            bu = [b for b in phi.B.elems if b in upper]
            if sorted(phi(a) for a in au) != sorted(bu):
                return False
            for a in au:
                if G.mul(phi(a), G.inverse(a)) not in lower:
                    return False
    return True


def _stabilizes_chain(G, perm, series) -> bool:
    for upper, lower in zip(series, series[1:]):
        for x in upper.elems:
            y = int(perm[x])
            if y not in upper:
                return False
            if G.mul(y, G.inverse(x)) not in lower:
                return False
    return True


def _realize_semidirect(G, pas, perms, p, size_cap) -> Decision:
    """Hp = G x| <perms>, with conjugators the chosen automorphisms."""
    closure = permutation_closure(G, perms)
    if len(closure) * G.order > size_cap:
        return Decision(UNKNOWN, reason="semidirect product beyond size cap")
    if not _is_p_power(len(closure), p):
        # other extension choices might still work, so this is not a proof
        return Decision(UNKNOWN, reason="chosen extensions generate a non-p group")
    index = {tuple(int(x) for x in a): i for i, a in enumerate(closure)}
    n = len(closure)
    table = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(closure):
        for j, b in enumerate(closure):
            table[i, j] = index[tuple(int(x) for x in a[b])]
    A = FiniteGroup(table, name="A", validate=False)
    action = GroupAction(A, G, np.stack(closure), check=False)
    Hp, eG, eA = semidirect_product(G, A, action)
    conj = tuple(int(eA.map[index[tuple(int(x) for x in q)]]) for q in perms)
    cert = InnerExtension(Hp, eG, conj)
    cert.verify(G, pas, p)
    return Decision(YES, certificate=cert)


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def layerwise_inner_extension(G: FiniteGroup, F: Filtration,
                              pas: Sequence[PartialAutomorphism],
                              aut_cap: int = 64,
                              size_cap: int = DEFAULT_HIGMAN_CAP) -> Decision:
    """Assemble per-layer flag certificates along a phi-invariant central
    filtration into a global inner-extension certificate.

    Each layer must be elementary abelian (true for central p-filtrations);
    a layer refutation propagates to a definite 'no' only when the layer
    search is complete, otherwise 'unknown'.
    """
    p = G.prime()
    if p is None and G.order > 1:
        raise ValueError("G must be a p-group")
    if p is None:
        p = 2
    if F.length() is None:
        raise ValueError("the filtration must have finite length")
    for phi in pas:
        for n in range(1, len(F.terms) + 1):
            au = sorted(a for a in phi.A.elems if a in F.term(n))
            if sorted(phi(a) for a in au) != sorted(
                    b for b in phi.B.elems if b in F.term(n)):
                raise ValueError("filtration is not phi-invariant")
    # build the refinement of F through per-layer flags
    chain: list[Subgroup] = [F.term(1)]
    nlevels = F.length()
    for n in range(1, nlevels + 1):
        Ln, proj, to_parent = F.layer(n)
        if Ln.order == 1:
            continue
        try:
            space = ElabSpace(Ln)
        except ValueError:
            return Decision(UNKNOWN, reason=f"layer {n} is not elementary abelian")
        from_parent = {g: i for i, g in enumerate(to_parent)}
        layer_pas = []
        for phi in pas:
            mapping = {}
            for a in phi.A.elems:
                if a in F.term(n):
                    src_q = int(proj.map[from_parent[a]])
                    dst_q = int(proj.map[from_parent[phi(a)]])
                    if src_q in mapping and mapping[src_q] != dst_q:
                        return Decision(UNKNOWN,
                                        reason="induced layer map not well defined")
                    mapping[src_q] = dst_q
            dom = sorted(mapping)
            cod = sorted(set(mapping.values()))
            layer_pas.append(PartialAutomorphism(
                Ln, Subgroup(Ln, dom, check=False), Subgroup(Ln, cod, check=False),
                mapping))
        res = unipotent_flag_extend(Ln, layer_pas)
        if res.is_no:
            return Decision(NO, reason=f"layer {n}: {res.reason}")
        if res.status == UNKNOWN:
            return res
        cert: FlagCertificate = res.certificate
        # lift the flag to subgroups between F_n and F_{n+1}
        d = space.dim
        for k in range(d - 1, 0, -1):
            sub_elems = set(space.subspace_elems(cert.basis[:k]))
            lifted = sorted({to_parent[i] for i in range(len(to_parent))
                             if int(proj.map[i]) in sub_elems})
            chain.append(Subgroup(G, lifted, check=False))
        chain.append(F.term(n + 1))
    refined = Filtration(G, chain, check=False)
    then = inner_extension_with_chain(G, pas, refined, p, aut_cap, size_cap)
    return then


def inner_extension_with_chain(G, pas, chain: Filtration, p: int,
                               aut_cap: int, size_cap: int) -> Decision:
    """Realize conjugators for a given invariant chain with trivial action."""
    series = list(chain.terms)
    if not _criterion3_holds(G, series, pas):
        return Decision(UNKNOWN, reason="assembled chain fails the trivial-"
                                        "action criterion")
    try:
        space = ElabSpace(G)
    except ValueError:
        space = None
    if space is not None:
        return inner_extension(G, pas, aut_cap=aut_cap, size_cap=size_cap)
    if G.order > aut_cap:
        return Decision(UNKNOWN, reason="automorphism search beyond cap")
    from .groups import automorphisms
    try:
        auts = automorphisms(G)
    except CapExceeded as exc:
        return Decision(UNKNOWN, reason=str(exc))
    stab = [a for a in auts if _stabilizes_chain(G, a,
            [Subgroup(G, t.elems, check=False) for t in series])]
    perms = []
    for phi in pas:
        found = None
        for a in stab:
            if all(int(a[x]) == phi(x) for x in phi.A.elems):
                found = a
                break
        if found is None:
            return Decision(UNKNOWN, reason="no chain-unipotent extension found")
        perms.append(found)
    return _realize_semidirect(G, pas, perms, p, size_cap)


# -- mapping tori -----------------------------------------------------------------

def mapping_torus_check(G: FiniteGroup, autos: Sequence[np.ndarray]) -> dict:
    """Is the mapping torus of the given automorphisms residually p?

    True iff the induced automorphisms of H_1(G; F_p) = L^p_1(G) generate a
    p-group; when they do, the induced subgroups of Aut(L^p_n(G)) are checked
    to be p-groups for every n up to the p-length.
    """
    p = G.prime()
    if p is None and G.order > 1:
        raise ValueError("G must be a nontrivial p-group")
    for a in autos:
        if not kernels.is_homomorphism(G.mult, G.mult, a) or \
                len(set(int(x) for x in a)) != G.order:
            raise ValueError("inputs must be automorphisms")
    gp = lower_central_p_series(G, p)
    report = {"p": p, "levels": [], "residually_p": None}
    for n in range(1, (gp.length() or 1) + 1):
        Ln, proj, to_parent = gp.layer(n)
        from_parent = {g: i for i, g in enumerate(to_parent)}
        induced = []
        for a in autos:
            arr = np.empty(Ln.order, dtype=np.int64)
            seen = {}
            for i, g in enumerate(to_parent):
                img = int(a[g])
                arr_val = int(proj.map[from_parent[img]])
                q = int(proj.map[i])
                if q in seen and seen[q] != arr_val:
                    raise AssertionError("automorphism does not preserve the layer")
                seen[q] = arr_val
            for q, v in seen.items():
                arr[q] = v
            induced.append(arr)
        closure = permutation_closure(Ln, induced)
        is_p = _is_p_power(len(closure), p)
        report["levels"].append({"n": n, "induced_order": len(closure),
                                 "p_group": is_p})
        if n == 1:
            report["residually_p"] = is_p
            if not is_p:
                break
    if report["residually_p"]:
        if not all(l["p_group"] for l in report["levels"]):
            raise AssertionError("level-1 p-group but a higher layer is not")
    return report


# -- the exhaustive amalgam scan -----------------------------------------------------

@dataclass
class ScanRecord:
    g_name: str
    h_name: str
    u_g: tuple[int, ...]
    u_h: tuple[int, ...]
    iso: tuple[int, ...]        # U_G-group index -> U_H-group index
    embeddable: bool


def _isomorphisms_between(A: FiniteGroup, B: FiniteGroup, limit_all: bool):
    """Isomorphisms A -> B, all of them for small groups, else the first."""
    from .groups import automorphisms, find_isomorphism
    base = find_isomorphism(A, B)
    if base is None:
        return []
    if not limit_all:
        return [base.map]
    out = []
    for a in automorphisms(A):
        out.append(base.map[a])
    uniq = sorted({tuple(int(x) for x in m) for m in out})
    return [np.asarray(m, dtype=np.int64) for m in uniq]


def amalgam_scan(groups: Sequence[FiniteGroup], max_u: int = 8,
                 all_iso_upto: int = 4):
    """Deterministic scan over amalgams built from the given 2-groups.

    Enumeration: unordered pairs (G, H) in list order (diagonal included,
    with an independent copy of H); subgroup pairs (U_G, U_H) of equal order
    2 <= |U| <= max_u in lexicographic element order; identifications: all
    isomorphisms when |U| <= all_iso_upto, else the first found.

    Returns the list of ScanRecords in enumeration order.
    """
    from .groups import all_subgroups
    records: list[ScanRecord] = []
    trace_cache: dict[tuple[int, tuple], frozenset] = {}
    series_cache: dict[int, list] = {}

    def series_of(G):
        if id(G) not in series_cache:
            series_cache[id(G)] = chief_series(G)
        return series_cache[id(G)]

    def trace_set(G, u_emb):
        key = (id(G), tuple(int(x) for x in u_emb.map))
        if key not in trace_cache:
            trace_cache[key] = frozenset(
                _chief_trace(ser, u_emb) for ser in series_of(G))
        return trace_cache[key]

    subs_cache = {}

    def subs_of(G):
        if id(G) not in subs_cache:
            subs_cache[id(G)] = [s for s in all_subgroups(G)
                                 if 2 <= len(s) <= max_u]
        return subs_cache[id(G)]

    for i, G in enumerate(groups):
        for j in range(i, len(groups)):
            H = groups[j]
            if j == i:
                H = FiniteGroup(G.mult.copy(), name=G.name + "'", validate=False)
            for SG in subs_of(G):
                UG, toUG, _ = SG.as_group()
                for SH in subs_of(H):
                    if len(SH) != len(SG):
                        continue
                    UH, toUH, _ = SH.as_group()
                    isos = _isomorphisms_between(UG, UH,
                                                 len(SG) <= all_iso_upto)
                    for iso in isos:
                        # both embeddings start at the G-side copy of U, so
                        # both trace sets live in the same coordinates
                        uG = Homomorphism(UG, G, toUG, check=False)
                        uH = Homomorphism(UG, H,
                                          [toUH[int(iso[x])]
                                           for x in range(UG.order)],
                                          check=False)
                        tG = trace_set(G, uG)
                        tH = trace_set(H, uH)
                        records.append(ScanRecord(
                            G.name, H.name, SG.elems, SH.elems,
                            tuple(int(x) for x in iso),
                            bool(tG & tH)))
    return records


def scan_amalgam_object(groups: Sequence[FiniteGroup], rec: ScanRecord) -> Amalgam:
    """Rebuild the Amalgam described by a ScanRecord."""
    by_name = {}
    for i, G in enumerate(groups):
        by_name[G.name] = G
    G = by_name[rec.g_name]
    if rec.h_name.endswith("'"):
        H = FiniteGroup(by_name[rec.h_name[:-1]].mult.copy(), name=rec.h_name,
                        validate=False)
    else:
        H = by_name[rec.h_name]
    SG = Subgroup(G, rec.u_g, check=False)
    SH = Subgroup(H, rec.u_h, check=False)
    UG, toUG, _ = SG.as_group()
    UH, toUH, _ = SH.as_group()
    uG = Homomorphism(UG, G, toUG, check=False)
    uH = Homomorphism(UG, H, [toUH[rec.iso[x]] for x in range(UG.order)],
                      check=False)
    return Amalgam(G, H, UG, uG, uH)
