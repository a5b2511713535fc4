import random

import numpy as np
import pytest

from helpers import c4_amalgam, chain, fresh

from residuap import catalog
from residuap.embed import (Amalgam, ElabSpace, FlagCertificate,
                            PartialAutomorphism, amalgam_embeddable,
                            amalgam_scan, feasible_witness, fiber_sum,
                            higman_embed, inner_extension,
                            layerwise_inner_extension, mapping_torus_check,
                            predicted_higman_order, scan_amalgam_object,
                            unipotent_flag_extend)
from residuap.filtration import Filtration, lower_central_p_series
from residuap.groups import (CapExceeded, FiniteGroup, Homomorphism, Subgroup,
                             abelian_invariants, full_subgroup, identity_hom,
                             is_isomorphic, subgroup_generated,
                             trivial_subgroup)
from residuap.results import NO, UNKNOWN, YES


def total_pa(V, sp, mat):
    p = sp.p
    mapping = {}
    for g in range(V.order):
        vec = sp.vec(g)
        img = tuple(sum(mat[i][j] * vec[j] for j in range(len(vec))) % p
                    for i in range(len(vec)))
        mapping[g] = sp.elem(img)
    return PartialAutomorphism(V, full_subgroup(V), full_subgroup(V), mapping)


# -- fiber sums --------------------------------------------------------------------

def test_fiber_sum_c4_c4_over_c2():
    C4 = catalog.cyclic(4)
    C4b = fresh(C4, "C4b")
    C2 = catalog.cyclic(2)
    S, iA, iB = fiber_sum(C4, C4b, Homomorphism(C2, C4, [0, 2]),
                          Homomorphism(C2, C4b, [0, 2]))
    assert S.order == 8
    assert abelian_invariants(S) == [2, 4]


def test_fiber_sum_elementary_abelian():
    V = catalog.elementary_abelian(3, 2)
    Vb = fresh(V, "Vb")
    C3 = catalog.cyclic(3)
    S, iA, iB = fiber_sum(V, Vb, Homomorphism(C3, V, [0, 1, 2]),
                          Homomorphism(C3, Vb, [0, 1, 2]))
    assert S.order == 27 and S.exponent() == 3


def test_fiber_sum_trivial_u():
    A, B = catalog.cyclic(2), fresh(catalog.cyclic(2), "B")
    triv = catalog.cyclic(1)
    S, iA, iB = fiber_sum(A, B, Homomorphism(triv, A, [0]),
                          Homomorphism(triv, B, [0]))
    assert S.order == 4


def test_fiber_sum_rejects_nonabelian():
    D8 = catalog.dihedral(4)
    triv = catalog.cyclic(1)
    with pytest.raises(ValueError):
        fiber_sum(D8, D8, Homomorphism(triv, D8, [0]),
                  Homomorphism(triv, D8, [0]))


# -- the amalgamation tower ----------------------------------------------------------

def test_higman_canonical_c4_example():
    am, FG, FH = c4_amalgam()
    assert predicted_higman_order(am, FG, FH) == 64
    res = higman_embed(am, FG, FH)           # verify=True re-checks everything
    assert res.embedding.W.order == 64
    assert is_isomorphic(
        res.embedding.W,
        __import__("residuap.algebra", fromlist=["wreath"]).wreath(
            catalog.cyclic(2), catalog.klein4()).group)


def test_higman_base_case_is_fiber_sum():
    V = catalog.elementary_abelian(2, 2)
    Vb = fresh(V, "Vb")
    C2 = catalog.cyclic(2)
    am = Amalgam(V, Vb, C2, Homomorphism(C2, V, [0, 1]),
                 Homomorphism(C2, Vb, [0, 1]))
    FG = Filtration(V, [full_subgroup(V), trivial_subgroup(V)])
    FH = Filtration(Vb, [full_subgroup(Vb), trivial_subgroup(Vb)])
    res = higman_embed(am, FG, FH)
    assert res.embedding.W.order == 8


def test_higman_identical_amalgam():
    am, FG, FH = c4_amalgam()
    C4 = am.G
    ident = Amalgam(am.G, am.H, am.G, identity_hom(am.G),
                    Homomorphism(am.G, am.H, [0, 1, 2, 3]))
    res = higman_embed(ident, FG, FH)
    assert res.embedding.W.order == 4


def test_higman_cap_refusal_reports_size():
    C8 = catalog.cyclic(8)
    C8b = fresh(C8, "C8b")
    C4 = catalog.cyclic(4)
    am = Amalgam(C8, C8b, C4, Homomorphism(C4, C8, [0, 2, 4, 6]),
                 Homomorphism(C4, C8b, [0, 2, 4, 6]))
    FG = chain(C8, [0, 2, 4, 6], [0, 4])
    FH = chain(C8b, [0, 2, 4, 6], [0, 4])
    pred = predicted_higman_order(am, FG, FH)
    assert pred > 4096
    with pytest.raises(CapExceeded):
        higman_embed(am, FG, FH)


def test_higman_rejects_non_central_filtrations():
    am, FG, FH = c4_amalgam()
    bad = Filtration(am.G, [full_subgroup(am.G), trivial_subgroup(am.G)])
    with pytest.raises(ValueError):
        higman_embed(am, bad, FH)


# -- chief-filtration search -----------------------------------------------------------

def test_amalgam_embeddable_witness():
    C4, V4, C2 = catalog.cyclic(4), catalog.klein4(), catalog.cyclic(2)
    am = Amalgam(C4, V4, C2, Homomorphism(C2, C4, [0, 2]),
                 Homomorphism(C2, V4, [0, 2]))
    dec = amalgam_embeddable(am)
    assert dec.is_yes
    fw = feasible_witness(am, dec.certificate, 2)
    assert fw is not None
    res = higman_embed(am, fw[0], fw[1])
    assert res.embedding.W.is_p_group(2)


def test_amalgam_embeddable_identity_case():
    C4 = catalog.cyclic(4)
    C4b = fresh(C4, "C4b")
    am = Amalgam(C4, C4b, C4, identity_hom(C4),
                 Homomorphism(C4, C4b, [0, 1, 2, 3]))
    assert amalgam_embeddable(am).is_yes


def test_twisted_d8_amalgam_is_provably_negative():
    D8 = catalog.dihedral(4)
    D8b = fresh(D8, "D8b")
    V4 = catalog.klein4()
    uG = Homomorphism(V4, D8, [0, 4, 1, 5])
    uH = Homomorphism(V4, D8b, [0, 1, 4, 5])    # center line -> reflection line
    dec = amalgam_embeddable(Amalgam(D8, D8b, V4, uG, uH))
    assert dec.is_no
    # the untwisted identification is positive
    uH0 = Homomorphism(V4, D8b, [0, 4, 1, 5])
    assert amalgam_embeddable(Amalgam(D8, D8b, V4, uG, uH0)).is_yes


# -- flags and inner extensions ----------------------------------------------------------

def test_flag_transvection_pair_refuted():
    V = catalog.elementary_abelian(3, 2)
    sp = ElabSpace(V)
    phi = total_pa(V, sp, [[1, 1], [0, 1]])
    psi = total_pa(V, sp, [[1, 0], [1, 1]])
    assert unipotent_flag_extend(V, [phi]).is_yes
    assert unipotent_flag_extend(V, [psi]).is_yes
    assert unipotent_flag_extend(V, [phi, psi]).is_no


def test_flag_swap_refuted_and_shift_certified():
    V = catalog.elementary_abelian(3, 2)
    sp = ElabSpace(V)
    swap = total_pa(V, sp, [[0, 1], [1, 0]])
    assert unipotent_flag_extend(V, [swap]).is_no
    W = catalog.elementary_abelian(3, 3)
    sp3 = ElabSpace(W)
    A = Subgroup(W, sp3.subspace_elems([(1, 0, 0), (0, 1, 0)]))
    B = Subgroup(W, sp3.subspace_elems([(1, 0, 0), (0, 0, 1)]))
    mapping = {a: sp3.elem((sp3.vec(a)[1], 0, sp3.vec(a)[0])) for a in A.elems}
    shift = PartialAutomorphism(W, A, B, mapping)
    dec = unipotent_flag_extend(W, [shift])
    assert dec.is_yes
    dec.certificate.verify([shift])
    # the extensions generate a p-group, realized as a semidirect product
    inner = inner_extension(W, [shift])
    assert inner.is_yes and inner.certificate.Hp.order == 81


def test_inner_extension_identity_and_general_group():
    D8 = catalog.dihedral(4)
    Z = subgroup_generated(D8, [4])
    ident = PartialAutomorphism(D8, Z, Z, {0: 0, 4: 4})
    dec = inner_extension(D8, [ident])
    assert dec.is_yes and dec.certificate.Hp.order == 8
    # a nontrivial partial automorphism of a nonabelian group: r -> r^3 on <r>
    R = subgroup_generated(D8, [2])
    mapping = {0: 0, 2: 6, 4: 4, 6: 2}
    pa = PartialAutomorphism(D8, R, R, mapping)
    dec = inner_extension(D8, [pa])
    assert dec.status in (YES, NO, UNKNOWN)
    if dec.is_yes:
        dec.certificate.verify(D8, [pa], 2)


def test_layerwise_inner_extension():
    # abelian non-elementary case through gamma^p layers
    A = catalog.cyclic(4)
    S = subgroup_generated(A, [2])
    pa = PartialAutomorphism(A, S, S, {0: 0, 2: 2})
    F = lower_central_p_series(A, 2)
    dec = layerwise_inner_extension(A, F, [pa])
    assert dec.is_yes
    # single-level filtration reduces to inner_extension
    V = catalog.elementary_abelian(3, 2)
    sp = ElabSpace(V)
    swap = total_pa(V, sp, [[0, 1], [1, 0]])
    F1 = Filtration(V, [full_subgroup(V), trivial_subgroup(V)])
    assert layerwise_inner_extension(V, F1, [swap]).is_no


def test_certificate_transport_functoriality():
    # injective intertwiners carry flag certificates to the target
    rng = random.Random(19)
    p = 3
    for _ in range(10):
        d = rng.randrange(1, 3)
        dd = d + rng.randrange(1, 2)
        V = catalog.elementary_abelian(p, d)
        W = catalog.elementary_abelian(p, dd)
        spV, spW = ElabSpace(V), ElabSpace(W)
        # random unitriangular total automorphism of V: always certified
        mat = [[1 if i == j else (rng.randrange(p) if j > i else 0)
                for j in range(d)] for i in range(d)]
        phi = total_pa(V, spV, mat)
        assert unipotent_flag_extend(V, [phi]).is_yes
        # random injective linear map V -> W: unit column echelon + padding
        emb_mat = [[0] * d for _ in range(dd)]
        rows = rng.sample(range(dd), d)
        for j, r in enumerate(sorted(rows)):
            emb_mat[r][j] = 1
        def embed_elem(x):
            vec = spV.vec(x)
            img = tuple(sum(emb_mat[i][j] * vec[j] for j in range(d)) % p
                        for i in range(dd))
            return spW.elem(img)
        A2 = sorted(embed_elem(a) for a in phi.A.elems)
        mapping = {embed_elem(a): embed_elem(phi(a)) for a in phi.A.elems}
        phi2 = PartialAutomorphism(W, Subgroup(W, A2),
                                   Subgroup(W, sorted(mapping.values())),
                                   mapping)
        assert unipotent_flag_extend(W, [phi2]).is_yes


# -- the deterministic scan ---------------------------------------------------------

def test_scan_small_is_deterministic_and_sound():
    groups = catalog.two_group_scan_list(8)
    recs = amalgam_scan(groups)
    recs2 = amalgam_scan(groups)
    assert recs == recs2
    yes = [r for r in recs if r.embeddable]
    no = [r for r in recs if not r.embeddable]
    assert yes and no
    # first negative at order <= 8 is the twisted D8 amalgam
    first = no[0]
    assert (first.g_name, first.h_name) == ("D8", "D8'")
    am = scan_amalgam_object(groups, first)
    assert amalgam_embeddable(am).is_no


# -- mapping tori ----------------------------------------------------------------------

def test_mapping_torus_examples():
    C3 = catalog.cyclic(3)
    inv = np.array([(-x) % 3 for x in range(3)])
    assert mapping_torus_check(C3, [inv])["residually_p"] is False
    V = catalog.elementary_abelian(2, 2)
    sp = ElabSpace(V)
    tr = np.array([sp.elem(((sp.vec(g)[0] + sp.vec(g)[1]) % 2, sp.vec(g)[1]))
                   for g in range(4)])
    assert mapping_torus_check(V, [tr])["residually_p"] is True
    H27 = catalog.heisenberg(3)
    inners = [np.array([H27.conj(g, x) for x in range(27)])
              for g in range(27)]
    rep = mapping_torus_check(H27, inners)
    assert rep["residually_p"] is True
    assert all(l["p_group"] for l in rep["levels"])


def test_mapping_torus_conjugation_invariance():
    V = catalog.elementary_abelian(2, 2)
    sp = ElabSpace(V)
    tr = np.array([sp.elem(((sp.vec(g)[0] + sp.vec(g)[1]) % 2, sp.vec(g)[1]))
                   for g in range(4)])
    base = mapping_torus_check(V, [tr])["residually_p"]
    # conjugate by every automorphism of V
    from residuap.groups import automorphisms
    for a in automorphisms(V):
        inv_a = np.argsort(a)
        conj = a[tr[inv_a]]
        assert mapping_torus_check(V, [np.asarray(conj)])["residually_p"] == base


def test_mapping_torus_rejects_non_automorphism():
    C3 = catalog.cyclic(3)
    with pytest.raises(ValueError):
        mapping_torus_check(C3, [np.array([0, 0, 0])])
