import pytest

from residuap import catalog
from residuap.groups import (CapExceeded, FiniteGroup, GroupAction,
                             Homomorphism, Subgroup, abelian_invariants,
                             all_subgroups, automorphism_group, center,
                             direct_product, find_isomorphism, full_subgroup,
                             is_isomorphic, is_retract, normal_closure,
                             quotient, semidirect_product, subgroup_generated,
                             trivial_subgroup)

import numpy as np


CATALOG_NAMES = ["C4", "C8", "C2^3", "D8", "Q8", "D16", "SD16", "Heis27",
                 "C9:C3", "C4xC2"]


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_tables_are_groups(name):
    G = catalog.by_name(name)
    # validation is exhaustive for these orders
    FiniteGroup(G.mult, validate=True)
    assert G.mul(0, 1) == 1 and G.mul(1, 0) == 1


def test_subgroup_generated_examples():
    C4 = catalog.cyclic(4)
    assert subgroup_generated(C4, [2]).elems == (0, 2)
    D8 = catalog.dihedral(4)
    rot = subgroup_generated(D8, [2])      # r has index 2
    assert len(rot) == 4
    assert subgroup_generated(D8, []).elems == (0,)
    with pytest.raises(ValueError):
        subgroup_generated(C4, [9])


def test_normal_closure_examples():
    D8 = catalog.dihedral(4)
    s = 1
    assert len(normal_closure(D8, [s])) == 4
    A = catalog.abelian(4, 2)
    for gens in ([1], [2], [1, 2]):
        assert normal_closure(A, gens).elems == subgroup_generated(A, gens).elems
    assert normal_closure(D8, [0]).elems == (0,)


def test_quotient_examples():
    C4 = catalog.cyclic(4)
    Q, proj = quotient(C4, subgroup_generated(C4, [2]))
    assert Q.order == 2
    Q, proj = quotient(C4, full_subgroup(C4))
    assert Q.order == 1
    # preimage of the trivial subgroup is the kernel
    D8 = catalog.dihedral(4)
    Z = subgroup_generated(D8, [4])
    Q, proj = quotient(D8, Z)
    assert proj.kernel().elems == Z.elems
    with pytest.raises(ValueError):
        quotient(D8, subgroup_generated(D8, [1]))  # reflection: not normal


def test_quotient_of_sl2z4_by_mod2_kernel():
    from residuap.congruence import sl2_congruence_tower
    tower = sl2_congruence_tower(2, 2)
    G, elems = tower.full.as_finite_group()
    k1 = Subgroup(G, [elems.index(m) for m in tower.levels[0]])
    assert G.order == 48 and len(k1) == 8
    Q, _ = quotient(G, k1)
    assert Q.order == 6
    assert not Q.is_abelian     # SL(2, Z/2) is symmetric on 3 letters


def test_products_and_retracts():
    C3, C2 = catalog.cyclic(3), catalog.cyclic(2)
    inv = np.stack([np.arange(3), (-np.arange(3)) % 3])
    S3, eB, eH = semidirect_product(C3, C2, GroupAction(C2, C3, inv))
    assert S3.order == 6 and not S3.is_abelian
    # H is a retract of B x| H
    H = Subgroup(S3, sorted(int(eH.map[i]) for i in range(2)))
    assert is_retract(S3, H) is not None
    # C2 in C4 is not a retract
    C4 = catalog.cyclic(4)
    assert is_retract(C4, subgroup_generated(C4, [2])) is None
    # coordinate projection on a direct factor
    P, eG, eH2 = direct_product(C4, C2)
    factor = Subgroup(P, sorted(int(eG.map[i]) for i in range(4)))
    assert is_retract(P, factor) is not None


def test_order81_semidirect_is_p_group():
    G = catalog.c9_semi_c3()
    assert G.order == 27 and G.is_p_group(3)
    big, _, _ = direct_product(G, catalog.cyclic(3))
    assert big.order == 81 and big.is_p_group(3)


def test_automorphism_groups():
    A, act = automorphism_group(catalog.klein4())
    assert A.order == 6
    Ap, _ = automorphism_group(catalog.cyclic(5))
    assert Ap.order == 4
    A8, _ = automorphism_group(catalog.cyclic(8))
    assert A8.order == 4 and A8.is_abelian and A8.exponent() == 2
    # the action really is by automorphisms
    for a in range(A.order):
        perm = act.perms[a]
        V = catalog.klein4()
        for x in range(4):
            for y in range(4):
                assert perm[V.mul(x, y)] == V.mul(int(perm[x]), int(perm[y]))


def test_isomorphism_search():
    assert is_isomorphic(catalog.dihedral(4), catalog.dihedral(4))
    assert not is_isomorphic(catalog.dihedral(4), catalog.quaternion8())
    assert not is_isomorphic(catalog.cyclic(8), catalog.abelian(4, 2))
    iso = find_isomorphism(catalog.cyclic(6), catalog.abelian(2, 3))
    assert iso is not None and iso.is_injective()


def test_abelian_invariants():
    assert abelian_invariants(catalog.cyclic(12)) == [12]
    assert abelian_invariants(catalog.abelian(4, 2)) == [2, 4]
    assert abelian_invariants(catalog.elementary_abelian(2, 3)) == [2, 2, 2]
    assert abelian_invariants(catalog.abelian(2, 4, 8)) == [2, 4, 8]
    assert abelian_invariants(catalog.cyclic(1)) == []
    assert abelian_invariants(catalog.abelian(6, 2)) == [2, 6]


def test_all_subgroups_counts():
    # classical counts: D8 has 10 subgroups, Q8 has 6, C2^3 has 16
    assert len(all_subgroups(catalog.dihedral(4))) == 10
    assert len(all_subgroups(catalog.quaternion8())) == 6
    assert len(all_subgroups(catalog.elementary_abelian(2, 3))) == 16


def test_lagrange_for_produced_subgroups():
    for name in CATALOG_NAMES:
        G = catalog.by_name(name)
        for S in all_subgroups(G):
            assert G.order % len(S) == 0


def test_center():
    assert center(catalog.dihedral(4)).elems == (0, 4)
    assert len(center(catalog.heisenberg(3))) == 3
