import pytest

from residuap import catalog
from residuap.algebra import (AlgebraElement, IdealBasis, annihilator_omega,
                              augmentation_ideal, augmentation_ideal_powers,
                              buckley_check, jennings_series,
                              standard_embedding, wreath,
                              wreath_class_formula)
from residuap.filtration import (dimension_series, lower_central_p_series,
                                 lower_central_series)
from residuap.groups import (CapExceeded, Homomorphism, Subgroup,
                             is_isomorphic, subgroup_generated)


def test_omega_powers_examples():
    _, dims, d = augmentation_ideal_powers(catalog.cyclic(4), 2)
    assert dims == [3, 2, 1, 0] and d == 3
    for p in (3, 5):
        _, _, d = augmentation_ideal_powers(catalog.cyclic(p), p)
        assert d == p - 1
    _, dims, d = augmentation_ideal_powers(catalog.cyclic(1), 2)
    assert d == 0 and dims == [0]
    with pytest.raises(ValueError):
        augmentation_ideal_powers(catalog.cyclic(6), 2)


def test_algebra_element_arithmetic():
    C4 = catalog.cyclic(4)
    x = AlgebraElement.basis(C4, 2, 1)
    one = AlgebraElement.basis(C4, 2, 0)
    u = one + x
    sq = u * u
    assert list(sq.coeffs) == [1, 0, 1, 0]         # (1+x)^2 = 1+x^2 mod 2
    cube = sq * u
    assert list(cube.coeffs) == [1, 1, 1, 1]       # (1+x)^3 = hat over F_2
    assert (cube * u).is_zero()                    # (1+x)^4 = 0


def test_jennings_series_examples():
    F = jennings_series(catalog.cyclic(4), 2)
    assert [len(t) for t in F.terms] == [4, 2, 1]
    F = jennings_series(catalog.elementary_abelian(3, 2), 3)
    assert [len(t) for t in F.terms] == [9, 1]
    F = jennings_series(catalog.dihedral(4), 2)
    D = dimension_series(catalog.dihedral(4), 2)
    for n in range(1, 5):
        assert F.term(n).elems == D.term(n).elems


def test_annihilator_examples():
    for (G, p) in ((catalog.cyclic(2), 2), (catalog.cyclic(4), 2),
                   (catalog.cyclic(3), 3), (catalog.dihedral(4), 2)):
        ann = annihilator_omega(G, p)
        assert ann.dim == 1
        assert ann.contains(AlgebraElement.hat(G, p))


def test_wreath_c2_c2_is_d8():
    wp = wreath(catalog.cyclic(2), catalog.cyclic(2))
    assert wp.group.order == 8
    assert is_isomorphic(wp.group, catalog.dihedral(4))
    # base and top embeddings are injective homs with trivial intersection
    base = {int(wp.base_embedding.map[i]) for i in range(4)}
    top = {int(wp.top_embedding.map[i]) for i in range(2)}
    assert base & top == {0}


def test_wreath_cap():
    with pytest.raises(CapExceeded):
        wreath(catalog.cyclic(4), catalog.dihedral(4), cap=4096)


def test_wreath_class_formula():
    assert wreath_class_formula(2, catalog.cyclic(2))["agree"]
    r = wreath_class_formula(3, catalog.cyclic(3))
    assert r["agree"] and r["class_gamma"] == 3
    r = wreath_class_formula(2, catalog.cyclic(2))
    assert r["class_gamma"] == 2


def test_standard_embedding_c4():
    C4, C2 = catalog.cyclic(4), catalog.cyclic(2)
    theta = Homomorphism(C4, C2, [0, 1, 0, 1])
    wp = wreath(C2, C2)
    emb = standard_embedding(C4, theta, wp)
    assert emb.is_injective()
    img = subgroup_generated(wp.group, [int(emb.map[1])])
    assert len(img) == 4        # a C4 inside D8


def test_standard_embedding_trivial_theta():
    # trivial theta: f_a are constant maps, image inside the base factor
    C2 = catalog.cyclic(2)
    A = catalog.cyclic(2)
    theta = Homomorphism(A, C2, [0, 0])
    wp = wreath(C2, C2)
    emb = standard_embedding(A, theta, wp)
    base = {int(wp.base_embedding.map[i]) for i in range(4)}
    assert {int(emb.map[a]) for a in range(2)} <= base
    top, digits = wp.decompose(int(emb.map[1]))
    assert top == 0 and len(set(digits)) == 1      # constant map


def test_standard_embedding_central_kernel_hits_hat():
    # X central in A = X x H: f_r is the constant r-hat per the Buckley route
    C2 = catalog.cyclic(2)
    from residuap.groups import direct_product
    A, eX, eH = direct_product(C2, C2)
    theta = Homomorphism(A, C2, [int(x) for x in
                                 [0, 1, 0, 1]])   # projection to second factor
    wp = wreath(C2, C2)
    emb = standard_embedding(A, theta, wp)
    x_img = int(emb.map[int(eX.map[1])])
    top, digits = wp.decompose(x_img)
    assert top == 0 and all(d == digits[0] for d in digits) and digits[0] != 0


@pytest.mark.parametrize("H,p,nmax", [
    (catalog.cyclic(2), 2, 2),
    (catalog.cyclic(4), 2, 3),
    (catalog.klein4(), 2, 3),
    (catalog.cyclic(3), 3, 3),
])
def test_buckley_equalities(H, p, nmax):
    rep = buckley_check(p, H, nmax)
    assert rep["ok"], rep


def test_buckley_trivial_top():
    rep = buckley_check(2, catalog.cyclic(1), 1)
    assert rep["ok"]


def test_fully_invariant_intersection_is_left_ideal():
    # gamma_n(W) ^ base is a left ideal equal to the base projection
    wp = wreath(catalog.cyclic(2), catalog.klein4())
    W = wp.group
    H = wp.H
    p = 2
    gamma = lower_central_series(W)
    gp = lower_central_p_series(W, p)
    nbase = 2 ** 4
    for filt in (gamma, gp):
        for n in range(2, len(filt.terms) + 1):
            term = filt.term(n)
            inter = [g for g in term.elems if g < nbase]
            proj = sorted({wp.index_of(0, wp.decompose(g)[1])
                           for g in term.elems})
            assert sorted(inter) == proj
            vecs = {wp.base_vector(g) for g in inter}
            # closed under left multiplication by H and by scalars
            for v in list(vecs):
                for h in range(H.order):
                    shifted = [0] * H.order
                    for k in range(H.order):
                        shifted[H.mul(h, k)] = v[k]
                    assert tuple(shifted) in vecs


def test_jennings_class_formula_catalog():
    for p in (2, 3):
        for G in catalog.property_suite(p):
            if G.order > 32:
                continue
            _, _, d = augmentation_ideal_powers(G, p)
            D = dimension_series(G, p)
            total = 0
            n = 1
            while len(D.term(n)) > 1:
                import math
                k = int(round(math.log(len(D.term(n)) // len(D.term(n + 1)), p)))
                total += n * k
                n += 1
            assert d == (p - 1) * total
