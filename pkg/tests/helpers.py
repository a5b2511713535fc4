"""Shared builders for the test suite."""

from __future__ import annotations

from residuap import catalog, embed, graphs
from residuap.filtration import Filtration
from residuap.groups import (FiniteGroup, Homomorphism, Subgroup,
                             full_subgroup, subgroup_generated,
                             trivial_subgroup)


def fresh(G: FiniteGroup, name: str) -> FiniteGroup:
    """An independent copy, so a gog can use 'two different' vertex groups."""
    return FiniteGroup(G.mult.copy(), name=name, validate=False)


def chain(G: FiniteGroup, *element_lists) -> Filtration:
    """Filtration G >= <L1> >= <L2> >= ... >= 1 from explicit element lists."""
    terms = [full_subgroup(G)]
    for elems in element_lists:
        terms.append(Subgroup(G, elems))
    if not terms[-1].is_trivial():
        terms.append(trivial_subgroup(G))
    return Filtration(G, terms)


def c4_amalgam():
    """C4 u C4 | C2 with the squares identified, plus gamma^2 chains."""
    C4 = catalog.cyclic(4)
    C4b = fresh(C4, "C4b")
    C2 = catalog.cyclic(2)
    am = embed.Amalgam(C4, C4b, C2,
                       Homomorphism(C2, C4, [0, 2]),
                       Homomorphism(C2, C4b, [0, 2]))
    FG = chain(C4, [0, 2])
    FH = chain(C4b, [0, 2])
    return am, FG, FH


def c4_star_c4():
    """The graph of groups for C4 *_{C2} C4."""
    C4 = catalog.cyclic(4)
    C4b = fresh(C4, "C4b")
    C2 = catalog.cyclic(2)
    Y = graphs.Graph.from_topological(2, [(0, 1)])
    f0 = Homomorphism(C2, C4b, [0, 2])
    f1 = Homomorphism(C2, C4, [0, 2])
    return graphs.GraphOfGroups(Y, [C4, C4b], [C2, C2], [f0, f1])


def free_product(G: FiniteGroup, H: FiniteGroup):
    triv = catalog.cyclic(1)
    Y = graphs.Graph.from_topological(2, [(0, 1)])
    return graphs.GraphOfGroups(Y, [G, H], [triv, triv],
                                [Homomorphism(triv, H, [0]),
                                 Homomorphism(triv, G, [0])])


def shift_loop():
    """Loop over F_3^3 with the partial shift (x,y,0) -> (y,0,x)."""
    V27 = catalog.elementary_abelian(3, 3)
    V9 = catalog.elementary_abelian(3, 2)
    sp = embed.ElabSpace(V27)
    sp9 = embed.ElabSpace(V9)
    Y = graphs.Graph.from_topological(1, [(0, 0)])
    fe = Homomorphism(V9, V27, [sp.elem((sp9.vec(g)[0], sp9.vec(g)[1], 0))
                                for g in range(9)])
    fb = Homomorphism(V9, V27, [sp.elem((sp9.vec(g)[1], 0, sp9.vec(g)[0]))
                                for g in range(9)])
    return graphs.GraphOfGroups(Y, [V27], [V9, V9], [fe, fb])


def swap_loop():
    """Loop over F_3^2 with the total coordinate swap (the negative example)."""
    V9 = catalog.elementary_abelian(3, 2)
    sp9 = embed.ElabSpace(V9)
    Y = graphs.Graph.from_topological(1, [(0, 0)])
    ide = Homomorphism(V9, V9, list(range(9)))
    swap = Homomorphism(V9, V9, [sp9.elem((sp9.vec(g)[1], sp9.vec(g)[0]))
                                 for g in range(9)])
    return graphs.GraphOfGroups(Y, [V9], [V9, V9], [ide, swap])


def axis_swap_loop():
    """Loop over F_3^2 with the partial axis swap (first axis to second)."""
    V9 = catalog.elementary_abelian(3, 2)
    C3 = catalog.cyclic(3)
    sp9 = embed.ElabSpace(V9)
    Y = graphs.Graph.from_topological(1, [(0, 0)])
    A_ax = Homomorphism(C3, V9, [sp9.elem((x, 0)) for x in range(3)])
    B_ax = Homomorphism(C3, V9, [sp9.elem((0, x)) for x in range(3)])
    return graphs.GraphOfGroups(Y, [V9], [C3, C3], [A_ax, B_ax])


def theta_graph():
    """Two C4 vertices joined by two topological edges over C2."""
    C4 = catalog.cyclic(4)
    C4b = fresh(C4, "C4b")
    C2 = catalog.cyclic(2)
    Y = graphs.Graph.from_topological(2, [(0, 1), (0, 1)])
    maps = [Homomorphism(C2, C4b, [0, 2]), Homomorphism(C2, C4, [0, 2]),
            Homomorphism(C2, C4b, [0, 2]), Homomorphism(C2, C4, [0, 2])]
    return graphs.GraphOfGroups(Y, [C4, C4b], [C2, C2, C2, C2], maps)


def d8_center_hnn():
    """Single vertex D8 with a loop over its center."""
    D8 = catalog.dihedral(4)
    C2 = catalog.cyclic(2)
    Y = graphs.Graph.from_topological(1, [(0, 0)])
    f = Homomorphism(C2, D8, [0, 4])
    return graphs.GraphOfGroups(Y, [D8], [C2, C2], [f, f])


def nf_test_graphs():
    """The five graphs used for the normal-form property suites."""
    return [c4_star_c4(),
            free_product(catalog.cyclic(3),
                         fresh(catalog.cyclic(3), "C3b")),
            axis_swap_loop(),
            theta_graph(),
            d8_center_hnn()]
