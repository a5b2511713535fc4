"""JSON serialization with exact round-trips for groups, subgroups,
homomorphisms, filtrations, graphs of groups, words and certificates."""

from __future__ import annotations

import json
from typing import Any

from .certify import Certificate
from .filtration import Filtration
from .graphs import Graph, GraphOfGroups, PathWord, path_word
from .groups import FiniteGroup, Homomorphism, Subgroup


def group_to_obj(G: FiniteGroup) -> dict:
    return {"order": G.order,
            "mult": [[int(x) for x in row] for row in G.mult],
            "name": G.name}


def group_from_obj(obj: dict) -> FiniteGroup:
    G = FiniteGroup(obj["mult"], name=obj.get("name", "G"))
    if G.order != obj["order"]:
        raise ValueError("declared order does not match the table")
    return G


def subgroup_to_obj(S: Subgroup) -> list[int]:
    return list(S.elems)


def subgroup_from_obj(G: FiniteGroup, obj) -> Subgroup:
    return Subgroup(G, obj)


def hom_to_obj(h: Homomorphism) -> list[int]:
    return [int(x) for x in h.map]


def hom_from_obj(dom: FiniteGroup, cod: FiniteGroup, obj) -> Homomorphism:
    return Homomorphism(dom, cod, obj)


def algebra_element_to_obj(el) -> dict:
    return {"p": el.p, "coeffs": [int(x) for x in el.coeffs]}


def algebra_element_from_obj(G: FiniteGroup, obj):
    from .algebra import AlgebraElement
    return AlgebraElement(G, obj["p"], obj["coeffs"])


def ideal_basis_to_obj(basis) -> dict:
    return {"p": basis.p, "rows": [list(r) for r in basis.rows]}


def ideal_basis_from_obj(G: FiniteGroup, obj):
    from .algebra import IdealBasis
    return IdealBasis(G, obj["p"], obj["rows"], check_two_sided=False)


def filtration_to_obj(F: Filtration) -> dict:
    return {"group": group_to_obj(F.group),
            "terms": [subgroup_to_obj(t) for t in F.terms]}


def filtration_from_obj(obj: dict) -> Filtration:
    G = group_from_obj(obj["group"])
    return Filtration(G, [Subgroup(G, t) for t in obj["terms"]])


def graph_to_obj(Y: Graph) -> dict:
    return {"nv": Y.nv, "bar": list(Y.bar), "orig": list(Y.orig),
            "term": list(Y.term)}


def graph_from_obj(obj: dict) -> Graph:
    return Graph(obj["nv"], obj["bar"], obj["orig"], obj["term"])


def gog_to_obj(gog: GraphOfGroups) -> dict:
    Y = gog.graph
    egroup_ids = []
    distinct = []
    seen: dict[int, int] = {}
    for e in range(Y.ne):
        key = id(gog.egroups[e])
        if key not in seen:
            seen[key] = len(distinct)
            distinct.append(gog.egroups[e])
        egroup_ids.append(seen[key])
    return {"graph": graph_to_obj(Y),
            "vgroups": [group_to_obj(g) for g in gog.vgroups],
            "egroup_of_edge": egroup_ids,
            "egroups": [group_to_obj(g) for g in distinct],
            "emaps": [hom_to_obj(m) for m in gog.emaps]}


def gog_from_obj(obj: dict) -> GraphOfGroups:
    Y = graph_from_obj(obj["graph"])
    vgroups = [group_from_obj(g) for g in obj["vgroups"]]
    distinct = [group_from_obj(g) for g in obj["egroups"]]
    egroups = [distinct[i] for i in obj["egroup_of_edge"]]
    emaps = [Homomorphism(egroups[e], vgroups[Y.term[e]], obj["emaps"][e])
             for e in range(Y.ne)]
    return GraphOfGroups(Y, vgroups, egroups, emaps)


def word_to_obj(w: PathWord) -> dict:
    return {"base": w.base, "g0": w.g0,
            "steps": [[e, g] for e, g in w.steps]}


def word_from_obj(gog: GraphOfGroups, obj: dict) -> PathWord:
    return path_word(gog, obj["base"], obj["g0"],
                     [(e, g) for e, g in obj["steps"]])


def certificate_to_obj(cert: Certificate) -> dict:
    return {"kind": "residually-p-certificate",
            "p": cert.p,
            "gog": gog_to_obj(cert.gog),
            "tree": sorted(cert.tree),
            "target": group_to_obj(cert.target),
            "vertex_maps": [hom_to_obj(h) for h in cert.vertex_maps],
            "edge_images": list(cert.edge_images)}


def certificate_from_obj(obj: dict) -> Certificate:
    gog = gog_from_obj(obj["gog"])
    target = group_from_obj(obj["target"])
    vmaps = tuple(Homomorphism(gog.vgroups[v], target, obj["vertex_maps"][v])
                  for v in range(gog.graph.nv))
    cert = Certificate(gog, frozenset(obj["tree"]), target, vmaps,
                       tuple(obj["edge_images"]), obj["p"])
    return cert


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def loads(text: str) -> Any:
    return json.loads(text)
