"""Bundled desk-scale groups used by the property suites and the CLI.

Everything is constructed internally from first principles (cyclic tables,
products, explicit semidirect data); nothing is read from disk.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .groups import (FiniteGroup, GroupAction, direct_product,
                     semidirect_product)


@lru_cache(maxsize=None)
def cyclic(n: int) -> FiniteGroup:
    if n <= 0:
        raise ValueError("cyclic group order must be positive")
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n, name=f"C{n}",
                       validate=False)


@lru_cache(maxsize=None)
def elementary_abelian(p: int, rank: int) -> FiniteGroup:
    G = cyclic(p)
    for _ in range(rank - 1):
        G, _, _ = direct_product(G, cyclic(p))
    G.name = f"C{p}^{rank}" if rank > 1 else f"C{p}"
    return G


@lru_cache(maxsize=None)
def abelian(*orders: int) -> FiniteGroup:
    """Direct product of cyclic groups of the given orders."""
    G = cyclic(orders[0])
    for n in orders[1:]:
        G, _, _ = direct_product(G, cyclic(n))
    G.name = "x".join(f"C{n}" for n in orders)
    return G


@lru_cache(maxsize=None)
def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; elements r^i s^j with indices 2i+j."""
    if n < 1:
        raise ValueError("need n >= 1")
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for x in range(size):
        i, j = divmod(x, 2)
        for y in range(size):
            k, l = divmod(y, 2)
            # (r^i s^j)(r^k s^l) = r^(i + k*(-1)^j) s^(j+l)
            ii = (i + (k if j == 0 else -k)) % n
            table[x, y] = 2 * ii + ((j + l) % 2)
    return FiniteGroup(table, name=f"D{size}", validate=False)


@lru_cache(maxsize=None)
def quaternion8() -> FiniteGroup:
    """Q_8 = {1,-1,i,-i,j,-j,k,-k} with index order 1,-1,i,-i,j,-j,k,-k."""
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    sign = {x: (1 if not x.startswith("-") else -1) for x in names}
    base = {x: x.lstrip("-") for x in names}

    def mul(a, b):
        sa, sb = sign[a], sign[b]
        xa, xb = base[a], base[b]
        tbl = {
            ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"),
            ("1", "k"): (1, "k"), ("i", "1"): (1, "i"), ("j", "1"): (1, "j"),
            ("k", "1"): (1, "k"), ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"),
            ("k", "k"): (-1, "1"), ("i", "j"): (1, "k"), ("j", "i"): (-1, "k"),
            ("j", "k"): (1, "i"), ("k", "j"): (-1, "i"), ("k", "i"): (1, "j"),
            ("i", "k"): (-1, "j"),
        }
        s, x = tbl[(xa, xb)]
        s *= sa * sb
        return ("" if s == 1 else "-") + x

    index = {x: i for i, x in enumerate(names)}
    table = np.array([[index[mul(a, b)] for b in names] for a in names],
                     dtype=np.int64)
    return FiniteGroup(table, name="Q8", validate=False)


@lru_cache(maxsize=None)
def semidihedral16() -> FiniteGroup:
    """SD_16: r^8 = s^2 = 1, s r s = r^3; indices 2i+j for r^i s^j."""
    n = 8
    table = np.empty((16, 16), dtype=np.int64)
    for x in range(16):
        i, j = divmod(x, 2)
        for y in range(16):
            k, l = divmod(y, 2)
            ii = (i + (k if j == 0 else 3 * k)) % n
            table[x, y] = 2 * ii + ((j + l) % 2)
    return FiniteGroup(table, name="SD16", validate=False)


@lru_cache(maxsize=None)
def heisenberg(p: int) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices over F_p (order p^3, exponent p for odd p)."""
    trip = [(a, b, c) for a in range(p) for b in range(p) for c in range(p)]
    index = {t: i for i, t in enumerate(trip)}
    table = np.empty((p ** 3, p ** 3), dtype=np.int64)
    for x, (a, b, c) in enumerate(trip):
        for y, (d, e, f) in enumerate(trip):
            # (1 a c; 0 1 b; 0 0 1)(1 d f; 0 1 e; 0 0 1)
            table[x, y] = index[((a + d) % p, (b + e) % p, (c + f + a * e) % p)]
    return FiniteGroup(table, name=f"Heis{p**3}", validate=False)


@lru_cache(maxsize=None)
def c9_semi_c3() -> FiniteGroup:
    """The nonabelian group C9 x| C3 of order 27 and exponent 9."""
    C9, C3 = cyclic(9), cyclic(3)
    perms = np.stack([(np.arange(9) * pow(4, a, 9)) % 9 for a in range(3)])
    action = GroupAction(C3, C9, perms)
    G, _, _ = semidirect_product(C9, C3, action, name="C9:C3")
    return G


@lru_cache(maxsize=None)
def klein4() -> FiniteGroup:
    return elementary_abelian(2, 2)


_BUILDERS = {
    "D8": lambda: dihedral(4),
    "D16": lambda: dihedral(8),
    "Q8": quaternion8,
    "SD16": semidihedral16,
    "Heis27": lambda: heisenberg(3),
    "C9:C3": c9_semi_c3,
    "C4xC2": lambda: abelian(4, 2),
}


def by_name(name: str) -> FiniteGroup:
    """Resolve a catalog name like 'C4', 'C2^3', 'D8', 'Heis27', 'C4xC2'."""
    key = name.strip()
    if key in _BUILDERS:
        return _BUILDERS[key]()
    if key.startswith("C") and "^" in key:
        p, r = key[1:].split("^")
        return elementary_abelian(int(p), int(r))
    if key.startswith("C") and "x" in key:
        return abelian(*[int(part[1:]) for part in key.split("x")])
    if key.startswith("C"):
        return cyclic(int(key[1:]))
    raise ValueError(f"unknown catalog group {name!r}")


def property_suite(p: int) -> list[FiniteGroup]:
    """The bundled groups exercised by the p-specific property suites:
    cyclics to order 32, elementary abelians to order 81, C4xC2, the dihedral,
    quaternion and semidihedral 2-groups, and the two nonabelian order-27
    groups."""
    if p == 2:
        return [cyclic(2), cyclic(4), cyclic(8), cyclic(16), cyclic(32),
                elementary_abelian(2, 2), elementary_abelian(2, 3),
                elementary_abelian(2, 4), elementary_abelian(2, 5),
                elementary_abelian(2, 6),
                abelian(4, 2), dihedral(4), quaternion8(), dihedral(8),
                semidihedral16()]
    if p == 3:
        return [cyclic(3), cyclic(9), cyclic(27), elementary_abelian(3, 2),
                elementary_abelian(3, 3), elementary_abelian(3, 4),
                heisenberg(3), c9_semi_c3()]
    return [cyclic(p), cyclic(p * p), elementary_abelian(p, 2)]


def two_group_scan_list(max_order: int = 16) -> list[FiniteGroup]:
    """Deterministic list of catalog 2-groups for the amalgam scan."""
    out = [cyclic(2), cyclic(4), klein4(), cyclic(8), abelian(4, 2),
           elementary_abelian(2, 3), dihedral(4), quaternion8(),
           cyclic(16), abelian(8, 2), abelian(4, 4), abelian(4, 2, 2),
           elementary_abelian(2, 4), dihedral(8), semidihedral16()]
    return [G for G in out if G.order <= max_order]
