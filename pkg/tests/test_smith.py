import random

import pytest

from residuap.smith import (AbelianizationResult, Presentation,
                            det_unimodular, smith_abelianization,
                            smith_normal_form, theta_map)


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B)))
             for j in range(len(B[0]))] for i in range(len(A))]


def test_smith_examples():
    assert smith_abelianization(Presentation(2, ((1, 1, -2, -2, -2),))) == \
        AbelianizationResult(1, ())
    assert smith_abelianization(Presentation(1, ((1,) * 6,))) == \
        AbelianizationResult(0, (6,))
    assert smith_abelianization(Presentation(2, ((1, 2, -1, -2),))) == \
        AbelianizationResult(2, ())
    assert smith_abelianization(Presentation(3, ())) == \
        AbelianizationResult(3, ())


def test_relator_range_checked():
    with pytest.raises(ValueError):
        Presentation(2, ((3,),))
    with pytest.raises(ValueError):
        Presentation(2, ((0,),))


def test_smith_random_decompositions():
    rng = random.Random(11)
    for _ in range(300):
        rows = rng.randrange(1, 5)
        cols = rng.randrange(1, 5)
        M = [[rng.randrange(-20, 21) for _ in range(cols)] for _ in range(rows)]
        D, U, V = smith_normal_form(M)
        assert matmul(matmul(U, M), V) == D
        assert abs(det_unimodular(U)) == 1
        assert abs(det_unimodular(V)) == 1
        diag = [D[i][i] for i in range(min(rows, cols))]
        nz = [d for d in diag if d]
        assert all(d > 0 for d in nz)
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        for i in range(rows):
            for j in range(cols):
                if i != j:
                    assert D[i][j] == 0


def test_theta_map_kills_relators_and_is_onto():
    rng = random.Random(5)
    for _ in range(100):
        ngens = rng.randrange(1, 4)
        rels = []
        for _ in range(rng.randrange(0, 4)):
            length = rng.randrange(1, 6)
            rels.append(tuple(rng.choice([1, -1]) * rng.randrange(1, ngens + 1)
                              for _ in range(length)))
        pres = Presentation(ngens, tuple(rels))
        r, rows = theta_map(pres)       # relator check is internal
        assert r == smith_abelianization(pres).free_rank
