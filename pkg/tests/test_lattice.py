from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from homflow import lattice, rational as rq

ints = st.integers(-6, 6)
CAT = [[2, 1], [1, 1]]


@given(st.lists(st.lists(ints, min_size=3, max_size=3), min_size=1, max_size=4))
def test_hermite_rows_is_canonical_basis(rows):
    h = lattice.hermite_rows(rows)
    # same lattice: each input row is an integer combination of h, and vice versa (same rank and index)
    assert len(h) == rq.rank(rq.as_matrix(rows)) if any(any(r) for r in rows) else h == []
    pivots = [next(j for j, v in enumerate(r) if v) for r in h]
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)
    for i, (r, c) in enumerate(zip(h, pivots)):
        assert r[c] > 0
        for above in h[:i]:
            assert 0 <= above[c] < r[c]
    assert lattice.hermite_rows(h) == h
    # invariance under unimodular row mixing
    if len(rows) >= 2:
        mixed = [list(rows[0])] + [[a + 3 * b for a, b in zip(rows[1], rows[0])]] + [list(r) for r in rows[2:]]
        assert lattice.hermite_rows(mixed) == h


@given(st.lists(st.lists(ints, min_size=4, max_size=4), min_size=1, max_size=3))
def test_integer_kernel(rows):
    k = lattice.integer_kernel(rows)
    a = np.array(rows, dtype=object)
    for v in k:
        assert all(x == 0 for x in a.dot(np.array(v, dtype=object)))
    assert len(k) == 4 - rq.rank(rq.as_matrix(rows))


def test_integer_kernel_is_saturated():
    # (2, 4) has kernel generated by (2, -1), not (4, -2)
    assert lattice.integer_kernel([[2, 4]]) == [[2, -1]]


def test_smith_and_cosets():
    m = [[2, 0], [0, 3]]
    assert lattice.smith_invariants(m) == [1, 6]
    assert len(lattice.coset_representatives(m)) == 6


def test_periodic_point_counts_match_determinant():
    for p in range(1, 6):
        ap = rq.matpow(rq.as_matrix(CAT), p)
        expected = abs(int(rq.det(rq.matadd(ap, rq.identity(2), -1))))
        pts = lattice.periodic_points(CAT, p)
        assert len(pts) == expected
        for x in pts:
            y = list(x)
            for _ in range(p):
                y = [v - (v.numerator // v.denominator) for v in rq.matvec(rq.as_matrix(CAT), y)]
            assert tuple(y) == x


def test_known_period_two_orbit():
    assert (Fraction(1, 5), Fraction(2, 5)) in lattice.periodic_points(CAT, 2)
    assert lattice.minimal_period(CAT, (Fraction(1, 5), Fraction(2, 5))) == 2


def test_unimodular_surjection():
    assert lattice.is_unimodular_surjection([[1, 0, 0], [0, 1, 0]])
    assert not lattice.is_unimodular_surjection([[2, 0], [0, 1]])
