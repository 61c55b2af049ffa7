"""Exact linear algebra: solver correctness against direct verification."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from defalg import linalg
from conftest import make_rng

F = Fraction

rationals = st.fractions(min_value=-5, max_value=5,
                         max_denominator=6).map(Fraction)


def random_matrix(rng, m, n, density=0.7):
    return [[F(rng.randint(-4, 4)) if rng.random() < density else F(0)
             for _ in range(n)] for _ in range(m)]


def test_rref_idempotent_and_pivots():
    rng = make_rng(1)
    for _ in range(50):
        a = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        r, piv = linalg.rref(a)
        r2, piv2 = linalg.rref(r)
        assert r2 == r and piv2 == piv
        for k, j in enumerate(piv):
            assert r[k][j] == F(1)
            assert all(r[t][j] == F(0) for t in range(len(r)) if t != k)


def test_solve_verifies_and_detects_inconsistency():
    rng = make_rng(2)
    for _ in range(60):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        a = random_matrix(rng, m, n)
        x = [F(rng.randint(-3, 3)) for _ in range(n)]
        b = linalg.mat_vec(a, x)
        sol = linalg.solve(a, b)
        assert sol is not None
        assert linalg.mat_vec(a, sol) == b


def test_solve_none_only_when_out_of_span():
    rng = make_rng(3)
    hits = 0
    for _ in range(80):
        m, n = rng.randint(2, 6), rng.randint(1, 4)
        a = random_matrix(rng, m, n)
        b = [F(rng.randint(-3, 3)) for _ in range(m)]
        sol = linalg.solve(a, b)
        if sol is None:
            hits += 1
            cols = [[a[i][j] for i in range(m)] for j in range(n)]
            assert linalg.rank([row[:] for row in a]) < \
                linalg.rank([c[:] for c in cols] + [b])
        else:
            assert linalg.mat_vec(a, sol) == b
    assert hits > 0


def test_nullspace_is_kernel_basis():
    rng = make_rng(4)
    for _ in range(40):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        a = random_matrix(rng, m, n)
        ns = linalg.nullspace(a)
        for v in ns:
            assert linalg.is_zero_vector(linalg.mat_vec(a, v))
        assert len(ns) == n - linalg.rank([row[:] for row in a])
        if ns:
            assert linalg.rank([v[:] for v in ns]) == len(ns)


def test_invert_roundtrip():
    rng = make_rng(5)
    done = 0
    while done < 25:
        n = rng.randint(1, 5)
        a = random_matrix(rng, n, n)
        if linalg.rank([row[:] for row in a]) < n:
            continue
        inv = linalg.invert(a)
        assert linalg.mat_mul(a, inv) == linalg.identity(n)
        assert linalg.mat_mul(inv, a) == linalg.identity(n)
        done += 1


def test_independent_subset_and_extend_basis():
    rng = make_rng(6)
    for _ in range(40):
        n = rng.randint(1, 5)
        vecs = [ [F(rng.randint(-2, 2)) for _ in range(n)]
                 for _ in range(rng.randint(0, 6)) ]
        chosen = linalg.independent_subset(vecs)
        sub = [vecs[i] for i in chosen]
        assert linalg.rank([v[:] for v in sub]) == len(sub)
        for v in vecs:
            assert linalg.solve_in_span(sub, v) is not None
        cands = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(3)]
        ext = linalg.extend_basis(sub, cands)
        full = sub + [cands[i] for i in ext]
        assert linalg.rank([v[:] for v in full]) == len(full)


@given(st.lists(st.lists(rationals, min_size=3, max_size=3),
                min_size=1, max_size=4),
       st.lists(rationals, min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_solve_in_span_exactness(vectors, target):
    coords = linalg.solve_in_span(vectors, target)
    if coords is not None:
        acc = [F(0)] * 3
        for c, v in zip(coords, vectors):
            acc = linalg.vec_add(acc, linalg.vec_scale(c, v))
        assert acc == list(target)
    else:
        assert linalg.rank([list(v) for v in vectors]) < \
            linalg.rank([list(v) for v in vectors] + [list(target)])
