"""Quasismooth truncations, minimal models, and prorepresentability."""

from fractions import Fraction

import pytest

from defalg import linalg
from defalg.algebras import DgAlgebraMorphism, check_homotopy
from defalg.dgla import Dgla, def_tangent
from defalg.graded import Complex, GradedMap, GradedSpace, cohomology, \
    symmetric_power
from defalg.models import (QuasismoothTrunc, h_r_tangent, is_minimal,
                           is_smooth_minimal, kuranishi_prorepresent,
                           minimalize, morphism_lift, truncate)
from defalg.obstruction import COMPARISON_SIGN, cohomology_bracket
from conftest import make_rng, sl2, sl2_odd

F = Fraction


def non_minimal_trunc(order=3):
    """V = {u:0, w:1, h:1} with d(u) = w and d(h) = w·h."""
    v = GradedSpace([("u", 0), ("w", 1), ("h", 1)])
    p1 = symmetric_power(v, 1)
    p2 = symmetric_power(v, 2)
    d1 = GradedMap(v, p1.space, 1, {(1, 0): F(1)})
    d2 = GradedMap(v, p2.space, 1)
    pos, sgn = p2.index((1, 2))
    d2.set_entry(pos, 2, F(sgn))
    return QuasismoothTrunc(v, order, {1: d1, 2: d2})


def test_truncation_algebra_validates():
    r = non_minimal_trunc()
    a = r.algebra()
    rep = a.validate()
    assert rep.ok, rep.errors
    assert not is_minimal(r)
    # truncating drops the top symmetric power
    r2 = truncate(r, 2)
    assert r2.order == 2
    assert r2.algebra().validate().ok


def test_tangent_dimensions():
    r = non_minimal_trunc()
    # tangent degree i counts generators of degree 1 - i surviving in H(V, d1)
    assert h_r_tangent(r, 0) == 1
    assert h_r_tangent(r, 1) == 0
    assert h_r_tangent(r, -1) == 0


def test_minimalize():
    r = non_minimal_trunc()
    a = r.algebra()
    mm = minimalize(r)
    assert is_minimal(mm.s)
    # u and w cancel; one degree-1 generator with zero differential remains
    assert mm.s.v.dim == 1 and mm.s.v.degrees[0] == 1
    assert not mm.s.components
    assert mm.pi.map.compose(mm.gamma.map) == \
        GradedMap.identity(mm.s.algebra().space)
    assert not mm.pi.violations() and not mm.gamma.violations()
    gp = DgAlgebraMorphism(a, a, mm.gamma.map.compose(mm.pi.map))
    assert check_homotopy(mm.homotopy, gp, DgAlgebraMorphism.identity(a))
    ok, wit = is_smooth_minimal(mm.s)
    assert ok and wit is None
    # tangent dimensions are preserved by minimalization
    for i in (-1, 0, 1, 2):
        assert h_r_tangent(r, i) == h_r_tangent(mm.s, i)


def test_minimalize_idempotent():
    mm = minimalize(non_minimal_trunc())
    mm2 = minimalize(mm.s)
    assert mm2.s is mm.s
    assert mm2.pi.map == GradedMap.identity(mm.s.algebra().space)
    assert check_homotopy(mm2.homotopy, mm2.gamma, mm2.gamma)


def test_morphism_lift_of_section():
    r = non_minimal_trunc()
    mm = minimalize(r)
    lift = morphism_lift(mm.s, r,
                         [mm.gamma.map.column(i) for i in range(mm.s.v.dim)])
    assert lift is not None and not lift.violations()
    # composing back with pi is the identity on the linear part
    comp = mm.pi.map.compose(lift.map)
    for i in range(mm.s.v.dim):
        assert comp.column(i) == \
            mm.s.algebra().space.basis_vector(i)


def test_morphism_lift_honest_failure():
    # S has one closed degree-1 generator; in R the candidate image z has
    # d(z) = q, so no multiplicative chain map extends the assignment
    vs = GradedSpace([("s1", 1)])
    s = QuasismoothTrunc(vs, 2, {})
    vt = GradedSpace([("z", 1), ("q", 2)])
    p1 = symmetric_power(vt, 1)
    d1 = GradedMap(vt, p1.space, 1, {(1, 0): F(1)})
    r = QuasismoothTrunc(vt, 2, {1: d1})
    bad = morphism_lift(s, r, [r.algebra().space.basis_vector(0)])
    assert bad is None


def test_kuranishi_sl2():
    l = sl2()
    rk, ve = kuranishi_prorepresent(l, order=3)
    assert is_minimal(rk)
    assert rk.v.dim == 3 and all(d == 1 for d in rk.v.degrees)
    # the versal element satisfies Maurer-Cartan through the captured order
    dft = ve.defect()
    assert linalg.is_zero_vector(dft)
    # quadratic differential only, of full rank
    d2 = rk.components.get(2)
    assert d2 is not None and 3 not in rk.components
    assert d2.rank() == 3
    ok, wit = is_smooth_minimal(rk)
    assert not ok and wit["order"] == 2


def test_kuranishi_sl2_quadratic_part_is_dual_bracket():
    # d₂ encodes the tangent-space bracket: the coefficient of x_a x_b in
    # d(x_c) matches the structure constant [t_a, t_b]^c up to one global sign
    l = sl2()
    rk, _ = kuranishi_prorepresent(l, order=3)
    cb = cohomology_bracket(l)
    d2 = rk.components[2]
    p2 = rk.powers[2]
    sign = None
    for c in range(3):
        for pos, (a, b) in enumerate(p2.monomials):
            got = d2.entries.get((pos, c), F(0))
            want = cb.basis_bracket(a, b)[c]
            if a == b:
                want = want / 2          # x_a x_a appears once in ½[ξ,ξ]
            if want:
                if sign is None:
                    sign = got / want
                assert got == sign * want
            else:
                assert not got
    assert sign in (F(1), F(-1))


def test_kuranishi_abelian_is_smooth():
    space = GradedSpace([("a0", 0), ("a1", 1)])
    d = GradedMap(space, space, 1, {(1, 0): F(1)})
    ab = Dgla(space, {}, d, nilpotency_class=1)
    rk, ve = kuranishi_prorepresent(ab, order=3)
    assert rk.v.dim == 0 or not rk.components
    assert is_smooth_minimal(rk)[0]
    assert linalg.is_zero_vector(ve.defect())


def test_kuranishi_mixed_degrees():
    l = sl2_odd()
    rk, ve = kuranishi_prorepresent(l, order=3)
    assert is_minimal(rk)
    # one generator per cohomology class, with dual degree
    coh = def_tangent(l)
    want = sorted(1 - d for d in coh.harmonic_space.degrees)
    assert sorted(rk.v.degrees) == want
    assert linalg.is_zero_vector(ve.defect())
    # tangent dimensions of the model match the DGLA cohomology
    for i in (-1, 0, 1, 2):
        assert h_r_tangent(rk, i) == coh.dims().get(i, 0)
