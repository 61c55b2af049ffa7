"""Shared fixtures: standard algebras and randomized valid instances."""

import os
import random
from fractions import Fraction

import pytest

from defalg.algebras import NilpotentDgAlgebra
from defalg.dgla import Dgla
from defalg.graded import Complex, GradedMap, GradedSpace, symmetric_power
from defalg.models import QuasismoothTrunc

F = Fraction

SEED = int(os.environ.get("DEFALG_SEED", "20260823"))


@pytest.fixture
def rng():
    return random.Random(SEED)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo one line per acceptance criterion when the gate was exercised."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.write_line("")
        for n in sorted(RESULTS):
            terminalreporter.write_line("CRITERION %d: %s" % (n, RESULTS[n]))


def make_rng(salt=0):
    return random.Random(SEED + salt)


# ---------------------------------------------------------------------------
# standard fixtures

def sl2():
    """sl2 in degree 0: basis e, h, f; [e,f]=h, [h,e]=2e, [h,f]=-2f."""
    space = GradedSpace([("e", 0), ("h", 0), ("f", 0)])
    br = {(0, 2): {1: F(1)}, (2, 0): {1: F(-1)},
          (1, 0): {0: F(2)}, (0, 1): {0: F(-2)},
          (1, 2): {2: F(-2)}, (2, 1): {2: F(2)}}
    return Dgla(space, br, GradedMap(space, space, 1))


def sl2_odd():
    """sl2 ⋉ (adjoint in degree 1): mixed-degree DGLA with zero differential."""
    space = GradedSpace([("e", 0), ("h", 0), ("f", 0),
                         ("E", 1), ("H", 1), ("Fo", 1)])
    base = {(0, 2): {1: F(1)}, (2, 0): {1: F(-1)},
            (1, 0): {0: F(2)}, (0, 1): {0: F(-2)},
            (1, 2): {2: F(-2)}, (2, 1): {2: F(2)}}
    br = dict(base)
    for (i, j), sv in base.items():
        # [x, y'] = [x,y]' and [x', y] = [x,y]'; [x', y'] = 0
        br[(i, j + 3)] = {k + 3: c for k, c in sv.items()}
        br[(i + 3, j)] = {k + 3: c for k, c in sv.items()}
    return Dgla(space, br, GradedMap(space, space, 1))


def heisenberg():
    space = GradedSpace([("x", 0), ("y", 0), ("z", 0)])
    br = {(0, 1): {2: F(1)}, (1, 0): {2: F(-1)}}
    return Dgla(space, br, GradedMap(space, space, 1), nilpotency_class=2)


def counterexample_algebras():
    """The square-zero (not strictly small) extension with uv = uw = dw."""
    aspace = GradedSpace([("u", 1), ("v", 1), ("w", 1), ("dw", 2)])
    da = GradedMap(aspace, aspace, 1)
    da.set_entry(3, 2, F(1))
    mult = {(0, 1): {3: F(1)}, (1, 0): {3: F(-1)},
            (0, 2): {3: F(1)}, (2, 0): {3: F(-1)}}
    a = NilpotentDgAlgebra(aspace, mult, da)
    bspace = GradedSpace([("u", 1), ("v", 1)])
    b = NilpotentDgAlgebra.trivial(bspace)
    return a, b


def counterexample_extension():
    from defalg.algebras import DgAlgebraMorphism, kernel_extension
    a, b = counterexample_algebras()
    alpha = GradedMap(a.space, b.space, 0, {(0, 0): F(1), (1, 1): F(1)})
    return kernel_extension(DgAlgebraMorphism(a, b, alpha))


def counterexample_element(l, tb):
    """-h/2 ⊗ u + e ⊗ v in L ⊗ B for L = sl2."""
    x = tb.space.zero_vector()
    x[tb.pair_index(1, 0)] = F(-1, 2)     # h ⊗ u
    x[tb.pair_index(0, 1)] = F(1)         # e ⊗ v
    return x


# ---------------------------------------------------------------------------
# randomized valid instances

def random_invertible_degree0(rng, space):
    """Unitriangular within each degree block, hence invertible."""
    m = GradedMap.identity(space)
    for k in set(space.degrees):
        idx = space.degree_indices(k)
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                c = rng.randint(-2, 2)
                if c:
                    m.set_entry(idx[a], idx[b], F(c))
    return m


def random_complex(rng, max_dim=12):
    """A valid complex with known cohomology, then a change of basis."""
    n_h = rng.randint(0, 3)
    n_p = rng.randint(0, (max_dim - n_h) // 2)
    basis = []
    for t in range(n_h):
        basis.append(("h%d" % t, rng.randint(-2, 3)))
    pair_degs = [rng.randint(-2, 2) for _ in range(n_p)]
    for t, k in enumerate(pair_degs):
        basis.append(("p%d" % t, k))
        basis.append(("q%d" % t, k + 1))
    if not basis:
        basis = [("h0", 0)]
        n_h = 1
    space = GradedSpace(basis)
    d = GradedMap(space, space, 1)
    for t in range(n_p):
        d.set_entry(n_h + 2 * t + 1, n_h + 2 * t, F(rng.choice([1, 2, -1])))
    g = random_invertible_degree0(rng, space)
    from defalg import linalg
    ginv = linalg.invert(g.matrix())
    gm = GradedMap(space, space, 0,
                   {(j, i): ginv[j][i] for j in range(space.dim)
                    for i in range(space.dim) if ginv[j][i]})
    dc = gm.compose(d).compose(g)
    cx = Complex(space, dc)
    dims = {}
    for t in range(n_h):
        k = space.degrees[t]
        dims[k] = dims.get(k, 0) + 1
    return cx, dims


def random_pair_truncation(rng, max_gens=3, max_order=3):
    """A materialized truncated polynomial dg-algebra with d from acyclic pairs."""
    n_p = rng.randint(0, max_gens // 2)
    n_free = rng.randint(1 if n_p == 0 else 0, max_gens - 2 * n_p)
    basis = []
    for t in range(n_free):
        basis.append(("g%d" % t, rng.randint(1, 2)))
    for t in range(n_p):
        k = rng.randint(1, 2)
        basis.append(("s%d" % t, k))
        basis.append(("t%d" % t, k + 1))
    v = GradedSpace(basis)
    order = rng.randint(1, max_order)
    p1 = symmetric_power(v, 1)
    d1 = GradedMap(v, p1.space, 1)
    for t in range(n_p):
        d1.set_entry(n_free + 2 * t + 1, n_free + 2 * t, F(1))
    comps = {1: d1} if d1.entries else {}
    return QuasismoothTrunc(v, order, comps).algebra()


def random_algebra(rng, max_dim=8):
    kind = rng.randrange(3)
    if kind == 0:
        cx, _ = random_complex(rng, max_dim=min(max_dim, 6))
        return NilpotentDgAlgebra.trivial(cx.space, cx.d)
    if kind == 1:
        return counterexample_algebras()[0]
    while True:
        a = random_pair_truncation(rng)
        if a.dim <= max_dim:
            return a


def random_abelian_dgla(rng, max_dim=8):
    cx, _ = random_complex(rng, max_dim=max_dim)
    return Dgla(cx.space, {}, cx.d, nilpotency_class=1)


def direct_sum_dgla(l1, l2):
    basis = [("A" + n, d) for n, d in l1.space.basis] + \
            [("B" + n, d) for n, d in l2.space.basis]
    sp = GradedSpace(basis)
    n1 = l1.dim
    br = {}
    for (i, j), sv in l1.bracket.items():
        br[(i, j)] = dict(sv)
    for (i, j), sv in l2.bracket.items():
        br[(i + n1, j + n1)] = {k + n1: c for k, c in sv.items()}
    d = GradedMap(sp, sp, 1)
    for (j, i), c in l1.d.entries.items():
        d.set_entry(j, i, c)
    for (j, i), c in l2.d.entries.items():
        d.set_entry(j + n1, i + n1, c)
    return Dgla(sp, br, d)


def random_dgla(rng, max_dim=8):
    kind = rng.randrange(4)
    if kind == 0:
        return sl2()
    if kind == 1:
        return heisenberg()
    if kind == 2:
        return sl2_odd()
    return random_abelian_dgla(rng, max_dim=max_dim)
