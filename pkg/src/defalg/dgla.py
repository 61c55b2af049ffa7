"""Differential graded Lie algebras and Maurer-Cartan theory.

DGLAs by bracket structure constants, the tensor DGLA L⊗A over a nilpotent
dg-algebra A, the Maurer-Cartan equation, the extended algebra L_d, the
gauge action through the Baker-Campbell-Hausdorff product, tangent spaces,
lifting through small extensions, and a (sound, partially complete) gauge
equivalence decision procedure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .algebras import (DgAlgebraMorphism, NilpotentDgAlgebra, SmallExtension,
                       SparseVec, factor_into_small_extensions)
from .graded import Complex, Contraction, GradedMap, GradedSpace, cohomology
from .linalg import ONE, ZERO, Vector


class Dgla:
    """Differential graded Lie algebra on a finite basis.

    ``bracket[(i, j)]`` holds the sparse coefficients of [e_i, e_j];
    missing pairs bracket to zero.  ``nilpotency_class`` (optional) bounds
    the length of nonzero iterated brackets, enabling exponentials.
    """

    def __init__(self, space: GradedSpace, bracket: Dict[Tuple[int, int], SparseVec],
                 differential: GradedMap, nilpotency_class: Optional[int] = None):
        if differential.source != space or differential.degree != 1:
            raise ValueError("differential must be a degree +1 endomap")
        self.space = space
        self.bracket = {}
        for (i, j), row in bracket.items():
            row = {k: linalg.frac(c) for k, c in row.items() if c}
            if not row:
                continue
            for k in row:
                if space.degrees[k] != space.degrees[i] + space.degrees[j]:
                    raise ValueError("bracket [%s, %s] has an entry of wrong degree"
                                     % (space.names[i], space.names[j]))
            self.bracket[(i, j)] = row
        self.d = differential
        self.nilpotency_class = nilpotency_class
        self._bb_cache: Dict[Tuple[int, int], Vector] = {}

    @property
    def dim(self) -> int:
        return self.space.dim

    def complex(self) -> Complex:
        return Complex(self.space, self.d)

    def basis_bracket(self, i: int, j: int) -> Vector:
        v = self._bb_cache.get((i, j))
        if v is None:
            v = self.space.zero_vector()
            for k, c in self.bracket.get((i, j), {}).items():
                v[k] = c
            self._bb_cache[(i, j)] = v
        return v

    def bracket_vec(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
        out = self.space.zero_vector()
        for (i, j), row in self.bracket.items():
            c = u[i] * v[j] if (u[i] and v[j]) else None
            if c:
                for k, ck in row.items():
                    out[k] += c * ck
        return out

    def validate(self) -> "DglaReport":
        errs = []
        n = self.dim
        degs = self.space.degrees
        names = self.space.names
        for i in range(n):
            for j in range(i, n):
                sgn = Fraction(-1 if (degs[i] % 2 and degs[j] % 2) else 1)
                lhs = self.basis_bracket(i, j)
                rhs = linalg.vec_scale(-sgn, self.basis_bracket(j, i))
                if lhs != rhs:
                    errs.append("graded antisymmetry fails on (%s, %s)" % (names[i], names[j]))
        for i in range(n):
            ei = self.space.basis_vector(i)
            for j in range(n):
                ej = self.space.basis_vector(j)
                sgn = Fraction(-1 if (degs[i] % 2 and degs[j] % 2) else 1)
                for k in range(n):
                    lhs = self.bracket_vec(ei, self.basis_bracket(j, k))
                    rhs = linalg.vec_add(
                        self.bracket_vec(self.basis_bracket(i, j), self.space.basis_vector(k)),
                        linalg.vec_scale(sgn, self.bracket_vec(ej, self.basis_bracket(i, k))))
                    if lhs != rhs:
                        errs.append("graded Jacobi fails on (%s, %s, %s)"
                                    % (names[i], names[j], names[k]))
        for i in range(n):
            ei = self.space.basis_vector(i)
            sgn = Fraction(-1 if degs[i] % 2 else 1)
            for j in range(n):
                ej = self.space.basis_vector(j)
                lhs = self.d.apply(self.basis_bracket(i, j))
                rhs = linalg.vec_add(
                    self.bracket_vec(self.d.apply(ei), ej),
                    linalg.vec_scale(sgn, self.bracket_vec(ei, self.d.apply(ej))))
                if lhs != rhs:
                    errs.append("Leibniz fails on (%s, %s)" % (names[i], names[j]))
        if not self.d.compose(self.d).is_zero():
            errs.append("d∘d != 0")
        return DglaReport(errors=errs)

    def __repr__(self):
        return "Dgla(dim=%d)" % self.dim


@dataclass
class DglaReport:
    errors: List[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_dgla(l: Dgla) -> DglaReport:
    return l.validate()


class TensorDgla(Dgla):
    """L ⊗ A for a DGLA L and a nilpotent dg-algebra A.

    Basis pairs x_i ⊗ a_p indexed L-major.  The bracket follows the
    Koszul-consistent convention
        [x⊗a, y⊗b] = (-1)^{deg(a)·deg(y)} [x,y] ⊗ ab,
    certified by validate(); the differential is
        d(x⊗a) = dx ⊗ a + (-1)^{deg x} x ⊗ da.
    """

    def __init__(self, l: Dgla, a: NilpotentDgAlgebra):
        self.l = l
        self.a = a
        nl, na = l.dim, a.dim
        basis = []
        for i in range(nl):
            for p in range(na):
                basis.append((l.space.names[i] + "@" + a.space.names[p],
                              l.space.degrees[i] + a.space.degrees[p]))
        space = GradedSpace(basis)

        bracket: Dict[Tuple[int, int], SparseVec] = {}
        for (i, j), lrow in l.bracket.items():
            ydeg = l.space.degrees[j]
            for (p, q), arow in a.mult.items():
                sgn = -1 if (a.space.degrees[p] % 2 and ydeg % 2) else 1
                row: SparseVec = {}
                for k, ck in lrow.items():
                    for r, cr in arow.items():
                        row[k * na + r] = row.get(k * na + r, ZERO) + sgn * ck * cr
                row = {t: c for t, c in row.items() if c}
                if row:
                    key = (i * na + p, j * na + q)
                    if key in bracket:
                        for t, c in row.items():
                            s = bracket[key].get(t, ZERO) + c
                            if s:
                                bracket[key][t] = s
                            else:
                                bracket[key].pop(t, None)
                    else:
                        bracket[key] = row
        d = GradedMap(space, space, 1)
        for (j, i), c in l.d.entries.items():
            for p in range(na):
                d.set_entry(j * na + p, i * na + p, c)
        for (q, p), c in a.d.entries.items():
            for i in range(nl):
                sgn = -1 if l.space.degrees[i] % 2 else 1
                d.set_entry(i * na + q, i * na + p,
                            d.entries.get((i * na + q, i * na + p), ZERO) + sgn * c)
        nil = a.nilpotency_index()
        super().__init__(space, bracket, d,
                         nilpotency_class=(nil - 1 if nil and nil > 1 else 1))

    def pair_index(self, i: int, p: int) -> int:
        return i * self.a.dim + p

    def elem(self, xvec: Sequence[Fraction], avec: Sequence[Fraction]) -> Vector:
        out = self.space.zero_vector()
        for i, cx in enumerate(xvec):
            if cx:
                for p, ca in enumerate(avec):
                    if ca:
                        out[self.pair_index(i, p)] += cx * ca
        return out

def tensor_dgla(l: Dgla, a: NilpotentDgAlgebra) -> TensorDgla:
    return TensorDgla(l, a)


def tensor_push(src: TensorDgla, dst_space: GradedSpace, f: GradedMap,
                dst_adim: int) -> GradedMap:
    """The map 1⊗f : L⊗A -> L⊗A' induced by a coefficient map f: A -> A'."""
    out = GradedMap(src.space, dst_space, f.degree)
    for (q, p), c in f.entries.items():
        for i in range(src.l.dim):
            out.set_entry(i * dst_adim + q, i * src.a.dim + p,
                          out.entries.get((i * dst_adim + q, i * src.a.dim + p), ZERO) + c)
    return out


def trivial_algebra_of_complex(c: Complex) -> NilpotentDgAlgebra:
    return NilpotentDgAlgebra(c.space, {}, c.d)


def mc_defect(t: Dgla, x: Sequence[Fraction]) -> Vector:
    """dx + ½[x, x]."""
    return linalg.vec_add(t.d.apply(x),
                          linalg.vec_scale(Fraction(1, 2), t.bracket_vec(x, x)))


def mc_check(t: Dgla, x: Sequence[Fraction]) -> Tuple[bool, Vector]:
    deg = t.space.vector_degree(x)
    if deg not in (None, 1) and deg != 1:
        raise ValueError("Maurer-Cartan candidates must have degree 1")
    if deg is None and any(x):
        raise ValueError("Maurer-Cartan candidates must be homogeneous of degree 1")
    h = mc_defect(t, x)
    return linalg.is_zero_vector(h), h


def bch(bracket: Callable[[Vector, Vector], Vector], u: Vector, w: Vector,
        bound: int) -> Vector:
    """Baker-Campbell-Hausdorff product by the Dynkin series.

    Exact: iterated brackets of length above ``bound`` are assumed (and in
    the nilpotent callers, guaranteed) to vanish, so the series is finite.
    """
    if bound < 1:
        raise ValueError("nilpotency bound must be >= 1")
    n_dim = len(u)
    total = [ZERO] * n_dim

    def add(vec: Vector, c: Fraction):
        for t in range(n_dim):
            if vec[t]:
                total[t] += c * vec[t]

    def nested(word: List[Vector]) -> Vector:
        acc = word[-1]
        for letter in reversed(word[:-1]):
            acc = bracket(letter, acc)
        return acc

    def blocks(n_blocks: int, remaining: int, prefix: List[Tuple[int, int]]):
        if n_blocks == 0:
            if prefix:
                yield list(prefix)
            return
        for r in range(remaining + 1):
            for s in range(remaining - r + 1):
                if r + s == 0:
                    continue
                prefix.append((r, s))
                yield from blocks(n_blocks - 1, remaining - r - s, prefix)
                prefix.pop()

    for n in range(1, bound + 1):
        for comp in blocks(n, bound, []):
            if len(comp) != n:
                continue
            length = sum(r + s for r, s in comp)
            word: List[Vector] = []
            denom = n * length
            for r, s in comp:
                word.extend([u] * r)
                word.extend([w] * s)
                denom *= factorial(r) * factorial(s)
            coeff = Fraction((-1) ** (n - 1), denom)
            add(nested(word), coeff)
    return total


def gauge_act(t: Dgla, a: Sequence[Fraction], x: Sequence[Fraction]) -> Vector:
    """e^a · x = exp(ad_a)(x + d) - d in the extended algebra L_d.

    With a of degree 0, ad_a(v + βd) = [a, v] - β·da; the sum is finite by
    nilpotency of the ambient tensor DGLA.
    """
    if t.space.vector_degree(a) not in (None, 0):
        raise ValueError("gauge parameters must have degree 0")
    bound = t.nilpotency_class
    if bound is None:
        raise ValueError("gauge action needs a certified nilpotency class")
    da = t.d.apply(a)
    out = list(x)
    term = list(x)
    beta = ONE
    k = 0
    while True:
        k += 1
        if k > bound + 1:
            if any(term) or beta:
                raise ValueError("nilpotency bound exceeded in gauge action")
            break
        nxt = t.bracket_vec(a, term)
        if beta:
            nxt = linalg.vec_sub(nxt, linalg.vec_scale(beta, da))
        beta = ZERO
        term = nxt
        if linalg.is_zero_vector(term):
            break
        c = Fraction(1, factorial(k))
        out = linalg.vec_add(out, linalg.vec_scale(c, term))
    return out


def def_tangent(l: Dgla) -> Contraction:
    """Tangent/obstruction spaces of the deformation functor: H*(L)."""
    return cohomology(l.complex())


@dataclass
class McLiftResult:
    lifted: bool
    lift: Optional[Vector]                 # MC element of L⊗A when lifted
    lift_translations: List[Vector]        # basis of all lift differences, inside L⊗A
    obstruction_rep: Optional[Vector]      # defect representative in L⊗A
    obstruction_class: Optional[Vector]    # coordinates in coker(T) on (L⊗I)²
    cohomology_class: Optional[Vector]     # coordinates in H²(L⊗I); small case only
    tensor_a: TensorDgla
    tensor_b: TensorDgla
    tensor_i: TensorDgla
    i_cohomology: Contraction
    embed_i: GradedMap                     # L⊗I -> L⊗A


def _tensor_with_kernel(l: Dgla, e: SmallExtension) -> Tuple[TensorDgla, GradedMap, TensorDgla]:
    ti = tensor_dgla(l, trivial_algebra_of_complex(e.i_complex))
    ta = tensor_dgla(l, e.a)
    emb = tensor_push(ti, ta.space, e.iota, e.a.dim)
    return ti, emb, ta


def _is_strictly_small(e: SmallExtension) -> bool:
    iota_cols = [e.iota.apply(e.i_complex.space.basis_vector(k))
                 for k in range(e.i_complex.space.dim)]
    for i in range(e.a.dim):
        ei = e.a.space.basis_vector(i)
        for w in iota_cols:
            if not linalg.is_zero_vector(e.a.product(ei, w)):
                return False
    return True


def mc_lift(e: SmallExtension, l: Dgla, x: Sequence[Fraction],
            section: Optional[GradedMap] = None) -> McLiftResult:
    """Lift an MC element through a square-zero extension, or obstruct.

    With I² = 0 the Maurer-Cartan equation for y + ξ, ξ ∈ (L⊗I)¹, is the
    affine-linear system T(ξ) = -h with T(ξ) = dξ + [y, ξ] and h the
    defect of any set-linear lift y; both T and the class of h modulo
    im(T) are independent of the choice of y, so the decision is exact and
    complete.  When the extension is strictly small (A·I = 0), T is the
    differential of L⊗I: the translations are Z¹(L⊗I) and the obstruction
    is the usual class in H²(L⊗I).
    """
    tb = tensor_dgla(l, e.b)
    ok, _ = mc_check(tb, x)
    if not ok:
        raise ValueError("input element does not satisfy Maurer-Cartan over B")
    ti, emb, ta = _tensor_with_kernel(l, e)
    if section is None:
        section = e.section()
    y = tensor_push(tb, ta.space, section, e.a.dim).apply(x)
    h = mc_defect(ta, y)
    # the defect lives in L⊗I because its image over B vanishes
    hi = linalg.solve(emb.matrix(), h)
    assert hi is not None, "defect escaped L⊗I: kernel is not square-zero"
    hcoh = cohomology(ti.complex())

    deg1 = ti.space.degree_indices(1)
    t_cols: List[Vector] = []
    for i in deg1:
        xi = emb.apply(ti.space.basis_vector(i))
        col = linalg.vec_add(ta.d.apply(xi), ta.bracket_vec(y, xi))
        col_i = linalg.solve(emb.matrix(), col)
        assert col_i is not None, "lift operator escaped L⊗I: kernel is not an ideal"
        t_cols.append(col_i)
    # kernel of T: all lift translations
    t_matrix = [[t_cols[c][r] for c in range(len(deg1))]
                for r in range(ti.space.dim)]
    translations: List[Vector] = []
    for ker in linalg.nullspace(t_matrix):
        v = ti.space.zero_vector()
        for pos, i in enumerate(deg1):
            v[i] = ker[pos]
        translations.append(emb.apply(v))

    small = _is_strictly_small(e)
    sol = linalg.solve_in_span(t_cols, linalg.vec_scale(Fraction(-1), hi))
    if sol is not None:
        xi = ti.space.zero_vector()
        for pos, i in enumerate(deg1):
            xi[i] = sol[pos]
        lift = linalg.vec_add(y, emb.apply(xi))
        okl, _ = mc_check(ta, lift)
        assert okl, "corrected lift fails Maurer-Cartan"
        return McLiftResult(True, lift, translations, None, None, None,
                            ta, tb, ti, hcoh, emb)
    # obstruction: coordinates of h in a complement of im(T) inside (L⊗I)²
    deg2 = ti.space.degree_indices(2)
    candidates = [ti.space.basis_vector(i) for i in deg2]
    chosen = linalg.extend_basis([list(c) for c in t_cols], candidates)
    full = t_cols + [candidates[k] for k in chosen]
    coords = linalg.solve_in_span(full, hi)
    assert coords is not None
    cls = coords[len(t_cols):]
    assert any(cls), "unsolvable system must have nonzero cokernel class"
    ccls = None
    if small and linalg.is_zero_vector(ti.d.apply(hi)):
        ccls = hcoh.class_of(hi)
    return McLiftResult(False, None, translations, h, cls, ccls,
                        ta, tb, ti, hcoh, emb)


@dataclass
class GaugeDecision:
    verdict: str                 # "YES" | "NO" | "UNKNOWN"
    witness: Optional[Vector] = None


def gauge_equivalent(l: Dgla, a: NilpotentDgAlgebra, x: Sequence[Fraction],
                     y: Sequence[Fraction], mode: str = "decide",
                     witness: Optional[Sequence[Fraction]] = None) -> GaugeDecision:
    """Gauge equivalence of MC elements of L⊗A.

    verify-mode checks a supplied witness exactly.  decide-mode is complete
    when A² = 0 (the orbit is x + d(L⊗A)⁰); otherwise it runs a staged
    linear search down a small-extension chain of A and answers UNKNOWN
    when a stage is inconclusive — the staging is sound, not complete.
    """
    t = tensor_dgla(l, a)
    for v in (x, y):
        ok, _ = mc_check(t, v)
        if not ok:
            raise ValueError("inputs must satisfy Maurer-Cartan")
    if mode == "verify":
        if witness is None:
            raise ValueError("verify mode needs a witness")
        same = gauge_act(t, witness, x) == list(y)
        return GaugeDecision("YES" if same else "NO",
                             list(witness) if same else None)
    if mode != "decide":
        raise ValueError("mode must be 'verify' or 'decide'")
    if list(x) == list(y):
        return GaugeDecision("YES", t.space.zero_vector())
    diff = linalg.vec_sub(list(x), list(y))
    if a.has_trivial_mult():
        # orbit of x is x - d(L⊗A)⁰: a linear problem, complete
        deg0 = t.space.degree_indices(0)
        cols = [t.d.apply(t.space.basis_vector(i)) for i in deg0]
        sol = linalg.solve_in_span(cols, diff)
        if sol is None:
            return GaugeDecision("NO")
        wit = t.space.zero_vector()
        for pos, i in enumerate(deg0):
            wit[i] = sol[pos]
        assert gauge_act(t, wit, x) == list(y)
        return GaugeDecision("YES", wit)

    # staged search down a small-extension chain of A -> 0
    zero = NilpotentDgAlgebra.trivial(GradedSpace([]))
    to_zero = DgAlgebraMorphism(a, zero, GradedMap(a.space, zero.space, 0), check=False)
    chain = factor_into_small_extensions(to_zero)
    # projections A -> A_j (A_0 = A; chain[j]: A_j -> A_{j+1})
    stages = [chain[j].a for j in range(len(chain))] + [zero]
    projs = [DgAlgebraMorphism.identity(a)]
    for j in range(len(chain)):
        projs.append(chain[j].alpha.compose(projs[-1]))
    witness_vec: Vector = []
    tensors = {len(stages) - 1: tensor_dgla(l, zero)}
    for j in range(len(chain) - 1, -1, -1):
        tj = tensor_dgla(l, stages[j])
        tensors[j] = tj
        e = chain[j]
        tii = tensor_dgla(l, trivial_algebra_of_complex(e.i_complex))
        emb = tensor_push(tii, tj.space, e.iota, e.a.dim)
        xj = tensor_push(t, tj.space, projs[j].map, stages[j].dim).apply(x)
        yj = tensor_push(t, tj.space, projs[j].map, stages[j].dim).apply(y)
        sec = e.section()
        tj1 = tensors[j + 1]
        lift_w = tensor_push(tj1, tj.space, sec, stages[j].dim).apply(witness_vec) \
            if stages[j + 1].dim else tj.space.zero_vector()
        r = linalg.vec_sub(gauge_act(tj, lift_w, xj), yj)
        ri = linalg.solve(emb.matrix(), r)
        assert ri is not None, "gauge residue escaped the stage kernel"
        assert linalg.is_zero_vector(tii.d.apply(ri)), "gauge residue must be closed"
        deg0 = tii.space.degree_indices(0)
        cols = [tii.d.apply(tii.space.basis_vector(i)) for i in deg0]
        sol = linalg.solve_in_span(cols, ri)
        if sol is None:
            return GaugeDecision("UNKNOWN")
        c = tii.space.zero_vector()
        for pos, i in enumerate(deg0):
            c[i] = sol[pos]
        c_in_j = emb.apply(c)
        witness_vec = bch(tj.bracket_vec, c_in_j, lift_w,
                          max(tj.nilpotency_class, 1)) if any(lift_w) or any(c_in_j) \
            else tj.space.zero_vector()
    if gauge_act(t, witness_vec, x) == list(y):
        return GaugeDecision("YES", witness_vec)
    return GaugeDecision("UNKNOWN")


# ---------------------------------------------------------------------------
# derivation DGLAs
# ---------------------------------------------------------------------------

def derivations_dgla(a: NilpotentDgAlgebra) -> Tuple[Dgla, List[GradedMap]]:
    """Der*(A, A) with the commutator bracket and differential [d, -].

    Returns the DGLA together with the derivation basis (as graded maps);
    basis element k of the DGLA is the k-th returned derivation.
    """
    n = a.dim
    degs = a.space.degrees
    deg_range = sorted({dj - di for di in degs for dj in degs}) if n else []
    deriv_maps: List[GradedMap] = []
    for nn in deg_range:
        slots = [(j, i) for j in range(n) for i in range(n)
                 if degs[j] == degs[i] + nn]
        if not slots:
            continue
        pos = {s: k for k, s in enumerate(slots)}
        rows: List[Vector] = []
        # Leibniz: h(e_i e_j) = h(e_i) e_j + (-1)^{n·deg_i} e_i h(e_j)
        for i in range(n):
            for j in range(n):
                pij = a.basis_product(i, j)
                sgn = Fraction(-1 if (nn % 2 and degs[i] % 2) else 1)
                for r in range(n):
                    row = [ZERO] * len(slots)
                    # h(e_i e_j) term
                    for k, ck in enumerate(pij):
                        if ck and (r, k) in pos:
                            row[pos[(r, k)]] += ck
                    # -h(e_i) e_j
                    for (jj, ii), kk in pos.items():
                        if ii == i:
                            row[kk] -= a.mult.get((jj, j), {}).get(r, ZERO)
                        if ii == j:
                            row[kk] -= sgn * a.mult.get((i, jj), {}).get(r, ZERO)
                    if any(row):
                        rows.append(row)
        basis = linalg.nullspace(rows) if rows else [
            [ONE if t == k else ZERO for t in range(len(slots))]
            for k in range(len(slots))]
        for b in basis:
            m = GradedMap(a.space, a.space, nn)
            for (j, i), k in pos.items():
                if b[k]:
                    m.set_entry(j, i, b[k])
            deriv_maps.append(m)

    def flat(m: GradedMap) -> Vector:
        return [m.entries.get((j, i), ZERO) for j in range(n) for i in range(n)]

    flats = [flat(m) for m in deriv_maps]
    space = GradedSpace([("D%d" % k, m.degree) for k, m in enumerate(deriv_maps)])
    bracket: Dict[Tuple[int, int], SparseVec] = {}
    for i, hi in enumerate(deriv_maps):
        for j, hj in enumerate(deriv_maps):
            sgn = Fraction(-1 if (hi.degree % 2 and hj.degree % 2) else 1)
            comm_map = hi.compose(hj) - hj.compose(hi).scale(sgn)
            coords = linalg.solve_in_span(flats, flat(comm_map))
            assert coords is not None, "commutator escaped the derivation space"
            row = {k: c for k, c in enumerate(coords) if c}
            if row:
                bracket[(i, j)] = row
    d = GradedMap(space, space, 1)
    for i, hi in enumerate(deriv_maps):
        sgn = Fraction(-1 if hi.degree % 2 else 1)
        dm = a.d.compose(hi) - hi.compose(a.d).scale(sgn)
        coords = linalg.solve_in_span(flats, flat(dm))
        assert coords is not None
        for j, c in enumerate(coords):
            if c:
                d.set_entry(j, i, c)
    return Dgla(space, bracket, d), deriv_maps
