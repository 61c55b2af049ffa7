"""Finite-dimensional nilpotent graded-commutative dg-algebras.

These are the maximal ideals of local Artinian dg-algebras: associative,
graded-commutative, nilpotent, with a square-zero degree-+1 derivation.
The module provides the axiom checker, direct and fiber products, mapping
cones and derived inverse cones, the polynomial-differential-forms
extension A[t,dt]_eps with its evaluation morphisms, homotopies of
morphisms, and the factorization of surjections into small extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .graded import Complex, GradedMap, GradedSpace, cohomology
from .linalg import ONE, ZERO, Vector

SparseVec = Dict[int, Fraction]


def _sparse(vec: Sequence[Fraction]) -> SparseVec:
    return {k: c for k, c in enumerate(vec) if c}


def _dense(sv: SparseVec, dim: int) -> Vector:
    v = [ZERO] * dim
    for k, c in sv.items():
        v[k] = c
    return v


class NilpotentDgAlgebra:
    """Object of the category of nilpotent dg-algebras.

    ``mult`` maps a pair of basis indices (i, j) to the sparse coefficient
    vector of e_i * e_j; missing pairs multiply to zero.
    """

    def __init__(self, space: GradedSpace, mult: Dict[Tuple[int, int], SparseVec],
                 differential: GradedMap):
        if differential.source != space or differential.degree != 1:
            raise ValueError("differential must be a degree +1 endomap")
        self.space = space
        self.mult = {}
        for (i, j), row in mult.items():
            row = {k: linalg.frac(c) for k, c in row.items() if c}
            if not row:
                continue
            for k in row:
                if space.degrees[k] != space.degrees[i] + space.degrees[j]:
                    raise ValueError("product %s*%s has an entry of wrong degree"
                                     % (space.names[i], space.names[j]))
            self.mult[(i, j)] = row
        self.d = differential

    @classmethod
    def trivial(cls, space: GradedSpace, differential: Optional[GradedMap] = None
                ) -> "NilpotentDgAlgebra":
        if differential is None:
            differential = GradedMap.zero(space, space, 1)
        return cls(space, {}, differential)

    @property
    def dim(self) -> int:
        return self.space.dim

    def complex(self) -> Complex:
        return Complex(self.space, self.d)

    def product(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
        out = self.space.zero_vector()
        for (i, j), row in self.mult.items():
            cu = u[i]
            if not cu:
                continue
            cv = v[j]
            if not cv:
                continue
            c = cu * cv
            for k, ck in row.items():
                out[k] += c * ck
        return out

    def basis_product(self, i: int, j: int) -> Vector:
        return _dense(self.mult.get((i, j), {}), self.dim)

    def has_trivial_mult(self) -> bool:
        return not self.mult

    def power_ideal_bases(self) -> List[List[Vector]]:
        """Bases of A = A^1 ⊇ A^2 ⊇ ...  down to the first zero power."""
        powers = [[self.space.basis_vector(i) for i in range(self.dim)]]
        while powers[-1]:
            prev = powers[-1]
            prods = []
            for i in range(self.dim):
                ei = self.space.basis_vector(i)
                for w in prev:
                    p = self.product(ei, w)
                    if not linalg.is_zero_vector(p):
                        prods.append(p)
            chosen = linalg.independent_subset(prods)
            nxt = [prods[c] for c in chosen]
            if len(nxt) == len(prev):
                # not descending: not nilpotent; bail out (validate reports)
                powers.append(nxt)
                break
            powers.append(nxt)
            if not nxt:
                break
        return powers

    def nilpotency_index(self) -> Optional[int]:
        """Least n with A^n = 0 (n = 1 for the zero algebra), or None."""
        powers = self.power_ideal_bases()
        if powers[-1]:
            return None
        return len(powers)

    def annihilator_basis(self) -> List[Vector]:
        """Basis of Ann(A) = {x : x * A = 0} (two-sided by commutativity)."""
        rows: linalg.Matrix = []
        for j in range(self.dim):
            for k in range(self.dim):
                row = [self.mult.get((i, j), {}).get(k, ZERO) for i in range(self.dim)]
                if any(row):
                    rows.append(row)
        if not rows:
            return [self.space.basis_vector(i) for i in range(self.dim)]
        return linalg.nullspace(rows)

    def validate(self) -> "ValidationReport":
        errs = []
        names = self.space.names
        degs = self.space.degrees
        n = self.dim
        prods = {}
        for i in range(n):
            for j in range(n):
                prods[(i, j)] = self.basis_product(i, j)
        for i in range(n):
            for j in range(i, n):
                sgn = -1 if (degs[i] % 2 and degs[j] % 2) else 1
                lhs = prods[(i, j)]
                rhs = linalg.vec_scale(Fraction(sgn), prods[(j, i)])
                if lhs != rhs:
                    errs.append("graded commutativity fails on (%s, %s)" % (names[i], names[j]))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = self.product(prods[(i, j)], self.space.basis_vector(k))
                    rhs = self.product(self.space.basis_vector(i), prods[(j, k)])
                    if lhs != rhs:
                        errs.append("associativity fails on (%s, %s, %s)"
                                    % (names[i], names[j], names[k]))
        dd = self.d.compose(self.d)
        if not dd.is_zero():
            errs.append("d∘d != 0")
        for i in range(n):
            for j in range(n):
                lhs = self.d.apply(prods[(i, j)])
                sgn = Fraction(-1 if degs[i] % 2 else 1)
                rhs = linalg.vec_add(
                    self.product(self.d.apply(self.space.basis_vector(i)),
                                 self.space.basis_vector(j)),
                    linalg.vec_scale(sgn, self.product(self.space.basis_vector(i),
                                                       self.d.apply(self.space.basis_vector(j)))))
                if lhs != rhs:
                    errs.append("Leibniz fails on (%s, %s)" % (names[i], names[j]))
        idx = self.nilpotency_index()
        if idx is None:
            errs.append("not nilpotent")
        return ValidationReport(errors=errs, nilpotency_index=idx)

    def __repr__(self):
        return "NilpotentDgAlgebra(dim=%d)" % self.dim


@dataclass
class ValidationReport:
    errors: List[str]
    nilpotency_index: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.errors


class DgAlgebraMorphism:
    def __init__(self, source: NilpotentDgAlgebra, target: NilpotentDgAlgebra,
                 map_: GradedMap, check: bool = True):
        if map_.source != source.space or map_.target != target.space or map_.degree != 0:
            raise ValueError("morphism must be a degree-0 map of the right spaces")
        self.source = source
        self.target = target
        self.map = map_
        if check:
            errs = self.violations()
            if errs:
                raise ValueError("not a dg-algebra morphism: " + "; ".join(errs))

    def violations(self) -> List[str]:
        errs = []
        f = self.map
        if not f.compose(self.source.d) == self.target.d.compose(f):
            errs.append("does not commute with differentials")
        cols = [f.column(i) for i in range(self.source.dim)]
        for (i, j) in set(list(self.source.mult.keys())) | {
                (i, j) for i in range(self.source.dim) for j in range(self.source.dim)}:
            lhs = f.apply(self.source.basis_product(i, j))
            rhs = self.target.product(cols[i], cols[j])
            if lhs != rhs:
                errs.append("not multiplicative on (%s, %s)"
                            % (self.source.space.names[i], self.source.space.names[j]))
        return errs

    def apply(self, v: Sequence[Fraction]) -> Vector:
        return self.map.apply(v)

    def compose(self, other: "DgAlgebraMorphism") -> "DgAlgebraMorphism":
        return DgAlgebraMorphism(other.source, self.target,
                                 self.map.compose(other.map), check=False)

    def is_surjective(self) -> bool:
        return self.map.rank() == self.target.dim

    @classmethod
    def identity(cls, a: NilpotentDgAlgebra) -> "DgAlgebraMorphism":
        return cls(a, a, GradedMap.identity(a.space), check=False)


def subalgebra(ambient: NilpotentDgAlgebra, vectors: Sequence[Vector],
               names: Optional[Sequence[str]] = None
               ) -> Tuple[NilpotentDgAlgebra, GradedMap]:
    """Sub-dg-algebra spanned by the given (independent, homogeneous,
    multiplicatively and differentially closed) vectors."""
    vectors = [list(v) for v in vectors]
    degs = []
    for v in vectors:
        d = ambient.space.vector_degree(v)
        if d is None:
            raise ValueError("subalgebra basis vectors must be homogeneous")
        degs.append(d)
    if names is None:
        names = ["s%d" % i for i in range(len(vectors))]
    space = GradedSpace(list(zip(names, degs)))
    mult: Dict[Tuple[int, int], SparseVec] = {}
    for i, u in enumerate(vectors):
        for j, v in enumerate(vectors):
            p = ambient.product(u, v)
            coords = linalg.solve_in_span(vectors, p)
            if coords is None:
                raise ValueError("span is not closed under multiplication")
            if any(coords):
                mult[(i, j)] = _sparse(coords)
    d = GradedMap(space, space, 1)
    for i, u in enumerate(vectors):
        coords = linalg.solve_in_span(vectors, ambient.d.apply(u))
        if coords is None:
            raise ValueError("span is not closed under the differential")
        for j, c in enumerate(coords):
            if c:
                d.set_entry(j, i, c)
    incl = GradedMap.from_columns(space, ambient.space, 0, vectors)
    return NilpotentDgAlgebra(space, mult, d), incl


def quotient_algebra(a: NilpotentDgAlgebra, ideal: Sequence[Vector]
                     ) -> Tuple[NilpotentDgAlgebra, DgAlgebraMorphism]:
    """Quotient by a d-stable ideal given by spanning vectors."""
    ideal = [list(v) for v in ideal if not linalg.is_zero_vector(v)]
    keep = linalg.independent_subset(ideal)
    ideal = [ideal[k] for k in keep]
    std = [a.space.basis_vector(i) for i in range(a.dim)]
    compl_idx = linalg.extend_basis(ideal, std)
    full = ideal + [std[i] for i in compl_idx]
    inv = linalg.invert([[full[c][r] for c in range(len(full))] for r in range(a.dim)])
    nj = len(ideal)

    def project(v: Sequence[Fraction]) -> Vector:
        coords = linalg.mat_vec(inv, list(v))
        return coords[nj:]

    names = [a.space.names[i] for i in compl_idx]
    degs = [a.space.degrees[i] for i in compl_idx]
    space = GradedSpace(list(zip(names, degs)))
    reps = [std[i] for i in compl_idx]
    mult: Dict[Tuple[int, int], SparseVec] = {}
    for i, u in enumerate(reps):
        for j, v in enumerate(reps):
            p = project(a.product(u, v))
            if any(p):
                mult[(i, j)] = _sparse(p)
    d = GradedMap(space, space, 1)
    for i, u in enumerate(reps):
        for j, c in enumerate(project(a.d.apply(u))):
            if c:
                d.set_entry(j, i, c)
    q = NilpotentDgAlgebra(space, mult, d)
    pmap = GradedMap(a.space, space, 0)
    for i in range(a.dim):
        for j, c in enumerate(project(std[i])):
            if c:
                pmap.set_entry(j, i, c)
    return q, DgAlgebraMorphism(a, q, pmap, check=False)


def direct_product(a: NilpotentDgAlgebra, b: NilpotentDgAlgebra,
                   tags: Tuple[str, str] = ("l.", "r.")
                   ) -> Tuple[NilpotentDgAlgebra, GradedMap, GradedMap]:
    """A x B with the two projections (as graded maps)."""
    basis = [(tags[0] + n, d) for n, d in a.space.basis]
    basis += [(tags[1] + n, d) for n, d in b.space.basis]
    space = GradedSpace(basis)
    na = a.dim
    mult: Dict[Tuple[int, int], SparseVec] = {}
    for (i, j), row in a.mult.items():
        mult[(i, j)] = dict(row)
    for (i, j), row in b.mult.items():
        mult[(i + na, j + na)] = {k + na: c for k, c in row.items()}
    d = GradedMap(space, space, 1)
    for (j, i), c in a.d.entries.items():
        d.set_entry(j, i, c)
    for (j, i), c in b.d.entries.items():
        d.set_entry(j + na, i + na, c)
    pa = GradedMap(space, a.space, 0, {(i, i): ONE for i in range(na)})
    pb = GradedMap(space, b.space, 0, {(i, i + na): ONE for i in range(b.dim)})
    return NilpotentDgAlgebra(space, mult, d), pa, pb


@dataclass
class FiberProduct:
    algebra: NilpotentDgAlgebra
    proj_a: DgAlgebraMorphism
    proj_b: DgAlgebraMorphism
    _basis_in_product: List[Vector] = field(default_factory=list)
    _alpha: Optional[DgAlgebraMorphism] = None
    _beta: Optional[DgAlgebraMorphism] = None

    def mediate(self, f: DgAlgebraMorphism, g: DgAlgebraMorphism) -> DgAlgebraMorphism:
        """Unique morphism D -> A x_C B with proj_a ∘ m = f, proj_b ∘ m = g."""
        if self._alpha is not None:
            lhs = self._alpha.map.compose(f.map)
            rhs = self._beta.map.compose(g.map)
            if lhs != rhs:
                raise ValueError("cone condition alpha∘f = beta∘g fails")
        src = f.source
        m = GradedMap(src.space, self.algebra.space, 0)
        for i in range(src.dim):
            fa = f.map.column(i)
            gb = g.map.column(i)
            coords = linalg.solve_in_span(self._basis_in_product, list(fa) + list(gb))
            if coords is None:
                raise ValueError("image does not land in the fiber product")
        # fill entries
            for j, c in enumerate(coords):
                if c:
                    m.set_entry(j, i, c)
        return DgAlgebraMorphism(src, self.algebra, m, check=False)


def fiber_product(alpha: DgAlgebraMorphism, beta: DgAlgebraMorphism) -> FiberProduct:
    """A x_C B = {(a,b) : alpha(a) = beta(b)} inside A x B."""
    if alpha.target is not beta.target and alpha.target.space != beta.target.space:
        raise ValueError("fiber product needs a shared target")
    a, b = alpha.source, beta.source
    prod, pa, pb = direct_product(a, b)
    # kernel of (alpha - beta) on A + B
    rows = linalg.zeros(alpha.target.dim, prod.dim)
    for (j, i), c in alpha.map.entries.items():
        rows[j][i] = c
    for (j, i), c in beta.map.entries.items():
        rows[j][i + a.dim] -= c
    kern = linalg.nullspace(rows)
    # pick a homogeneous kernel basis: split each vector by degree
    homog: List[Vector] = []
    for v in kern:
        for comp in prod.space.homogeneous_components(v).values():
            homog.append(comp)
    chosen = linalg.independent_subset(homog)
    basis = [homog[c] for c in chosen]
    sub, incl = subalgebra(prod, basis, names=["fp%d" % i for i in range(len(basis))])
    proj_a = DgAlgebraMorphism(sub, a, pa.compose(incl), check=False)
    proj_b = DgAlgebraMorphism(sub, b, pb.compose(incl), check=False)
    return FiberProduct(sub, proj_a, proj_b, basis, alpha, beta)


@dataclass
class SmallExtension:
    """0 -> I -> A -> B -> 0 with A·I = 0 and I² = 0."""
    i_complex: Complex
    a: NilpotentDgAlgebra
    b: NilpotentDgAlgebra
    iota: GradedMap               # I -> A, degree-0 chain map
    alpha: DgAlgebraMorphism      # A -> B, surjective

    def validate(self) -> List[str]:
        errs = []
        if self.iota.compose(self.i_complex.d) != self.a.d.compose(self.iota):
            errs.append("iota is not a chain map")
        if self.iota.rank() != self.i_complex.space.dim:
            errs.append("iota is not injective")
        if not self.alpha.is_surjective():
            errs.append("alpha is not surjective")
        if not self.alpha.map.compose(self.iota).is_zero():
            errs.append("alpha ∘ iota != 0")
        if self.a.dim != self.b.dim + self.i_complex.space.dim:
            errs.append("dimensions inconsistent with exactness")
        img = [self.iota.column(i) for i in range(self.i_complex.space.dim)]
        for i in range(self.a.dim):
            e = self.a.space.basis_vector(i)
            for x in img:
                if not linalg.is_zero_vector(self.a.product(e, x)):
                    errs.append("A·I != 0")
                    return errs
        errs.extend(self.alpha.violations())
        return errs

    def is_acyclic(self) -> bool:
        return cohomology(self.i_complex).total_dim() == 0

    def section(self) -> GradedMap:
        """A set-linear degree-0 section of alpha (not a morphism)."""
        amat = self.alpha.map.matrix()
        cols = []
        for j in range(self.b.dim):
            pre = linalg.solve(amat, self.b.space.basis_vector(j))
            assert pre is not None, "alpha is not surjective"
            cols.append(pre)
        return GradedMap.from_columns(self.b.space, self.a.space, 0, cols)


def kernel_extension(alpha: DgAlgebraMorphism) -> SmallExtension:
    """Package a surjection with small kernel as a SmallExtension."""
    kern = alpha.map.kernel_basis()
    homog: List[Vector] = []
    for v in kern:
        homog.extend(alpha.source.space.homogeneous_components(v).values())
    chosen = linalg.independent_subset(homog)
    basis = [homog[c] for c in chosen]
    degs = [alpha.source.space.vector_degree(v) for v in basis]
    ispace = GradedSpace([("i%d" % k, d) for k, d in enumerate(degs)])
    di = GradedMap(ispace, ispace, 1)
    for k, v in enumerate(basis):
        coords = linalg.solve_in_span(basis, alpha.source.d.apply(v))
        if coords is None:
            raise ValueError("kernel is not stable under the differential")
        for j, c in enumerate(coords):
            if c:
                di.set_entry(j, k, c)
    iota = GradedMap.from_columns(ispace, alpha.source.space, 0, basis)
    return SmallExtension(Complex(ispace, di), alpha.source, alpha.target, iota, alpha)


def factor_into_small_extensions(alpha: DgAlgebraMorphism) -> List[SmallExtension]:
    """Factor a surjection A -> B into small extensions.

    At each step the kernel is cut down by J = ker ∩ Ann(A), which is
    automatically square-zero, annihilated by A and differential-stable;
    quotient by J and repeat until the induced map is injective.
    """
    if not alpha.is_surjective():
        raise ValueError("morphism is not surjective")
    chain: List[SmallExtension] = []
    current = alpha
    while True:
        kern = current.map.kernel_basis()
        if not kern:
            break
        ann = current.source.annihilator_basis()
        inter = _intersect_spans(kern, ann, current.source.dim)
        assert inter, "nilpotency guarantees ker ∩ Ann is nonzero"
        homog: List[Vector] = []
        for v in inter:
            homog.extend(current.source.space.homogeneous_components(v).values())
        keep = linalg.independent_subset(homog)
        j_basis = [homog[k] for k in keep]
        # d-stability of J = ker ∩ Ann
        for v in j_basis:
            assert linalg.solve_in_span(j_basis, current.source.d.apply(v)) is not None, \
                "ker ∩ Ann must be differential-stable"
        q, proj = quotient_algebra(current.source, j_basis)
        chain.append(kernel_extension(proj))
        # induced morphism q -> B on the quotient
        sec_cols = []
        qmat = proj.map.matrix()
        for i in range(q.dim):
            pre = linalg.solve(qmat, q.space.basis_vector(i))
            sec_cols.append(pre)
        sec = GradedMap.from_columns(q.space, current.source.space, 0, sec_cols)
        newmap = current.map.compose(sec)
        current = DgAlgebraMorphism(q, current.target, newmap, check=False)
    return chain


def _intersect_spans(u: Sequence[Vector], w: Sequence[Vector], dim: int) -> List[Vector]:
    if not u or not w:
        return []
    cols = len(u) + len(w)
    rows = linalg.zeros(dim, cols)
    for c, v in enumerate(u):
        for r in range(dim):
            rows[r][c] = v[r]
    for c, v in enumerate(w):
        for r in range(dim):
            rows[r][len(u) + c] = -v[r]
    out = []
    for sol in linalg.nullspace(rows):
        vec = [sum(sol[c] * u[c][r] for c in range(len(u))) for r in range(dim)]
        if any(vec):
            out.append(vec)
    keep = linalg.independent_subset(out)
    return [out[k] for k in keep]


# ---------------------------------------------------------------------------
# mapping cone and derived inverse cone
# ---------------------------------------------------------------------------

@dataclass
class MappingCone:
    algebra: NilpotentDgAlgebra
    include: DgAlgebraMorphism        # A -> C
    project: GradedMap                # C -> M[1] (a derivation over A)
    module_space: GradedSpace         # M[1]
    module_vectors: List[Vector]      # basis of M inside A


def mapping_cone(a: NilpotentDgAlgebra, module_vectors: Sequence[Vector]) -> MappingCone:
    """Cone C = A ⊕ M[1] of the inclusion of a square-zero ideal M ⊆ A.

    Product (x, m)(y, n) = (xy, xn + my) with the shifted module structure;
    differential (x, m) ↦ (dx + m, -d m) in shifted coordinates.
    """
    mv = [list(v) for v in module_vectors]
    for u in mv:
        for w in mv:
            if not linalg.is_zero_vector(a.product(u, w)):
                raise ValueError("module must satisfy M·M = 0")
    degs = []
    for v in mv:
        dg = a.space.vector_degree(v)
        if dg is None:
            raise ValueError("module basis must be homogeneous")
        degs.append(dg)
    na = a.dim
    basis = [("a." + n, d) for n, d in a.space.basis]
    basis += [("m%d" % k, dg - 1) for k, dg in enumerate(degs)]
    space = GradedSpace(basis)
    mod_space = GradedSpace([("m%d" % k, dg - 1) for k, dg in enumerate(degs)])

    def mcoords(v: Vector) -> Vector:
        coords = linalg.solve_in_span(mv, v)
        if coords is None:
            raise ValueError("module is not an ideal (product escapes the span)")
        return coords

    mult: Dict[Tuple[int, int], SparseVec] = {}
    for (i, j), row in a.mult.items():
        mult[(i, j)] = dict(row)
    for i in range(na):
        ei = a.space.basis_vector(i)
        sgn = Fraction(-1 if a.space.degrees[i] % 2 else 1)
        for k, w in enumerate(mv):
            # e_i · m_k = (-1)^{deg e_i} (e_i w)[1]
            p = a.product(ei, w)
            if not linalg.is_zero_vector(p):
                mult[(i, na + k)] = {na + t: sgn * c for t, c in enumerate(mcoords(p)) if c}
            # m_k · e_i = (w e_i)[1]
            q = a.product(w, ei)
            if not linalg.is_zero_vector(q):
                mult[(na + k, i)] = {na + t: c for t, c in enumerate(mcoords(q)) if c}
    d = GradedMap(space, space, 1)
    for (j, i), c in a.d.entries.items():
        d.set_entry(j, i, c)
    for k, w in enumerate(mv):
        for j, c in enumerate(w):          # the inclusion component f: M[1] -> A[1]
            if c:
                d.set_entry(j, na + k, c)
        for t, c in enumerate(mcoords(a.d.apply(w))):
            if c:
                d.set_entry(na + t, na + k, -c)
    cone = NilpotentDgAlgebra(space, mult, d)
    incl = DgAlgebraMorphism(a, cone, GradedMap(a.space, space, 0,
                             {(i, i): ONE for i in range(na)}), check=False)
    proj = GradedMap(space, mod_space, 0,
                     {(k, na + k): ONE for k in range(len(mv))})
    return MappingCone(cone, incl, proj, mod_space, mv)


@dataclass
class DerivedInverseCone:
    algebra: NilpotentDgAlgebra
    project: DgAlgebraMorphism     # D -> B
    include: GradedMap             # N[-1] -> D


def derived_inverse_cone(b: NilpotentDgAlgebra, n_complex: Complex,
                         action: Dict[Tuple[int, int], SparseVec],
                         h: GradedMap) -> DerivedInverseCone:
    """D = B ⊕ N[-1] with differential lower-triangular via the derivation h.

    ``action[(i, j)]`` is the sparse vector of b_i · n_j in N;
    h: B -> N must be a degree-0 derivation commuting with differentials.
    """
    if h.source != b.space or h.target != n_complex.space or h.degree != 0:
        raise ValueError("h must be a degree-0 map B -> N")
    if h.compose(b.d) != n_complex.d.compose(h):
        raise ValueError("h must commute with the differentials")
    nb = b.dim
    nn = n_complex.space.dim

    def act(bv: Vector, nv: Vector) -> Vector:
        out = [ZERO] * nn
        for (i, j), row in action.items():
            c = bv[i] * nv[j]
            if c:
                for k, ck in row.items():
                    out[k] += c * ck
        return out

    # derivation check: h(xy) = h(x)·y + x·h(y) with the module actions
    for i in range(nb):
        for j in range(nb):
            lhs = h.apply(b.basis_product(i, j))
            ei, ej = b.space.basis_vector(i), b.space.basis_vector(j)
            di, dj = b.space.degrees[i], b.space.degrees[j]
            # right action n·y = (-1)^{deg n · deg y} y·n
            hn = h.apply(ei)
            sgn = Fraction(-1 if (di % 2 and dj % 2) else 1)
            rhs = linalg.vec_add(linalg.vec_scale(sgn, act(ej, hn)),
                                 act(ei, h.apply(ej)))
            if lhs != rhs:
                raise ValueError("h is not a derivation (fails on %s, %s)"
                                 % (b.space.names[i], b.space.names[j]))

    basis = [("b." + nm, dg) for nm, dg in b.space.basis]
    basis += [("n." + nm, dg + 1) for nm, dg in n_complex.space.basis]
    space = GradedSpace(basis)
    mult: Dict[Tuple[int, int], SparseVec] = {}
    for (i, j), row in b.mult.items():
        mult[(i, j)] = dict(row)
    for i in range(nb):
        ei = b.space.basis_vector(i)
        sgn = Fraction(-1 if b.space.degrees[i] % 2 else 1)
        for k in range(nn):
            nk = [ONE if t == k else ZERO for t in range(nn)]
            p = act(ei, nk)
            if any(p):
                # b_i · n_k[-1] = (-1)^{deg b_i}(b_i · n_k)[-1]
                mult[(i, nb + k)] = {nb + t: sgn * c for t, c in enumerate(p) if c}
                # n_k[-1] · b_i = (n_k · b_i)[-1] = ±(b_i · n_k)[-1]
                s2 = Fraction(-1 if (n_complex.space.degrees[k] % 2
                                     and b.space.degrees[i] % 2) else 1)
                mult[(nb + k, i)] = {nb + t: s2 * c for t, c in enumerate(p) if c}
    d = GradedMap(space, space, 1)
    for (j, i), c in b.d.entries.items():
        d.set_entry(j, i, c)
    for (j, i), c in h.entries.items():
        d.set_entry(nb + j, i, c)
    for (j, i), c in n_complex.d.entries.items():
        d.set_entry(nb + j, nb + i, -c)
    alg = NilpotentDgAlgebra(space, mult, d)
    proj = DgAlgebraMorphism(alg, b, GradedMap(space, b.space, 0,
                             {(i, i): ONE for i in range(nb)}), check=False)
    nshift = GradedSpace([(nm, dg + 1) for nm, dg in n_complex.space.basis])
    incl = GradedMap(nshift, space, 0, {(nb + k, k): ONE for k in range(nn)})
    return DerivedInverseCone(alg, proj, incl)


# ---------------------------------------------------------------------------
# A[t, dt]_eps and homotopies
# ---------------------------------------------------------------------------

def _ceil_frac(n: int, eps: Fraction) -> int:
    num, den = (n * eps.numerator), eps.denominator
    return -((-num) // den)


class DeRhamAlgebra:
    """A[t,dt]_eps = A ⊕ ⊕_{n>0} A^{⌈n·eps⌉} ⊗ (K tⁿ ⊕ K tⁿ⁻¹dt).

    Exactly finite-dimensional: summands with ⌈n·eps⌉ at or above the
    nilpotency index of A vanish, so the t-degree cap is computed, never
    guessed.
    """

    def __init__(self, a: NilpotentDgAlgebra, eps: Fraction):
        eps = linalg.frac(eps)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        self.base = a
        self.eps = eps
        powers = a.power_ideal_bases()
        nil = len(powers)  # A^nil = 0
        if powers[-1]:
            raise ValueError("base algebra is not nilpotent")
        n_max = 0
        while _ceil_frac(n_max + 1, eps) < nil:
            n_max += 1
        self.t_cap = n_max

        # blocks: (t-power n, is_dt) -> list of ambient A-vectors
        self.blocks: List[Tuple[int, bool, List[Vector]]] = []
        self.blocks.append((0, False, [a.space.basis_vector(i) for i in range(a.dim)]))
        for n in range(1, n_max + 1):
            pw = powers[_ceil_frac(n, eps) - 1]
            self.blocks.append((n, False, pw))
            self.blocks.append((n, True, pw))

        basis = []
        self._elems: List[Tuple[int, bool, Vector]] = []
        self._block_pos: Dict[Tuple[int, bool], Tuple[int, List[Vector]]] = {}
        pos = 0
        for n, is_dt, vecs in self.blocks:
            self._block_pos[(n, is_dt)] = (pos, vecs)
            for k, v in enumerate(vecs):
                dg = a.space.vector_degree(v)
                suffix = "" if n == 0 else ("*t%d" % n if not is_dt
                                            else ("*dt" if n == 1 else "*t%ddt" % (n - 1)))
                nm = ("p%d_%d%s" % (n, k, suffix)) if n else a.space.names[k]
                basis.append((nm, dg + (1 if is_dt else 0)))
                self._elems.append((n, is_dt, v))
                pos += 1
        space = GradedSpace(basis)

        def put(n: int, is_dt: bool, vec: Vector, out: Vector, coef: Fraction):
            if linalg.is_zero_vector(vec) or not coef:
                return
            blk = self._block_pos.get((n, is_dt))
            assert blk is not None, "nonzero coefficient beyond the exact t-cap"
            off, vecs = blk
            coords = linalg.solve_in_span(vecs, vec)
            assert coords is not None, "coefficient escapes its power ideal"
            for k, c in enumerate(coords):
                if c:
                    out[off + k] += coef * c

        dim = space.dim
        mult: Dict[Tuple[int, int], SparseVec] = {}
        for i, (n1, dt1, v1) in enumerate(self._elems):
            for j, (n2, dt2, v2) in enumerate(self._elems):
                if dt1 and dt2:
                    continue
                p = a.product(v1, v2)
                if linalg.is_zero_vector(p):
                    continue
                out = [ZERO] * dim
                sgn = ONE
                if dt1 and (a.space.vector_degree(v2) % 2):
                    sgn = -ONE
                nres = n1 + n2
                if (nres, dt1 or dt2) in self._block_pos:
                    put(nres, dt1 or dt2, p, out, sgn)
                else:
                    # beyond the cap the power ideal is zero; product must die
                    assert linalg.is_zero_vector(p)
                sv = _sparse(out)
                if sv:
                    mult[(i, j)] = sv
        d = GradedMap(space, space, 1)
        for i, (n, is_dt, v) in enumerate(self._elems):
            out = [ZERO] * dim
            dv = a.d.apply(v)
            put(n, is_dt, dv, out, ONE)
            if not is_dt and n > 0:
                vdeg = a.space.vector_degree(v)
                sgn = Fraction(-1 if vdeg % 2 else 1)
                put(n, True, v, out, sgn * n)
            for j, c in enumerate(out):
                if c:
                    d.set_entry(j, i, c)
        self.algebra = NilpotentDgAlgebra(space, mult, d)
        self.include = DgAlgebraMorphism(
            a, self.algebra,
            GradedMap(a.space, space, 0, {(i, i): ONE for i in range(a.dim)}),
            check=False)

    def evaluate(self, s) -> DgAlgebraMorphism:
        """Evaluation morphism e_s: t ↦ s, dt ↦ 0."""
        s = linalg.frac(s)
        m = GradedMap(self.algebra.space, self.base.space, 0)
        for i, (n, is_dt, v) in enumerate(self._elems):
            if is_dt:
                continue
            c = s ** n
            if c:
                for j, vc in enumerate(v):
                    if vc:
                        m.set_entry(j, i, m.entries.get((j, i), ZERO) + c * vc)
        return DgAlgebraMorphism(self.algebra, self.base, m, check=False)

    def reverse(self) -> DgAlgebraMorphism:
        """The reparametrization t ↦ 1 - t, dt ↦ -dt (an automorphism)."""
        from math import comb
        space = self.algebra.space
        m = GradedMap(space, space, 0)
        dim = space.dim
        for i, (n, is_dt, v) in enumerate(self._elems):
            out = [ZERO] * dim
            if not is_dt:
                # t^n -> (1-t)^n
                for k in range(n + 1):
                    coef = Fraction(comb(n, k) * (-1) ** k)
                    off, vecs = self._block_pos[(k, False)]
                    coords = linalg.solve_in_span(vecs, v)
                    for t, c in enumerate(coords):
                        if c:
                            out[off + t] += coef * c
            else:
                # t^{n-1}dt -> (1-t)^{n-1}(-dt)
                for k in range(n):
                    coef = Fraction(-comb(n - 1, k) * (-1) ** k)
                    off, vecs = self._block_pos[(k + 1, True)]
                    coords = linalg.solve_in_span(vecs, v)
                    for t, c in enumerate(coords):
                        if c:
                            out[off + t] += coef * c
            for j, c in enumerate(out):
                if c:
                    m.set_entry(j, i, c)
        return DgAlgebraMorphism(self.algebra, self.algebra, m, check=False)


def de_rham_truncation(a: NilpotentDgAlgebra, epsilon) -> DeRhamAlgebra:
    return DeRhamAlgebra(a, linalg.frac(epsilon))


@dataclass
class Homotopy:
    """A morphism H: source -> target[t,dt]_eps witnessing f ~ g."""
    source: NilpotentDgAlgebra
    target: NilpotentDgAlgebra
    derham: DeRhamAlgebra
    h: GradedMap       # source.space -> derham.algebra.space

    @property
    def epsilon(self) -> Fraction:
        return self.derham.eps

    def as_morphism(self) -> DgAlgebraMorphism:
        return DgAlgebraMorphism(self.source, self.derham.algebra, self.h)

    def endpoint(self, s) -> GradedMap:
        return self.derham.evaluate(s).map.compose(self.h)

    def reversed(self) -> "Homotopy":
        return Homotopy(self.source, self.target, self.derham,
                        self.derham.reverse().map.compose(self.h))


def check_homotopy(h: Homotopy, f: DgAlgebraMorphism, g: DgAlgebraMorphism) -> bool:
    """True iff H is a dg-algebra morphism with e₀∘H = f and e₁∘H = g."""
    try:
        morph = h.as_morphism()
    except ValueError:
        return False
    del morph
    return h.endpoint(0) == f.map and h.endpoint(1) == g.map


def constant_homotopy(f: DgAlgebraMorphism, eps=1) -> Homotopy:
    dr = de_rham_truncation(f.target, eps)
    return Homotopy(f.source, f.target, dr, dr.include.map.compose(f.map))


def chain_homotopic(f: DgAlgebraMorphism, g: DgAlgebraMorphism
                    ) -> Tuple[bool, Optional[GradedMap]]:
    """Decide homotopy for morphisms between trivial-multiplication algebras.

    For A² = 0 = B² homotopy in the dg-algebra sense coincides with chain
    homotopy, so f - g = dσ + σd is a linear problem.
    """
    if not (f.source.has_trivial_mult() and f.target.has_trivial_mult()):
        raise ValueError("decision requires trivial multiplications")
    src, tgt = f.source, f.target
    slots = [(j, i) for j in range(tgt.dim) for i in range(src.dim)
             if tgt.space.degrees[j] == src.space.degrees[i] - 1]
    if not slots:
        diff = f.map - g.map
        return (diff.is_zero(), GradedMap(src.space, tgt.space, -1)
                if diff.is_zero() else None)
    slot_pos = {s: k for k, s in enumerate(slots)}
    rows = []
    rhs = []
    diff = f.map - g.map
    da, db = src.d.matrix(), tgt.d.matrix()
    for r in range(tgt.dim):
        for c in range(src.dim):
            if tgt.space.degrees[r] != src.space.degrees[c]:
                continue
            row = [ZERO] * len(slots)
            for (j, i), k in slot_pos.items():
                if j == r:                      # (σ d)[r,c] += σ[r,i] d[i,c]
                    row[k] += da[i][c]
                if i == c:                      # (d σ)[r,c] += d[r,j] σ[j,c]
                    row[k] += db[r][j]
            rows.append(row)
            rhs.append(diff.entries.get((r, c), ZERO))
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return False, None
    sigma = GradedMap(src.space, tgt.space, -1)
    for (j, i), k in slot_pos.items():
        if sol[k]:
            sigma.set_entry(j, i, sol[k])
    return True, sigma
