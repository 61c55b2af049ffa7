"""Exact graded linear algebra over the rationals.

Graded vector spaces with a finite homogeneous basis, degree-shifting linear
maps, Koszul signs, unshuffles, shifts, tensor and graded-symmetric powers,
complexes and their cohomology with an explicit contraction (homotopy)
datum, quasi-isomorphism tests and connecting homomorphisms.

Grading convention: a single cohomological integer degree; the differential
always has degree +1; the shift V[n] puts a degree-k element in degree k-n
and multiplies the differential by (-1)^n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .linalg import ONE, ZERO, Vector

__all__ = [
    "GradedSpace", "GradedMap", "Complex", "Contraction", "ShortExactSequence",
    "koszul_sign", "unshuffles", "shift", "tensor_power", "symmetric_power",
    "SymmetricPower", "cohomology", "is_quasiiso", "connecting_hom",
]


class GradedSpace:
    """Finite-dimensional graded vector space with a named homogeneous basis."""

    def __init__(self, basis: Sequence[Tuple[str, int]]):
        basis = tuple((str(n), int(d)) for n, d in basis)
        names = [n for n, _ in basis]
        if len(set(names)) != len(names):
            raise ValueError("basis names must be unique")
        self.basis = basis
        self.names = tuple(names)
        self.degrees = tuple(d for _, d in basis)
        self._index = {n: i for i, n in enumerate(names)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        return self._index[name]

    def degree_indices(self, k: int) -> List[int]:
        return [i for i, d in enumerate(self.degrees) if d == k]

    def degrees_present(self) -> List[int]:
        return sorted(set(self.degrees))

    def zero_vector(self) -> Vector:
        return [ZERO] * self.dim

    def basis_vector(self, i: int) -> Vector:
        v = self.zero_vector()
        v[i] = ONE
        return v

    def vector_degree(self, v: Sequence[Fraction]) -> Optional[int]:
        """Degree of a homogeneous vector; None for 0 or inhomogeneous."""
        degs = {self.degrees[i] for i, c in enumerate(v) if c}
        if len(degs) == 1:
            return degs.pop()
        return None

    def homogeneous_components(self, v: Sequence[Fraction]) -> Dict[int, Vector]:
        out: Dict[int, Vector] = {}
        for i, c in enumerate(v):
            if c:
                comp = out.setdefault(self.degrees[i], self.zero_vector())
                comp[i] = c
        return out

    def dual(self) -> "GradedSpace":
        return GradedSpace([(n + "^", -d) for n, d in self.basis])

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return "GradedSpace(%s)" % (", ".join("%s:%d" % b for b in self.basis),)


def direct_sum(*spaces: GradedSpace, tags: Optional[Sequence[str]] = None) -> GradedSpace:
    """Direct sum; basis names are prefixed with tags to stay unique."""
    if tags is None:
        tags = ["s%d." % i for i in range(len(spaces))]
    basis = []
    for tag, sp in zip(tags, spaces):
        basis.extend((tag + n, d) for n, d in sp.basis)
    return GradedSpace(basis)


class GradedMap:
    """Degree-homogeneous linear map between graded spaces.

    Entries are kept sparsely as {(target_index, source_index): Fraction};
    an entry is admissible only when deg(target) = deg(source) + degree.
    """

    def __init__(self, source: GradedSpace, target: GradedSpace, degree: int,
                 entries: Optional[Dict[Tuple[int, int], Fraction]] = None):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.entries: Dict[Tuple[int, int], Fraction] = {}
        if entries:
            for (j, i), c in entries.items():
                self.set_entry(j, i, c)

    def set_entry(self, j: int, i: int, c) -> None:
        c = linalg.frac(c)
        if c == 0:
            self.entries.pop((j, i), None)
            return
        if self.target.degrees[j] != self.source.degrees[i] + self.degree:
            raise ValueError(
                "entry (%s <- %s) violates degree %d homogeneity"
                % (self.target.names[j], self.source.names[i], self.degree))
        self.entries[(j, i)] = c

    @classmethod
    def zero(cls, source: GradedSpace, target: GradedSpace, degree: int) -> "GradedMap":
        return cls(source, target, degree)

    @classmethod
    def identity(cls, space: GradedSpace) -> "GradedMap":
        return cls(space, space, 0, {(i, i): ONE for i in range(space.dim)})

    @classmethod
    def from_columns(cls, source: GradedSpace, target: GradedSpace, degree: int,
                     columns: Sequence[Sequence[Fraction]]) -> "GradedMap":
        """columns[i] = image of the i-th source basis vector."""
        entries = {}
        for i, col in enumerate(columns):
            for j, c in enumerate(col):
                if c:
                    entries[(j, i)] = c
        return cls(source, target, degree, entries)

    def column(self, i: int) -> Vector:
        v = self.target.zero_vector()
        for (j, ii), c in self.entries.items():
            if ii == i:
                v[j] = c
        return v

    def apply(self, v: Sequence[Fraction]) -> Vector:
        out = self.target.zero_vector()
        for (j, i), c in self.entries.items():
            if v[i]:
                out[j] += c * v[i]
        return out

    def __call__(self, v: Sequence[Fraction]) -> Vector:
        return self.apply(v)

    def compose(self, other: "GradedMap") -> "GradedMap":
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise ValueError("composition shape mismatch")
        out = GradedMap(other.source, self.target, self.degree + other.degree)
        by_col: Dict[int, List[Tuple[int, Fraction]]] = {}
        for (j, i), c in self.entries.items():
            by_col.setdefault(i, []).append((j, c))
        acc: Dict[Tuple[int, int], Fraction] = {}
        for (k, i), c in other.entries.items():
            for (j, c2) in by_col.get(k, ()):
                key = (j, i)
                acc[key] = acc.get(key, ZERO) + c2 * c
        for key, c in acc.items():
            if c:
                out.entries[key] = c
        return out

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if (self.source != other.source or self.target != other.target
                or self.degree != other.degree):
            raise ValueError("sum shape mismatch")
        out = GradedMap(self.source, self.target, self.degree, dict(self.entries))
        for key, c in other.entries.items():
            s = out.entries.get(key, ZERO) + c
            if s:
                out.entries[key] = s
            else:
                out.entries.pop(key, None)
        return out

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + other.scale(-1)

    def __neg__(self) -> "GradedMap":
        return self.scale(-1)

    def scale(self, c) -> "GradedMap":
        c = linalg.frac(c)
        out = GradedMap(self.source, self.target, self.degree)
        if c:
            out.entries = {k: c * v for k, v in self.entries.items()}
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return (isinstance(other, GradedMap) and self.source == other.source
                and self.target == other.target and self.degree == other.degree
                and self.entries == other.entries)

    def matrix(self) -> linalg.Matrix:
        m = linalg.zeros(self.target.dim, self.source.dim)
        for (j, i), c in self.entries.items():
            m[j][i] = c
        return m

    def transpose(self) -> "GradedMap":
        """Plain transpose between dual spaces (no signs)."""
        return GradedMap(self.target.dual(), self.source.dual(), self.degree,
                         {(i, j): c for (j, i), c in self.entries.items()})

    def rank(self) -> int:
        return linalg.rank(self.matrix()) if self.entries else 0

    def preimage(self, w: Sequence[Fraction]) -> Optional[Vector]:
        return linalg.solve(self.matrix(), list(w))

    def kernel_basis(self) -> List[Vector]:
        if not self.source.dim:
            return []
        m = self.matrix()
        if not m:
            m = [[ZERO] * self.source.dim]
        return linalg.nullspace(m)

    def __repr__(self):
        return "GradedMap(deg=%d, %d entries)" % (self.degree, len(self.entries))


class Complex:
    """Graded space with a square-zero degree-+1 differential."""

    def __init__(self, space: GradedSpace, differential: GradedMap, check: bool = True):
        if differential.source != space or differential.target != space:
            raise ValueError("differential must be an endomap of the space")
        if differential.degree != 1:
            raise ValueError("differential must have degree +1")
        if check and not differential.compose(differential).is_zero():
            raise ValueError("d ∘ d != 0: not a complex")
        self.space = space
        self.d = differential

    @classmethod
    def zero_differential(cls, space: GradedSpace) -> "Complex":
        return cls(space, GradedMap.zero(space, space, 1))

    def __eq__(self, other):
        return (isinstance(other, Complex) and self.space == other.space
                and self.d == other.d)

    def __repr__(self):
        return "Complex(dim=%d)" % self.space.dim


def koszul_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign with sigma(v_1 x ... x v_n) = sign * (v_{s(1)} x ... x v_{s(n)}).

    ``sigma`` is 0-based: the permuted tuple is (v_{sigma[0]}, ...).  Each
    transposition of adjacent factors of degrees a, b contributes (-1)^{ab}.
    """
    n = len(degrees)
    if sorted(sigma) != list(range(n)):
        raise ValueError("malformed permutation")
    sign = 1
    for k in range(n):
        for l in range(k + 1, n):
            if sigma[k] > sigma[l]:
                if degrees[sigma[k]] % 2 and degrees[sigma[l]] % 2:
                    sign = -sign
    return sign


def unshuffles(p: int, q: int) -> List[Tuple[int, ...]]:
    """All (p,q)-unshuffles as 0-based permutations (image tuples).

    A permutation sigma is an unshuffle of type (p, q) when it increases on
    the first p and the last q slots; there are binomial(p+q, p) of them.
    """
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError("need p, q >= 0 and p + q >= 1")
    n = p + q
    out = []
    for first in itertools.combinations(range(n), p):
        rest = tuple(i for i in range(n) if i not in first)
        out.append(first + rest)
    assert len(out) == comb(n, p)
    return out


def shift(c: Complex, n: int) -> Complex:
    """Shift C[n]: degree k becomes k - n, differential scaled by (-1)^n."""
    space = GradedSpace([(name, d - n) for name, d in c.space.basis])
    sgn = -1 if n % 2 else 1
    d = GradedMap(space, space, 1,
                  {key: sgn * v for key, v in c.d.entries.items()})
    return Complex(space, d, check=False)


def shift_space(v: GradedSpace, n: int) -> GradedSpace:
    return GradedSpace([(name, d - n) for name, d in v.basis])


def tensor_power(v: GradedSpace, n: int) -> Tuple[GradedSpace, List[Tuple[int, ...]]]:
    """n-fold tensor power; returns the space and the index tuples."""
    tuples = list(itertools.product(range(v.dim), repeat=n))
    basis = []
    for t in tuples:
        name = "*".join(v.names[i] for i in t)
        deg = sum(v.degrees[i] for i in t)
        basis.append((name, deg))
    return GradedSpace(basis), tuples


def canonical_monomial(indices: Sequence[int], degrees: Sequence[int]
                       ) -> Optional[Tuple[Tuple[int, ...], int]]:
    """Sort a symmetric word into canonical order, tracking the Koszul sign.

    Returns (sorted index tuple, sign), or None when the monomial is zero
    (a repeated odd-degree factor).
    """
    idx = list(indices)
    sign = 1
    # insertion sort; each adjacent swap of factors a, b contributes (-1)^{ab}
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            if degrees[idx[j - 1]] % 2 and degrees[idx[j]] % 2:
                sign = -sign
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b and degrees[a] % 2:
            return None
    return tuple(idx), sign


class SymmetricPower:
    """Graded-symmetric power of a graded space with canonical monomials."""

    def __init__(self, v: GradedSpace, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.base = v
        self.n = n
        monos = []
        for t in itertools.combinations_with_replacement(range(v.dim), n):
            cm = canonical_monomial(t, v.degrees)
            if cm is not None:
                monos.append(t)
        self.monomials: Tuple[Tuple[int, ...], ...] = tuple(monos)
        self._mono_index = {m: i for i, m in enumerate(monos)}
        basis = []
        for m in monos:
            name = "*".join(v.names[i] for i in m)
            basis.append((name, sum(v.degrees[i] for i in m)))
        self.space = GradedSpace(basis)

    def index(self, indices: Sequence[int]) -> Optional[Tuple[int, int]]:
        """(monomial position, sign) of an arbitrary word; None when zero."""
        cm = canonical_monomial(indices, self.base.degrees)
        if cm is None:
            return None
        mono, sign = cm
        return self._mono_index[mono], sign

    def projection(self) -> GradedMap:
        """The quotient map from the n-fold tensor power."""
        tp, tuples = tensor_power(self.base, self.n)
        entries = {}
        for col, t in enumerate(tuples):
            res = self.index(t)
            if res is not None:
                pos, sign = res
                entries[(pos, col)] = Fraction(sign)
        return GradedMap(tp, self.space, 0, entries)


def symmetric_power(v: GradedSpace, n: int) -> SymmetricPower:
    return SymmetricPower(v, n)


class Contraction:
    """Cohomology of a complex with an explicit splitting.

    Provides per-degree decomposition C = B (+) H (+) W with Z = B (+) H,
    harmonic representatives, the projection p onto H, the inclusion of H,
    and a degree -1 homotopy sigma with  d sigma + sigma d = Id - incl p.
    """

    def __init__(self, cx: Complex):
        self.complex = cx
        space = cx.space
        dmat = cx.d.matrix()
        n = space.dim
        degs = sorted(set(space.degrees))
        # per degree k: indices of C^k, matrix blocks of d restricted
        self._by_degree = {k: space.degree_indices(k) for k in degs}

        boundary_data: Dict[int, List[Tuple[Vector, Vector]]] = {}  # k -> [(b, preimage)]
        for k in degs:
            src = self._by_degree[k]
            images = []
            for i in src:
                col = [dmat[j][i] for j in range(n)]
                images.append(col)
            chosen = linalg.independent_subset(images)
            pairs = []
            for c in chosen:
                i = src[c]
                pairs.append((images[c], space.basis_vector(i)))
            boundary_data.setdefault(k + 1, []).extend(pairs)

        harmonic_basis: List[Tuple[str, int, Vector]] = []
        self.boundaries: Dict[int, List[Vector]] = {}
        self.boundary_preimages: Dict[int, List[Vector]] = {}
        self.harmonics: Dict[int, List[Vector]] = {}
        self.complements: Dict[int, List[Vector]] = {}
        self._dims: Dict[int, int] = {}
        for k in degs:
            idx = self._by_degree[k]
            bnd = [b for b, _ in boundary_data.get(k, [])]
            pre = [p for _, p in boundary_data.get(k, [])]
            # cocycles: kernel of d restricted to degree k
            dk = [[dmat[j][i] for i in idx] for j in range(n)]
            null = linalg.nullspace(dk) if idx else []
            cocycles = []
            for nv in null:
                v = space.zero_vector()
                for pos, i in enumerate(idx):
                    v[i] = nv[pos]
                cocycles.append(v)
            ext = linalg.extend_basis(bnd, cocycles)
            harm = [cocycles[e] for e in ext]
            # complement of the cocycles: preimages of next-degree boundaries
            comp = [p for _, p in boundary_data.get(k + 1, [])]
            self.boundaries[k] = bnd
            self.boundary_preimages[k] = pre
            self.harmonics[k] = harm
            self.complements[k] = comp
            self._dims[k] = len(harm)
            for t, h in enumerate(harm):
                harmonic_basis.append(("H%d_%d" % (k, t), k, h))

        self.harmonic_space = GradedSpace([(nm, d) for nm, d, _ in harmonic_basis])
        self._harm_vectors = [h for _, _, h in harmonic_basis]

        incl = GradedMap.from_columns(self.harmonic_space, space, 0, self._harm_vectors)
        proj = GradedMap(space, self.harmonic_space, 0)
        sigma = GradedMap(space, space, -1)
        # per degree, invert the change of basis [B | H | W] to express the
        # projection and the homotopy
        self._coords: Dict[int, Tuple[List[int], int, int, int, linalg.Matrix]] = {}
        hoff = 0
        hoffsets = {}
        for k in degs:
            hoffsets[k] = hoff
            hoff += len(self.harmonics[k])
        for k in degs:
            idx = self._by_degree[k]
            if not idx:
                continue
            cols = self.boundaries[k] + self.harmonics[k] + self.complements[k]
            mat = [[c[i] for c in cols] for i in idx]
            inv = linalg.invert(mat)
            nb = len(self.boundaries[k])
            nh = len(self.harmonics[k])
            nw = len(self.complements[k])
            self._coords[k] = (idx, nb, nh, nw, inv)
            for pos, i in enumerate(idx):
                # column i of the projection: H-coordinates of e_i
                for t in range(nh):
                    c = inv[nb + t][pos]
                    if c:
                        proj.set_entry(hoffsets[k] + t, i, c)
                # homotopy: send the boundary component back via the stored
                # preimages, kill H and W components
                for t in range(nb):
                    c = inv[t][pos]
                    if c:
                        pvec = self.boundary_preimages[k][t]
                        for j, pc in enumerate(pvec):
                            if pc:
                                sigma.set_entry(j, i, sigma.entries.get((j, i), ZERO) + c * pc)
        self.include = incl
        self.project = proj
        self.sigma = sigma

    def dims(self) -> Dict[int, int]:
        return {k: v for k, v in self._dims.items() if v}

    def dim(self, k: int) -> int:
        return self._dims.get(k, 0)

    def representative(self, class_index: int) -> Vector:
        return list(self._harm_vectors[class_index])

    def class_of(self, v: Sequence[Fraction]) -> Optional[Vector]:
        """Coordinates of [v] in the harmonic basis; None if v is not a cocycle."""
        if not linalg.is_zero_vector(self.complex.d.apply(v)):
            return None
        return self.project.apply(v)

    def is_boundary(self, v: Sequence[Fraction]) -> Optional[Vector]:
        """A preimage under d when v is a coboundary, else None."""
        cls = self.class_of(v)
        if cls is None or not linalg.is_zero_vector(cls):
            return None
        return self.sigma.apply(v)

    def total_dim(self) -> int:
        return sum(self._dims.values())


def cohomology(cx: Complex) -> Contraction:
    """Cohomology with a contraction datum (see Contraction)."""
    return Contraction(cx)


def is_chain_map(f: GradedMap, source: Complex, target: Complex) -> bool:
    """f d = (-1)^n d f for a degree-n map of complexes."""
    sgn = -1 if f.degree % 2 else 1
    return f.compose(source.d) == target.d.compose(f).scale(sgn)


def is_quasiiso(f: GradedMap, source: Complex, target: Complex) -> bool:
    """True iff the degree-0 chain map f induces isomorphisms on cohomology."""
    if f.degree != 0:
        raise ValueError("quasi-isomorphism test needs a degree-0 map")
    if not is_chain_map(f, source, target):
        raise ValueError("input is not a chain map")
    hs = cohomology(source)
    ht = cohomology(target)
    if hs.dims() != ht.dims():
        return False
    # induced map in harmonic coordinates; square by dimension match
    induced = ht.project.compose(f).compose(hs.include)
    m = induced.matrix()
    return linalg.rank(m) == hs.total_dim()


@dataclass
class ShortExactSequence:
    """0 -> sub -> total -> quotient -> 0 of complexes, degreewise exact."""
    sub: Complex
    total: Complex
    quotient: Complex
    include: GradedMap   # sub -> total, degree 0 chain map
    project: GradedMap   # total -> quotient, degree 0 chain map

    def validate(self) -> List[str]:
        errs = []
        if not is_chain_map(self.include, self.sub, self.total):
            errs.append("inclusion is not a chain map")
        if not is_chain_map(self.project, self.total, self.quotient):
            errs.append("projection is not a chain map")
        if self.include.rank() != self.sub.space.dim:
            errs.append("inclusion is not injective")
        if self.project.rank() != self.quotient.space.dim:
            errs.append("projection is not surjective")
        if not self.project.compose(self.include).is_zero():
            errs.append("projection ∘ inclusion != 0")
        # exactness in the middle: rank-nullity
        if self.total.space.dim != self.sub.space.dim + self.quotient.space.dim:
            errs.append("dimensions do not add up (not exact in the middle)")
        return errs


def connecting_hom(ses: ShortExactSequence) -> GradedMap:
    """Snake-lemma connecting map H(quotient) -> H(sub) of degree +1."""
    errs = ses.validate()
    if errs:
        raise ValueError("not a short exact sequence: " + "; ".join(errs))
    hq = cohomology(ses.quotient)
    hs = cohomology(ses.sub)
    out = GradedMap(hq.harmonic_space, hs.harmonic_space, 1)
    pmat = ses.project.matrix()
    imat = ses.include.matrix()
    for c in range(hq.harmonic_space.dim):
        x = hq.representative(c)
        y = linalg.solve(pmat, x)
        assert y is not None, "projection not surjective on the representative"
        dy = ses.total.d.apply(y)
        z = linalg.solve(imat, dy)
        assert z is not None, "d(lift) is not in the image of the inclusion"
        cls = hs.class_of(z)
        assert cls is not None, "snake output is not a cocycle"
        for j, coef in enumerate(cls):
            if coef:
                out.set_entry(j, c, coef)
    return out
