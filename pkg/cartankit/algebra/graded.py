"""
|1|-graded matrix Lie algebras g = g₋₁ ⊕ g₀ ⊕ g₁ and their cochain calculus.

Two families are supported:

* ``Projective(m)``: sl(m+1) with the block grading of the (1, m) split.
* ``Conformal(p, q)``: so(p+1, q+1) realized against the anti-diagonal form
  J = [[0, 0, 1], [0, S, 0], [1, 0, 0]], S = diag(+1ᵖ, −1^q), graded by the
  (1, p+q, 1) block split.

In both cases the grade of matrix entry (r, c) is blk(c) − blk(r), so one code
path handles both. Bases are ordered by grade (−1, 0, +1) and
lexicographically by elementary matrix inside each grade.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, List, Sequence, Tuple, Union

from .exceptions import ClosureError, DimensionMismatch
from .ratlin import Mat, RatLike, mat_inverse, parse_rat

logger = logging.getLogger(__name__)

GRADES = (-1, 0, 1)


@dataclass(frozen=True)
class Projective:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"Projective model needs m >= 1, got {self.m}")

    name = 'projective'

    @property
    def n(self) -> int:
        return self.m + 1

    @property
    def dim(self) -> int:
        return self.m

    @property
    def blocks(self) -> Tuple[int, ...]:
        return (1, self.m)

    @property
    def splits(self) -> Tuple[int, ...]:
        return (1,)

    def form(self):
        return None

    def descriptor(self) -> dict:
        return {'model': 'projective', 'm': self.m}

    def __str__(self):
        return f"Projective({self.m})"


@dataclass(frozen=True)
class Conformal:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 3:
            raise ValueError(f"Conformal model needs p+q >= 3, got ({self.p}, {self.q})")

    name = 'conformal'

    @property
    def n(self) -> int:
        return self.p + self.q + 2

    @property
    def dim(self) -> int:
        return self.p + self.q

    @property
    def blocks(self) -> Tuple[int, ...]:
        return (1, self.dim, 1)

    @property
    def splits(self) -> Tuple[int, ...]:
        return (1, self.dim + 1)

    @property
    def signs(self) -> Tuple[int, ...]:
        return (1,) * self.p + (-1,) * self.q

    def form(self) -> Mat:
        """The quadratic form J preserved (up to scale) by the model group."""
        k = self.dim
        updates = {(0, k + 1): 1, (k + 1, 0): 1}
        updates.update({(i + 1, i + 1): s for i, s in enumerate(self.signs)})
        return Mat.zeros(self.n).replace(updates)

    def descriptor(self) -> dict:
        return {'model': 'conformal', 'p': self.p, 'q': self.q}

    def __str__(self):
        return f"Conformal({self.p}, {self.q})"


ModelTag = Union[Projective, Conformal]


def block_index(tag: ModelTag, i: int) -> int:
    bound = 0
    for b, size in enumerate(tag.blocks):
        bound += size
        if i < bound:
            return b
    raise IndexError(f"Index {i} outside a {tag.n}x{tag.n} model")


def entry_grade(tag: ModelTag, r: int, c: int) -> int:
    return block_index(tag, c) - block_index(tag, r)


def _projective_basis(tag: Projective) -> List[Tuple[int, Mat]]:
    n, m = tag.n, tag.m
    basis = [(-1, Mat.unit(n, i, 0)) for i in range(1, m + 1)]
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            e = Mat.unit(n, i, j)
            if i == j:
                e = e - Mat.unit(n, 0, 0)
            basis.append((0, e))
    basis += [(1, Mat.unit(n, 0, j)) for j in range(1, m + 1)]
    return basis


def _conformal_basis(tag: Conformal) -> List[Tuple[int, Mat]]:
    n, k = tag.n, tag.dim
    s = (None,) + tag.signs
    last = k + 1
    basis = [(-1, Mat.unit(n, i, 0) - s[i] * Mat.unit(n, last, i)) for i in range(1, k + 1)]
    basis.append((0, Mat.unit(n, 0, 0) - Mat.unit(n, last, last)))
    for i, j in combinations(range(1, k + 1), 2):
        basis.append((0, Mat.unit(n, i, j) - (s[i] * s[j]) * Mat.unit(n, j, i)))
    basis += [(1, Mat.unit(n, 0, j) - s[j] * Mat.unit(n, j, last)) for j in range(1, k + 1)]
    return basis


@dataclass(frozen=True)
class GradedAlgebra:
    """
    A graded matrix Lie algebra with exact structure constants.

    Instances are obtained through ``build_algebra`` (cached per model tag),
    so two elements of "the same" algebra share one object.
    """
    tag: ModelTag

    @cached_property
    def _graded_basis(self) -> List[Tuple[int, Mat]]:
        if isinstance(self.tag, Projective):
            return _projective_basis(self.tag)
        return _conformal_basis(self.tag)

    @property
    def ambient_dim(self) -> int:
        return self.tag.n

    @cached_property
    def basis(self) -> Tuple[Mat, ...]:
        return tuple(b for _, b in self._graded_basis)

    @cached_property
    def grade_of(self) -> Tuple[int, ...]:
        return tuple(g for g, _ in self._graded_basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def indices(self) -> Dict[int, Tuple[int, ...]]:
        """Basis indices of each grade."""
        return {g: tuple(i for i, h in enumerate(self.grade_of) if h == g) for g in GRADES}

    def grade_dims(self) -> Tuple[int, int, int]:
        return tuple(len(self.indices[g]) for g in GRADES)

    @cached_property
    def _pivots(self) -> Tuple[Tuple[Tuple[int, int], Fraction], ...]:
        """
        For each basis element a matrix position where it is the only basis
        element with a nonzero entry, together with that entry.
        """
        n = self.ambient_dim
        pivots = []
        for k, b in enumerate(self.basis):
            found = None
            for r in range(n):
                for c in range(n):
                    if b[r, c] != 0 and all(o[r, c] == 0 for i, o in enumerate(self.basis) if i != k):
                        found = ((r, c), b[r, c])
                        break
                if found:
                    break
            if found is None:
                raise ClosureError(f"Basis element {k} of {self.tag} has no pivot entry")
            pivots.append(found)
        return tuple(pivots)

    def expand(self, matrix: Mat) -> Tuple[Fraction, ...]:
        """Coordinates of ``matrix`` in the basis; ClosureError if it is not in g."""
        if matrix.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionMismatch(f"{matrix.shape} matrix in a {self.ambient_dim}x{self.ambient_dim} algebra")
        coords = tuple(matrix[pos] / value for pos, value in self._pivots)
        if self._assemble(coords) != matrix:
            raise ClosureError(f"Matrix does not lie in {self.tag}: {matrix!r}")
        return coords

    def read_grade(self, matrix: Mat, grade: int) -> Tuple[Fraction, ...]:
        """Coordinates of the g_grade component read off the pivot entries of ``matrix``."""
        return tuple(matrix[pos] / value for pos, value in (self._pivots[i] for i in self.indices[grade]))

    def _assemble(self, coords: Sequence[Fraction]) -> Mat:
        out = Mat.zeros(self.ambient_dim)
        for c, b in zip(coords, self.basis):
            if c:
                out = out + c * b
        return out

    # Element constructors

    def element(self, coords: Sequence[RatLike]) -> 'AlgElement':
        if len(coords) != self.dim:
            raise DimensionMismatch(f"{self.tag} has dimension {self.dim}, got {len(coords)} coordinates")
        return AlgElement(self, tuple(parse_rat(c) for c in coords))

    def from_matrix(self, matrix: Mat) -> 'AlgElement':
        return AlgElement(self, self.expand(matrix))

    def zero(self) -> 'AlgElement':
        return AlgElement(self, (Fraction(0),) * self.dim)

    def basis_element(self, k: int) -> 'AlgElement':
        return AlgElement(self, tuple(Fraction(int(i == k)) for i in range(self.dim)))

    def graded_element(self, grade: int, values: Sequence[RatLike]) -> 'AlgElement':
        """Element of g_grade with the given coordinates inside that grade."""
        idx = self.indices[grade]
        if len(values) != len(idx):
            raise DimensionMismatch(f"g_{grade} of {self.tag} has dimension {len(idx)}, got {len(values)}")
        coords = [Fraction(0)] * self.dim
        for i, v in zip(idx, values):
            coords[i] = parse_rat(v)
        return AlgElement(self, tuple(coords))

    def minus_vector(self, values: Sequence[RatLike]) -> 'AlgElement':
        return self.graded_element(-1, values)

    def plus_vector(self, values: Sequence[RatLike]) -> 'AlgElement':
        return self.graded_element(1, values)

    def minus_basis(self) -> Tuple['AlgElement', ...]:
        return tuple(self.basis_element(i) for i in self.indices[-1])

    def plus_basis(self) -> Tuple['AlgElement', ...]:
        return tuple(self.basis_element(i) for i in self.indices[1])

    # Structure

    @cached_property
    def bracket_table(self) -> Dict[Tuple[int, int], Tuple[Fraction, ...]]:
        """Structure constants: (i, j) -> coordinates of [b_i, b_j]."""
        table = {}
        for i, a in enumerate(self.basis):
            for j, b in enumerate(self.basis):
                table[i, j] = self.expand(a @ b - b @ a)
        logger.debug(f"Structure constants of {self.tag} computed ({self.dim}x{self.dim})")
        return table

    @cached_property
    def gram(self) -> Mat:
        """tr(Z_a X_b) for the g₁ basis Z_a against the g₋₁ basis X_b."""
        zs = [self.basis[i] for i in self.indices[1]]
        xs = [self.basis[i] for i in self.indices[-1]]
        return Mat.from_rows([[(z @ x).trace() for x in xs] for z in zs])

    @cached_property
    def dual_basis(self) -> Tuple['AlgElement', ...]:
        """Elements Z^b of g₁ with tr(Z^b X_c) = δ_bc."""
        g_inv = mat_inverse(self.gram)
        zs = self.plus_basis()
        out = []
        for b in range(len(zs)):
            acc = self.zero()
            for a, z in enumerate(zs):
                if g_inv[b, a]:
                    acc = acc + g_inv[b, a] * z
            out.append(acc)
        return tuple(out)

    def covector(self, z: 'AlgElement') -> Tuple[Fraction, ...]:
        """The linear form X ↦ tr(ZX) on g₋₁, in the dual of the g₋₁ basis."""
        return tuple(pairing(z, x) for x in self.minus_basis())

    @cached_property
    def minus_pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Index pairs (i, j), i < j, of the g₋₁ basis; storage order of 2-cochains."""
        return tuple(combinations(range(self.tag.dim), 2))


@lru_cache(maxsize=None)
def build_algebra(tag: ModelTag) -> GradedAlgebra:
    algebra = GradedAlgebra(tag)
    logger.info(f"Built {tag}: dim {algebra.dim}, grading {algebra.grade_dims()}")
    return algebra


def build_projective_algebra(m: int) -> GradedAlgebra:
    return build_algebra(Projective(m))


def build_conformal_algebra(p: int, q: int) -> GradedAlgebra:
    return build_algebra(Conformal(p, q))


@dataclass(frozen=True)
class AlgElement:
    algebra: GradedAlgebra
    coords: Tuple[Fraction, ...]

    @cached_property
    def matrix(self) -> Mat:
        return self.algebra._assemble(self.coords)

    def _same(self, other: 'AlgElement'):
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise DimensionMismatch(f"Elements of {self.algebra.tag} and {other.algebra.tag}")

    def __add__(self, other: 'AlgElement') -> 'AlgElement':
        self._same(other)
        return AlgElement(self.algebra, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: 'AlgElement') -> 'AlgElement':
        self._same(other)
        return AlgElement(self.algebra, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> 'AlgElement':
        return AlgElement(self.algebra, tuple(-a for a in self.coords))

    def __mul__(self, scalar: RatLike) -> 'AlgElement':
        if isinstance(scalar, AlgElement):
            return NotImplemented
        s = parse_rat(scalar)
        return AlgElement(self.algebra, tuple(s * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def part(self, grade: int) -> 'AlgElement':
        keep = set(self.algebra.indices[grade])
        return AlgElement(self.algebra, tuple(c if i in keep else Fraction(0) for i, c in enumerate(self.coords)))

    def graded_coords(self, grade: int) -> Tuple[Fraction, ...]:
        return tuple(self.coords[i] for i in self.algebra.indices[grade])

    def lies_in(self, grade: int) -> bool:
        return self.part(grade) == self

    def __repr__(self) -> str:
        parts = ', '.join(
            f"g{g:+d}=({', '.join(str(c) for c in self.graded_coords(g))})" for g in GRADES
        )
        return f"AlgElement({self.algebra.tag}: {parts})"


def bracket(a: AlgElement, b: AlgElement) -> AlgElement:
    a._same(b)
    return a.algebra.from_matrix(a.matrix @ b.matrix - b.matrix @ a.matrix)


def grade_project(a: AlgElement, i: int) -> AlgElement:
    if i not in GRADES:
        raise ValueError(f"Grade must be one of {GRADES}, got {i}")
    return a.part(i)


def pairing(z: AlgElement, x: AlgElement) -> Fraction:
    return (z.matrix @ x.matrix).trace()


def adjoint_action(g, a: AlgElement) -> AlgElement:
    """
    Ad_g a = g·a·g⁻¹, re-expanded in the basis.

    ``g`` may be a Mat or any object carrying a ``representative`` Mat
    (a group element); the result does not depend on its scale.
    """
    rep = getattr(g, 'representative', g)
    return a.algebra.from_matrix(rep @ a.matrix @ mat_inverse(rep))


def exp_nilpotent(a: Union[AlgElement, Mat]) -> Mat:
    """Exact exponential of a nilpotent matrix (I + A + A²/2 for pure grade ±1)."""
    mat = getattr(a, 'matrix', a)
    n = mat.rows
    result = Mat.identity(n)
    term = Mat.identity(n)
    for k in range(1, n + 1):
        term = (term @ mat) * Fraction(1, k)
        if term.is_zero():
            return result
        result = result + term
    raise ValueError(f"Matrix is not nilpotent: {mat!r}")


def jacobi_defect(a: AlgElement, b: AlgElement, c: AlgElement) -> AlgElement:
    return bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))


def _as_covector(algebra: GradedAlgebra, alpha) -> Tuple[Fraction, ...]:
    if isinstance(alpha, AlgElement):
        if not alpha.lies_in(1):
            raise ValueError("Only g₁ elements define covectors on g₋₁")
        return algebra.covector(alpha)
    values = tuple(parse_rat(v) for v in alpha)
    if len(values) != algebra.tag.dim:
        raise DimensionMismatch(f"Covector of length {len(values)} on a {algebra.tag.dim}-dim g₋₁")
    return values


@dataclass(frozen=True)
class Cochain1:
    """
    Linear map g₋₁ → g. Column j of ``matrix`` holds the coordinates of the
    image of the j-th g₋₁ basis element.
    """
    algebra: GradedAlgebra
    matrix: Mat

    def __post_init__(self):
        expected = (self.algebra.dim, self.algebra.tag.dim)
        if self.matrix.shape != expected:
            raise DimensionMismatch(f"Cochain1 matrix must be {expected}, got {self.matrix.shape}")

    @classmethod
    def zero(cls, algebra: GradedAlgebra) -> 'Cochain1':
        return cls(algebra, Mat.zeros(algebra.dim, algebra.tag.dim))

    @classmethod
    def from_values(cls, algebra: GradedAlgebra, values: Sequence[AlgElement]) -> 'Cochain1':
        if len(values) != algebra.tag.dim:
            raise DimensionMismatch(f"Need {algebra.tag.dim} values, got {len(values)}")
        return cls(algebra, Mat(algebra.dim, len(values), (v.coords[i] for i in range(algebra.dim) for v in values)))

    @classmethod
    def decomposable(cls, algebra: GradedAlgebra, alpha, value: AlgElement) -> 'Cochain1':
        """α ⊗ value; α is a covector or a g₁ element read through the trace pairing."""
        alpha = _as_covector(algebra, alpha)
        return cls.from_values(algebra, [a * value for a in alpha])

    def value(self, j: int) -> AlgElement:
        return AlgElement(self.algebra, self.matrix.col(j))

    def values(self) -> Tuple[AlgElement, ...]:
        return tuple(self.value(j) for j in range(self.algebra.tag.dim))

    def __call__(self, x: AlgElement) -> AlgElement:
        out = self.algebra.zero()
        for c, v in zip(x.graded_coords(-1), self.values()):
            if c:
                out = out + c * v
        return out

    def __add__(self, other: 'Cochain1') -> 'Cochain1':
        return Cochain1(self.algebra, self.matrix + other.matrix)

    def __sub__(self, other: 'Cochain1') -> 'Cochain1':
        return Cochain1(self.algebra, self.matrix - other.matrix)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def targets(self, grade: int) -> bool:
        return all(v.lies_in(grade) for v in self.values())


@dataclass(frozen=True)
class Cochain2:
    """Antisymmetric bilinear map g₋₁ × g₋₁ → g, stored on basis pairs i < j."""
    algebra: GradedAlgebra
    values: Tuple[AlgElement, ...]

    def __post_init__(self):
        if len(self.values) != len(self.algebra.minus_pairs):
            raise DimensionMismatch(
                f"Cochain2 on {self.algebra.tag} stores {len(self.algebra.minus_pairs)} values, "
                f"got {len(self.values)}"
            )

    @classmethod
    def zero(cls, algebra: GradedAlgebra) -> 'Cochain2':
        return cls(algebra, tuple(algebra.zero() for _ in algebra.minus_pairs))

    @classmethod
    def from_function(cls, algebra: GradedAlgebra, fn) -> 'Cochain2':
        return cls(algebra, tuple(fn(i, j) for i, j in algebra.minus_pairs))

    @classmethod
    def decomposable(cls, algebra: GradedAlgebra, alpha, beta, value: AlgElement) -> 'Cochain2':
        """(α ∧ β) ⊗ value with (α ∧ β)(X_i, X_j) = α_i β_j − α_j β_i."""
        a = _as_covector(algebra, alpha)
        b = _as_covector(algebra, beta)
        return cls.from_function(algebra, lambda i, j: (a[i] * b[j] - a[j] * b[i]) * value)

    def at(self, i: int, j: int) -> AlgElement:
        if i == j:
            return self.algebra.zero()
        if i > j:
            return -self.at(j, i)
        return self.values[self.algebra.minus_pairs.index((i, j))]

    def __call__(self, x: AlgElement, y: AlgElement) -> AlgElement:
        xs, ys = x.graded_coords(-1), y.graded_coords(-1)
        out = self.algebra.zero()
        for (i, j), v in zip(self.algebra.minus_pairs, self.values):
            c = xs[i] * ys[j] - xs[j] * ys[i]
            if c:
                out = out + c * v
        return out

    def __add__(self, other: 'Cochain2') -> 'Cochain2':
        return Cochain2(self.algebra, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: 'Cochain2') -> 'Cochain2':
        return Cochain2(self.algebra, tuple(a - b for a, b in zip(self.values, other.values)))

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)

    def project(self, grade: int) -> 'Cochain2':
        return Cochain2(self.algebra, tuple(v.part(grade) for v in self.values))


@dataclass(frozen=True)
class CurvDecomp:
    """Split of a curvature function by the grade of its values."""
    torsion: Cochain2
    weyl: Cochain2
    cotton: Cochain2

    @property
    def T(self) -> Cochain2:
        return self.torsion

    @property
    def W(self) -> Cochain2:
        return self.weyl

    @property
    def Y(self) -> Cochain2:
        return self.cotton

    def reassemble(self) -> Cochain2:
        return self.torsion + self.weyl + self.cotton


def differential(phi: Cochain1) -> Cochain2:
    """(∂φ)(X, Y) = [X, φ(Y)] − [Y, φ(X)]; the [X, Y] term drops since g₋₁ is abelian."""
    algebra = phi.algebra
    xs = algebra.minus_basis()
    return Cochain2.from_function(
        algebra,
        lambda i, j: bracket(xs[i], phi.value(j)) - bracket(xs[j], phi.value(i)),
    )


def codifferential(kappa: Cochain2) -> Cochain1:
    """
    Kostant codifferential of a 2-cochain.

    On decomposables ∂*(X ∧ Y ⊗ Z) = −Y ⊗ [X, Z] + X ⊗ [Y, Z], with g₁
    identified with the dual of g₋₁ through the trace form. Summed over the
    dual basis this reads (∂*κ)(X_c) = Σ_j [Z^j, κ(X_c, X_j)].
    """
    algebra = kappa.algebra
    dual = algebra.dual_basis
    dim = algebra.tag.dim
    values = []
    for c in range(dim):
        acc = algebra.zero()
        for j in range(dim):
            v = kappa.at(c, j)
            if not v.is_zero():
                acc = acc + bracket(dual[j], v)
        values.append(acc)
    return Cochain1.from_values(algebra, values)


def is_normal(kappa: Cochain2) -> bool:
    return codifferential(kappa).is_zero()


def is_torsion_free(kappa: Cochain2) -> bool:
    return all(v.part(-1).is_zero() for v in kappa.values)


def decompose_curvature(kappa: Cochain2) -> CurvDecomp:
    return CurvDecomp(torsion=kappa.project(-1), weyl=kappa.project(0), cotton=kappa.project(1))


def connection_curvature(weyl: Cochain2, rho: Cochain1) -> Cochain2:
    """R = W − ∂P, so that W = R + ∂P holds by construction."""
    return weyl - differential(rho)
