"""
Flat homogeneous models G/P as concrete point sets.

Points are lines (projective models) or null lines (conformal models) through
the origin of ℚⁿ, stored by canonical homogeneous coordinates. Group elements
are matrices modulo scalars, stored by a canonical representative.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from cartankit.algebra.exceptions import OffCell
from cartankit.algebra.graded import (
    AlgElement,
    Conformal,
    ModelTag,
    build_algebra,
    exp_nilpotent,
)
from cartankit.algebra.ratlin import Mat, RatLike, block_ldu, determinant, mat_inverse, parse_rat

from .exceptions import ChartError

logger = logging.getLogger(__name__)


def is_in_group(tag: ModelTag, matrix: Mat) -> bool:
    """Invertible, and for conformal models gᵀJg = c·J for some c ≠ 0."""
    if matrix.shape != (tag.n, tag.n) or determinant(matrix) == 0:
        return False
    form = tag.form()
    if form is None:
        return True
    lhs = matrix.T @ form @ matrix
    c = lhs[0, tag.n - 1]
    return c != 0 and lhs == c * form


@dataclass(frozen=True)
class GroupElement:
    tag: ModelTag
    representative: Mat

    @classmethod
    def of(cls, tag: ModelTag, matrix: Mat) -> 'GroupElement':
        """Canonical class of ``matrix``: first nonzero entry (column-major) scaled to +1."""
        if not is_in_group(tag, matrix):
            raise ValueError(f"Matrix is not in the group of {tag}: {matrix!r}")
        lead = matrix.first_nonzero(column_major=True)
        return cls(tag, matrix * (1 / lead))

    @classmethod
    def identity(cls, tag: ModelTag) -> 'GroupElement':
        return cls(tag, Mat.identity(tag.n))

    def __matmul__(self, other: 'GroupElement') -> 'GroupElement':
        return GroupElement.of(self.tag, self.representative @ other.representative)

    def inverse(self) -> 'GroupElement':
        return GroupElement.of(self.tag, mat_inverse(self.representative))

    def conjugate(self, h: 'GroupElement') -> 'GroupElement':
        """h·self·h⁻¹."""
        return GroupElement.of(self.tag, h.representative @ self.representative @ mat_inverse(h.representative))

    def is_identity(self) -> bool:
        return self == GroupElement.identity(self.tag)

    def is_block_diagonal(self) -> bool:
        rep = self.representative
        bounds = _block_bounds(self.tag)
        return all(
            rep[r, c] == 0
            for r in range(self.tag.n) for c in range(self.tag.n)
            if bounds[r] != bounds[c]
        )

    def __repr__(self) -> str:
        return f"GroupElement({self.tag}, {self.representative!r})"


def _block_bounds(tag: ModelTag) -> Tuple[int, ...]:
    out = []
    for b, size in enumerate(tag.blocks):
        out += [b] * size
    return tuple(out)


def exp_group(x: AlgElement) -> GroupElement:
    """exp of a nilpotent algebra element (g₋₁ or g₁) as a group element."""
    return GroupElement.of(x.algebra.tag, exp_nilpotent(x))


@dataclass(frozen=True)
class ModelPoint:
    tag: ModelTag
    coords: Tuple[Fraction, ...]

    @classmethod
    def of(cls, tag: ModelTag, values: Sequence[RatLike]) -> 'ModelPoint':
        coords = tuple(parse_rat(v) for v in values)
        if len(coords) != tag.n:
            raise ValueError(f"{tag} points have {tag.n} homogeneous coordinates, got {len(coords)}")
        lead = next((c for c in coords if c != 0), None)
        if lead is None:
            raise ValueError("The zero vector is not a point")
        coords = tuple(c / lead for c in coords)
        form = tag.form()
        if form is not None:
            v = Mat.column(coords)
            if (v.T @ form @ v)[0, 0] != 0:
                raise ValueError(f"Conformal points must be null vectors: {coords}")
        return cls(tag, coords)

    def in_cell(self) -> bool:
        return self.coords[0] != 0

    def __str__(self) -> str:
        return '[' + ':'.join(str(c) for c in self.coords) + ']'


@dataclass(frozen=True)
class BigCellFactors:
    X: AlgElement
    g0: GroupElement
    Z: AlgElement

    def recompose(self) -> GroupElement:
        return exp_group(self.X) @ self.g0 @ exp_group(self.Z)


def origin(tag: ModelTag) -> ModelPoint:
    return ModelPoint.of(tag, [1] + [0] * (tag.n - 1))


def act(g: GroupElement, x: ModelPoint) -> ModelPoint:
    image = g.representative @ Mat.column(x.coords)
    return ModelPoint.of(x.tag, image.col(0))


def chart_coordinates(x: ModelPoint) -> AlgElement:
    """Affine coordinates X ∈ g₋₁ of an in-cell point, so that exp(X)·origin = x."""
    if not x.in_cell():
        raise ChartError(f"{x} is at infinity of the standard chart")
    algebra = build_algebra(x.tag)
    return algebra.minus_vector(x.coords[1:1 + x.tag.dim])


def point_from_chart(x: AlgElement) -> ModelPoint:
    return act(exp_group(x), origin(x.algebra.tag))


def _swap(tag: ModelTag, i: int) -> GroupElement:
    perm = Mat.identity(tag.n).replace({(0, 0): 0, (i, i): 0, (0, i): 1, (i, 0): 1})
    return GroupElement.of(tag, perm)


def chart_translate(x: ModelPoint) -> GroupElement:
    """
    The group element t_x with t_x·origin = x used to chart a neighbourhood of x.

    In the big cell this is exp(X). Projective points at infinity of the
    standard chart use a coordinate swap followed by a translation.
    """
    if x.in_cell():
        return exp_group(chart_coordinates(x))
    if isinstance(x.tag, Conformal):
        raise ChartError(f"No chart translate for the conformal point {x} outside the big cell")
    i = next(k for k, c in enumerate(x.coords) if c != 0)
    swap = _swap(x.tag, i)
    return swap @ exp_group(chart_coordinates(act(swap, x)))


def big_cell_decompose(g: GroupElement) -> BigCellFactors:
    """
    Factor g = exp(X)·g0·exp(Z) in the quotient group.

    Raises OffCell when g·origin is at infinity of the standard chart.
    """
    tag = g.tag
    algebra = build_algebra(tag)
    lower, diag, upper = block_ldu(g.representative, tag.splits)
    x = algebra.minus_vector(algebra.read_grade(lower, -1))
    z = algebra.plus_vector(algebra.read_grade(upper, 1))
    if exp_nilpotent(x) != lower or exp_nilpotent(z) != upper:
        raise OffCell(f"Unipotent factors of {g!r} are not exponentials of graded parts")
    return BigCellFactors(X=x, g0=GroupElement.of(tag, diag), Z=z)


def quotient_jacobian(w0: Sequence[Fraction], dws: Sequence[Sequence[Fraction]], dim: int) -> Mat:
    """Jacobian of v ↦ (v_1/v_0, …, v_dim/v_0) at w0 along the directions dws."""
    if w0[0] == 0:
        raise ChartError("Image point is at infinity of the target chart")
    rows = []
    for j in range(1, dim + 1):
        rows.append([(dw[j] * w0[0] - w0[j] * dw[0]) / (w0[0] * w0[0]) for dw in dws])
    return Mat.from_rows(rows)


def affine_jacobian(matrix: Mat, x: AlgElement) -> Mat:
    """
    Jacobian at X of Y ↦ chart(matrix·exp(Y)·origin) in standard charts.

    Uses d/dY_i exp(Y) = E_i·exp(Y) (g₋₁ is abelian) and the quotient rule.
    """
    algebra = x.algebra
    base = matrix @ exp_nilpotent(x)
    e0 = Mat.column([1] + [0] * (algebra.ambient_dim - 1))
    w0 = (base @ e0).col(0)
    dws = [(matrix @ e.matrix @ exp_nilpotent(x) @ e0).col(0) for e in algebra.minus_basis()]
    return quotient_jacobian(w0, dws, algebra.tag.dim)


def chart_differential(g: GroupElement, x: ModelPoint) -> Mat:
    """
    Exact differential of x ↦ g·x at x, in the charts translated to x and g·x.

    Both charts are t_y·exp(ξ)·origin for the canonical translate t_y.
    """
    algebra = build_algebra(g.tag)
    t_x = chart_translate(x)
    t_gx = chart_translate(act(g, x))
    local = mat_inverse(t_gx.representative) @ g.representative @ t_x.representative
    return affine_jacobian(local, algebra.zero().part(-1))


def is_chartable(x: ModelPoint) -> bool:
    try:
        chart_translate(x)
    except ChartError:
        return False
    return True
