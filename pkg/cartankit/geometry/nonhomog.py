"""
ℝPᵐ with two points removed: a projectively symmetric space that is not
homogeneous.

Coordinates are 0-based: the removed points are [e_{m−1}] and [e_m], and the
line L through them is spanned by those two basis vectors. An automorphism
of the punctured space is a group element whose last two columns preserve or
swap the removed points.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from cartankit.algebra.graded import Projective
from cartankit.algebra.ratlin import Mat, mat_inverse, parse_rat, solve_linear

from .exceptions import PreconditionError
from .flatmodel import GroupElement, ModelPoint, act
from .symmetries import Symmetry, make_origin_symmetry, transport, verify_symmetry

logger = logging.getLogger(__name__)


class Mode(str, Enum):
    PRESERVE = 'Preserve'
    SWAP = 'Swap'
    NO = 'No'


@dataclass(frozen=True)
class PuncturedModel:
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"The punctured model needs m >= 2, got {self.m}")

    @property
    def tag(self) -> Projective:
        return Projective(self.m)

    @property
    def first(self) -> int:
        """0-based index of the first removed basis vector."""
        return self.m - 1

    @property
    def second(self) -> int:
        return self.m

    @property
    def removed(self) -> Tuple[ModelPoint, ModelPoint]:
        n = self.m + 1
        return (
            ModelPoint.of(self.tag, [int(i == self.first) for i in range(n)]),
            ModelPoint.of(self.tag, [int(i == self.second) for i in range(n)]),
        )

    def contains(self, x: ModelPoint) -> bool:
        return x not in self.removed

    def on_line(self, x: ModelPoint) -> bool:
        return all(c == 0 for c in x.coords[:self.first])

    def line_point(self, a, b) -> ModelPoint:
        """The point a·e_{m−1} + b·e_m; both coordinates must be nonzero."""
        if a == 0 or b == 0:
            raise PreconditionError("Line points need both coordinates nonzero")
        return ModelPoint.of(self.tag, [0] * self.first + [a, b])


@dataclass(frozen=True)
class AllowedAutomorphism:
    element: GroupElement
    mode: Mode

    def __matmul__(self, other: 'AllowedAutomorphism') -> 'AllowedAutomorphism':
        mode = Mode.PRESERVE if self.mode == other.mode else Mode.SWAP
        return AllowedAutomorphism(self.element @ other.element, mode)


def is_allowed(g: GroupElement, model: PuncturedModel) -> Mode:
    """Classify g by the pattern of its last two columns."""
    rep = g.representative
    a, b = model.first, model.second
    col_a, col_b = rep.col(a), rep.col(b)

    def only(col, row):
        return col[row] != 0 and all(v == 0 for i, v in enumerate(col) if i != row)

    if only(col_a, a) and only(col_b, b):
        return Mode.PRESERVE
    if only(col_a, b) and only(col_b, a):
        return Mode.SWAP
    return Mode.NO


def as_allowed(g: GroupElement, model: PuncturedModel) -> AllowedAutomorphism:
    mode = is_allowed(g, model)
    if mode == Mode.NO:
        raise PreconditionError(f"{g!r} moves a removed point into the space")
    return AllowedAutomorphism(g, mode)


def line_confinement_check(g: AllowedAutomorphism, w: ModelPoint, model: PuncturedModel) -> bool:
    _check_line_point(w, model)
    return model.on_line(act(g.element, w))


def _origin_symmetry(model: PuncturedModel, w_row: Sequence) -> Symmetry:
    return make_origin_symmetry(model.tag, w_row)


def off_line_transporter(x: ModelPoint, model: PuncturedModel) -> GroupElement:
    """
    g with g·e_0 = x that fixes e_{m−1} and e_m.

    The first column is x; the remaining columns complete it with the standard
    vectors e_0, …, e_{m−2} other than the pivot e_i, x_i ≠ 0.
    """
    if model.on_line(x):
        raise PreconditionError(f"{x} lies on the line through the removed points")
    n = model.m + 1
    pivot = next(i for i in range(model.first) if x.coords[i] != 0)
    others = [i for i in range(model.first) if i != pivot]
    columns = [list(x.coords)]
    columns += [[int(r == i) for r in range(n)] for i in others]
    columns += [[int(r == model.first) for r in range(n)], [int(r == model.second) for r in range(n)]]
    return GroupElement.of(model.tag, Mat.from_rows(columns).T)


def off_line_symmetry(x: ModelPoint, model: PuncturedModel, w_row: Optional[Sequence] = None) -> Symmetry:
    """
    Symmetry at an off-line point, conjugated from (1, W; 0, −E) with the
    last two entries of W zero so the removed points are preserved.
    """
    if not model.contains(x):
        raise PreconditionError(f"{x} is a removed point")
    w_row = list(w_row) if w_row is not None else [0] * model.m
    if len(w_row) != model.m or w_row[-1] != 0 or w_row[-2] != 0:
        raise PreconditionError("The last two entries of W must vanish")
    return transport(_origin_symmetry(model, w_row), off_line_transporter(x, model))


def line_transporter(w: ModelPoint, model: PuncturedModel) -> GroupElement:
    """g: e_0 ↦ w, e_j ↦ e_j (1 ≤ j ≤ m−1), e_m ↦ e_0."""
    n = model.m + 1
    columns = [list(w.coords)]
    columns += [[int(r == j) for r in range(n)] for j in range(1, model.m)]
    columns.append([int(r == 0) for r in range(n)])
    return GroupElement.of(model.tag, Mat.from_rows(columns).T)


def _check_line_point(w: ModelPoint, model: PuncturedModel):
    if not model.on_line(w) or w.coords[model.first] == 0 or w.coords[model.second] == 0:
        raise PreconditionError(f"{w} is not a line point with both coordinates nonzero")


def line_symmetry_row(w: ModelPoint, model: PuncturedModel) -> List[Fraction]:
    """W with v = 1/x_m in the column of the first removed point, zero elsewhere."""
    row = [Fraction(0)] * model.m
    row[model.first - 1] = 1 / w.coords[model.first]
    return row


def line_symmetry(w: ModelPoint, model: PuncturedModel) -> Symmetry:
    _check_line_point(w, model)
    s = transport(_origin_symmetry(model, line_symmetry_row(w, model)), line_transporter(w, model))
    if is_allowed(s.element, model) != Mode.SWAP:
        raise PreconditionError(f"Symmetry at {w} does not swap the removed points")
    return s


@dataclass(frozen=True)
class ClosedFormResidual:
    entry: str
    computed: Fraction
    expected: Fraction

    @property
    def residual(self) -> Fraction:
        return self.computed - self.expected


def closed_form_columns(xm: Fraction, xm1: Fraction, v: Fraction) -> dict:
    """
    The last two columns of g·s(W)·g⁻¹ multiplied out, W = v at the first
    removed column: (x_m v − 1, x_{m+1} v) and ((x_m/x_{m+1})(2 − x_m v), 1 − x_m v).
    """
    return {
        'upper_left': xm * v - 1,
        'lower_left': xm1 * v,
        'upper_right': (xm / xm1) * (2 - xm * v),
        'lower_right': 1 - xm * v,
    }


def printed_upper_right(xm: Fraction, xm1: Fraction, v: Fraction) -> Fraction:
    """The (x_m/x_{m+1})(x_m v + 2) variant of the upper right entry."""
    return (xm / xm1) * (xm * v + 2)


def closed_form_residuals(w: ModelPoint, model: PuncturedModel,
                          v: Optional[Fraction] = None) -> List[ClosedFormResidual]:
    """
    Compare the computed last two columns of g·s(W)·g⁻¹ to the closed form,
    on the representative scaled so the (0, 0) entry is −1.

    Entries above the 2×2 corner are reported against zero.
    """
    _check_line_point(w, model)
    xm, xm1 = w.coords[model.first], w.coords[model.second]
    v = 1 / xm if v is None else parse_rat(v)
    row = [Fraction(0)] * model.m
    row[model.first - 1] = v
    s = transport(_origin_symmetry(model, row), line_transporter(w, model))

    rep = s.element.representative
    rep = rep * (-1 / rep[0, 0])
    a, b = model.first, model.second
    expected = closed_form_columns(xm, xm1, v)
    out = [
        ClosedFormResidual('upper_left', rep[a, a], expected['upper_left']),
        ClosedFormResidual('lower_left', rep[b, a], expected['lower_left']),
        ClosedFormResidual('upper_right', rep[a, b], expected['upper_right']),
        ClosedFormResidual('lower_right', rep[b, b], expected['lower_right']),
    ]
    for col in (a, b):
        for r in range(a):
            out.append(ClosedFormResidual(f'zero_{r}_{col}', rep[r, col], Fraction(0)))
    if v == 1 / xm:
        out.append(ClosedFormResidual('swap_condition', rep[a, a], Fraction(0)))
    return out


@dataclass(frozen=True)
class EliminationCertificate:
    preserve_solvable: bool
    swap_solvable: bool
    swap_null_dim: Optional[int]


def _pattern_system(w: ModelPoint, model: PuncturedModel, mode: Mode):
    """
    The entries of g·s(W)·g⁻¹ are affine in W: A(W) = A0 + Σ W_k B_k.
    Returns the linear system forcing the entries outside the pattern to zero.
    """
    tag = model.tag
    n = model.m + 1
    g = line_transporter(w, model).representative
    g_inv = mat_inverse(g)
    base = make_origin_symmetry(tag).element.representative
    a0 = g @ base @ g_inv
    bs = [g @ Mat.unit(n, 0, k) @ g_inv for k in range(1, n)]

    a, b = model.first, model.second
    keep = {(a, a), (b, b)} if mode == Mode.PRESERVE else {(b, a), (a, b)}
    rows, rhs = [], []
    for col in (a, b):
        for r in range(n):
            if (r, col) in keep:
                continue
            rows.append([bk[r, col] for bk in bs])
            rhs.append([-a0[r, col]])
    return Mat.from_rows(rows), Mat.from_rows(rhs)


def preserve_elimination(w: ModelPoint, model: PuncturedModel) -> EliminationCertificate:
    """
    Decide exactly whether a symmetry at the line point w can preserve (or
    swap) the removed points. Every symmetry at w is g·(1, W; 0, −E)·g⁻¹, and
    the pattern conditions are linear in W.
    """
    _check_line_point(w, model)
    preserve = solve_linear(*_pattern_system(w, model, Mode.PRESERVE))
    swap = solve_linear(*_pattern_system(w, model, Mode.SWAP))
    return EliminationCertificate(
        preserve_solvable=preserve is not None,
        swap_solvable=swap is not None,
        swap_null_dim=len(swap.null_space) if swap is not None else None,
    )


def symmetry_at(x: ModelPoint, model: PuncturedModel) -> Symmetry:
    """The system of symmetries on the punctured space: one rule per stratum."""
    if model.on_line(x):
        return line_symmetry(x, model)
    return off_line_symmetry(x, model)


@dataclass
class ProbeReport:
    automorphisms: int = 0
    line_points: int = 0
    line_escapes: List[Tuple[AllowedAutomorphism, ModelPoint]] = field(default_factory=list)
    off_line_pairs: int = 0
    off_line_connected: int = 0
    symmetry_failures: List[ModelPoint] = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return self.automorphisms == 0 or self.line_points == 0

    @property
    def passed(self) -> bool:
        return not self.line_escapes and not self.symmetry_failures


def homogeneity_probe(model: PuncturedModel, automorphisms: Sequence[AllowedAutomorphism],
                      line_points: Sequence[ModelPoint],
                      off_line_points: Sequence[ModelPoint] = ()) -> ProbeReport:
    """
    Finite certificate that no sampled automorphism moves a line point off
    the line, plus a record of off-line points connected by allowed maps and a
    verification of the symmetry assigned at every sampled point.
    """
    report = ProbeReport(automorphisms=len(automorphisms), line_points=len(line_points))
    for g in automorphisms:
        for w in line_points:
            if not line_confinement_check(g, w, model):
                report.line_escapes.append((g, w))

    for i, x in enumerate(off_line_points):
        for y in off_line_points[i + 1:]:
            report.off_line_pairs += 1
            h = off_line_transporter(y, model) @ off_line_transporter(x, model).inverse()
            if is_allowed(h, model) != Mode.NO and act(h, x) == y:
                report.off_line_connected += 1

    for x in list(line_points) + list(off_line_points):
        if not verify_symmetry(symmetry_at(x, model)).passed:
            report.symmetry_failures.append(x)

    if report.vacuous:
        logger.info("Homogeneity probe ran on an empty sample set")
    return report

