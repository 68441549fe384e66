"""
Symmetries of flat models and systems of symmetries.

A symmetry at x is a group element s with s·x = x, differential −id at x and
s² = id in the quotient group. Symmetries at the origin are exactly
g0·exp(Z) with Ad_{g0} = −id on g₋₁ and Z ∈ g₁ arbitrary; every other
symmetry here is a conjugate of one of those.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from cartankit.algebra.graded import (
    AlgElement,
    ModelTag,
    adjoint_action,
    build_algebra,
    entry_grade,
    exp_nilpotent,
)
from cartankit.algebra.ratlin import Mat, mat_inverse, solve_linear

from .exceptions import ChartError, NoOriginSymmetry, PreconditionError, UncoveredPoint
from .flatmodel import (
    GroupElement,
    ModelPoint,
    act,
    affine_jacobian,
    chart_coordinates,
    chart_differential,
    chart_translate,
    exp_group,
    is_in_group,
    origin,
    point_from_chart,
    quotient_jacobian,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Symmetry:
    element: GroupElement
    center: ModelPoint

    def __call__(self, y: ModelPoint) -> ModelPoint:
        return act(self.element, y)


@dataclass(frozen=True)
class OriginSymmetryFamily:
    tag: ModelTag
    g0_class: Optional[GroupElement]
    z_dim: int
    solution_dim: int = 0

    @property
    def exists(self) -> bool:
        return self.g0_class is not None

    @property
    def is_unique(self) -> bool:
        return self.exists and self.solution_dim == 0


@lru_cache(maxsize=None)
def enumerate_origin_symmetries(tag: ModelTag) -> OriginSymmetryFamily:
    """
    Solve Ad_{g0} = −id on g₋₁ for block-diagonal g0.

    The unknowns are the grade-0 entries of g0. Ad_{g0}X = −X is the linear
    condition g0·X + X·g0 = 0 for every g₋₁ basis element X; the scale of the
    class is fixed by g0[0, 0] = 1. An empty null space certifies uniqueness.
    """
    algebra = build_algebra(tag)
    n = tag.n
    unknowns = [(r, c) for r in range(n) for c in range(n) if entry_grade(tag, r, c) == 0]
    units = [Mat.unit(n, r, c) for r, c in unknowns]

    rows, rhs = [], []
    for x in algebra.minus_basis():
        terms = [u @ x.matrix + x.matrix @ u for u in units]
        for r in range(n):
            for c in range(n):
                rows.append([t[r, c] for t in terms])
                rhs.append([0])
    rows.append([1 if pos == (0, 0) else 0 for pos in unknowns])
    rhs.append([1])

    solution = solve_linear(Mat.from_rows(rows), Mat.from_rows(rhs))
    z_dim = len(algebra.indices[1])
    if solution is None:
        logger.info(f"{tag}: no grade-preserving element acts as −id on g₋₁")
        return OriginSymmetryFamily(tag, None, z_dim)

    g0 = Mat.zeros(n).replace({pos: solution.particular[k, 0] for k, pos in enumerate(unknowns)})
    if not is_in_group(tag, g0):
        logger.info(f"{tag}: the solution of Ad = −id is not a group element")
        return OriginSymmetryFamily(tag, None, z_dim, len(solution.null_space))

    g0_class = GroupElement.of(tag, g0)
    for x in algebra.minus_basis():
        if adjoint_action(g0_class, x) != -x:
            raise PreconditionError(f"{tag}: solved g0 fails Ad = −id on {x!r}")
    if solution.null_space:
        logger.warning(f"{tag}: Ad = −id has a {len(solution.null_space)}-dimensional solution family")
    return OriginSymmetryFamily(tag, g0_class, z_dim, len(solution.null_space))


def _as_plus(tag: ModelTag, z) -> AlgElement:
    algebra = build_algebra(tag)
    if z is None:
        return algebra.zero()
    if isinstance(z, AlgElement):
        if not z.lies_in(1):
            raise ValueError("Z must lie in g₁")
        return z
    return algebra.plus_vector(z)


def make_origin_symmetry(tag: ModelTag, z=None) -> Symmetry:
    family = enumerate_origin_symmetries(tag)
    if not family.exists:
        raise NoOriginSymmetry(f"{tag} has no symmetry at the origin")
    element = family.g0_class @ exp_group(_as_plus(tag, z))
    return Symmetry(element=element, center=origin(tag))


def transport(s: Symmetry, h: GroupElement) -> Symmetry:
    return Symmetry(element=s.element.conjugate(h), center=act(h, s.center))


@dataclass(frozen=True)
class VerificationReport:
    fixes_center: bool
    differential: Mat
    involutive: bool

    @property
    def differential_is_minus_identity(self) -> bool:
        return self.differential == -Mat.identity(self.differential.rows)

    @property
    def passed(self) -> bool:
        return self.fixes_center and self.differential_is_minus_identity and self.involutive


def verify_symmetry(s: Symmetry) -> VerificationReport:
    fixes = act(s.element, s.center) == s.center
    diff = chart_differential(s.element, s.center)
    involutive = (s.element @ s.element).is_identity()
    return VerificationReport(fixes_center=fixes, differential=diff, involutive=involutive)


class SymmetrySystem:
    """Rule assigning a symmetry to each covered point."""

    rule = None

    def __init__(self, tag: ModelTag):
        self.tag = tag
        self._cache: Dict[ModelPoint, Symmetry] = {}

    def covers(self, x: ModelPoint) -> bool:
        raise NotImplementedError

    def _build(self, x: ModelPoint) -> Symmetry:
        raise NotImplementedError

    def symmetry_at(self, x: ModelPoint) -> Symmetry:
        if x not in self._cache:
            if not self.covers(x):
                raise UncoveredPoint(x)
            self._cache[x] = self._build(x)
        return self._cache[x]

    def __call__(self, x: ModelPoint, y: ModelPoint) -> ModelPoint:
        """The symmetric-space multiplication x·y = s_x(y)."""
        return act(self.symmetry_at(x).element, y)


class ConjugationRule(SymmetrySystem):
    """
    s_x = h_x·s₀·h_x⁻¹ for a symmetry s₀ at the origin.

    The transporter is h_x = τ·exp(V) with V the affine coordinates of τ⁻¹·x,
    τ a fixed twist (identity by default). A twisted rule is the conjugate of
    the untwisted one by τ.
    """

    rule = 'conjugation'

    def __init__(self, base: Symmetry, twist: Optional[GroupElement] = None):
        super().__init__(base.element.tag)
        if base.center != origin(self.tag):
            raise PreconditionError("Conjugation rules are built from a symmetry at the origin")
        self.base = base
        self.twist = twist or GroupElement.identity(self.tag)
        self._twist_inv = self.twist.inverse()

    @classmethod
    def standard(cls, tag: ModelTag, base_z=None, twist: Optional[GroupElement] = None) -> 'ConjugationRule':
        return cls(make_origin_symmetry(tag, base_z), twist)

    @property
    def base_z(self) -> AlgElement:
        return _origin_z(self.base)

    @property
    def is_twisted(self) -> bool:
        return not self.twist.is_identity()

    def local_coordinates(self, x: ModelPoint) -> AlgElement:
        return chart_coordinates(act(self._twist_inv, x))

    def covers(self, x: ModelPoint) -> bool:
        return act(self._twist_inv, x).in_cell()

    def transporter(self, x: ModelPoint) -> GroupElement:
        try:
            v = self.local_coordinates(x)
        except ChartError:
            raise UncoveredPoint(x)
        return self.twist @ exp_group(v)

    def _build(self, x: ModelPoint) -> Symmetry:
        s = transport(self.base, self.transporter(x))
        if s.center != x:
            raise PreconditionError(f"Transporter does not map the origin to {x}")
        return s


class TableRule(SymmetrySystem):
    """A finite assignment point → symmetry."""

    rule = 'table'

    def __init__(self, tag: ModelTag, symmetries: Iterable[Symmetry]):
        super().__init__(tag)
        self.entries: Dict[ModelPoint, Symmetry] = {}
        for s in symmetries:
            if s.center in self.entries:
                raise PreconditionError(f"Two table entries at {s.center}")
            self.entries[s.center] = s

    def covers(self, x: ModelPoint) -> bool:
        return x in self.entries

    def _build(self, x: ModelPoint) -> Symmetry:
        return self.entries[x]

    def centers(self) -> List[ModelPoint]:
        return list(self.entries)


def table_entry(tag: ModelTag, center: ModelPoint, z=None) -> Symmetry:
    """Origin symmetry with the given Z, transported to ``center`` by its chart translate."""
    return transport(make_origin_symmetry(tag, z), chart_translate(center))


def _origin_z(s: Symmetry) -> AlgElement:
    factors_z = mat_inverse(enumerate_origin_symmetries(s.element.tag).g0_class.representative) @ s.element.representative
    algebra = build_algebra(s.element.tag)
    scale = factors_z[0, 0]
    return algebra.plus_vector(algebra.read_grade(factors_z * (1 / scale), 1))


@dataclass(frozen=True)
class LoosViolation:
    x: ModelPoint
    y: ModelPoint
    axiom: str
    lhs: Optional[GroupElement] = None
    rhs: Optional[GroupElement] = None


@dataclass
class AxiomReport:
    checked: int = 0
    violations: List[LoosViolation] = field(default_factory=list)
    skipped: List[Tuple[ModelPoint, ModelPoint]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: 'AxiomReport') -> 'AxiomReport':
        return AxiomReport(
            checked=self.checked + other.checked,
            violations=self.violations + other.violations,
            skipped=self.skipped + other.skipped,
        )


def check_loos_axioms(system: SymmetrySystem, samples: Sequence[Tuple[ModelPoint, ...]]) -> AxiomReport:
    """
    Check s_x(x) = x, s_x∘s_x(y) = y and s_x·s_y·s_x = s_{s_x(y)} per sample.

    A sample is (x, y) or (x, y, z); with z the composition law
    s_x∘s_y(z) = s_{s_x(y)}∘s_x(z) is also checked on points. Pairs whose
    image s_x(y) is not covered by the system are recorded as skipped.
    """
    report = AxiomReport()
    for sample in samples:
        x, y = sample[0], sample[1]
        sx = system.symmetry_at(x)
        sy = system.symmetry_at(y)
        report.checked += 1

        if sx(x) != x:
            report.violations.append(LoosViolation(x, y, 'fixes_center'))
        if sx(sx(y)) != y:
            report.violations.append(LoosViolation(x, y, 'involution'))

        image = sx(y)
        if not system.covers(image):
            logger.debug(f"Skipping ({x}, {y}): s_x(y) = {image} is not covered")
            report.skipped.append((x, y))
            continue
        s_image = system.symmetry_at(image)
        lhs = sx.element @ sy.element @ sx.element
        if lhs != s_image.element:
            report.violations.append(LoosViolation(x, y, 'composition', lhs, s_image.element))
            continue

        if len(sample) > 2:
            z = sample[2]
            if sx(sy(z)) != s_image(sx(z)):
                report.violations.append(LoosViolation(x, y, 'composition_on_points'))

    if report.violations:
        logger.warning(f"Loos axioms failed on {len(report.violations)} of {report.checked} samples")
    return report


def tangent_doubling_check(system: SymmetrySystem, x0: ModelPoint) -> Mat:
    """
    Exact Jacobian at x0 of f: x ↦ s_x(x0), in the chart translated to x0.

    For s_x = τ·S(V)·τ⁻¹ with S(V) = exp(V)·s₀·exp(−V) and V = V(x) the
    affine coordinates of τ⁻¹·x, the derivative of S along V is [dV, S].
    """
    if not isinstance(system, ConjugationRule):
        raise PreconditionError("Only conjugation rules carry a differentiable structure")
    algebra = build_algebra(system.tag)
    t = chart_translate(x0).representative
    t_inv = mat_inverse(t)
    tau = system.twist.representative
    tau_inv = mat_inverse(tau)

    local = tau_inv @ t
    v0 = system.local_coordinates(x0)
    d_v = affine_jacobian(local, algebra.zero().part(-1))

    s0 = system.base.element.representative
    s_v = exp_nilpotent(v0) @ s0 @ exp_nilpotent(-v0)
    outer = t_inv @ tau
    inner = tau_inv @ t
    e0 = Mat.column([1] + [0] * (algebra.ambient_dim - 1))

    w0 = (outer @ s_v @ inner @ e0).col(0)
    basis = algebra.minus_basis()
    dws = []
    for i in range(algebra.tag.dim):
        direction = Mat.zeros(algebra.ambient_dim)
        for k, e in enumerate(basis):
            if d_v[k, i]:
                direction = direction + d_v[k, i] * e.matrix
        d_s = direction @ s_v - s_v @ direction
        dws.append((outer @ d_s @ inner @ e0).col(0))
    return quotient_jacobian(w0, dws, algebra.tag.dim)


@dataclass(frozen=True)
class OrbitCoverage:
    reached: Tuple[ModelPoint, ...]
    missed: Tuple[ModelPoint, ...]


def orbit_coverage(system: SymmetrySystem, x0: ModelPoint, targets: Sequence[ModelPoint]) -> OrbitCoverage:
    """
    Record which targets are s_m(x0) for m the affine midpoint of x0 and the
    target (in the standard chart).
    """
    reached, missed = [], []
    x0_coords = chart_coordinates(x0)
    for y in targets:
        try:
            mid = point_from_chart((x0_coords + chart_coordinates(y)) * Fraction(1, 2))
            hit = system.covers(mid) and system(mid, x0) == y
        except ChartError:
            hit = False
        (reached if hit else missed).append(y)
    return OrbitCoverage(tuple(reached), tuple(missed))

