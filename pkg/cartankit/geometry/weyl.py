"""
Invariant Weyl structures of symmetry systems on the flat model.

Frames are points of 𝒫₀ = 𝒫/P₊ over the big cell, written (X, g0) for the
class of exp(X)·g0. The reference gauge is the flat section
σ(X, g0) = exp(X)·g0, optionally shifted by a constant Z0 ∈ g₁ to
σ(X, g0) = exp(X)·g0·exp(Ad_{g0⁻¹} Z0).

For a symmetry s at x, s·σ(u) = σ(u′)·exp F(x, u) defines the displacement
F and the image frame u′ = φ₀(x, u). The candidate gauge change is
Υ(u) = −½ F(p₀(u), u).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from cartankit.algebra.exceptions import OffCell
from cartankit.algebra.graded import (
    AlgElement,
    Cochain1,
    adjoint_action,
    bracket,
    exp_nilpotent,
)
from cartankit.algebra.ratlin import Mat

from .exceptions import PreconditionError, UncoveredPoint
from .flatmodel import GroupElement, ModelPoint, big_cell_decompose, chart_coordinates, point_from_chart
from .symmetries import SymmetrySystem

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Frame:
    base_X: AlgElement
    g0_part: GroupElement

    def __post_init__(self):
        if not self.base_X.lies_in(-1):
            raise ValueError("Frame base coordinates must lie in g₋₁")
        if not self.g0_part.is_block_diagonal():
            raise ValueError("Frame G₀-part must preserve the grading")

    @classmethod
    def canonical(cls, base_X: AlgElement) -> 'Frame':
        return cls(base_X, GroupElement.identity(base_X.algebra.tag))

    @property
    def base_point(self) -> ModelPoint:
        return point_from_chart(self.base_X)

    @property
    def is_canonical(self) -> bool:
        return self.g0_part.is_identity()

    def times(self, g0: GroupElement) -> 'Frame':
        """Right action u·g0 of G₀."""
        return Frame(self.base_X, self.g0_part @ g0)

    def representative(self, shift: Optional[AlgElement] = None) -> Mat:
        """The reference gauge σ at this frame."""
        rep = exp_nilpotent(self.base_X) @ self.g0_part.representative
        if shift is not None:
            rep = rep @ exp_nilpotent(adjoint_action(self.g0_part.inverse(), shift))
        return rep


@dataclass(frozen=True)
class Displacement:
    F: AlgElement
    image: Frame


def displacement(element: GroupElement, frame: Frame, shift: Optional[AlgElement] = None) -> Displacement:
    """
    Factor element·σ(u) = σ(u′)·exp F.

    Raises OffCell when element·σ(u) lies outside the big cell.
    """
    tag = element.tag
    product = GroupElement.of(tag, element.representative @ frame.representative(shift))
    factors = big_cell_decompose(product)
    image = Frame(factors.X, factors.g0)
    f = factors.Z
    if shift is not None:
        f = f - adjoint_action(factors.g0.inverse(), shift)
    return Displacement(F=f, image=image)


class UpsilonField:
    """
    Υ = −½F at the frame's own base point, stored on canonical frames.

    Values on other frames follow from equivariance Υ(u·g0) = Ad_{g0⁻¹} Υ(u);
    missing canonical values are computed on demand from the system.
    """

    def __init__(self, system: SymmetrySystem, shift: Optional[AlgElement] = None):
        self.system = system
        self.shift = shift
        self.values: Dict[AlgElement, AlgElement] = {}

    def _compute(self, frame: Frame) -> AlgElement:
        s = self.system.symmetry_at(frame.base_point)
        return -HALF * displacement(s.element, frame, self.shift).F

    def canonical_value(self, base_X: AlgElement) -> AlgElement:
        if base_X not in self.values:
            self.values[base_X] = self._compute(Frame.canonical(base_X))
        return self.values[base_X]

    def record(self, frame: Frame) -> AlgElement:
        """Evaluate −½F directly at ``frame`` and store its canonical value."""
        value = self._compute(frame)
        self.values.setdefault(frame.base_X, adjoint_action(frame.g0_part, value))
        return value

    def __call__(self, frame: Frame) -> AlgElement:
        value = self.canonical_value(frame.base_X)
        if frame.is_canonical:
            return value
        return adjoint_action(frame.g0_part.inverse(), value)

    def samples(self) -> List[Tuple[AlgElement, AlgElement]]:
        return list(self.values.items())


def upsilon_from_system(system: SymmetrySystem, frames: Sequence[Frame],
                        shift: Optional[AlgElement] = None) -> UpsilonField:
    field_ = UpsilonField(system, shift)
    for frame in frames:
        field_.record(frame)
    logger.debug(f"Υ evaluated on {len(field_.values)} canonical frames")
    return field_


@dataclass(frozen=True)
class Residual:
    index: int
    sample: tuple
    residual: AlgElement


@dataclass
class CheckReport:
    checked: int = 0
    violations: List[Residual] = field(default_factory=list)
    skipped: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def vacuous(self) -> bool:
        return self.checked == 0


def _run_check(samples, evaluate) -> CheckReport:
    """Run ``evaluate`` per sample; off-cell or uncovered samples are skipped with a reason."""
    report = CheckReport()
    for index, sample in enumerate(samples):
        try:
            residual = evaluate(*sample)
        except OffCell:
            report.skipped.append((index, 'off_cell'))
            continue
        except UncoveredPoint as e:
            report.skipped.append((index, f'uncovered {e.point}'))
            continue
        report.checked += 1
        if not residual.is_zero():
            report.violations.append(Residual(index, tuple(sample), residual))
    return report


def cocycle_check(system: SymmetrySystem, upsilon: UpsilonField,
                  samples: Sequence[Tuple[ModelPoint, Frame]]) -> CheckReport:
    """F(x, u) − (Υ(φ₀(x, u)) − Υ(u)) per sample; a passing sample has zero residual."""
    def evaluate(x, frame):
        d = displacement(system.symmetry_at(x).element, frame, upsilon.shift)
        return d.F - (upsilon(d.image) - upsilon(frame))

    report = _run_check(samples, evaluate)
    if report.violations:
        logger.warning(f"Cocycle identity fails on {len(report.violations)} of {report.checked} samples")
    return report


def fiberwise_identity_check(system: SymmetrySystem, upsilon: UpsilonField,
                             frames: Sequence[Frame]) -> CheckReport:
    """Υ(φ₀(p₀(u), u)) + Υ(u) per frame."""
    def evaluate(frame):
        s = system.symmetry_at(frame.base_point)
        image = displacement(s.element, frame, upsilon.shift).image
        return upsilon(image) + upsilon(frame)

    return _run_check([(f,) for f in frames], evaluate)


def distributivity_identity_check(system: SymmetrySystem,
                                  samples: Sequence[Tuple[ModelPoint, ModelPoint, Frame]],
                                  shift: Optional[AlgElement] = None) -> CheckReport:
    """
    F(x, φ₀(y, u)) + F(y, u) − F(s_x(y), φ₀(x, u)) − F(x, u) per sample (x, y, u).
    """
    def evaluate(x, y, frame):
        sx = system.symmetry_at(x)
        sy = system.symmetry_at(y)
        s_image = system.symmetry_at(sx(y))
        d_y = displacement(sy.element, frame, shift)
        d_x = displacement(sx.element, frame, shift)
        left = displacement(sx.element, d_y.image, shift).F + d_y.F
        right = displacement(s_image.element, d_x.image, shift).F + d_x.F
        return left - right

    return _run_check(samples, evaluate)


def equivariance_check(upsilon: UpsilonField, frame: Frame, g0: GroupElement) -> AlgElement:
    """Direct −½F at u·g0 minus Ad_{g0⁻¹} Υ(u); zero when Υ is G₀-equivariant."""
    moved = frame.times(g0)
    return upsilon._compute(moved) - adjoint_action(g0.inverse(), upsilon(frame))


def invariant_section(upsilon: UpsilonField, frame: Frame) -> GroupElement:
    """σ̂(u) = σ(u)·exp Υ(u), the Weyl structure determined by the system."""
    tag = frame.base_X.algebra.tag
    rep = frame.representative(upsilon.shift) @ exp_nilpotent(upsilon(frame))
    return GroupElement.of(tag, rep)


def rho_transform(rho: Cochain1, nabla_upsilon: Cochain1, upsilon: AlgElement, xi: AlgElement) -> AlgElement:
    """P̂(ξ) = P(ξ) + ∇_ξΥ + ½[Υ, [Υ, ξ]]."""
    if not xi.lies_in(-1):
        raise PreconditionError("ξ must lie in g₋₁")
    if not upsilon.lies_in(1):
        raise PreconditionError("Υ must lie in g₁")
    return rho(xi) + nabla_upsilon(xi) + HALF * bracket(upsilon, bracket(upsilon, xi))


class Verdict(str, Enum):
    INVARIANT = 'Invariant'
    FIBERWISE_ONLY = 'FiberwiseOnly'


@dataclass
class InvariantGaugeResult:
    upsilon: UpsilonField
    verdict: Verdict
    report: CheckReport
    witness: Optional[Residual] = None

    @property
    def vacuous(self) -> bool:
        return self.report.vacuous


def invariant_gauge(system: SymmetrySystem, frames: Sequence[Frame],
                    pair_samples: Sequence[Tuple[ModelPoint, Frame]],
                    shift: Optional[AlgElement] = None) -> InvariantGaugeResult:
    """
    Build the unique candidate Υ and test whether σ̂ = σ·exp Υ is invariant.

    The verdict is Invariant iff the cocycle identity holds on every checked
    pair; otherwise the first failing pair is the witness.
    """
    upsilon = upsilon_from_system(system, frames, shift)
    report = cocycle_check(system, upsilon, pair_samples)
    if report.passed:
        if report.vacuous:
            logger.info("Invariant gauge verdict is vacuous: no pair could be checked")
        return InvariantGaugeResult(upsilon, Verdict.INVARIANT, report)
    return InvariantGaugeResult(upsilon, Verdict.FIBERWISE_ONLY, report, witness=report.violations[0])


def canonical_frames(points: Sequence[ModelPoint]) -> List[Frame]:
    out = []
    for x in points:
        if not x.in_cell():
            continue
        out.append(Frame.canonical(chart_coordinates(x)))
    return out
