import pytest

from cartankit.algebra.graded import Cochain1, Projective, build_algebra
from cartankit.geometry.exceptions import PreconditionError
from cartankit.geometry.flatmodel import ModelPoint, chart_coordinates, exp_group, origin
from cartankit.geometry.sampling import Sampler
from cartankit.geometry.symmetries import ConjugationRule, TableRule, table_entry
from cartankit.geometry.weyl import (
    Frame,
    UpsilonField,
    Verdict,
    canonical_frames,
    cocycle_check,
    displacement,
    distributivity_identity_check,
    equivariance_check,
    fiberwise_identity_check,
    invariant_gauge,
    invariant_section,
    rho_transform,
    upsilon_from_system,
)

from .factories import ChartPointFactory, FrameFactory


@pytest.fixture
def shifted_system(plane):
    return ConjugationRule.standard(plane, [1, -1])


class TestFrames:
    def test_base_point(self, plane):
        """A frame lies over exp(X)·origin."""
        frame = FrameFactory(tag=plane)
        assert chart_coordinates(frame.base_point) == frame.base_X

    def test_rejects_non_minus_base(self, plane):
        """Frame coordinates live in g₋₁."""
        with pytest.raises(ValueError):
            Frame.canonical(build_algebra(plane).plus_vector([1, 0]))

    def test_right_action(self, plane):
        """u·g0 keeps the base point and multiplies the G₀ part."""
        frame = FrameFactory(tag=plane)
        moved = frame.times(frame.g0_part.inverse())
        assert moved.is_canonical
        assert moved.base_point == frame.base_point

    def test_displacement_of_translation(self, plane):
        """Translations move frames along g₋₁ without displacement."""
        algebra = build_algebra(plane)
        t = ConjugationRule.standard(plane).transporter(ModelPoint.of(plane, [1, 1, 1]))
        frame = FrameFactory(tag=plane)
        d = displacement(t, frame)
        assert d.F.is_zero()
        assert d.image.base_X == frame.base_X + algebra.minus_vector([1, 1])


class TestUpsilon:
    def test_standard_system_is_flat(self, standard_system, plane):
        """With Z = 0 the flat gauge is already invariant: Υ vanishes."""
        frames = FrameFactory.build_batch(4, tag=plane)
        upsilon = upsilon_from_system(standard_system, frames)
        assert all(upsilon(u).is_zero() for u in frames)

    def test_value_at_canonical_frame(self, shifted_system, plane):
        """At a canonical frame Υ is −½ of the origin Z."""
        frame = FrameFactory(tag=plane, canonical=True)
        upsilon = UpsilonField(shifted_system)
        assert upsilon(frame) == build_algebra(plane).plus_vector(['-1/2', '1/2'])

    def test_equivariance(self, shifted_system, plane):
        """Direct evaluation at u·g0 matches Ad_{g0⁻¹} Υ(u)."""
        upsilon = UpsilonField(shifted_system)
        for frame in FrameFactory.build_batch(3, tag=plane):
            g0 = FrameFactory(tag=plane).g0_part
            assert equivariance_check(upsilon, frame, g0).is_zero()

    def test_fiberwise_identity(self, shifted_system, plane):
        """Υ(φ₀(p₀(u), u)) = −Υ(u) on every frame."""
        frames = FrameFactory.build_batch(4, tag=plane)
        upsilon = upsilon_from_system(shifted_system, frames)
        report = fiberwise_identity_check(shifted_system, upsilon, frames)
        assert report.passed
        assert report.checked == 4

    def test_gauge_shift_leaves_section(self, shifted_system, plane):
        """Changing the reference gauge by a constant Z0 does not change σ̂."""
        shift = build_algebra(plane).plus_vector([2, 3])
        plain, shifted = UpsilonField(shifted_system), UpsilonField(shifted_system, shift)
        for frame in FrameFactory.build_batch(3, tag=plane):
            assert invariant_section(shifted, frame) == invariant_section(plain, frame)


class TestCocycle:
    def test_standard_system(self, standard_system, plane):
        """The flat gauge satisfies the cocycle identity for point reflections."""
        samples = [(ChartPointFactory(tag=plane), FrameFactory(tag=plane)) for _ in range(5)]
        upsilon = UpsilonField(standard_system)
        report = cocycle_check(standard_system, upsilon, samples)
        assert report.passed
        assert report.checked == 5

    def test_twisted_system(self, plane):
        """Twisting by a P₊ element keeps the cocycle identity where the rule is defined."""
        twist = exp_group(build_algebra(plane).plus_vector([1, 2]))
        system = ConjugationRule.standard(plane, twist=twist)
        sampler = Sampler(plane, seed=8)
        pairs = sampler.point_frame_pairs(6, where=lambda s: system.covers(s[0]) and system.covers(s[1].base_point))
        report = cocycle_check(system, UpsilonField(system), pairs)
        assert report.passed

    @pytest.mark.slow
    @pytest.mark.parametrize('tag', [Projective(2), Projective(3)], ids=str)
    def test_standard_system_at_scale(self, tag):
        """Zero residual on 100 seeded (x, u) samples."""
        system = ConjugationRule.standard(tag)
        pairs = Sampler(tag, seed=21).point_frame_pairs(100)
        report = cocycle_check(system, UpsilonField(system), pairs)
        assert report.passed
        assert report.checked == 100

    @pytest.mark.slow
    def test_twisted_system_at_scale(self):
        """The twisted rule on ℝP³ has no violation on 100 covered samples."""
        space = Projective(3)
        system = ConjugationRule.standard(space, twist=exp_group(build_algebra(space).plus_vector([1, 2, 0])))
        pairs = Sampler(space, seed=22).point_frame_pairs(
            100, where=lambda s: system.covers(s[0]) and system.covers(s[1].base_point),
        )
        report = cocycle_check(system, UpsilonField(system), pairs)
        assert report.passed
        assert report.checked + len(report.skipped) == 100
        assert report.checked >= 90

    def test_mixed_table_is_fiberwise_only(self, mixed_table, table_centers):
        """The mixed table admits Υ fiberwise but fails the cocycle identity."""
        frames = canonical_frames(table_centers)
        pairs = [(x, u) for x in table_centers for u in frames]
        result = invariant_gauge(mixed_table, frames, pairs)
        assert result.verdict == Verdict.FIBERWISE_ONLY
        assert not result.vacuous

        witness_sample = (table_centers[0], frames[1])
        witnesses = [v for v in result.report.violations if v.sample == witness_sample]
        assert witnesses
        z = build_algebra(mixed_table.tag).plus_vector([1, 0])
        assert witnesses[0].residual == z * '-1/2'

    def test_mixed_table_fiberwise(self, mixed_table, table_centers):
        """The fiberwise identity still holds on the mixed table."""
        frames = canonical_frames(table_centers)
        upsilon = upsilon_from_system(mixed_table, frames)
        assert fiberwise_identity_check(mixed_table, upsilon, frames).passed

    def test_uncovered_samples_are_skipped(self, mixed_table, table_centers, plane):
        """Samples at points outside the table are skipped with a reason."""
        frames = canonical_frames(table_centers)
        upsilon = UpsilonField(mixed_table)
        report = cocycle_check(mixed_table, upsilon, [(ModelPoint.of(plane, [1, 2, 0]), frames[0])])
        assert report.skipped == [(0, 'uncovered [1:2:0]')]
        assert report.vacuous
        assert report.passed

    def test_empty_is_vacuous(self, standard_system):
        """No samples means a vacuous pass."""
        report = cocycle_check(standard_system, UpsilonField(standard_system), [])
        assert report.vacuous and report.passed

    def test_single_point_table_is_vacuously_invariant(self, plane):
        """One table entry and no pairs: the verdict is Invariant and flagged vacuous."""
        system = TableRule(plane, [table_entry(plane, origin(plane))])
        result = invariant_gauge(system, canonical_frames([origin(plane)]), [])
        assert result.verdict == Verdict.INVARIANT
        assert result.vacuous
        assert result.witness is None

    def test_verdicts(self):
        """Vacuity is reported beside the verdict, not as one of its values."""
        assert {v.value for v in Verdict} == {'Invariant', 'FiberwiseOnly'}


class TestDistributivity:
    def test_standard_system(self, standard_system, plane):
        """The displacement is distributive for the standard rule."""
        samples = Sampler(plane, seed=13).distributivity_samples(4)
        report = distributivity_identity_check(standard_system, samples)
        assert report.passed
        assert report.checked == 4

    @pytest.mark.slow
    @pytest.mark.parametrize('tag', [Projective(2), Projective(3)], ids=str)
    def test_standard_system_at_scale(self, tag):
        """The identity holds on 100 seeded (x, y, u) samples."""
        samples = Sampler(tag, seed=23).distributivity_samples(100)
        report = distributivity_identity_check(ConjugationRule.standard(tag), samples)
        assert report.passed
        assert report.checked == 100


class TestRhoTransform:
    def test_quadratic_term(self, plane):
        """With P = 0 and ∇Υ = 0 only ½[Υ, [Υ, ξ]] remains; for Υ = E₀₁, ξ = E₁₀ it is −Υ."""
        algebra = build_algebra(plane)
        upsilon = algebra.plus_vector([1, 0])
        xi = algebra.minus_vector([1, 0])
        zero = Cochain1.zero(algebra)
        assert rho_transform(zero, zero, upsilon, xi) == -upsilon

    def test_linear_terms(self, plane):
        """P and ∇Υ enter additively."""
        algebra = build_algebra(plane)
        rho = Cochain1.decomposable(algebra, [1, 0], algebra.plus_vector([0, 2]))
        xi = algebra.minus_vector([3, 0])
        assert rho_transform(rho, Cochain1.zero(algebra), algebra.zero(), xi) == algebra.plus_vector([0, 6])

    def test_preconditions(self, plane):
        """ξ must lie in g₋₁ and Υ in g₁."""
        algebra = build_algebra(plane)
        zero = Cochain1.zero(algebra)
        with pytest.raises(PreconditionError):
            rho_transform(zero, zero, algebra.zero(), algebra.plus_vector([1, 0]))
        with pytest.raises(PreconditionError):
            rho_transform(zero, zero, algebra.minus_vector([1, 0]), algebra.minus_vector([1, 0]))


def test_canonical_frames_skip_infinity(plane):
    """Points at infinity get no canonical frame."""
    frames = canonical_frames([origin(plane), ModelPoint.of(plane, [0, 1, 0])])
    assert len(frames) == 1
    assert frames[0].is_canonical
