from fractions import Fraction

import pytest

from cartankit.algebra.exceptions import OffCell
from cartankit.algebra.graded import Conformal, Projective, build_algebra
from cartankit.algebra.ratlin import Mat
from cartankit.algebra.tests.factories import AlgElementFactory, random_rational
from cartankit.geometry.exceptions import ChartError
from cartankit.geometry.flatmodel import (
    GroupElement,
    ModelPoint,
    act,
    big_cell_decompose,
    chart_coordinates,
    chart_differential,
    chart_translate,
    exp_group,
    is_chartable,
    is_in_group,
    origin,
    point_from_chart,
)
from cartankit.geometry.sampling import Sampler

from .factories import ChartPointFactory, projective_g0


def random_projective_element(tag):
    """exp(X)·g0·exp(Z)·exp(X′), so g·origin is a random point."""
    algebra = build_algebra(tag)
    x, x2 = AlgElementFactory.build_batch(2, algebra=algebra, grade=-1)
    z = AlgElementFactory(algebra=algebra, grade=1)
    return exp_group(x) @ projective_g0(tag) @ exp_group(z) @ exp_group(x2)


def random_homogeneous_point(tag):
    """Random homogeneous coordinates; the point may lie at infinity of the standard chart."""
    coords = [Fraction(0)] * tag.n
    while not any(coords):
        coords = [random_rational() for _ in range(tag.n)]
    return ModelPoint.of(tag, coords)


class TestModelPoint:
    def test_normalized(self, plane):
        """Proportional coordinate vectors give the same point."""
        assert ModelPoint.of(plane, [2, 4, 0]) == ModelPoint.of(plane, ['1', '2', '0'])
        assert ModelPoint.of(plane, [0, -3, 6]).coords == (0, 1, -2)

    def test_zero_vector(self, plane):
        """The zero vector is not a point."""
        with pytest.raises(ValueError):
            ModelPoint.of(plane, [0, 0, 0])

    def test_wrong_length(self, plane):
        """Homogeneous coordinates have n = m + 1 entries."""
        with pytest.raises(ValueError):
            ModelPoint.of(plane, [1, 0])

    def test_conformal_points_are_null(self, conformal):
        """Conformal points must be null for the form."""
        with pytest.raises(ValueError):
            ModelPoint.of(conformal, [1, 1, 0, 0, 0, 0])
        assert ModelPoint.of(conformal, [1, 0, 0, 0, 0, 0]) == origin(conformal)

    def test_in_cell(self, plane):
        """The big cell is x₀ ≠ 0."""
        assert origin(plane).in_cell()
        assert not ModelPoint.of(plane, [0, 1, 0]).in_cell()


class TestGroupElement:
    def test_canonical_scale(self, plane):
        """Scalar multiples define the same class, normalized to a leading +1."""
        m = Mat.from_rows([[0, 2, 0], [4, 0, 0], [0, 0, 2]])
        g = GroupElement.of(plane, m)
        assert g == GroupElement.of(plane, m * -3)
        assert g.representative[1, 0] == 1

    def test_singular_rejected(self, plane):
        """Singular matrices are not group elements."""
        with pytest.raises(ValueError):
            GroupElement.of(plane, Mat.from_rows([[1, 1, 0], [1, 1, 0], [0, 0, 1]]))

    def test_conformal_membership(self):
        """diag(a, c·I, c²/a) scales the form by c², so it is in the conformal group."""
        tag = Conformal(3, 0)
        assert is_in_group(tag, Mat.diag([2, 3, 3, 3, Fraction(9, 2)]))
        assert not is_in_group(tag, Mat.diag([1, 2, 1, 1, 1]))

    def test_group_law(self, plane):
        """Composition and inverse agree with matrix products."""
        g = projective_g0(plane)
        assert (g @ g.inverse()).is_identity()
        h = exp_group(build_algebra(plane).plus_vector([1, 2]))
        assert g.conjugate(h) == h @ g @ h.inverse()

    def test_block_diagonal(self, plane):
        """G₀ elements preserve the grading; translations do not."""
        assert projective_g0(plane).is_block_diagonal()
        assert not exp_group(build_algebra(plane).minus_vector([1, 0])).is_block_diagonal()

    @pytest.mark.parametrize('tag', [Projective(2), Projective(3)], ids=str)
    def test_action_law(self, tag):
        """(gh)·x = g·(h·x), and the identity acts trivially."""
        for _ in range(20):
            g, h = random_projective_element(tag), random_projective_element(tag)
            x = random_homogeneous_point(tag)
            assert act(g @ h, x) == act(g, act(h, x))
            assert act(GroupElement.identity(tag), x) == x
            assert act(g.inverse(), act(g, x)) == x

    def test_action_law_conformal(self, conformal):
        """The action law on conformal chart points."""
        algebra = build_algebra(conformal)
        for _ in range(10):
            g = exp_group(AlgElementFactory(algebra=algebra, grade=1))
            h = exp_group(AlgElementFactory(algebra=algebra, grade=-1))
            x = ChartPointFactory(tag=conformal)
            assert act(g @ h, x) == act(g, act(h, x))


class TestCharts:
    def test_chart_round_trip(self, plane):
        """Affine coordinates of exp(X)·origin are X."""
        x = AlgElementFactory(algebra=build_algebra(plane), grade=-1)
        assert chart_coordinates(point_from_chart(x)) == x

    def test_projective_chart_is_affine(self, plane):
        """exp(X)·origin = [1 : X] on projective models."""
        x = build_algebra(plane).minus_vector([3, Fraction(-1, 2)])
        assert point_from_chart(x).coords == (1, 3, Fraction(-1, 2))

    def test_conformal_chart_is_null(self, conformal):
        """exp(X)·origin is a null point with last coordinate −½⟨X, X⟩."""
        x = build_algebra(conformal).minus_vector([1, 2, 0, 1])
        assert point_from_chart(x).coords == (1, 1, 2, 0, 1, -2)

    def test_chart_translate_at_infinity(self, plane):
        """Projective points outside the big cell still get a translate."""
        x = ModelPoint.of(plane, [0, 1, 2])
        assert act(chart_translate(x), origin(plane)) == x
        assert is_chartable(x)

    def test_conformal_infinity_not_chartable(self, conformal):
        """The conformal point at infinity has no chart translate."""
        x = ModelPoint.of(conformal, [0, 0, 0, 0, 0, 1])
        with pytest.raises(ChartError):
            chart_translate(x)
        assert not is_chartable(x)

    def test_chart_coordinates_off_cell(self, plane):
        """Chart coordinates only exist in the big cell."""
        with pytest.raises(ChartError):
            chart_coordinates(ModelPoint.of(plane, [0, 1, 0]))


class TestBigCell:
    def test_recompose(self, plane):
        """exp(X)·g0·exp(Z) factors back into its pieces."""
        algebra = build_algebra(plane)
        x = AlgElementFactory(algebra=algebra, grade=-1)
        z = AlgElementFactory(algebra=algebra, grade=1)
        g0 = projective_g0(plane)
        g = exp_group(x) @ g0 @ exp_group(z)
        factors = big_cell_decompose(g)
        assert factors.X == x
        assert factors.Z == z
        assert factors.g0 == g0
        assert factors.recompose() == g

    def test_recompose_conformal(self, conformal):
        """Conformal elements factor through the (1, p+q, 1) split."""
        algebra = build_algebra(conformal)
        x = AlgElementFactory(algebra=algebra, grade=-1)
        z = AlgElementFactory(algebra=algebra, grade=1)
        g = exp_group(x) @ exp_group(z)
        assert big_cell_decompose(g).recompose() == g

    @pytest.mark.slow
    @pytest.mark.parametrize('tag', [Projective(2), Projective(3), Conformal(3, 1)], ids=str)
    def test_exact_factors_at_scale(self, tag):
        """100 sampled exp(X)·g0·exp(Z) factor back into exactly X, g0 and Z."""
        algebra = build_algebra(tag)
        sampler = Sampler(tag, seed=31)
        g0s = sampler.g0_elements(100)
        xs = AlgElementFactory.build_batch(100, algebra=algebra, grade=-1)
        zs = sampler.plus_elements(100)
        for x, g0, z in zip(xs, g0s, zs):
            g = exp_group(x) @ g0 @ exp_group(z)
            factors = big_cell_decompose(g)
            assert factors.X == x
            assert factors.g0 == g0
            assert factors.Z == z
            assert factors.recompose() == g

    def test_off_cell(self, plane):
        """Elements sending the origin to infinity have no big cell factorization."""
        swap = GroupElement.of(plane, Mat.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
        with pytest.raises(OffCell):
            big_cell_decompose(swap)


class TestChartDifferential:
    def test_translation_is_identity(self, plane):
        """Translations have identity differential in translated charts."""
        x = ChartPointFactory(tag=plane)
        t = exp_group(build_algebra(plane).minus_vector([1, 1]))
        assert chart_differential(t, x) == Mat.identity(2)

    def test_g0_acts_by_its_block(self, plane):
        """At the origin, diag(1, B) has differential B."""
        g0 = projective_g0(plane)
        assert chart_differential(g0, origin(plane)) == g0.representative.block(1, 3, 1, 3)

    def test_identity(self, plane):
        """The identity has identity differential everywhere, including at infinity."""
        for x in (ChartPointFactory(tag=plane), ModelPoint.of(plane, [0, 1, 2])):
            assert chart_differential(GroupElement.identity(plane), x) == Mat.identity(2)

    @pytest.mark.parametrize('tag', [Projective(2), Projective(3)], ids=str)
    def test_chain_rule(self, tag):
        """D(gh)_x = Dg_{h·x} · Dh_x."""
        for _ in range(20):
            g, h = random_projective_element(tag), random_projective_element(tag)
            x = random_homogeneous_point(tag)
            expected = chart_differential(g, act(h, x)) @ chart_differential(h, x)
            assert chart_differential(g @ h, x) == expected

    def test_matches_difference_quotients(self, plane):
        """Secants along e₁ converge to D = diag(1/4, 1/2) for g·[1:y] = [2+y₁ : 1+y₁ : y₂]."""
        algebra = build_algebra(plane)
        g = GroupElement.of(plane, Mat.from_rows([[2, 1, 0], [1, 1, 0], [0, 0, 1]]))
        x = origin(plane)
        d = chart_differential(g, x)
        assert d == Mat.from_rows([[Fraction(1, 4), 0], [0, Fraction(1, 2)]])
        base = chart_coordinates(act(g, x))
        errors = []
        for k in range(1, 9):
            h = Fraction(1, 2 ** k)
            moved = chart_coordinates(act(g, point_from_chart(algebra.minus_vector([h, 0]))))
            secant = (moved - base) * (1 / h)
            assert secant.graded_coords(-1)[1] == 0
            errors.append(abs(secant.graded_coords(-1)[0] - d[0, 0]))
        assert errors == sorted(errors, reverse=True)
        assert errors[-1] <= Fraction(1, 2 ** 8)
        assert errors[-1] > 0

    def test_linear_map_secants_are_exact(self, plane):
        """diag(1, 2, 3) is linear in the chart, so every secant equals its differential."""
        algebra = build_algebra(plane)
        g = GroupElement.of(plane, Mat.diag([1, 2, 3]))
        x = origin(plane)
        d = chart_differential(g, x)
        assert d == Mat.diag([2, 3])
        for j, h in enumerate([Fraction(1, 3), Fraction(-5, 2)]):
            step = [0, 0]
            step[j] = h
            moved = chart_coordinates(act(g, point_from_chart(algebra.minus_vector(step))))
            secant = moved * (1 / h)
            assert secant.graded_coords(-1) == d.col(j)

    def test_point_factory_in_cell(self, conformal):
        """Chart points are in the big cell."""
        assert ChartPointFactory(tag=conformal).in_cell()
