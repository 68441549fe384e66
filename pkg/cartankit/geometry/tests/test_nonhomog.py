from fractions import Fraction

import pytest

from cartankit.algebra.ratlin import Mat
from cartankit.geometry.exceptions import PreconditionError
from cartankit.geometry.flatmodel import GroupElement, ModelPoint, act, origin
from cartankit.geometry.nonhomog import (
    AllowedAutomorphism,
    Mode,
    PuncturedModel,
    as_allowed,
    closed_form_columns,
    closed_form_residuals,
    homogeneity_probe,
    is_allowed,
    line_confinement_check,
    line_symmetry,
    line_transporter,
    off_line_symmetry,
    off_line_transporter,
    preserve_elimination,
    printed_upper_right,
    symmetry_at,
)
from cartankit.geometry.sampling import PuncturedSampler
from cartankit.geometry.symmetries import verify_symmetry


@pytest.fixture
def punctured_plane():
    return PuncturedModel(2)


@pytest.fixture
def punctured_space():
    return PuncturedModel(3)


@pytest.fixture
def swap(punctured_plane):
    return GroupElement.of(punctured_plane.tag, Mat.from_rows([[1, 0, 0], [0, 0, 1], [0, 1, 0]]))


class TestPuncturedModel:
    def test_removed_points(self, punctured_plane):
        """The removed points are the last two basis lines."""
        first, second = punctured_plane.removed
        assert first.coords == (0, 1, 0)
        assert second.coords == (0, 0, 1)
        assert not punctured_plane.contains(first)
        assert punctured_plane.contains(origin(punctured_plane.tag))

    def test_line(self, punctured_space):
        """The line is spanned by the removed points."""
        assert punctured_space.on_line(punctured_space.line_point(2, 3))
        assert not punctured_space.on_line(ModelPoint.of(punctured_space.tag, [1, 0, 2, 3]))

    def test_line_point_needs_both_coordinates(self, punctured_plane):
        """The removed points themselves are not line points."""
        with pytest.raises(PreconditionError):
            punctured_plane.line_point(0, 1)

    def test_needs_dimension_two(self):
        """The punctured model starts at m = 2."""
        with pytest.raises(ValueError):
            PuncturedModel(1)


class TestAllowedAutomorphisms:
    def test_classification(self, punctured_plane, swap):
        """The last two columns decide Preserve, Swap or No."""
        tag = punctured_plane.tag
        assert is_allowed(GroupElement.of(tag, Mat.diag([1, 2, 3])), punctured_plane) == Mode.PRESERVE
        assert is_allowed(swap, punctured_plane) == Mode.SWAP
        shear = GroupElement.of(tag, Mat.from_rows([[1, 0, 1], [0, 1, 0], [0, 0, 1]]))
        assert is_allowed(shear, punctured_plane) == Mode.NO
        with pytest.raises(PreconditionError):
            as_allowed(shear, punctured_plane)

    def test_composition_parity(self, punctured_plane, swap):
        """Two swaps preserve; a swap after a preserve swaps."""
        s = as_allowed(swap, punctured_plane)
        p = as_allowed(GroupElement.of(punctured_plane.tag, Mat.diag([1, 2, 3])), punctured_plane)
        assert (s @ s).mode == Mode.PRESERVE
        assert is_allowed((s @ s).element, punctured_plane) == Mode.PRESERVE
        assert (s @ p).mode == Mode.SWAP
        assert is_allowed((s @ p).element, punctured_plane) == Mode.SWAP

    def test_line_confinement(self, punctured_plane, swap):
        """Allowed automorphisms keep line points on the line."""
        w = punctured_plane.line_point(1, 2)
        assert line_confinement_check(AllowedAutomorphism(swap, Mode.SWAP), w, punctured_plane)

    def test_sampled_automorphisms_confine(self, punctured_space):
        """Random allowed automorphisms never move a line point off the line."""
        sampler = PuncturedSampler(punctured_space, seed=6)
        for g in sampler.allowed_automorphisms(5):
            assert is_allowed(g.element, punctured_space) == g.mode
            for w in sampler.line_points(3):
                assert line_confinement_check(g, w, punctured_space)

    @pytest.mark.slow
    @pytest.mark.parametrize('m', [2, 3, 4])
    def test_sampled_automorphisms_confine_at_scale(self, m):
        """1000 random allowed automorphisms, each paired with a random line point."""
        model = PuncturedModel(m)
        sampler = PuncturedSampler(model, seed=60 + m)
        automorphisms = sampler.allowed_automorphisms(1000)
        points = sampler.line_points(1000)
        for g, w in zip(automorphisms, points):
            assert line_confinement_check(g, w, model)


class TestClosedForm:
    def test_corner_values(self):
        """At x_m = 1, x_{m+1} = 2, v = 1 the upper right entry is 1/2."""
        columns = closed_form_columns(Fraction(1), Fraction(2), Fraction(1))
        assert columns == {
            'upper_left': 0,
            'lower_left': 2,
            'upper_right': Fraction(1, 2),
            'lower_right': 0,
        }

    def test_printed_variant_differs(self):
        """The (x_m v + 2) variant gives 3/2 at the same point."""
        assert printed_upper_right(Fraction(1), Fraction(2), Fraction(1)) == Fraction(3, 2)

    @pytest.mark.parametrize('m,a,b', [(2, 1, 2), (2, -3, '1/2'), (3, 2, 3), (4, 5, -1)])
    def test_residuals_vanish(self, m, a, b):
        """The multiplied-out columns match the computed conjugate exactly."""
        model = PuncturedModel(m)
        residuals = closed_form_residuals(model.line_point(a, b), model)
        assert [r.entry for r in residuals if r.residual != 0] == []
        assert 'swap_condition' in {r.entry for r in residuals}

    @pytest.mark.slow
    @pytest.mark.parametrize('m', [2, 3, 4, 5])
    def test_residuals_vanish_on_sampled_line_points(self, m):
        """Every residual is zero on 100 random line points, and each line symmetry swaps."""
        model = PuncturedModel(m)
        for w in PuncturedSampler(model, seed=70 + m).line_points(100):
            assert all(r.residual == 0 for r in closed_form_residuals(w, model))
            s = line_symmetry(w, model)
            assert verify_symmetry(s).passed
            assert is_allowed(s.element, model) == Mode.SWAP

    def test_other_v(self, punctured_plane):
        """The closed form holds for any v, not just 1/x_m."""
        residuals = closed_form_residuals(punctured_plane.line_point(1, 2), punctured_plane, v='3/5')
        assert all(r.residual == 0 for r in residuals)
        assert 'swap_condition' not in {r.entry for r in residuals}


class TestLineSymmetries:
    def test_swaps_removed_points(self, punctured_plane):
        """The symmetry at a line point is a symmetry and swaps the removed points."""
        s = line_symmetry(punctured_plane.line_point(1, 2), punctured_plane)
        assert verify_symmetry(s).passed
        assert is_allowed(s.element, punctured_plane) == Mode.SWAP

    def test_transporter(self, punctured_space):
        """The line transporter maps the origin to w."""
        w = punctured_space.line_point(2, 3)
        assert act(line_transporter(w, punctured_space), origin(punctured_space.tag)) == w

    def test_elimination(self, punctured_plane):
        """No symmetry at a line point preserves the removed points; swapping ones form a line."""
        certificate = preserve_elimination(punctured_plane.line_point(1, 2), punctured_plane)
        assert not certificate.preserve_solvable
        assert certificate.swap_solvable
        assert certificate.swap_null_dim == 1

    def test_elimination_in_space(self, punctured_space):
        """The preserve system stays inconsistent for m = 3."""
        certificate = preserve_elimination(punctured_space.line_point(-1, 4), punctured_space)
        assert not certificate.preserve_solvable
        assert certificate.swap_solvable

    def test_not_a_line_point(self, punctured_plane):
        """Off-line points are refused."""
        with pytest.raises(PreconditionError):
            line_symmetry(origin(punctured_plane.tag), punctured_plane)


class TestOffLineSymmetries:
    def test_preserves(self, punctured_space):
        """Off-line symmetries are symmetries that preserve the removed points."""
        x = ModelPoint.of(punctured_space.tag, [1, 1, 0, 0])
        s = off_line_symmetry(x, punctured_space)
        assert s.center == x
        assert verify_symmetry(s).passed
        assert is_allowed(s.element, punctured_space) == Mode.PRESERVE

    def test_transporter_fixes_removed_points(self, punctured_space):
        """The completion fixes e_{m−1} and e_m and sends the origin to x."""
        x = ModelPoint.of(punctured_space.tag, [0, 2, 1, 1])
        g = off_line_transporter(x, punctured_space)
        assert act(g, origin(punctured_space.tag)) == x
        for removed in punctured_space.removed:
            assert act(g, removed) == removed

    def test_w_must_vanish_on_removed_columns(self, punctured_space):
        """A nonzero W entry at the removed columns would move them."""
        with pytest.raises(PreconditionError):
            off_line_symmetry(origin(punctured_space.tag), punctured_space, [1, 0, 1])

    def test_w_row(self, punctured_space):
        """W may be nonzero away from the removed columns."""
        s = off_line_symmetry(origin(punctured_space.tag), punctured_space, [2, 0, 0])
        assert verify_symmetry(s).passed
        assert is_allowed(s.element, punctured_space) == Mode.PRESERVE

    def test_dispatch(self, punctured_plane):
        """symmetry_at picks the rule by stratum."""
        w = punctured_plane.line_point(1, 1)
        assert is_allowed(symmetry_at(w, punctured_plane).element, punctured_plane) == Mode.SWAP
        x = origin(punctured_plane.tag)
        assert is_allowed(symmetry_at(x, punctured_plane).element, punctured_plane) == Mode.PRESERVE


class TestHomogeneityProbe:
    def test_probe_passes(self, punctured_space):
        """Sampled automorphisms keep the line and every assigned symmetry verifies."""
        sampler = PuncturedSampler(punctured_space, seed=1)
        report = homogeneity_probe(
            punctured_space,
            sampler.allowed_automorphisms(4),
            sampler.line_points(3),
            sampler.off_line_points(3),
        )
        assert report.passed
        assert not report.vacuous
        assert report.off_line_pairs == 3

    def test_empty_probe_is_vacuous(self, punctured_plane):
        """No automorphisms means nothing was certified."""
        report = homogeneity_probe(punctured_plane, [], [punctured_plane.line_point(1, 2)])
        assert report.vacuous
        assert report.passed
