"""
Seeded exact samplers.

Every draw gets its own counter-based stream, Philox keyed by
SeedSequence(seed, spawn_key=(index,)), so draw ``index`` is the same no
matter how a batch is chunked across workers. Randomness only picks small
integers; everything built from them is exact.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np
from django.conf import settings

from cartankit.algebra.exceptions import OffCell, SingularMatrix
from cartankit.algebra.graded import AlgElement, Conformal, Cochain2, ModelTag, build_algebra
from cartankit.algebra.ratlin import Mat, determinant, mat_inverse

from .exceptions import ChartError, DrawRejected, PreconditionError, SampleExhaustion
from .flatmodel import GroupElement, ModelPoint, exp_group, point_from_chart
from .nonhomog import AllowedAutomorphism, Mode, PuncturedModel, is_allowed
from .weyl import Frame

logger = logging.getLogger(__name__)

T = TypeVar('T')

MAX_SEED = 2 ** 64


def stream(seed: int, index: int) -> np.random.Generator:
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def random_rational(rng: np.random.Generator, height: int, nonzero: bool = False) -> Fraction:
    while True:
        num = int(rng.integers(-height, height + 1))
        if num or not nonzero:
            return Fraction(num, int(rng.integers(1, height + 1)))


def random_vector(rng: np.random.Generator, size: int, height: int) -> List[Fraction]:
    return [random_rational(rng, height) for _ in range(size)]


def random_matrix(rng: np.random.Generator, rows: int, cols: int, height: int) -> Mat:
    return Mat(rows, cols, random_vector(rng, rows * cols, height))


@dataclass
class Sampler:
    """
    Draws sample batches for one model.

    A draw that lands outside the big cell (or is otherwise unusable) is
    discarded and the next stream index is used; more than ``max_discards``
    discards per requested sample raises SampleExhaustion.
    """
    tag: ModelTag
    seed: int = 0
    height: Optional[int] = None
    max_discards: Optional[int] = None

    def __post_init__(self):
        if self.height is None:
            self.height = settings.CARTANKIT_RATIONAL_HEIGHT
        if self.max_discards is None:
            self.max_discards = settings.CARTANKIT_MAX_DISCARDS
        self.algebra = build_algebra(self.tag)
        self._next = 0
        self.discarded = 0

    def _draw(self, count: int, make: Callable[[np.random.Generator], T],
              where: Optional[Callable[[T], bool]] = None) -> List[T]:
        out: List[T] = []
        budget = self.max_discards * max(count, 1)
        discarded = 0
        while len(out) < count:
            rng = stream(self.seed, self._next)
            self._next += 1
            try:
                value = make(rng)
                if where is not None and not where(value):
                    raise DrawRejected("Draw rejected by the sample filter")
                out.append(value)
            except (OffCell, ChartError, SingularMatrix, DrawRejected) as e:
                discarded += 1
                logger.debug(f"Discarded draw {self._next - 1}: {e}")
                if discarded > budget:
                    self.discarded += discarded
                    raise SampleExhaustion(count, discarded)
        self.discarded += discarded
        return out

    # Algebra

    def minus_element(self, rng) -> AlgElement:
        return self.algebra.minus_vector(random_vector(rng, self.tag.dim, self.height))

    def plus_element(self, rng) -> AlgElement:
        return self.algebra.plus_vector(random_vector(rng, self.tag.dim, self.height))

    def plus_elements(self, count: int) -> List[AlgElement]:
        return self._draw(count, self.plus_element)

    def algebra_element(self, rng) -> AlgElement:
        return self.algebra.element(random_vector(rng, self.algebra.dim, self.height))

    def cochains(self, count: int) -> List[Cochain2]:
        def make(rng):
            return Cochain2(self.algebra, tuple(self.algebra_element(rng) for _ in self.algebra.minus_pairs))
        return self._draw(count, make)

    # Points

    def _homogeneous(self, rng) -> ModelPoint:
        coords = random_vector(rng, self.tag.n, self.height)
        if not any(coords):
            raise DrawRejected("Drew the zero vector")
        return ModelPoint.of(self.tag, coords)

    def point(self, rng) -> ModelPoint:
        """A homogeneous draw; points at infinity of the standard chart are discarded."""
        if isinstance(self.tag, Conformal):
            return point_from_chart(self.minus_element(rng))
        x = self._homogeneous(rng)
        if not x.in_cell():
            raise OffCell(f"{x} is outside the big cell")
        return x

    def points(self, count: int, where=None) -> List[ModelPoint]:
        return self._draw(count, self.point, where)

    def pairs(self, count: int, where=None) -> List[Tuple[ModelPoint, ModelPoint]]:
        return self._draw(count, lambda rng: (self.point(rng), self.point(rng)), where)

    def triples(self, count: int, where=None) -> List[Tuple[ModelPoint, ModelPoint, ModelPoint]]:
        return self._draw(count, lambda rng: (self.point(rng), self.point(rng), self.point(rng)), where)

    # Structure group

    def g0_element(self, rng) -> GroupElement:
        """
        Random element of G₀. Projective: diag(1, B). Conformal:
        diag(a, c·O, c²/a) with O the Cayley transform of an S-skew matrix.
        """
        if isinstance(self.tag, Conformal):
            return GroupElement.of(self.tag, self._conformal_g0(rng))
        b = random_matrix(rng, self.tag.m, self.tag.m, self.height)
        if determinant(b) == 0:
            raise SingularMatrix("Sampled G₀ block is singular")
        return GroupElement.of(self.tag, Mat.block_diag([Mat.identity(1), b]))

    def _conformal_g0(self, rng) -> Mat:
        k = self.tag.dim
        upper = {(i, j): random_rational(rng, self.height) for i in range(k) for j in range(i + 1, k)}
        skew = Mat.zeros(k).replace({**upper, **{(j, i): -v for (i, j), v in upper.items()}})
        s = Mat.diag(self.tag.signs)
        generator = s @ skew
        eye = Mat.identity(k)
        rotation = (eye - generator) @ mat_inverse(eye + generator)
        a = random_rational(rng, self.height, nonzero=True)
        c = random_rational(rng, self.height, nonzero=True)
        return Mat.block_diag([Mat.diag([a]), c * rotation, Mat.diag([c * c / a])])

    def g0_elements(self, count: int) -> List[GroupElement]:
        return self._draw(count, self.g0_element)

    def twist(self, rng) -> GroupElement:
        return exp_group(self.plus_element(rng))

    # Frames

    def frame(self, rng, canonical: bool = False) -> Frame:
        base = self.minus_element(rng)
        if canonical:
            return Frame.canonical(base)
        return Frame(base, self.g0_element(rng))

    def frames(self, count: int, canonical: bool = False, where=None) -> List[Frame]:
        return self._draw(count, lambda rng: self.frame(rng, canonical), where)

    def point_frame_pairs(self, count: int, where=None) -> List[Tuple[ModelPoint, Frame]]:
        return self._draw(count, lambda rng: (self.point(rng), self.frame(rng)), where)

    def distributivity_samples(self, count: int, where=None) -> List[Tuple[ModelPoint, ModelPoint, Frame]]:
        return self._draw(count, lambda rng: (self.point(rng), self.point(rng), self.frame(rng)), where)


class PuncturedSampler(Sampler):
    """Draws for the projective model with two points removed."""

    def __init__(self, model: PuncturedModel, seed: int = 0, height: Optional[int] = None,
                 max_discards: Optional[int] = None):
        self.model = model
        super().__init__(model.tag, seed, height, max_discards)

    def line_point(self, rng) -> ModelPoint:
        return self.model.line_point(
            random_rational(rng, self.height, nonzero=True),
            random_rational(rng, self.height, nonzero=True),
        )

    def line_points(self, count: int) -> List[ModelPoint]:
        return self._draw(count, self.line_point)

    def off_line_point(self, rng) -> ModelPoint:
        x = self._homogeneous(rng)
        if self.model.on_line(x):
            raise DrawRejected(f"{x} lies on the line")
        return x

    def off_line_points(self, count: int) -> List[ModelPoint]:
        return self._draw(count, self.off_line_point)

    def allowed_automorphism(self, rng, mode: Optional[Mode] = None) -> AllowedAutomorphism:
        return random_allowed_automorphism(self.model, rng, mode, self.height)

    def allowed_automorphisms(self, count: int, mode: Optional[Mode] = None) -> List[AllowedAutomorphism]:
        return self._draw(count, lambda rng: self.allowed_automorphism(rng, mode))


def random_allowed_automorphism(model: PuncturedModel, rng: np.random.Generator,
                                mode: Optional[Mode] = None, height: int = 9) -> AllowedAutomorphism:
    """
    A random group element whose last two columns preserve (or swap) the
    removed points. The mode is drawn too when not given.
    """
    if mode is None:
        mode = Mode.PRESERVE if rng.integers(0, 2) == 0 else Mode.SWAP
    if mode == Mode.NO:
        raise ValueError("Allowed automorphisms preserve or swap the removed points")
    n = model.m + 1
    a, b = model.first, model.second
    rows = random_matrix(rng, n, n, height).to_rows()
    lam = random_rational(rng, height, nonzero=True)
    mu = random_rational(rng, height, nonzero=True)
    target_a, target_b = (a, b) if mode == Mode.PRESERVE else (b, a)
    for r in range(n):
        rows[r][a] = lam if r == target_a else Fraction(0)
        rows[r][b] = mu if r == target_b else Fraction(0)
    matrix = Mat.from_rows(rows)
    if determinant(matrix) == 0:
        raise SingularMatrix("Sampled automorphism is singular")
    g = GroupElement.of(model.tag, matrix)
    if is_allowed(g, model) != mode:
        raise PreconditionError("Sampled automorphism has the wrong mode")
    return AllowedAutomorphism(g, mode)

