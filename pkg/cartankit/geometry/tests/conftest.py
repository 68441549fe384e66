import factory.random
import pytest

from cartankit.algebra.graded import Conformal, Projective
from cartankit.geometry.flatmodel import ModelPoint, origin
from cartankit.geometry.serializers import system_from_descriptor
from cartankit.geometry.symmetries import ConjugationRule

from .factories import load_fixture


@pytest.fixture(autouse=True)
def seeded_factories():
    factory.random.reseed_random('cartankit-geometry')


@pytest.fixture
def plane():
    return Projective(2)


@pytest.fixture
def conformal():
    return Conformal(3, 1)


@pytest.fixture
def standard_system(plane):
    return ConjugationRule.standard(plane)


@pytest.fixture
def mixed_table_doc():
    return load_fixture('mixed_table.json')


@pytest.fixture
def mixed_table(mixed_table_doc):
    return system_from_descriptor(mixed_table_doc)


@pytest.fixture
def table_centers(plane):
    """origin, [1:1:0] and [1:−1:0], in table order."""
    return [origin(plane), ModelPoint.of(plane, [1, 1, 0]), ModelPoint.of(plane, [1, -1, 0])]
