import factory.random
import pytest

from cartankit.algebra.graded import Conformal, Projective, build_algebra


@pytest.fixture(autouse=True)
def seeded_factories():
    factory.random.reseed_random('cartankit-algebra')


@pytest.fixture
def proj2():
    return build_algebra(Projective(2))


@pytest.fixture
def proj3():
    return build_algebra(Projective(3))


@pytest.fixture
def conf21():
    return build_algebra(Conformal(2, 1))


@pytest.fixture(params=[Projective(2), Projective(3), Conformal(2, 1), Conformal(3, 1)], ids=str)
def algebra(request):
    return build_algebra(request.param)
