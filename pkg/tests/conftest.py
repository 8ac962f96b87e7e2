from fractions import Fraction as F

import pytest

from qmidconv.linalg import Matrix
from qmidconv.system import PartialFractionSystem, catalog_generalized_qhg, catalog_heine


@pytest.fixture
def estar():
    return PartialFractionSystem(1, F(1, 2), (F(2),), (Matrix([[F(1, 2)]]),), Matrix([[F(1, 4)]]), "estar")


@pytest.fixture
def heine():
    return catalog_heine(2, 3, 5, F(1, 2))


@pytest.fixture
def e3():
    return catalog_generalized_qhg([2, 3], [4, 5], 7, F(1, 2))


@pytest.fixture(scope="session")
def corpus():
    from qmidconv.corpus import generate_corpus

    return generate_corpus(200, 0)
