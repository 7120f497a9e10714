import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from peerlab import Distribution, JointDistribution, PairwisePrior, WorldModelPrior

CANONICAL_TABLE = np.array([[0.4, 0.1], [0.1, 0.4]])


@pytest.fixture
def canonical_joint():
    return JointDistribution(CANONICAL_TABLE.copy())


@pytest.fixture
def canonical_prior():
    return PairwisePrior(JointDistribution(CANONICAL_TABLE.copy()))


@pytest.fixture
def two_state_world():
    return WorldModelPrior(
        Distribution(np.array([0.5, 0.5])),
        (Distribution(np.array([0.8, 0.2])), Distribution(np.array([0.2, 0.8]))),
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240817))
