import math

import pytest

from ecpsim import BasisKet, StateVector


@pytest.fixture
def w_pattern():
    """Build x|duu> + y|udu> + z|uud>, normalized."""

    def build(x: float, y: float, z: float) -> StateVector:
        n = math.sqrt(x * x + y * y + z * z)
        return StateVector(
            {
                BasisKet.from_spins("duu"): x / n,
                BasisKet.from_spins("udu"): y / n,
                BasisKet.from_spins("uud"): z / n,
            }
        )

    return build
