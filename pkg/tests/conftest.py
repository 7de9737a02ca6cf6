import numpy as np
import pytest

from phonon_contrast.materials import DIAMOND
from phonon_contrast.protocol import from_target


def snap(x, bits):
    """Round the mantissa of x to `bits` bits.

    Grids snapped this way make products like omega * tau_a exactly
    representable, so analytic and oracle routes evaluate trig functions at
    bit-identical arguments; without it, float64 argument rounding at
    omega * t >~ 1e8 dominates any comparison regardless of implementation.
    """
    x = np.asarray(x, dtype=float)
    m, e = np.frexp(x)
    scale = 2.0**bits
    return np.ldexp(np.round(m * scale) / scale, e)


@pytest.fixture
def diamond():
    return DIAMOND


@pytest.fixture
def qgem_protocol():
    """The headline scenario: 1e-14 kg split by 0.1 mm over one second."""
    return from_target(1e-14, 1e-4, 1.0, 0.0)


@pytest.fixture
def short_protocol():
    """Same targets compressed to 0.1 ms, for moderate omega * duration."""
    return from_target(1e-14, 1e-4, 1e-4, 0.0)
