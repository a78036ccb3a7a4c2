import numpy as np
import pytest

from bpcl import bands
from bpcl.kernels import tensor_hilbert
from bpcl.lattice import BoxDomain, MeshFunction

_MEASURED: dict = {}


@pytest.fixture(scope="session")
def measured():
    """Run each seeded sweep group at most once per test session."""

    def get(group: str) -> dict:
        if group not in _MEASURED:
            _MEASURED[group] = bands.measure_group(group)
        return _MEASURED[group]

    return get


@pytest.fixture(scope="session")
def kernel():
    return tensor_hilbert()


@pytest.fixture(scope="session")
def unit_box5():
    return BoxDomain.square(1.0, 5)


@pytest.fixture(scope="session")
def field_box():
    """Box large enough for A = 8 reflections of unit rectangles."""
    return BoxDomain.square(32.0, 8)


def random_mesh(domain, seed, real=False):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(domain.shape)
    if not real:
        vals = vals + 1j * rng.standard_normal(domain.shape)
    return MeshFunction(domain, vals)


def mean_zero_on(domain, rect, seed):
    rng = np.random.default_rng(seed)
    blk = rng.uniform(-1, 1, (rect.I.n_cells, rect.J.n_cells)) + 1j * rng.uniform(
        -1, 1, (rect.I.n_cells, rect.J.n_cells)
    )
    blk -= blk.mean()
    vals = np.zeros(domain.shape, dtype=np.complex128)
    vals[rect.cells] = blk
    return MeshFunction(domain, vals)
