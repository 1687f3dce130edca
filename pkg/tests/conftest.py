import numpy as np
import pytest

from innerlab.innerfn import InnerModel


def random_centered_blaschke(rng, dmax=6, rmax=0.9, rotate=True):
    """A random centered Blaschke product of degree 2..dmax."""
    d = int(rng.integers(2, dmax + 1))
    zeros = [0j]
    while len(zeros) < d:
        w = rng.uniform(-rmax, rmax) + 1j * rng.uniform(-rmax, rmax)
        if abs(w) < rmax:
            zeros.append(w)
    rot = np.exp(2j * np.pi * rng.uniform()) if rotate else 1.0
    return InnerModel(rotation=rot, zeros=tuple(zeros))


def random_disk_point(rng, rmin=0.05, rmax=0.9):
    r = rng.uniform(rmin, rmax)
    return r * np.exp(2j * np.pi * rng.uniform())


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def deg2():
    return InnerModel.from_zeros(0, 0.5)


@pytest.fixture
def square():
    return InnerModel.power_map(2)
