import numpy as np
import pytest

from qcharmlab import BarrierSpec, DistanceField, HarmonicMap, build_curve, poisson_extend
from qcharmlab.harmonic import BoundaryCorrespondence


def circle_points(n=64, r=1.0):
    t = 2 * np.pi * np.arange(n) / n
    return r * np.exp(1j * t)


def ellipse_points(a=4 / 3, b=2 / 3, n=64):
    t = 2 * np.pi * np.arange(n) / n
    return a * np.cos(t) + 1j * b * np.sin(t)


@pytest.fixture(scope="session")
def circle():
    return build_curve(circle_points())


@pytest.fixture(scope="session")
def ellipse():
    return build_curve(ellipse_points())


@pytest.fixture(scope="session")
def circle_field(circle):
    return DistanceField(circle)


@pytest.fixture(scope="session")
def ellipse_field(ellipse):
    return DistanceField(ellipse)


@pytest.fixture(scope="session")
def identity(circle):
    return poisson_extend(BoundaryCorrespondence.uniform(circle), 1024)


@pytest.fixture(scope="session")
def affine(ellipse):
    return HarmonicMap.affine(1 / 3, curve=ellipse)


@pytest.fixture(scope="session")
def identity_spec():
    return BarrierSpec(kappa0=1.0, K=1.0)


@pytest.fixture(scope="session")
def affine_spec():
    return BarrierSpec(kappa0=3.0, K=2.0)
