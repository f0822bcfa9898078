from __future__ import annotations

import os
import sys

import numpy as np
import pytest
from hypothesis import settings, HealthCheck

try:
    import plinv  # noqa: F401
except ImportError:  # running from a checkout: expose src/ under its installed name
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    import src
    for name, module in list(sys.modules.items()):
        if name == 'src' or name.startswith('src.'):
            sys.modules['plinv' + name[3:]] = module

settings.register_profile(
    'plinv',
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=(HealthCheck.too_slow,),
)
settings.load_profile('plinv')

from plinv.degree import PLMap  # noqa: E402
from plinv.fixtures.meshes import grid_mesh_2d, kuhn_mesh_3d  # noqa: E402


@pytest.fixture(scope='session')
def square_mesh():
    return grid_mesh_2d((0.0, 0.0), (1.0, 1.0), 8, 8)


@pytest.fixture(scope='session')
def cube_mesh():
    return kuhn_mesh_3d((0.0,) * 3, (1.0,) * 3, 2)


@pytest.fixture(scope='session')
def identity_square(square_mesh):
    return PLMap.identity(square_mesh)


@pytest.fixture(scope='session')
def identity_cube(cube_mesh):
    return PLMap.identity(cube_mesh)


@pytest.fixture
def rng():
    return np.random.default_rng(np.random.SeedSequence([20240601, 0]))
