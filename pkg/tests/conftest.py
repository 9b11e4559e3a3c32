import os
import sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest

from fraccontrol.model import NonlocalPoint, NonlocalSpec, heat1d_model
from fraccontrol.scenario import sine_nonlinearity, zero_nonlinearity
from fraccontrol.settings import seed_from_env

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), '..', 'scenarios')


@pytest.fixture
def rng():
    """Seeded generator; FRACCTL_SEED overrides the default seed."""
    return np.random.default_rng(seed_from_env())


@pytest.fixture
def heat1d_preset():
    """Wärmeleitungsbeispiel mit N=6, q=2/3, b=1, pi_set={1,2,3}."""
    model = heat1d_model(6, 2.0 / 3.0, 1.0, (1, 2, 3),
                         y0=[1.0, 0.5, 0.25, 0.0, 0.0, 0.0], yb=[0.2, -0.1, 0.05])
    gspec = NonlocalSpec(0.5, (NonlocalPoint(0.6, 0.1),))
    fspec = sine_nonlinearity(0.5, 6)
    return model, gspec, fspec


@pytest.fixture
def heat1d_linear(heat1d_preset):
    model, _, _ = heat1d_preset
    return model, None, zero_nonlinearity(model.N)


@pytest.fixture
def scenario_path():
    def _path(name):
        return os.path.join(SCENARIO_DIR, name)
    return _path
