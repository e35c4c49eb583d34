"""
Shared fixtures for the FermiSplit test suite
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine.graph_model import BilayerSpec, builtin_graph
from engine.potential import Potential, builtin_potential


@pytest.fixture
def zero():
    return Potential.zero()


@pytest.fixture
def step():
    return builtin_potential('step')


@pytest.fixture
def trig():
    return builtin_potential('trig')


@pytest.fixture
def square_layer():
    return builtin_graph('square_lattice')


@pytest.fixture
def graphene_layer():
    return builtin_graph('graphene_layer')


@pytest.fixture
def graphene_step_zero(step, zero):
    layer = builtin_graph('graphene_layer')
    return BilayerSpec(layer, {'v1': step, 'v2': zero})


@pytest.fixture
def double_square(step, zero):
    def make(c1, c2, ring=None):
        params = {'potential': ring} if ring is not None else {}
        layer = builtin_graph('double_square_7', params)
        return BilayerSpec(layer, {'v1': c1, 'v2': c2})
    return make


@pytest.fixture
def quiet_settings(tmp_path):
    """App settings that keep logs and run statistics inside tmp_path"""
    return {
        'log_file': str(tmp_path / 'logs' / 'run.log'),
        'stats_file': str(tmp_path / 'stats.csv'),
        'workers': 2,
    }
