import math
import numpy as np
import pytest

# Small problem that every harness and command test can solve in well under a second.
SMALL_SPEC = {
    'name': 'small',
    'kind': 'disks',
    'size': 8,
    'intensity_low': 1.0,
    'intensity_high': 100.0,
    'i_max': 50.0,
    'background': 10.0,
    'beta': 0.05,
    'seed': 3,
    'psf_size': 3,
    'psf_sigma': 1.0,
    'max_iter': 20,
    'reference_iter': 200,
    'plot': False,
}

@pytest.fixture(autouse=True)
def bench_dirs(settings, tmp_path):
    settings.DEBLUR_CACHE_DIR = tmp_path / 'cache'
    settings.DEBLUR_OUTPUT_DIR = tmp_path / 'runs'
    # A 200 iteration reference on SMALL_SPEC is not converged; tests that check convergence set their own.
    settings.DEBLUR_REFERENCE_TOLERANCE = math.inf
    return settings

@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

@pytest.fixture
def api_client():
    from rest_framework.test import APIClient
    return APIClient()

@pytest.fixture
def make_spec():
    from bench.config import load_spec
    def do_make_spec(**overrides):
        values = dict(SMALL_SPEC)
        values.update(overrides)
        return load_spec(None, values)
    return do_make_spec
